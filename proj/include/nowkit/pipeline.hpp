#pragma once

#include <map>
#include <string>
#include <vector>

#include "nowkit/lstm.hpp"
#include "nowkit/transform.hpp"
#include "nowkit/vintage.hpp"

namespace nowkit {

// Glue shared by selection and evaluation: raw pool -> model-ready columns,
// training sets, fitted models and single-year nowcasts.
//
// Per-variable order: seasonal adjustment (M/Q with two full cycles) -> growth
// -> standardize (fit on the training years) -> align to the monthly grid.

/// Growth series of a raw level series under the given settings.
inline TimeSeries prepare_growth(const TimeSeries& raw, const TransformSettings& settings) {
    if (settings.seasonal_adjust && raw.frequency != Frequency::Annual) {
        try {
            return growth_rate(seasonal_adjust(raw), settings.growth);
        } catch (const Error& e) {
            if (e.code() != Errc::InsufficientData) throw;
        }
    }
    return growth_rate(raw, settings.growth);
}

inline MonthGrid grid_of(const TimeSeries& s) {
    if (s.empty()) throw Error(Errc::EmptyOverlap, s.id + ": empty series");
    return {period_to_month(s.observations.front().period), period_to_month(s.observations.back().period)};
}

struct PreparedColumn {
    AlignedColumn column;
    StandardizationParams params;
};

inline PreparedColumn prepare_column(const TimeSeries& raw, const TransformSettings& settings, YearRange fit_years) {
    const TimeSeries g = prepare_growth(raw, settings);
    auto params = standardize_fit(g, fit_years);
    return {align_to_monthly(standardize_apply(g, params), grid_of(g)), params};
}

inline AlignedColumn prepare_column(const TimeSeries& raw, const TransformSettings& settings,
                                    const StandardizationParams& params) {
    const TimeSeries g = prepare_growth(raw, settings);
    return align_to_monthly(standardize_apply(g, params), grid_of(g));
}

/// Year -> growth of an annual target. Target growth is left unstandardized.
inline std::map<int, double> target_growths(const TimeSeries& target, GrowthKind kind = GrowthKind::Simple) {
    if (target.frequency != Frequency::Annual)
        throw Error(Errc::ConfigError, target.id + ": nowcast target must be an annual series");
    std::map<int, double> out;
    for (const auto& o : growth_rate(target, kind).observations) out.emplace(o.period.year, o.value);
    return out;
}

struct ModelSpec {
    std::string target_id;
    std::vector<std::string> variables;
    Hyperparams hyper;
    TransformSettings transform;
};

/// Full-data windows paired with target growth for each year that has one.
inline std::vector<Sample> training_samples(std::span<const AlignedColumn> columns, const std::map<int, double>& growths,
                                            YearRange years, int n_timesteps) {
    std::vector<Sample> out;
    for (int y = years.first; y <= years.last; ++y) {
        auto it = growths.find(y);
        if (it == growths.end()) continue;
        out.push_back({build_design_matrix(columns, y, n_timesteps, nullptr), it->second});
    }
    return out;
}

/// Standardization is fitted on `train_years` only.
inline TrainedModel fit_model(const SeriesPool& pool, const ModelSpec& spec, YearRange train_years) {
    if (spec.variables.empty()) throw Error(Errc::ConfigError, "model needs at least one variable");
    std::vector<AlignedColumn> columns;
    std::vector<StandardizationParams> params;
    for (const auto& id : spec.variables) {
        auto prepared = prepare_column(get_series(pool, id), spec.transform, train_years);
        columns.push_back(std::move(prepared.column));
        params.push_back(prepared.params);
    }
    const auto growths = target_growths(get_series(pool, spec.target_id), spec.transform.growth);
    const auto samples = training_samples(columns, growths, train_years, spec.hyper.n_timesteps);
    TrainedModel model = train(samples, spec.hyper);
    model.standardization = std::move(params);
    model.target_id = spec.target_id;
    model.train_years = train_years;
    model.transform = spec.transform;
    return model;
}

/// Columns for a fitted model, transformed with its stored standardization.
inline std::vector<AlignedColumn> model_columns(const TrainedModel& model, const SeriesPool& pool) {
    std::vector<AlignedColumn> out;
    for (const auto& p : model.standardization) out.push_back(prepare_column(get_series(pool, p.variable_id), model.transform, p));
    return out;
}

/// Window for one target year; full data when `snapshot` is null.
inline DesignMatrix model_window(const TrainedModel& model, std::span<const AlignedColumn> columns, int year,
                                 const DatasetSnapshot* snapshot) {
    return build_design_matrix(columns, year, model.hyper.n_timesteps, snapshot, {.allow_all_missing = snapshot != nullptr});
}

inline double nowcast(const TrainedModel& model, std::span<const AlignedColumn> columns, int year,
                      const DatasetSnapshot* snapshot) {
    return predict(model, model_window(model, columns, year, snapshot));
}

}  // namespace nowkit
