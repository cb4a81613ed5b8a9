#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nowkit/format.hpp"
#include "nowkit/pipeline.hpp"
#include "nowkit/vintage.hpp"

namespace nowkit {

struct SplitSpec {
    YearRange train;
    YearRange validation;
    YearRange test;

    void validate() const {
        if (train.length() == 0 || validation.length() == 0 || test.length() == 0)
            throw Error(Errc::ConfigError, "split ranges must be non-empty");
        if (!(train.last < validation.first && validation.last < test.first))
            throw Error(Errc::ConfigError, "splits must be disjoint and ordered train < validation < test");
    }
    /// Span the final model is refit on before scoring the test years.
    YearRange train_through_validation() const noexcept { return {train.first, validation.last}; }
    bool operator==(const SplitSpec&) const = default;
};

/// Train 2001-2011, validate 2012-2014, test 2015-2018.
inline SplitSpec default_splits() { return {{2001, 2011}, {2012, 2014}, {2015, 2018}}; }

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

namespace detail {
inline void check_pair(std::span<const double> preds, std::span<const double> actuals) {
    if (preds.size() != actuals.size()) throw Error(Errc::LengthMismatch, "predictions vs actuals");
    if (preds.empty()) throw Error(Errc::EmptyInput, "no predictions to score");
}
}  // namespace detail

inline double mae(std::span<const double> preds, std::span<const double> actuals) {
    detail::check_pair(preds, actuals);
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - actuals[i]);
    return s / static_cast<double>(preds.size());
}

inline double rmse(std::span<const double> preds, std::span<const double> actuals) {
    detail::check_pair(preds, actuals);
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - actuals[i]) * (preds[i] - actuals[i]);
    return std::sqrt(s / static_cast<double>(preds.size()));
}

inline Metrics score(std::span<const double> preds, std::span<const double> actuals) {
    return {mae(preds, actuals), rmse(preds, actuals), preds.size()};
}

struct BaselinePredictions {
    std::vector<int> years;
    std::vector<double> persistence;      // previous year's actual growth
    std::vector<double> historical_mean;  // mean of all growths strictly before the year
};

inline BaselinePredictions naive_baselines(const std::map<int, double>& growths, YearRange years) {
    BaselinePredictions out;
    for (int y = years.first; y <= years.last; ++y) {
        auto prev = growths.find(y - 1);
        if (prev == growths.end())
            throw Error(Errc::InsufficientHistory, "no growth for " + std::to_string(y - 1));
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [yr, g] : growths) {
            if (yr >= y) break;
            sum += g;
            ++n;
        }
        out.years.push_back(y);
        out.persistence.push_back(prev->second);
        out.historical_mean.push_back(sum / static_cast<double>(n));
    }
    return out;
}

inline BaselinePredictions naive_baselines(const TimeSeries& target, YearRange years) {
    return naive_baselines(target_growths(target), years);
}

/// Vintage offsets in months relative to December of the target year.
using VintageOffsets = std::vector<int>;

inline VintageOffsets checkpoint_vintage_offsets() { return {std::begin(checkpoint_offsets), std::end(checkpoint_offsets)}; }
inline VintageOffsets trace_vintage_offsets() {
    VintageOffsets out;
    for (int k = -11; k <= 7; ++k) out.push_back(k);
    return out;
}

inline std::string offset_label(int offset) {
    return offset >= 0 ? "T+" + std::to_string(offset) : "T" + std::to_string(offset);
}

struct BacktestPoint {
    std::string split;
    int year = 0;
    std::string vintage;  // YYYY-MM, or "full"
    double prediction = 0.0;
    double actual = 0.0;
    std::size_t filled_cells = 0;
};

struct MetricsRow {
    std::string split;
    std::string vintage;  // offset label (T+6) or "full"
    Metrics metrics;
};

struct BacktestReport {
    std::vector<MetricsRow> rows;
    std::vector<BacktestPoint> points;

    const MetricsRow* find(std::string_view split, std::string_view vintage) const {
        for (const auto& r : rows)
            if (r.split == split && r.vintage == vintage) return &r;
        return nullptr;
    }
};

namespace detail {

inline void score_split(const std::string& split, const TrainedModel& model, std::shared_ptr<const SeriesPool> pool,
                        YearRange years, const std::map<int, double>& actuals, const VintageOffsets& offsets,
                        BacktestReport& report) {
    const auto columns = model_columns(model, *pool);
    std::vector<double> full_p, acts;
    std::vector<std::vector<double>> by_offset(offsets.size());
    for (int y = years.first; y <= years.last; ++y) {
        auto it = actuals.find(y);
        if (it == actuals.end()) continue;
        const auto full_window = model_window(model, columns, y, nullptr);
        const double p = predict(model, full_window);
        full_p.push_back(p);
        acts.push_back(it->second);
        report.points.push_back({split, y, "full", p, it->second, full_window.filled_cells()});
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            const VintageDate v = VintageDate::from(MonthIndex::of(y, 12) + offsets[k]);
            const auto snap = snapshot_at(pool, v);
            const auto window = model_window(model, columns, y, &snap);
            const double pv = predict(model, window);
            by_offset[k].push_back(pv);
            report.points.push_back({split, y, v.to_string(), pv, it->second, window.filled_cells()});
        }
    }
    if (acts.empty()) throw Error(Errc::EmptyInput, "no target values in the " + split + " years");
    for (std::size_t k = 0; k < offsets.size(); ++k)
        report.rows.push_back({split, offset_label(offsets[k]), score(by_offset[k], acts)});
    report.rows.push_back({split, "full", score(full_p, acts)});
}

}  // namespace detail

/// Validation years are scored with a model fit on the training years; test
/// years with a model refit on training + validation years.
inline BacktestReport backtest(const ModelSpec& spec, const SplitSpec& splits, std::shared_ptr<const SeriesPool> pool,
                               const VintageOffsets& offsets) {
    splits.validate();
    const auto actuals = target_growths(get_series(*pool, spec.target_id), spec.transform.growth);
    BacktestReport report;
    const TrainedModel validation_model = fit_model(*pool, spec, splits.train);
    detail::score_split("validation", validation_model, pool, splits.validation, actuals, offsets, report);
    const TrainedModel test_model = fit_model(*pool, spec, splits.train_through_validation());
    detail::score_split("test", test_model, pool, splits.test, actuals, offsets, report);
    return report;
}

struct TracePoint {
    VintageDate vintage;
    double growth = 0.0;
    double level = 0.0;
};

struct NowcastTrace {
    int target_year = 0;
    std::vector<TracePoint> points;
};

/// Implied level at a vintage: the latest published target level L_a (a < target
/// year), compounded with nowcast growths for years a+1..target made from the
/// same vintage. When a = target-1 this is L_a * (1 + growth).
inline double implied_level(const TrainedModel& model, std::span<const AlignedColumn> columns,
                            const DatasetSnapshot& snap, int target_year, double target_growth) {
    const auto available = snap.available(model.target_id);
    const Observation* anchor = nullptr;
    for (const auto& o : available.observations)
        if (o.period.year < target_year) anchor = &o;
    if (anchor == nullptr)
        throw Error(Errc::InsufficientHistory, "no published level of " + model.target_id + " before " +
                                                   std::to_string(target_year) + " at " + snap.vintage().to_string());
    double level = anchor->value;
    for (int y = anchor->period.year + 1; y < target_year; ++y) level *= 1.0 + nowcast(model, columns, y, &snap);
    return level * (1.0 + target_growth);
}

inline NowcastTrace nowcast_trace(const TrainedModel& model, std::shared_ptr<const SeriesPool> pool, int target_year,
                                  const std::vector<VintageDate>& schedule) {
    const auto columns = model_columns(model, *pool);
    NowcastTrace trace{target_year, {}};
    for (const auto& v : schedule) {
        const auto snap = snapshot_at(pool, v);
        const double g = nowcast(model, columns, target_year, &snap);
        trace.points.push_back({v, g, implied_level(model, columns, snap, target_year, g)});
    }
    return trace;
}

inline NowcastTrace nowcast_trace(const TrainedModel& model, std::shared_ptr<const SeriesPool> pool, int target_year) {
    return nowcast_trace(model, std::move(pool), target_year, trace_schedule(target_year));
}

/// Metrics CSV: split,vintage,mae,rmse,n
inline std::string metrics_csv(const BacktestReport& report) {
    std::string out = "split,vintage,mae,rmse,n\n";
    for (const auto& r : report.rows)
        out += r.split + "," + r.vintage + "," + format_double(r.metrics.mae) + "," + format_double(r.metrics.rmse) + "," +
               std::to_string(r.metrics.n) + "\n";
    return out;
}

}  // namespace nowkit
