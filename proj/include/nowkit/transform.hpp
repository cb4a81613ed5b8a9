#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nowkit/error.hpp"
#include "nowkit/series.hpp"
#include "nowkit/vintage.hpp"

namespace nowkit {

enum class GrowthKind { Simple, Log };

/// Period-over-period growth for every pair of consecutive periods in `s`.
/// The output is stamped with the later period of each pair.
inline TimeSeries growth_rate(const TimeSeries& s, GrowthKind kind = GrowthKind::Simple) {
    TimeSeries out{s.id, s.frequency, {}, s.schedule};
    for (std::size_t i = 1; i < s.observations.size(); ++i) {
        const auto& prev = s.observations[i - 1];
        const auto& cur = s.observations[i];
        if (!consecutive(prev.period, cur.period)) continue;
        if (prev.value <= 0.0)
            throw Error(Errc::NonPositiveBase, s.id + " at " + prev.period.to_string());
        if (kind == GrowthKind::Log && cur.value <= 0.0)
            throw Error(Errc::NonPositiveBase, s.id + " at " + cur.period.to_string());
        const double g = kind == GrowthKind::Simple ? cur.value / prev.value - 1.0
                                                    : std::log(cur.value / prev.value);
        out.observations.push_back({cur.period, g});
    }
    if (out.observations.empty())
        throw Error(Errc::InsufficientData, s.id + ": no consecutive pair of periods");
    return out;
}

/// Inverse of simple growth: l_0 = initial, l_t = l_{t-1} (1 + g_t).
inline std::vector<double> reconstruct_level(double initial_level, std::span<const double> growths) {
    std::vector<double> levels;
    levels.reserve(growths.size() + 1);
    levels.push_back(initial_level);
    for (double g : growths) levels.push_back(levels.back() * (1.0 + g));
    return levels;
}

/// Classical additive decomposition. Trend is a centred moving average spanning
/// one cycle (2xP average for even P); seasonal indices are per-subperiod means
/// of value - trend, recentred to sum to zero, then subtracted from the input.
inline TimeSeries seasonal_adjust(const TimeSeries& s) {
    if (s.frequency == Frequency::Annual)
        throw Error(Errc::NotApplicable, s.id + ": annual series carry no seasonal component");
    const int period = periods_per_year(s.frequency);
    const int half = period / 2;

    int longest_run = s.observations.empty() ? 0 : 1;
    for (std::size_t i = 1, run = 1; i < s.observations.size(); ++i) {
        run = consecutive(s.observations[i - 1].period, s.observations[i].period) ? run + 1 : 1;
        longest_run = std::max(longest_run, static_cast<int>(run));
    }
    if (longest_run < 2 * period)
        throw Error(Errc::InsufficientData, s.id + ": seasonal adjustment needs two complete consecutive cycles");

    std::map<long, double> by_ordinal;
    for (const auto& o : s.observations) by_ordinal.emplace(period_ordinal(o.period), o.value);

    std::vector<double> sums(period, 0.0);
    std::vector<int> counts(period, 0);
    for (const auto& o : s.observations) {
        const long at = period_ordinal(o.period);
        double trend = 0.0;
        bool complete = true;
        for (int k = -half; k <= half && complete; ++k) {
            auto it = by_ordinal.find(at + k);
            if (it == by_ordinal.end()) {
                complete = false;
                break;
            }
            const double w = (period % 2 == 0 && (k == -half || k == half)) ? 0.5 : 1.0;
            trend += w * it->second;
        }
        if (!complete) continue;
        trend /= period;
        sums[o.period.subperiod - 1] += o.value - trend;
        counts[o.period.subperiod - 1] += 1;
    }

    std::vector<double> index(period);
    double mean = 0.0;
    for (int j = 0; j < period; ++j) {
        if (counts[j] == 0)
            throw Error(Errc::InsufficientData, s.id + ": no detrended value for subperiod " + std::to_string(j + 1));
        index[j] = sums[j] / counts[j];
        mean += index[j];
    }
    mean /= period;
    for (double& v : index) v -= mean;

    TimeSeries out{s.id, s.frequency, {}, s.schedule};
    out.observations.reserve(s.observations.size());
    for (const auto& o : s.observations) out.observations.push_back({o.period, o.value - index[o.period.subperiod - 1]});
    return out;
}

struct StandardizationParams {
    std::string variable_id;
    double mean = 0.0;
    double sd = 1.0;
    YearRange fitted_on;
};

/// Mean and population sd over observations whose year lies in `fit_range`.
inline StandardizationParams standardize_fit(const TimeSeries& s, YearRange fit_range) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& o : s.observations)
        if (fit_range.contains(o.period.year)) {
            sum += o.value;
            ++n;
        }
    if (n < 2) throw Error(Errc::InsufficientData, s.id + ": fewer than 2 observations in fit range");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& o : s.observations)
        if (fit_range.contains(o.period.year)) ss += (o.value - mean) * (o.value - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw Error(Errc::ZeroVariance, s.id);
    return {s.id, mean, sd, fit_range};
}

inline TimeSeries standardize_apply(const TimeSeries& s, const StandardizationParams& params) {
    TimeSeries out{s.id, s.frequency, {}, s.schedule};
    out.observations.reserve(s.observations.size());
    for (const auto& o : s.observations) out.observations.push_back({o.period, (o.value - params.mean) / params.sd});
    return out;
}

/// Inclusive monthly grid.
struct MonthGrid {
    MonthIndex first;
    MonthIndex last;

    int size() const noexcept { return last - first + 1; }
    bool contains(MonthIndex m) const noexcept { return m >= first && m <= last; }
};

/// One variable on a contiguous monthly grid; absent cells are std::nullopt.
struct AlignedColumn {
    std::string variable_id;
    MonthIndex grid_start;
    std::vector<std::optional<double>> values;

    MonthIndex grid_end() const noexcept { return grid_start + (static_cast<int>(values.size()) - 1); }

    std::optional<double> at(MonthIndex m) const {
        const int i = m - grid_start;
        if (i < 0 || i >= static_cast<int>(values.size())) return std::nullopt;
        return values[static_cast<std::size_t>(i)];
    }

    std::size_t missing_count() const {
        return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::nullopt));
    }
};

/// Places each observation at the last month of its period.
inline AlignedColumn align_to_monthly(const TimeSeries& s, MonthGrid grid) {
    AlignedColumn col{s.id, grid.first, std::vector<std::optional<double>>(static_cast<std::size_t>(std::max(grid.size(), 0)))};
    bool any = false;
    for (const auto& o : s.observations) {
        const MonthIndex m = period_to_month(o.period);
        if (!grid.contains(m)) continue;
        col.values[static_cast<std::size_t>(m - grid.first)] = o.value;
        any = true;
    }
    if (!any) throw Error(Errc::EmptyOverlap, s.id + ": no observation falls on the grid");
    return col;
}

/// Replaces missing cells by 0, the training mean of a standardized column.
inline AlignedColumn fill_missing(const AlignedColumn& col) {
    AlignedColumn out = col;
    bool any = false;
    for (auto& v : out.values) {
        if (v) {
            any = true;
        } else {
            v = 0.0;
        }
    }
    if (!any) throw Error(Errc::AllMissing, col.variable_id);
    return out;
}

/// Fixed window of monthly rows ending at December of the target year.
struct DesignMatrix {
    int target_year = 0;
    int n_timesteps = 0;
    std::vector<std::string> variable_ids;
    std::vector<double> values;          // row-major, n_timesteps x n_vars
    std::vector<std::uint8_t> observed;  // 1 where the cell held a published value

    std::size_t n_vars() const noexcept { return variable_ids.size(); }
    double operator()(int row, std::size_t var) const {
        return values[static_cast<std::size_t>(row) * n_vars() + var];
    }
    std::size_t filled_cells() const {
        return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), std::uint8_t{0}));
    }
    MonthIndex first_month() const noexcept { return MonthIndex::of(target_year, 12) - (n_timesteps - 1); }

    bool operator==(const DesignMatrix&) const = default;
};

struct WindowOptions {
    /// When every column is unpublished, return the all-zero (all-mean) window
    /// instead of throwing AllMissing.
    bool allow_all_missing = false;
};

/// Builds the window; a cell is observed only if present in the column and, when
/// a snapshot is given, published at the snapshot's vintage.
inline DesignMatrix build_design_matrix(std::span<const AlignedColumn> columns, int target_year, int n_timesteps,
                                        const DatasetSnapshot* snapshot, WindowOptions options = {}) {
    if (n_timesteps < 1) throw Error(Errc::ShapeMismatch, "n_timesteps must be >= 1");
    DesignMatrix dm;
    dm.target_year = target_year;
    dm.n_timesteps = n_timesteps;
    const std::size_t n_vars = columns.size();
    for (const auto& c : columns) dm.variable_ids.push_back(c.variable_id);
    dm.values.assign(static_cast<std::size_t>(n_timesteps) * n_vars, 0.0);
    dm.observed.assign(dm.values.size(), 0);

    const MonthIndex first = dm.first_month();
    bool any_column = false;
    for (std::size_t v = 0; v < n_vars; ++v) {
        std::optional<MonthIndex> cutoff;
        bool unpublished = false;
        if (snapshot != nullptr) {
            cutoff = snapshot->last_available_month(columns[v].variable_id);
            unpublished = !cutoff.has_value();
        }
        AlignedColumn window{columns[v].variable_id, first, std::vector<std::optional<double>>(static_cast<std::size_t>(n_timesteps))};
        for (int r = 0; r < n_timesteps; ++r) {
            const MonthIndex m = first + r;
            if (unpublished || (cutoff && m > *cutoff)) continue;
            window.values[static_cast<std::size_t>(r)] = columns[v].at(m);
        }
        if (window.missing_count() == window.values.size()) continue;  // stays zero
        any_column = true;
        const AlignedColumn filled = fill_missing(window);
        for (int r = 0; r < n_timesteps; ++r) {
            const std::size_t cell = static_cast<std::size_t>(r) * n_vars + v;
            dm.values[cell] = *filled.values[static_cast<std::size_t>(r)];
            dm.observed[cell] = window.values[static_cast<std::size_t>(r)].has_value() ? 1 : 0;
        }
    }
    if (!any_column && !options.allow_all_missing)
        throw Error(Errc::AllMissing, "no variable has a published value in the window for " + std::to_string(target_year));
    return dm;
}

}  // namespace nowkit
