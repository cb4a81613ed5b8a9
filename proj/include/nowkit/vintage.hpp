#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nowkit/error.hpp"
#include "nowkit/series.hpp"

namespace nowkit {

/// Calendar month at which a dataset is observed. Rendered as YYYY-MM.
struct VintageDate {
    int year = 0;
    int month = 1;

    constexpr MonthIndex month_index() const noexcept { return MonthIndex::of(year, month); }
    static constexpr VintageDate from(MonthIndex m) noexcept { return {m.year(), m.month()}; }

    constexpr auto operator<=>(const VintageDate&) const = default;

    std::string to_string() const {
        std::string mm = std::to_string(month);
        if (mm.size() < 2) mm.insert(mm.begin(), '0');
        return std::to_string(year) + "-" + mm;
    }

    static VintageDate parse(std::string_view text) {
        auto bad = [&] { return Error(Errc::ParseError, "invalid vintage '" + std::string(text) + "', expected YYYY-MM"); };
        if (text.size() != 7 || text[4] != '-') throw bad();
        int y = 0, m = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            if (text[i] < '0' || text[i] > '9') throw bad();
            y = y * 10 + (text[i] - '0');
        }
        for (std::size_t i = 5; i < 7; ++i) {
            if (text[i] < '0' || text[i] > '9') throw bad();
            m = m * 10 + (text[i] - '0');
        }
        if (m < 1 || m > 12) throw bad();
        return {y, m};
    }
};

using SeriesPool = std::vector<TimeSeries>;

inline const TimeSeries* find_series(const SeriesPool& pool, std::string_view id) {
    for (const auto& s : pool)
        if (s.id == id) return &s;
    return nullptr;
}

inline const TimeSeries& get_series(const SeriesPool& pool, std::string_view id) {
    if (const auto* s = find_series(pool, id)) return *s;
    throw Error(Errc::UnknownSeries, "series '" + std::string(id) + "' not in pool");
}

/// The pool as it would have looked at `vintage`. Immutable; shares the pool.
class DatasetSnapshot {
public:
    DatasetSnapshot(std::shared_ptr<const SeriesPool> pool, VintageDate vintage)
        : pool_(std::move(pool)), vintage_(vintage) {
        for (const auto& s : *pool_) {
            std::optional<Period> cutoff;
            for (const auto& o : s.observations)
                if (s.schedule.publication_month(o.period) <= vintage_.month_index()) cutoff = o.period;
            cutoffs_.emplace(s.id, cutoff);
        }
    }

    VintageDate vintage() const noexcept { return vintage_; }
    const SeriesPool& pool() const noexcept { return *pool_; }

    /// Last published period of the series, if any.
    std::optional<Period> cutoff(std::string_view id) const {
        auto it = cutoffs_.find(std::string(id));
        if (it == cutoffs_.end()) return std::nullopt;
        return it->second;
    }

    /// Last month whose aligned value is published; nullopt if nothing is.
    std::optional<MonthIndex> last_available_month(std::string_view id) const {
        auto c = cutoff(id);
        if (!c) return std::nullopt;
        return period_to_month(*c);
    }

    bool published(std::string_view id, const Period& p) const {
        auto c = cutoff(id);
        return c.has_value() && !(*c < p);
    }

    /// The series truncated to what was published at the vintage.
    TimeSeries available(std::string_view id) const {
        const auto& s = get_series(*pool_, id);
        TimeSeries out{s.id, s.frequency, {}, s.schedule};
        for (const auto& o : s.observations)
            if (s.schedule.publication_month(o.period) <= vintage_.month_index()) out.observations.push_back(o);
        return out;
    }

private:
    std::shared_ptr<const SeriesPool> pool_;
    VintageDate vintage_;
    std::map<std::string, std::optional<Period>, std::less<>> cutoffs_;
};

inline DatasetSnapshot snapshot_at(std::shared_ptr<const SeriesPool> pool, VintageDate vintage) {
    return DatasetSnapshot(std::move(pool), vintage);
}

/// Monthly sweep from January of the target year to July of the next: 19 vintages.
inline std::vector<VintageDate> trace_schedule(int target_year) {
    std::vector<VintageDate> out;
    const MonthIndex first = MonthIndex::of(target_year, 1);
    const MonthIndex last = MonthIndex::of(target_year + 1, 7);
    for (MonthIndex m = first; m <= last; m = m + 1) out.push_back(VintageDate::from(m));
    return out;
}

/// End of the target period, then six and ten months after it.
inline std::vector<VintageDate> checkpoint_schedule(int target_year) {
    const MonthIndex end = MonthIndex::of(target_year, 12);
    return {VintageDate::from(end), VintageDate::from(end + 6), VintageDate::from(end + 10)};
}

/// Offsets (months after December of the target year) of checkpoint_schedule.
inline constexpr int checkpoint_offsets[] = {0, 6, 10};

}  // namespace nowkit
