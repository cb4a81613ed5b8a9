#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nowkit/error.hpp"

namespace nowkit {

enum class Frequency { Monthly, Quarterly, Annual };

constexpr int periods_per_year(Frequency f) noexcept {
    switch (f) {
        case Frequency::Monthly: return 12;
        case Frequency::Quarterly: return 4;
        case Frequency::Annual: return 1;
    }
    return 1;
}

constexpr char frequency_code(Frequency f) noexcept {
    switch (f) {
        case Frequency::Monthly: return 'M';
        case Frequency::Quarterly: return 'Q';
        case Frequency::Annual: return 'A';
    }
    return '?';
}

/// Months since year 0: index = 12 * year + (month - 1).
struct MonthIndex {
    int value = 0;

    static constexpr MonthIndex of(int year, int month) noexcept { return {12 * year + (month - 1)}; }
    constexpr int year() const noexcept { return value >= 0 ? value / 12 : (value - 11) / 12; }
    constexpr int month() const noexcept { return value - 12 * year() + 1; }

    constexpr MonthIndex operator+(int months) const noexcept { return {value + months}; }
    constexpr MonthIndex operator-(int months) const noexcept { return {value - months}; }
    constexpr int operator-(MonthIndex other) const noexcept { return value - other.value; }
    constexpr auto operator<=>(const MonthIndex&) const = default;
};

struct Period {
    int year = 0;
    int subperiod = 1;
    Frequency frequency = Frequency::Annual;

    constexpr bool valid() const noexcept {
        return subperiod >= 1 && subperiod <= periods_per_year(frequency);
    }

    /// Ordering within one frequency; comparing across frequencies is meaningless.
    constexpr auto operator<=>(const Period& o) const noexcept {
        if (auto c = year <=> o.year; c != 0) return c;
        return subperiod <=> o.subperiod;
    }
    constexpr bool operator==(const Period& o) const noexcept {
        return year == o.year && subperiod == o.subperiod && frequency == o.frequency;
    }

    constexpr Period next() const noexcept {
        if (subperiod == periods_per_year(frequency)) return {year + 1, 1, frequency};
        return {year, subperiod + 1, frequency};
    }
    constexpr Period prev() const noexcept {
        if (subperiod == 1) return {year - 1, periods_per_year(frequency), frequency};
        return {year, subperiod - 1, frequency};
    }

    std::string to_string() const {
        switch (frequency) {
            case Frequency::Monthly: {
                std::string mm = std::to_string(subperiod);
                if (mm.size() < 2) mm.insert(mm.begin(), '0');
                return std::to_string(year) + "-" + mm;
            }
            case Frequency::Quarterly: return std::to_string(year) + "-Q" + std::to_string(subperiod);
            case Frequency::Annual: return std::to_string(year);
        }
        return {};
    }
};

/// Last calendar month covered by the period.
constexpr MonthIndex period_to_month(const Period& p) noexcept {
    const int months_per_period = 12 / periods_per_year(p.frequency);
    return MonthIndex::of(p.year, p.subperiod * months_per_period);
}

/// Ordinal position of a period on its own frequency's axis.
constexpr long period_ordinal(const Period& p) noexcept {
    return static_cast<long>(p.year) * periods_per_year(p.frequency) + (p.subperiod - 1);
}

constexpr bool consecutive(const Period& a, const Period& b) noexcept {
    return a.frequency == b.frequency && period_ordinal(b) - period_ordinal(a) == 1;
}

/// Inclusive range of calendar years.
struct YearRange {
    int first = 0;
    int last = -1;

    constexpr bool contains(int year) const noexcept { return year >= first && year <= last; }
    constexpr int length() const noexcept { return last >= first ? last - first + 1 : 0; }
    constexpr bool operator==(const YearRange&) const = default;
};

struct Observation {
    Period period;
    double value = 0.0;
};

struct PublicationSchedule {
    int lag_months = 0;

    constexpr MonthIndex publication_month(const Period& p) const noexcept {
        return period_to_month(p) + lag_months;
    }
};

/// Value type; treat as immutable once built. Missing data = absent periods.
struct TimeSeries {
    std::string id;
    Frequency frequency = Frequency::Annual;
    std::vector<Observation> observations;
    PublicationSchedule schedule;

    std::size_t size() const noexcept { return observations.size(); }
    bool empty() const noexcept { return observations.empty(); }

    const Observation* find(const Period& p) const noexcept {
        for (const auto& o : observations)
            if (o.period == p) return &o;
        return nullptr;
    }
};

inline std::size_t observation_count(const TimeSeries& s) noexcept { return s.observations.size(); }

namespace violation {
struct UnsortedPeriods { Period before; Period after; };
struct DuplicatePeriod { Period period; };
struct FrequencyMismatch { Period period; };
struct InvalidPeriod { Period period; };
struct NonFiniteValue { Period period; };
struct NegativeLag { int lag_months; };
}  // namespace violation

using Violation = std::variant<violation::UnsortedPeriods, violation::DuplicatePeriod,
                               violation::FrequencyMismatch, violation::InvalidPeriod,
                               violation::NonFiniteValue, violation::NegativeLag>;

inline std::string describe(const Violation& v) {
    struct {
        std::string operator()(const violation::UnsortedPeriods& x) const {
            return "UnsortedPeriods(" + x.before.to_string() + " before " + x.after.to_string() + ")";
        }
        std::string operator()(const violation::DuplicatePeriod& x) const {
            return "DuplicatePeriod(" + x.period.to_string() + ")";
        }
        std::string operator()(const violation::FrequencyMismatch& x) const {
            return "FrequencyMismatch(" + x.period.to_string() + ")";
        }
        std::string operator()(const violation::InvalidPeriod& x) const {
            return "InvalidPeriod(" + std::to_string(x.period.year) + "/" + std::to_string(x.period.subperiod) + ")";
        }
        std::string operator()(const violation::NonFiniteValue& x) const {
            return "NonFiniteValue(" + x.period.to_string() + ")";
        }
        std::string operator()(const violation::NegativeLag& x) const {
            return "NegativeLag(" + std::to_string(x.lag_months) + ")";
        }
    } visitor;
    return std::visit(visitor, v);
}

/// Every invariant violation of the series; empty means ok.
inline std::vector<Violation> validate_series(const TimeSeries& s) {
    std::vector<Violation> out;
    if (s.schedule.lag_months < 0) out.push_back(violation::NegativeLag{s.schedule.lag_months});
    const Observation* prev = nullptr;
    for (const auto& o : s.observations) {
        if (o.period.frequency != s.frequency) {
            out.push_back(violation::FrequencyMismatch{o.period});
        } else if (!o.period.valid()) {
            out.push_back(violation::InvalidPeriod{o.period});
        }
        if (!std::isfinite(o.value)) out.push_back(violation::NonFiniteValue{o.period});
        if (prev != nullptr && prev->period.frequency == o.period.frequency) {
            if (prev->period == o.period)
                out.push_back(violation::DuplicatePeriod{o.period});
            else if (o.period < prev->period)
                out.push_back(violation::UnsortedPeriods{prev->period, o.period});
        }
        prev = &o;
    }
    return out;
}

/// Throws ValidationError naming the first violation.
inline void require_valid(const TimeSeries& s) {
    auto v = validate_series(s);
    if (!v.empty()) throw Error(Errc::ValidationError, s.id + ": " + describe(v.front()));
}

}  // namespace nowkit
