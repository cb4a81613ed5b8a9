#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nowkit/error.hpp"
#include "nowkit/series.hpp"

namespace nowkit::feasibility {

/// Ordered Unlikely < Likely < HighlyLikely.
enum class Label { Unlikely = 0, Likely = 1, HighlyLikely = 2 };

constexpr std::string_view to_string(Label l) noexcept {
    switch (l) {
        case Label::Unlikely: return "Unlikely";
        case Label::Likely: return "Likely";
        case Label::HighlyLikely: return "Highly likely";
    }
    return "";
}

inline Label parse_label(std::string_view s) {
    if (s == "Highly likely") return Label::HighlyLikely;
    if (s == "Likely") return Label::Likely;
    if (s == "Unlikely") return Label::Unlikely;
    throw Error(Errc::UnknownLabel, "'" + std::string(s) + "'");
}

constexpr Label min(Label a, Label b) noexcept { return a < b ? a : b; }

enum class Periodicity { Monthly, Quarterly, Annual, Irregular };
enum class Availability { Consistent, VariesByRegion, Sporadic, IrregularInterval };

enum class Flag : unsigned {
    BinaryPolicy = 1u << 0,
    BudgetType = 1u << 1,
    ElectionBased = 1u << 2,
    StructuralConstant = 1u << 3,
    DisasterEvent = 1u << 4,
    NoLag = 1u << 5,
};

inline constexpr std::array<std::pair<Flag, std::string_view>, 6> flag_names{{
    {Flag::BinaryPolicy, "BinaryPolicy"},
    {Flag::BudgetType, "BudgetType"},
    {Flag::ElectionBased, "ElectionBased"},
    {Flag::StructuralConstant, "StructuralConstant"},
    {Flag::DisasterEvent, "DisasterEvent"},
    {Flag::NoLag, "NoLag"},
}};

class FlagSet {
public:
    constexpr FlagSet() = default;
    constexpr FlagSet(std::initializer_list<Flag> flags) {
        for (Flag f : flags) bits_ |= static_cast<unsigned>(f);
    }
    constexpr bool has(Flag f) const noexcept { return (bits_ & static_cast<unsigned>(f)) != 0; }
    constexpr void set(Flag f) noexcept { bits_ |= static_cast<unsigned>(f); }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr bool operator==(const FlagSet&) const = default;

private:
    unsigned bits_ = 0;
};

struct IndicatorRecord {
    std::string indicator_code;
    std::string name;
    std::string unit;
    int tier = 1;
    Periodicity periodicity = Periodicity::Annual;
    std::string data_availability;  // as published, e.g. "2000-2019"
    int observation_count = 0;
    std::string publication_lag;    // as published, e.g. "Likely 2 years"
    std::optional<int> lag_months;  // nullopt = unknown
    Availability availability = Availability::Consistent;
    FlagSet flags;
    Label catalog_explanatory = Label::HighlyLikely;
    Label catalog_feasibility = Label::HighlyLikely;
    std::string data_source;
    std::string notes;
};

struct RuleStep {
    std::string rule_id;
    bool fired = false;
    std::optional<Label> result;  // label assigned or cap applied when fired
};

using RuleTrace = std::vector<RuleStep>;

struct Classification {
    Label label = Label::Unlikely;
    RuleTrace trace;
};

struct CascadeParams {
    int min_obs = 10;
    int min_lag_monthly = 2;
    int min_lag_quarterly = 3;
    int min_lag_annual = 6;

    int min_lag(Periodicity p) const noexcept {
        switch (p) {
            case Periodicity::Monthly: return min_lag_monthly;
            case Periodicity::Quarterly: return min_lag_quarterly;
            case Periodicity::Annual:
            case Periodicity::Irregular: return min_lag_annual;
        }
        return min_lag_annual;
    }
};

/// Existence of explanatory variables, from the transcriber's flags.
inline Classification classify_explanatory(const IndicatorRecord& r) {
    Classification c;
    const bool no_drivers = r.flags.has(Flag::BinaryPolicy) || r.flags.has(Flag::StructuralConstant);
    c.trace.push_back({"explanatory.binary_or_structural", no_drivers, no_drivers ? std::optional(Label::Unlikely) : std::nullopt});
    if (no_drivers) {
        c.label = Label::Unlikely;
        return c;
    }
    const bool decided = r.flags.has(Flag::BudgetType) || r.flags.has(Flag::ElectionBased);
    c.trace.push_back({"explanatory.budget_or_election", decided, decided ? std::optional(Label::Likely) : std::nullopt});
    if (decided) {
        c.label = Label::Likely;
        return c;
    }
    c.trace.push_back({"explanatory.default", true, Label::HighlyLikely});
    c.label = Label::HighlyLikely;
    return c;
}

/// Overall feasibility cascade:
///   1. tier != 1                         -> NotTier1
///   2. observations < min_obs            -> Unlikely
///   3. NoLag, or known lag < min lag      -> Unlikely
///   4. Consistent -> Highly likely, else Likely; DisasterEvent caps at Likely;
///      result = min(data score, explanatory)
inline Classification classify_overall(const IndicatorRecord& r, const CascadeParams& params = {}) {
    if (r.tier != 1) throw Error(Errc::NotTier1, r.indicator_code + " is tier " + std::to_string(r.tier));
    Classification c;
    c.trace.push_back({"overall.tier1", false, std::nullopt});

    const bool short_series = r.observation_count < params.min_obs;
    c.trace.push_back({"overall.min_observations", short_series, short_series ? std::optional(Label::Unlikely) : std::nullopt});
    if (short_series) {
        c.label = Label::Unlikely;
        return c;
    }

    const bool timely = r.flags.has(Flag::NoLag) || (r.lag_months && *r.lag_months < params.min_lag(r.periodicity));
    c.trace.push_back({"overall.no_significant_lag", timely, timely ? std::optional(Label::Unlikely) : std::nullopt});
    if (timely) {
        c.label = Label::Unlikely;
        return c;
    }

    Label data = r.availability == Availability::Consistent ? Label::HighlyLikely : Label::Likely;
    c.trace.push_back({"overall.data_availability", true, data});
    const bool disaster = r.flags.has(Flag::DisasterEvent);
    if (disaster) data = min(data, Label::Likely);
    c.trace.push_back({"overall.disaster_cap", disaster, disaster ? std::optional(Label::Likely) : std::nullopt});

    const auto expl = classify_explanatory(r);
    c.trace.insert(c.trace.end(), expl.trace.begin(), expl.trace.end());
    c.label = min(data, expl.label);
    c.trace.push_back({"overall.combine_min", true, c.label});
    return c;
}

inline std::string fired_rules(const RuleTrace& trace) {
    std::string out;
    for (const auto& s : trace) {
        if (!s.fired) continue;
        if (!out.empty()) out.push_back(';');
        out += s.rule_id;
    }
    return out;
}

struct LabelCounts {
    std::size_t highly_likely = 0;
    std::size_t likely = 0;
    std::size_t unlikely = 0;
    std::size_t total = 0;

    bool operator==(const LabelCounts&) const = default;
};

enum class LabelSource { Catalog, Derived };

/// Derived counts skip non-Tier-1 records (they have no label) but keep them in total.
inline LabelCounts aggregate_counts(const std::vector<IndicatorRecord>& records, LabelSource source,
                                    const CascadeParams& params = {}) {
    LabelCounts c;
    c.total = records.size();
    for (const auto& r : records) {
        std::optional<Label> l;
        if (source == LabelSource::Catalog) {
            l = r.catalog_feasibility;
        } else if (r.tier == 1) {
            l = classify_overall(r, params).label;
        }
        if (!l) continue;
        switch (*l) {
            case Label::HighlyLikely: ++c.highly_likely; break;
            case Label::Likely: ++c.likely; break;
            case Label::Unlikely: ++c.unlikely; break;
        }
    }
    return c;
}

/// Share of Tier-1 records whose derived overall label equals the catalog's label.
inline double agreement(const std::vector<IndicatorRecord>& records, const CascadeParams& params = {}) {
    std::size_t eligible = 0, agree = 0;
    for (const auto& r : records) {
        if (r.tier != 1) continue;
        ++eligible;
        if (classify_overall(r, params).label == r.catalog_feasibility) ++agree;
    }
    if (eligible == 0) throw Error(Errc::NoEligibleRecords, "no Tier-1 records");
    return static_cast<double>(agree) / static_cast<double>(eligible);
}

}  // namespace nowkit::feasibility
