#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nowkit/evaluation.hpp"
#include "nowkit/feasibility.hpp"
#include "nowkit/format.hpp"
#include "nowkit/series.hpp"

namespace nowkit {

// ---- periods ----

inline Frequency parse_frequency(std::string_view code, std::size_t line) {
    if (code == "M") return Frequency::Monthly;
    if (code == "Q") return Frequency::Quarterly;
    if (code == "A") return Frequency::Annual;
    throw ParseError(line, "unknown frequency '" + std::string(code) + "' (expected M, Q or A)");
}

/// YYYY-MM (monthly), YYYY-Qn (quarterly), YYYY (annual).
inline Period parse_period(std::string_view token, Frequency f, std::size_t line) {
    auto bad = [&](const char* why) { return ParseError(line, "invalid period '" + std::string(token) + "': " + why); };
    auto digits = [](std::string_view s) { return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }); };
    if (token.size() < 4 || !digits(token.substr(0, 4))) throw bad("expected a four-digit year");
    const int year = std::stoi(std::string(token.substr(0, 4)));
    const auto rest = token.substr(4);
    Period p{year, 1, f};
    switch (f) {
        case Frequency::Annual:
            if (!rest.empty()) throw bad("annual periods are written YYYY");
            break;
        case Frequency::Monthly:
            if (rest.size() != 3 || rest[0] != '-' || !digits(rest.substr(1))) throw bad("monthly periods are written YYYY-MM");
            p.subperiod = std::stoi(std::string(rest.substr(1)));
            break;
        case Frequency::Quarterly:
            if (rest.size() != 3 || rest[0] != '-' || rest[1] != 'Q' || !digits(rest.substr(2)))
                throw bad("quarterly periods are written YYYY-Qn");
            p.subperiod = rest[2] - '0';
            break;
    }
    if (!p.valid()) throw bad("subperiod out of range");
    return p;
}

// ---- series CSV ----

inline constexpr std::string_view series_csv_header = "series_id,frequency,period,value,lag_months";

namespace detail {
inline void expect_header(const csv::Row& row, std::string_view header) {
    if (csv::join(row.fields) != header)
        throw ParseError(row.line, "header must be exactly '" + std::string(header) + "'");
}
}  // namespace detail

inline std::vector<TimeSeries> parse_series_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ParseError(1, "missing header");
    detail::expect_header(rows.front(), series_csv_header);
    std::vector<TimeSeries> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (r.fields.size() != 5) throw ParseError(r.line, "expected 5 fields, got " + std::to_string(r.fields.size()));
        const auto& id = r.fields[0];
        if (id.empty()) throw ParseError(r.line, "empty series_id");
        const Frequency f = parse_frequency(r.fields[1], r.line);
        const Period p = parse_period(r.fields[2], f, r.line);
        double value = 0.0;
        if (!parse_double(r.fields[3], value)) throw ParseError(r.line, "invalid value '" + r.fields[3] + "'");
        long long lag = 0;
        if (!parse_int(r.fields[4], lag) || lag < 0) throw ParseError(r.line, "invalid lag_months '" + r.fields[4] + "'");
        auto [it, inserted] = index.emplace(id, out.size());
        if (inserted) out.push_back(TimeSeries{id, f, {}, {static_cast<int>(lag)}});
        auto& s = out[it->second];
        if (s.frequency != f) throw ParseError(r.line, "series '" + id + "' mixes frequencies");
        if (s.schedule.lag_months != lag) throw ParseError(r.line, "series '" + id + "' has inconsistent lag_months");
        s.observations.push_back({p, value});
    }
    for (const auto& s : out) require_valid(s);
    return out;
}

inline std::vector<TimeSeries> read_series_csv(const std::string& path) { return parse_series_csv(read_file(path)); }

inline std::string series_csv(const std::vector<TimeSeries>& pool) {
    std::string out = std::string(series_csv_header) + "\n";
    for (const auto& s : pool)
        for (const auto& o : s.observations)
            out += csv::join({s.id, std::string(1, frequency_code(s.frequency)), o.period.to_string(), format_double(o.value),
                              std::to_string(s.schedule.lag_months)}) + "\n";
    return out;
}

inline void write_series_csv(const std::vector<TimeSeries>& pool, const std::string& path) { write_file(path, series_csv(pool)); }

// ---- SDG API JSON subset ----

/// Accepts either a bare array of observation objects or an object whose
/// "data" member is that array. Only seriesCode, timePeriod and value are read;
/// timePeriod and value may be numbers or numeric strings.
inline TimeSeries parse_sdg_api_json(std::string_view text, int lag_months, std::string id = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    const nlohmann::json* arr = &doc;
    if (doc.is_object()) {
        if (!doc.contains("data")) throw ParseError(0, "object payload without a 'data' array");
        arr = &doc["data"];
    }
    if (!arr->is_array()) throw ParseError(0, "expected an array of observations");

    auto number = [](const nlohmann::json& v, const char* field, std::size_t i) {
        double x = 0.0;
        if (v.is_number()) return v.get<double>();
        if (v.is_string() && parse_double(v.get_ref<const std::string&>(), x)) return x;
        throw ParseError(0, "record " + std::to_string(i) + ": field '" + field + "' is not numeric");
    };
    std::optional<std::string> code;
    TimeSeries s{id, Frequency::Annual, {}, {lag_months}};
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto& rec = (*arr)[i];
        if (!rec.is_object() || !rec.contains("seriesCode") || !rec.contains("timePeriod") || !rec.contains("value"))
            throw ParseError(0, "record " + std::to_string(i) + ": needs seriesCode, timePeriod and value");
        if (!rec["seriesCode"].is_string()) throw ParseError(0, "record " + std::to_string(i) + ": seriesCode must be a string");
        const auto& c = rec["seriesCode"].get_ref<const std::string&>();
        if (code && *code != c) throw Error(Errc::MixedSeriesCodes, *code + " and " + c);
        code = c;
        const double year = number(rec["timePeriod"], "timePeriod", i);
        if (year != std::floor(year)) throw ParseError(0, "record " + std::to_string(i) + ": timePeriod must be a year");
        s.observations.push_back({{static_cast<int>(year), 1, Frequency::Annual}, number(rec["value"], "value", i)});
    }
    if (s.id.empty() && code) s.id = *code;
    std::sort(s.observations.begin(), s.observations.end(), [](const Observation& a, const Observation& b) { return a.period < b.period; });
    require_valid(s);
    return s;
}

inline TimeSeries read_sdg_api_json(const std::string& path, int lag_months, std::string id = {}) {
    return parse_sdg_api_json(read_file(path), lag_months, std::move(id));
}

// ---- catalog CSV ----

inline constexpr std::string_view catalog_csv_header =
    "indicator_code,name,unit,tier,periodicity,data_availability,observation_count,publication_lag,lag_months,"
    "availability,flags,explanatory,feasibility,data_source,notes";

namespace detail {

inline feasibility::Periodicity parse_periodicity(std::string_view s, std::size_t line) {
    using feasibility::Periodicity;
    if (s == "M") return Periodicity::Monthly;
    if (s == "Q") return Periodicity::Quarterly;
    if (s == "A") return Periodicity::Annual;
    if (s == "Irregular") return Periodicity::Irregular;
    throw ParseError(line, "unknown periodicity '" + std::string(s) + "'");
}

inline std::string_view periodicity_code(feasibility::Periodicity p) {
    using feasibility::Periodicity;
    switch (p) {
        case Periodicity::Monthly: return "M";
        case Periodicity::Quarterly: return "Q";
        case Periodicity::Annual: return "A";
        case Periodicity::Irregular: return "Irregular";
    }
    return "";
}

inline feasibility::Availability parse_availability(std::string_view s, std::size_t line) {
    using feasibility::Availability;
    if (s == "Consistent") return Availability::Consistent;
    if (s == "VariesByRegion") return Availability::VariesByRegion;
    if (s == "Sporadic") return Availability::Sporadic;
    if (s == "IrregularInterval") return Availability::IrregularInterval;
    throw ParseError(line, "unknown availability '" + std::string(s) + "'");
}

inline std::string_view availability_name(feasibility::Availability a) {
    using feasibility::Availability;
    switch (a) {
        case Availability::Consistent: return "Consistent";
        case Availability::VariesByRegion: return "VariesByRegion";
        case Availability::Sporadic: return "Sporadic";
        case Availability::IrregularInterval: return "IrregularInterval";
    }
    return "";
}

inline feasibility::FlagSet parse_flags(std::string_view s, std::size_t line) {
    feasibility::FlagSet flags;
    while (!s.empty()) {
        const auto cut = s.find(';');
        const auto tok = s.substr(0, cut);
        bool known = false;
        for (const auto& [f, name] : feasibility::flag_names)
            if (tok == name) {
                flags.set(f);
                known = true;
            }
        if (!known) throw ParseError(line, "unknown flag '" + std::string(tok) + "'");
        if (cut == std::string_view::npos) break;
        s.remove_prefix(cut + 1);
    }
    return flags;
}

inline std::string flags_text(const feasibility::FlagSet& flags) {
    std::string out;
    for (const auto& [f, name] : feasibility::flag_names)
        if (flags.has(f)) {
            if (!out.empty()) out.push_back(';');
            out += name;
        }
    return out;
}

}  // namespace detail

inline std::vector<feasibility::IndicatorRecord> parse_catalog_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ParseError(1, "missing header");
    detail::expect_header(rows.front(), catalog_csv_header);
    std::vector<feasibility::IndicatorRecord> out;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& r = rows[k];
        const auto& f = r.fields;
        if (f.size() != 15) throw ParseError(r.line, "expected 15 fields, got " + std::to_string(f.size()));
        feasibility::IndicatorRecord rec;
        rec.indicator_code = f[0];
        rec.name = f[1];
        rec.unit = f[2];
        long long n = 0;
        if (!parse_int(f[3], n) || n < 1 || n > 3) throw ParseError(r.line, "tier must be 1, 2 or 3");
        rec.tier = static_cast<int>(n);
        rec.periodicity = detail::parse_periodicity(f[4], r.line);
        rec.data_availability = f[5];
        if (!parse_int(f[6], n) || n < 0) throw ParseError(r.line, "invalid observation_count '" + f[6] + "'");
        rec.observation_count = static_cast<int>(n);
        rec.publication_lag = f[7];
        if (f[8] != "unknown") {
            if (!parse_int(f[8], n) || n < 0) throw ParseError(r.line, "invalid lag_months '" + f[8] + "'");
            rec.lag_months = static_cast<int>(n);
        }
        rec.availability = detail::parse_availability(f[9], r.line);
        rec.flags = detail::parse_flags(f[10], r.line);
        rec.catalog_explanatory = feasibility::parse_label(f[11]);
        rec.catalog_feasibility = feasibility::parse_label(f[12]);
        rec.data_source = f[13];
        rec.notes = f[14];
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<feasibility::IndicatorRecord> read_catalog_csv(const std::string& path) {
    return parse_catalog_csv(read_file(path));
}

inline std::vector<std::string> catalog_fields(const feasibility::IndicatorRecord& r) {
    return {r.indicator_code, r.name, r.unit, std::to_string(r.tier), std::string(detail::periodicity_code(r.periodicity)),
            r.data_availability, std::to_string(r.observation_count), r.publication_lag,
            r.lag_months ? std::to_string(*r.lag_months) : "unknown", std::string(detail::availability_name(r.availability)),
            detail::flags_text(r.flags), std::string(feasibility::to_string(r.catalog_explanatory)),
            std::string(feasibility::to_string(r.catalog_feasibility)), r.data_source, r.notes};
}

/// Catalog rows with derived_explanatory,derived_feasibility,rules_fired appended.
/// Non-Tier-1 rows get "n/a" labels and rule "NotTier1".
inline std::string labeled_catalog_csv(const std::vector<feasibility::IndicatorRecord>& records,
                                       const feasibility::CascadeParams& params = {}) {
    std::string out = std::string(catalog_csv_header) + ",derived_explanatory,derived_feasibility,rules_fired\n";
    for (const auto& r : records) {
        auto fields = catalog_fields(r);
        if (r.tier == 1) {
            const auto overall = feasibility::classify_overall(r, params);
            fields.emplace_back(feasibility::to_string(feasibility::classify_explanatory(r).label));
            fields.emplace_back(feasibility::to_string(overall.label));
            fields.push_back(feasibility::fired_rules(overall.trace));
        } else {
            fields.insert(fields.end(), {"n/a", "n/a", "NotTier1"});
        }
        out += csv::join(fields) + "\n";
    }
    return out;
}

// ---- trace CSV ----

inline constexpr std::string_view trace_csv_header = "vintage,growth_nowcast,level_nowcast";

inline std::string trace_csv(const NowcastTrace& trace) {
    if (trace.points.empty()) throw Error(Errc::EmptyTrace, "trace for " + std::to_string(trace.target_year) + " has no points");
    std::string out = std::string(trace_csv_header) + "\n";
    for (const auto& p : trace.points)
        out += p.vintage.to_string() + "," + format_double(p.growth) + "," + format_double(p.level) + "\n";
    return out;
}

inline void write_trace_csv(const NowcastTrace& trace, const std::string& path) { write_file(path, trace_csv(trace)); }

inline NowcastTrace parse_trace_csv(std::string_view text, int target_year = 0) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ParseError(1, "missing header");
    detail::expect_header(rows.front(), trace_csv_header);
    NowcastTrace t{target_year, {}};
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (r.fields.size() != 3) throw ParseError(r.line, "expected 3 fields");
        TracePoint p;
        try {
            p.vintage = VintageDate::parse(r.fields[0]);
        } catch (const Error&) {
            throw ParseError(r.line, "invalid vintage '" + r.fields[0] + "'");
        }
        if (!parse_double(r.fields[1], p.growth) || !parse_double(r.fields[2], p.level))
            throw ParseError(r.line, "invalid number");
        t.points.push_back(p);
    }
    return t;
}

inline NowcastTrace read_trace_csv(const std::string& path, int target_year = 0) {
    return parse_trace_csv(read_file(path), target_year);
}

}  // namespace nowkit
