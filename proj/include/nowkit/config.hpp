#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nowkit/error.hpp"
#include "nowkit/evaluation.hpp"
#include "nowkit/format.hpp"
#include "nowkit/ingest.hpp"
#include "nowkit/lstm.hpp"
#include "nowkit/selection.hpp"

namespace nowkit {

struct SdgSource {
    std::string path;
    int lag_months = 0;
    std::string series_id;  // empty = use the file's seriesCode
};

struct DataPaths {
    std::vector<std::string> series_csv;
    std::vector<SdgSource> sdg_json;
    std::string catalog_csv;
};

/// One JSON file drives every command. Relative paths are resolved against
/// the directory holding the config.
struct RunConfig {
    std::string target_series_id;
    std::vector<std::string> candidate_variable_ids;
    DataPaths data;
    SplitSpec splits = default_splits();
    std::vector<std::string> model_variables;  // empty = all candidates
    Hyperparams hyper;
    SearchConfig search;
    TransformSettings transform;
    int min_observations = 10;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    ModelSpec model_spec() const {
        return {target_series_id, model_variables.empty() ? candidate_variable_ids : model_variables,
                model_hyper(), transform};
    }

    /// Model weights are always seeded from the run seed, the same way
    /// selection seeds its trials, so a selected winner retrains identically.
    Hyperparams model_hyper() const {
        Hyperparams h = hyper;
        h.seed = derive_seed(seed, "model");
        return h;
    }

    SearchConfig search_config(unsigned threads) const {
        SearchConfig c = search;
        c.candidate_variable_ids = candidate_variable_ids;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

namespace detail {

inline YearRange year_range(const nlohmann::json& j, const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw Error(Errc::ConfigError, std::string("splits.") + key + " must be [first, last]");
    return {a.at(0).get<int>(), a.at(1).get<int>()};
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

inline std::vector<Hyperparams> grid_from_json(const nlohmann::json& j) {
    std::vector<Hyperparams> out;
    for (const auto& h : j) out.push_back(hyperparams_from_json(nlohmann::ordered_json(h)));
    return out;
}

inline GrowthKind parse_growth(const std::string& s) {
    if (s == "simple") return GrowthKind::Simple;
    if (s == "log") return GrowthKind::Log;
    throw Error(Errc::ConfigError, "transform.growth must be \"simple\" or \"log\", got \"" + s + "\"");
}

}  // namespace detail

inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    try {
        c.target_series_id = j.at("target_series_id").get<std::string>();
        c.candidate_variable_ids = j.value("candidate_variable_ids", std::vector<std::string>{});
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("series_csv")) {
                if (d.at("series_csv").is_string())
                    c.data.series_csv.push_back(d.at("series_csv").get<std::string>());
                else
                    c.data.series_csv = d.at("series_csv").get<std::vector<std::string>>();
            }
            for (const auto& s : d.value("sdg_json", nlohmann::json::array()))
                c.data.sdg_json.push_back({s.at("path").get<std::string>(), s.at("lag_months").get<int>(),
                                           s.value("series_id", std::string{})});
            c.data.catalog_csv = d.value("catalog_csv", std::string{});
        }
        for (auto& p : c.data.series_csv) p = detail::resolve(base_dir, p);
        for (auto& s : c.data.sdg_json) s.path = detail::resolve(base_dir, s.path);
        c.data.catalog_csv = detail::resolve(base_dir, c.data.catalog_csv);

        if (j.contains("splits")) {
            const auto& s = j.at("splits");
            c.splits = {detail::year_range(s, "train"), detail::year_range(s, "validation"), detail::year_range(s, "test")};
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            c.model_variables = m.value("variables", std::vector<std::string>{});
            if (m.contains("hyperparams")) c.hyper = hyperparams_from_json(nlohmann::ordered_json(m.at("hyperparams")));
        }
        if (j.contains("search")) {
            const auto& s = j.at("search");
            c.search.n_trials = s.value("n_trials", c.search.n_trials);
            c.search.subset_min = s.value("subset_min", c.search.subset_min);
            c.search.subset_max = s.value("subset_max", c.search.subset_max);
            c.search.top_k = s.value("top_k", c.search.top_k);
            if (s.contains("coarse_grid")) c.search.coarse_grid = detail::grid_from_json(s.at("coarse_grid"));
            if (s.contains("fine_grid")) c.search.fine_grid = detail::grid_from_json(s.at("fine_grid"));
        }
        if (j.contains("transform")) {
            const auto& t = j.at("transform");
            c.transform.seasonal_adjust = t.value("seasonal_adjust", c.transform.seasonal_adjust);
            c.transform.growth = detail::parse_growth(t.value("growth", std::string("simple")));
        }
        c.min_observations = j.value("min_observations", c.min_observations);
        c.output_dir = detail::resolve(base_dir, j.value("output_dir", c.output_dir));
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    c.splits.validate();
    return c;
}

inline RunConfig read_run_config(const std::string& path) {
    return parse_run_config(read_file(path), std::filesystem::path(path).parent_path());
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    auto grid = [](const std::vector<Hyperparams>& g) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& h : g) a.push_back(to_json(h));
        return a;
    };
    nlohmann::ordered_json sdg = nlohmann::ordered_json::array();
    for (const auto& s : c.data.sdg_json) sdg.push_back({{"path", s.path}, {"lag_months", s.lag_months}, {"series_id", s.series_id}});
    return {
        {"target_series_id", c.target_series_id},
        {"candidate_variable_ids", c.candidate_variable_ids},
        {"data", {{"series_csv", c.data.series_csv}, {"sdg_json", sdg}, {"catalog_csv", c.data.catalog_csv}}},
        {"splits", {{"train", {c.splits.train.first, c.splits.train.last}},
                    {"validation", {c.splits.validation.first, c.splits.validation.last}},
                    {"test", {c.splits.test.first, c.splits.test.last}}}},
        {"model", {{"variables", c.model_variables}, {"hyperparams", to_json(c.hyper)}}},
        {"search", {{"n_trials", c.search.n_trials},
                    {"subset_min", c.search.subset_min},
                    {"subset_max", c.search.subset_max},
                    {"top_k", c.search.top_k},
                    {"coarse_grid", grid(c.search.coarse_grid)},
                    {"fine_grid", grid(c.search.fine_grid)}}},
        {"transform", {{"seasonal_adjust", c.transform.seasonal_adjust},
                       {"growth", c.transform.growth == GrowthKind::Simple ? "simple" : "log"}}},
        {"min_observations", c.min_observations},
        {"output_dir", c.output_dir},
        {"seed", c.seed},
    };
}

/// Every series named by the config's data section, in file order.
inline SeriesPool load_pool(const RunConfig& c) {
    SeriesPool pool;
    for (const auto& p : c.data.series_csv)
        for (auto& s : read_series_csv(p)) pool.push_back(std::move(s));
    for (const auto& s : c.data.sdg_json) pool.push_back(read_sdg_api_json(s.path, s.lag_months, s.series_id));
    return pool;
}

}  // namespace nowkit
