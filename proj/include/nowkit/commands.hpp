#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nowkit/config.hpp"
#include "nowkit/evaluation.hpp"
#include "nowkit/feasibility.hpp"
#include "nowkit/ingest.hpp"
#include "nowkit/selection.hpp"

namespace nowkit::cli {

enum ExitCode : int { Success = 0, RuntimeError = 1, ValidationFailed = 2 };

struct Options {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> vintage;  // YYYY-MM
    std::optional<int> target_year;
    std::optional<std::string> model_path;
    std::optional<std::string> selection_path;
    std::optional<std::string> catalog_path;
    std::string schedule = "checkpoint";  // backtest: checkpoint | trace
    bool final_fit = false;               // train on train + validation years
    std::optional<unsigned> threads;      // unset = NOWKIT_THREADS, else 0
};

inline unsigned threads_from_env() {
    const char* v = std::getenv("NOWKIT_THREADS");
    if (v == nullptr || *v == '\0') return 0;
    long long n = 0;
    if (!parse_int(v, n) || n < 0) throw Error(Errc::ConfigError, "NOWKIT_THREADS must be a non-negative integer");
    return static_cast<unsigned>(n);
}

/// Loaded config, with flags applied and the pool restricted to the --vintage.
struct Context {
    RunConfig config;
    std::shared_ptr<const SeriesPool> loaded;  // as read from disk
    std::shared_ptr<const SeriesPool> pool;    // what commands see
    std::filesystem::path out_dir;
    std::optional<VintageDate> vintage;
    unsigned threads = 0;

    std::string out_path(const std::string& name) const { return (out_dir / name).string(); }
};

/// What the pool looked like at `v`: every series cut at its publication cutoff.
inline SeriesPool pool_as_of(std::shared_ptr<const SeriesPool> pool, VintageDate v) {
    const auto snap = snapshot_at(pool, v);
    SeriesPool out;
    for (const auto& s : *pool) out.push_back(snap.available(s.id));
    return out;
}

inline Context load_context(const Options& opt) {
    if (opt.config_path.empty()) throw Error(Errc::ConfigError, "--config is required");
    Context ctx;
    ctx.config = read_run_config(opt.config_path);
    if (opt.seed) ctx.config.seed = *opt.seed;
    ctx.out_dir = opt.out_dir ? std::filesystem::path(*opt.out_dir) : std::filesystem::path(ctx.config.output_dir);
    if (opt.vintage) ctx.vintage = VintageDate::parse(*opt.vintage);
    ctx.threads = opt.threads ? *opt.threads : threads_from_env();
    ctx.loaded = std::make_shared<const SeriesPool>(load_pool(ctx.config));
    ctx.pool = ctx.vintage ? std::make_shared<const SeriesPool>(pool_as_of(ctx.loaded, *ctx.vintage)) : ctx.loaded;
    return ctx;
}

inline void ensure_out_dir(const Context& ctx) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + ctx.out_dir.string() + ": " + ec.message());
}

// ---- validate ----

/// Problems that block a run; empty means the config and data are usable.
inline std::vector<std::string> validation_problems(const RunConfig& c, const SeriesPool& pool) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : pool) {
        if (!seen.insert(s.id).second) out.push_back("series '" + s.id + "' appears more than once in the data");
        for (const auto& v : validate_series(s)) out.push_back("series '" + s.id + "': " + describe(v));
    }
    auto check_series = [&](const std::string& id, const std::string& role) -> const TimeSeries* {
        const TimeSeries* s = find_series(pool, id);
        if (s == nullptr) {
            out.push_back("unknown " + role + " id '" + id + "'");
            return nullptr;
        }
        const auto n = observation_count(*s);
        if (static_cast<int>(n) < c.min_observations)
            out.push_back(role + " '" + id + "' has " + std::to_string(n) + " observations; at least " +
                          std::to_string(c.min_observations) + " are required (minimum-observations rule)");
        return s;
    };

    if (const TimeSeries* t = check_series(c.target_series_id, "target series")) {
        if (t->frequency != Frequency::Annual) {
            out.push_back("target series '" + t->id + "' must be annual");
        } else if (!t->empty()) {
            const int first = t->observations.front().period.year;
            const int last = t->observations.back().period.year;
            if (first > c.splits.train.first - 1 || last < c.splits.test.last)
                out.push_back("target series '" + t->id + "' covers " + std::to_string(first) + "-" + std::to_string(last) +
                              " but the splits need " + std::to_string(c.splits.train.first - 1) + "-" +
                              std::to_string(c.splits.test.last));
        }
    }
    if (c.candidate_variable_ids.empty()) out.push_back("candidate_variable_ids is empty");
    for (const auto& id : c.candidate_variable_ids) check_series(id, "variable");
    for (const auto& id : c.model_variables)
        if (std::find(c.candidate_variable_ids.begin(), c.candidate_variable_ids.end(), id) == c.candidate_variable_ids.end())
            check_series(id, "variable");
    try {
        c.search_config(0).validate();
        c.hyper.validate();
    } catch (const Error& e) {
        out.push_back(e.what());
    }
    return out;
}

inline int report_problems(const std::vector<std::string>& problems, std::ostream& err) {
    err << "validation failed: " << problems.size() << " problem" << (problems.size() == 1 ? "" : "s") << "\n";
    for (const auto& p : problems) err << "  - " << p << "\n";
    return ValidationFailed;
}

inline int cmd_validate(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto problems = validation_problems(ctx.config, *ctx.loaded);
    if (!problems.empty()) return report_problems(problems, err);
    out << "ok: target " << ctx.config.target_series_id << ", " << ctx.config.candidate_variable_ids.size()
        << " candidate variables, " << ctx.loaded->size() << " series\n";
    return Success;
}

// ---- model sources ----

struct Selection {
    std::vector<std::string> variables;
    Hyperparams hyper;
};

inline Selection read_selection(const std::string& path) {
    try {
        const auto j = nlohmann::ordered_json::parse(read_file(path));
        const auto& w = j.at("winner");
        return {w.at("variables").get<std::vector<std::string>>(), hyperparams_from_json(w.at("hyperparams"))};
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
}

/// Config model, or the winner recorded by `select` when --selection is given.
inline ModelSpec resolve_spec(const Context& ctx, const Options& opt) {
    ModelSpec spec = ctx.config.model_spec();
    if (opt.selection_path) {
        const auto sel = read_selection(*opt.selection_path);
        spec.variables = sel.variables;
        spec.hyper = sel.hyper;
    }
    return spec;
}

inline std::string model_json_text(const TrainedModel& m) { return to_json(m).dump(2) + "\n"; }

// ---- train ----

inline int cmd_train(const Context& ctx, const Options& opt, std::ostream& out) {
    const auto spec = resolve_spec(ctx, opt);
    const YearRange years = opt.final_fit ? ctx.config.splits.train_through_validation() : ctx.config.splits.train;
    const TrainedModel model = fit_model(*ctx.pool, spec, years);
    ensure_out_dir(ctx);
    const auto path = ctx.out_path("model.json");
    write_file(path, model_json_text(model));
    out << "trained on " << years.first << "-" << years.last << " with " << spec.variables.size()
        << " variables; final loss " << format_double(model.training_loss_curve.back()) << "\n";
    out << "wrote " << path << "\n";
    return Success;
}

// ---- select ----

inline nlohmann::ordered_json trial_json(const TrialResult& t) {
    return {{"trial_id", t.trial_id}, {"variables", t.variables}, {"hyperparams", to_json(t.hyper)},
            {"val_mae", t.val_mae}, {"val_rmse", t.val_rmse}};
}

inline int cmd_select(const Context& ctx, std::ostream& out) {
    const auto& c = ctx.config;
    const SearchConfig search = c.search_config(ctx.threads);
    TrialContext trials(ctx.pool, c.target_series_id, c.splits, c.transform, search.candidate_variable_ids);
    const auto coarse = random_search(search, trials);
    const auto refined = refine_top_k(coarse.ranked, search, trials, static_cast<int>(coarse.trials.size()));

    auto all = coarse.trials;
    all.insert(all.end(), refined.trials.begin(), refined.trials.end());
    nlohmann::ordered_json top = nlohmann::ordered_json::array();
    std::vector<std::vector<std::string>> subsets;
    for (const auto& r : coarse.ranked) {
        if (static_cast<int>(subsets.size()) >= search.top_k) break;
        if (std::find(subsets.begin(), subsets.end(), r.variables) != subsets.end()) continue;
        subsets.push_back(r.variables);
        top.push_back(trial_json(r));
    }
    std::size_t failed = 0;
    for (const auto& t : all) failed += t.ok ? 0 : 1;
    const nlohmann::ordered_json selection = {
        {"seed", c.seed},
        {"target_series_id", c.target_series_id},
        {"coarse_trials", coarse.trials.size()},
        {"refined_trials", refined.trials.size()},
        {"failed_trials", failed},
        {"top_coarse", top},
        {"winner", trial_json(refined.winner)},
    };
    ensure_out_dir(ctx);
    write_file(ctx.out_path("search.csv"), search_csv(all));
    write_file(ctx.out_path("selection.json"), selection.dump(2) + "\n");
    out << "winner: trial " << refined.winner.trial_id << " [" << join_ids(refined.winner.variables)
        << "] val_mae=" << format_double(refined.winner.val_mae) << " val_rmse=" << format_double(refined.winner.val_rmse)
        << "\n";
    out << "wrote " << ctx.out_path("search.csv") << " and " << ctx.out_path("selection.json") << "\n";
    return Success;
}

// ---- backtest ----

inline int cmd_backtest(const Context& ctx, const Options& opt, std::ostream& out) {
    VintageOffsets offsets;
    if (opt.schedule == "checkpoint") {
        offsets = checkpoint_vintage_offsets();
    } else if (opt.schedule == "trace") {
        offsets = trace_vintage_offsets();
    } else {
        throw Error(Errc::ConfigError, "--schedule must be checkpoint or trace, got '" + opt.schedule + "'");
    }
    const auto spec = resolve_spec(ctx, opt);
    const auto report = backtest(spec, ctx.config.splits, ctx.pool, offsets);
    ensure_out_dir(ctx);
    write_file(ctx.out_path("metrics.csv"), metrics_csv(report));
    const auto growths = target_growths(get_series(*ctx.pool, spec.target_id), spec.transform.growth);
    const auto base = naive_baselines(growths, ctx.config.splits.test);
    std::vector<double> acts;
    for (int y : base.years) acts.push_back(growths.at(y));
    if (const auto* r = report.find("test", "full"))
        out << "test mae=" << format_double(r->metrics.mae) << " rmse=" << format_double(r->metrics.rmse)
            << " (historical-mean baseline mae=" << format_double(mae(base.historical_mean, acts))
            << ", persistence mae=" << format_double(mae(base.persistence, acts)) << ")\n";
    out << "wrote " << ctx.out_path("metrics.csv") << "\n";
    return Success;
}

// ---- trace ----

inline int cmd_trace(const Context& ctx, const Options& opt, std::ostream& out) {
    if (!opt.target_year) throw Error(Errc::ConfigError, "trace needs --target-year");
    const int year = *opt.target_year;
    TrainedModel model;
    if (opt.model_path) {
        try {
            model = model_from_json(nlohmann::ordered_json::parse(read_file(*opt.model_path)));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, *opt.model_path + ": " + e.what());
        }
    } else {
        model = fit_model(*ctx.pool, resolve_spec(ctx, opt), ctx.config.splits.train_through_validation());
    }
    auto schedule = trace_schedule(year);
    if (ctx.vintage) std::erase_if(schedule, [&](const VintageDate& v) { return *ctx.vintage < v; });
    if (schedule.empty())
        throw Error(Errc::EmptyTrace, "no trace vintage for " + std::to_string(year) + " on or before " + ctx.vintage->to_string());
    const auto trace = nowcast_trace(model, ctx.pool, year, schedule);
    ensure_out_dir(ctx);
    const auto path = ctx.out_path("trace_" + std::to_string(year) + ".csv");
    write_trace_csv(trace, path);
    const auto& last = trace.points.back();
    out << "trace " << year << ": " << trace.points.size() << " vintages, last " << last.vintage.to_string()
        << " growth=" << format_double(last.growth) << " level=" << format_double(last.level) << "\n";
    out << "wrote " << path << "\n";
    return Success;
}

// ---- classify ----

inline std::string counts_text(const feasibility::LabelCounts& c) {
    return "highly_likely=" + std::to_string(c.highly_likely) + " likely=" + std::to_string(c.likely) +
           " unlikely=" + std::to_string(c.unlikely);
}

inline int cmd_classify(const Options& opt, std::ostream& out) {
    std::string catalog;
    std::filesystem::path out_dir = "out";
    if (!opt.config_path.empty()) {
        const auto c = read_run_config(opt.config_path);
        catalog = c.data.catalog_csv;
        out_dir = c.output_dir;
    }
    if (opt.catalog_path) catalog = *opt.catalog_path;
    if (opt.out_dir) out_dir = *opt.out_dir;
    if (catalog.empty()) throw Error(Errc::ConfigError, "classify needs --catalog or data.catalog_csv in the config");

    const auto records = read_catalog_csv(catalog);
    const auto derived = feasibility::aggregate_counts(records, feasibility::LabelSource::Derived);
    const auto listed = feasibility::aggregate_counts(records, feasibility::LabelSource::Catalog);
    const auto not_tier1 = derived.total - derived.highly_likely - derived.likely - derived.unlikely;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
    const auto path = (out_dir / "catalog_labeled.csv").string();
    write_file(path, labeled_catalog_csv(records));

    out << "derived: " << counts_text(derived) << " not_tier1=" << not_tier1 << " total=" << derived.total << "\n";
    out << "catalog: " << counts_text(listed) << " total=" << listed.total << "\n";
    if (derived.total != not_tier1) {
        std::ostringstream pct;
        pct.setf(std::ios::fixed);
        pct.precision(4);
        pct << feasibility::agreement(records);
        out << "agreement: " << pct.str() << "\n";
    }
    out << "wrote " << path << "\n";
    return Success;
}

// ---- dispatch ----

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"validate", "train", "select", "backtest", "trace", "classify"};
    return names;
}

/// Runs one command. Runtime failures become exit 1 with a single `error:` line.
inline int run(const std::string& command, const Options& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (command == "classify") return cmd_classify(opt, out);
        const Context ctx = load_context(opt);
        if (command == "validate") return cmd_validate(ctx, out, err);
        if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
            throw Error(Errc::ConfigError, "unknown command '" + command + "'");
        if (const auto problems = validation_problems(ctx.config, *ctx.loaded); !problems.empty())
            return report_problems(problems, err);
        if (command == "train") return cmd_train(ctx, opt, out);
        if (command == "select") return cmd_select(ctx, out);
        if (command == "backtest") return cmd_backtest(ctx, opt, out);
        return cmd_trace(ctx, opt, out);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << msg << "\n";
        return RuntimeError;
    }
}

}  // namespace nowkit::cli
