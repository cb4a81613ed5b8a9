#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nowkit/evaluation.hpp"
#include "nowkit/format.hpp"
#include "nowkit/pipeline.hpp"
#include "nowkit/random.hpp"

namespace nowkit {

/// Four coarse points used for every random subset.
inline std::vector<Hyperparams> default_coarse_grid() {
    std::vector<Hyperparams> grid;
    for (int hidden : {4, 8})
        for (double lr : {0.01, 0.03}) grid.push_back({12, hidden, lr, 150, 0, 1e-3});
    return grid;
}

/// Sixteen points explored for the best subsets.
inline std::vector<Hyperparams> default_fine_grid() {
    std::vector<Hyperparams> grid;
    for (int steps : {12, 18})
        for (int hidden : {4, 8})
            for (double lr : {0.01, 0.03})
                for (int epochs : {150, 300}) grid.push_back({steps, hidden, lr, epochs, 0, 1e-3});
    return grid;
}

struct SearchConfig {
    std::vector<std::string> candidate_variable_ids;
    int n_trials = 300;
    int subset_min = 4;
    int subset_max = 12;
    std::vector<Hyperparams> coarse_grid = default_coarse_grid();
    std::vector<Hyperparams> fine_grid = default_fine_grid();
    int top_k = 3;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = run trials sequentially

    void validate() const {
        const int n = static_cast<int>(candidate_variable_ids.size());
        if (n_trials < 1) throw Error(Errc::ConfigError, "n_trials must be >= 1");
        if (!(1 <= subset_min && subset_min <= subset_max && subset_max <= n))
            throw Error(Errc::ConfigError, "subset size range must satisfy 1 <= min <= max <= #candidates");
        if (coarse_grid.empty() || fine_grid.empty()) throw Error(Errc::ConfigError, "hyperparameter grids must be non-empty");
        if (top_k < 1) throw Error(Errc::ConfigError, "top_k must be >= 1");
        for (const auto& h : coarse_grid) h.validate();
        for (const auto& h : fine_grid) h.validate();
    }
};

struct TrialResult {
    int trial_id = 0;
    std::vector<std::string> variables;
    Hyperparams hyper;
    double val_mae = 0.0;
    double val_rmse = 0.0;
    bool ok = false;
    std::string error;
};

/// Size uniform on [min, max], then a uniform subset of that size without
/// replacement. Returned in candidate order.
inline std::vector<std::string> sample_subset(Rng& rng, const SearchConfig& config) {
    const auto& cands = config.candidate_variable_ids;
    const auto k = static_cast<std::size_t>(rng.integer(config.subset_min, config.subset_max));
    std::vector<std::size_t> idx(cands.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(i), static_cast<std::int64_t>(idx.size() - 1)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(cands[i]);
    return out;
}

/// Candidate columns prepared once per search (standardization fit on the
/// training years is shared by every trial).
class TrialContext {
public:
    TrialContext(std::shared_ptr<const SeriesPool> pool, std::string target_id, SplitSpec splits,
                 TransformSettings transform, const std::vector<std::string>& candidates)
        : pool_(std::move(pool)), target_id_(std::move(target_id)), splits_(splits), transform_(transform) {
        splits_.validate();
        growths_ = target_growths(get_series(*pool_, target_id_), transform_.growth);
        for (const auto& id : candidates) {
            try {
                columns_.emplace(id, prepare_column(get_series(*pool_, id), transform_, splits_.train).column);
            } catch (const Error& e) {
                failures_.emplace(id, e.what());
            }
        }
    }

    const SplitSpec& splits() const noexcept { return splits_; }

    /// Train on the training years, score full-data validation windows.
    TrialResult run(int trial_id, const std::vector<std::string>& subset, const Hyperparams& hyper) const {
        TrialResult r{trial_id, subset, hyper, 0.0, 0.0, false, {}};
        try {
            if (subset.empty()) throw Error(Errc::ConfigError, "empty variable subset");
            std::vector<AlignedColumn> cols;
            for (const auto& id : subset) {
                if (auto f = failures_.find(id); f != failures_.end()) throw Error(Errc::InsufficientData, f->second);
                auto it = columns_.find(id);
                if (it == columns_.end()) {
                    cols.push_back(prepare_column(get_series(*pool_, id), transform_, splits_.train).column);
                } else {
                    cols.push_back(it->second);
                }
            }
            const auto samples = training_samples(cols, growths_, splits_.train, hyper.n_timesteps);
            const TrainedModel model = train(samples, hyper);
            std::vector<double> preds, acts;
            for (int y = splits_.validation.first; y <= splits_.validation.last; ++y) {
                auto it = growths_.find(y);
                if (it == growths_.end()) continue;
                preds.push_back(predict(model, build_design_matrix(cols, y, hyper.n_timesteps, nullptr)));
                acts.push_back(it->second);
            }
            r.val_mae = mae(preds, acts);
            r.val_rmse = rmse(preds, acts);
            if (!std::isfinite(r.val_mae) || !std::isfinite(r.val_rmse))
                throw Error(Errc::InsufficientData, "non-finite validation metric");
            r.ok = true;
        } catch (const Error& e) {
            r.ok = false;
            r.error = e.what();
        }
        return r;
    }

private:
    std::shared_ptr<const SeriesPool> pool_;
    std::string target_id_;
    SplitSpec splits_;
    TransformSettings transform_;
    std::map<int, double> growths_;
    std::map<std::string, AlignedColumn> columns_;
    std::map<std::string, std::string> failures_;
};

inline TrialResult run_trial(const std::vector<std::string>& subset, const Hyperparams& hyper, const SplitSpec& splits,
                             std::shared_ptr<const SeriesPool> pool, const std::string& target_id,
                             const TransformSettings& transform = {}, int trial_id = 0) {
    TrialContext ctx(std::move(pool), target_id, splits, transform, subset);
    return ctx.run(trial_id, subset, hyper);
}

/// Ascending validation MAE; ties by RMSE, then trial id.
inline bool ranks_before(const TrialResult& a, const TrialResult& b) {
    if (a.val_mae != b.val_mae) return a.val_mae < b.val_mae;
    if (a.val_rmse != b.val_rmse) return a.val_rmse < b.val_rmse;
    return a.trial_id < b.trial_id;
}

namespace detail {

struct Job {
    int trial_id;
    std::vector<std::string> subset;
    Hyperparams hyper;
};

/// Results are stored by position, so output is independent of scheduling.
inline std::vector<TrialResult> run_jobs(const TrialContext& ctx, const std::vector<Job>& jobs, unsigned threads) {
    std::vector<TrialResult> results(jobs.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = ctx.run(jobs[i].trial_id, jobs[i].subset, jobs[i].hyper);
        return results;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
            results[i] = ctx.run(jobs[i].trial_id, jobs[i].subset, jobs[i].hyper);
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, jobs.size()); ++t) pool.emplace_back(worker);
    pool.clear();
    return results;
}

inline Hyperparams with_model_seed(Hyperparams h, std::uint64_t search_seed) {
    h.seed = derive_seed(search_seed, "model");
    return h;
}

}  // namespace detail

struct SearchResult {
    std::vector<TrialResult> trials;  // every trial, by trial id
    std::vector<TrialResult> ranked;  // successful trials, best first
};

/// n_trials random subsets, each run on every coarse grid point.
/// Trial id = subset index * |coarse grid| + grid index.
inline SearchResult random_search(const SearchConfig& config, const TrialContext& ctx) {
    config.validate();
    Rng rng(derive_seed(config.seed, "subsets"));
    std::vector<detail::Job> jobs;
    const int grid = static_cast<int>(config.coarse_grid.size());
    for (int t = 0; t < config.n_trials; ++t) {
        const auto subset = sample_subset(rng, config);
        for (int g = 0; g < grid; ++g)
            jobs.push_back({t * grid + g, subset, detail::with_model_seed(config.coarse_grid[static_cast<std::size_t>(g)], config.seed)});
    }
    SearchResult out;
    out.trials = detail::run_jobs(ctx, jobs, config.threads);
    for (const auto& r : out.trials)
        if (r.ok) out.ranked.push_back(r);
    if (out.ranked.empty()) throw Error(Errc::AllTrialsFailed, "every coarse trial failed: " + out.trials.front().error);
    std::sort(out.ranked.begin(), out.ranked.end(), ranks_before);
    return out;
}

inline SearchResult random_search(const SearchConfig& config, const SplitSpec& splits, std::shared_ptr<const SeriesPool> pool,
                                  const std::string& target_id, const TransformSettings& transform = {}) {
    TrialContext ctx(std::move(pool), target_id, splits, transform, config.candidate_variable_ids);
    return random_search(config, ctx);
}

struct RefineResult {
    std::vector<TrialResult> trials;  // refined trials, ids continuing after the coarse ones
    TrialResult winner;
};

/// Re-runs the top_k distinct subsets over the fine grid; winner = best refined trial.
inline RefineResult refine_top_k(const std::vector<TrialResult>& ranked, const SearchConfig& config, const TrialContext& ctx,
                                 int first_trial_id) {
    std::vector<std::vector<std::string>> subsets;
    for (const auto& r : ranked) {
        if (static_cast<int>(subsets.size()) >= config.top_k) break;
        if (std::find(subsets.begin(), subsets.end(), r.variables) == subsets.end()) subsets.push_back(r.variables);
    }
    if (subsets.empty()) throw Error(Errc::AllTrialsFailed, "nothing to refine");
    std::vector<detail::Job> jobs;
    int id = first_trial_id;
    for (const auto& s : subsets)
        for (const auto& h : config.fine_grid) jobs.push_back({id++, s, detail::with_model_seed(h, config.seed)});
    RefineResult out;
    out.trials = detail::run_jobs(ctx, jobs, config.threads);
    std::vector<TrialResult> ok;
    for (const auto& r : out.trials)
        if (r.ok) ok.push_back(r);
    if (ok.empty()) throw Error(Errc::AllTrialsFailed, "every refined trial failed");
    out.winner = *std::min_element(ok.begin(), ok.end(), ranks_before);
    return out;
}

inline RefineResult refine_top_k(const std::vector<TrialResult>& ranked, const SearchConfig& config, const SplitSpec& splits,
                                 std::shared_ptr<const SeriesPool> pool, const std::string& target_id,
                                 const TransformSettings& transform = {}) {
    TrialContext ctx(std::move(pool), target_id, splits, transform, config.candidate_variable_ids);
    int next_id = 0;
    for (const auto& r : ranked) next_id = std::max(next_id, r.trial_id + 1);
    return refine_top_k(ranked, config, ctx, next_id);
}

inline std::string join_ids(const std::vector<std::string>& ids, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out.push_back(sep);
        out += ids[i];
    }
    return out;
}

/// Search report CSV, one row per trial in the given order.
inline std::string search_csv(const std::vector<TrialResult>& trials) {
    std::string out = "trial_id,variables,hidden_size,n_timesteps,learning_rate,epochs,val_mae,val_rmse,status\n";
    for (const auto& t : trials) {
        out += csv::join({std::to_string(t.trial_id), join_ids(t.variables), std::to_string(t.hyper.hidden_size),
                          std::to_string(t.hyper.n_timesteps), format_double(t.hyper.learning_rate),
                          std::to_string(t.hyper.epochs), t.ok ? format_double(t.val_mae) : "",
                          t.ok ? format_double(t.val_rmse) : "", t.ok ? "ok" : "failed"});
        out += "\n";
    }
    return out;
}

}  // namespace nowkit
