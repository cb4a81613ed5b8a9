#include <gtest/gtest.h>

#include <set>

#include "nowkit/selection.hpp"
#include "nowkit/synthetic.hpp"
#include "fixtures.hpp"

using namespace nowkit;

namespace {

struct Small {
    synthetic::Dataset data;
    std::shared_ptr<const SeriesPool> pool;
    SplitSpec splits{{1993, 2004}, {2005, 2010}, {2011, 2019}};
};

const Small& small() {
    static const Small s = [] {
        synthetic::DgpSettings d;
        d.n_monthly_distractors = 4;
        d.n_quarterly_distractors = 1;
        d.n_annual_distractors = 1;
        Small out;
        out.data = synthetic::generate(d);
        out.pool = std::make_shared<const SeriesPool>(out.data.pool);
        return out;
    }();
    return s;
}

SearchConfig quick_config(std::uint64_t seed) {
    SearchConfig c;
    c.candidate_variable_ids = small().data.candidate_ids;
    c.n_trials = 4;
    c.subset_min = 2;
    c.subset_max = 4;
    c.coarse_grid = {{12, 2, 0.03, 8, 0, 1e-4}, {12, 3, 0.03, 8, 0, 1e-4}};
    c.fine_grid = {{12, 2, 0.03, 8, 0, 1e-4}, {6, 2, 0.01, 10, 0, 1e-4}, {12, 3, 0.03, 12, 0, 1e-4}};
    c.top_k = 2;
    c.seed = seed;
    return c;
}

bool same(const TrialResult& a, const TrialResult& b) {
    return a.trial_id == b.trial_id && a.variables == b.variables && a.hyper == b.hyper && a.val_mae == b.val_mae &&
           a.val_rmse == b.val_rmse && a.ok == b.ok && a.error == b.error;
}

}  // namespace

TEST(SampleSubset, FullRangeIsWholeSet) {
    SearchConfig c;
    c.candidate_variable_ids = {"a", "b", "c", "d"};
    c.subset_min = c.subset_max = 4;
    Rng rng(1);
    EXPECT_EQ(sample_subset(rng, c), c.candidate_variable_ids);
}

TEST(SampleSubset, SameStateSameSubset) {
    SearchConfig c;
    c.candidate_variable_ids = {"a", "b", "c", "d", "e", "f", "g"};
    c.subset_min = 2;
    c.subset_max = 5;
    Rng r1(99), r2(99);
    for (int k = 0; k < 50; ++k) EXPECT_EQ(sample_subset(r1, c), sample_subset(r2, c));
}

TEST(SampleSubset, UniformInclusionAndSizes) {
    SearchConfig c;
    for (int k = 0; k < 10; ++k) c.candidate_variable_ids.push_back("v" + std::to_string(k));
    c.subset_min = c.subset_max = 3;
    Rng rng(derive_seed(1, "inclusion"));
    std::map<std::string, int> hits;
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) {
        const auto s = sample_subset(rng, c);
        ASSERT_EQ(s.size(), 3u);
        ASSERT_EQ(std::set<std::string>(s.begin(), s.end()).size(), 3u);
        for (const auto& v : s) ++hits[v];
    }
    for (const auto& id : c.candidate_variable_ids) EXPECT_NEAR(hits[id] / double(draws), 0.3, 0.02) << id;

    c.subset_min = 2;
    c.subset_max = 6;
    std::map<std::size_t, int> sizes;
    for (int d = 0; d < 10000; ++d) ++sizes[sample_subset(rng, c).size()];
    ASSERT_EQ(sizes.size(), 5u);
    for (const auto& [k, n] : sizes) EXPECT_NEAR(n / 10000.0, 0.2, 0.02) << k;
}

TEST(SearchConfig, Validation) {
    SearchConfig c;
    c.candidate_variable_ids = {"a", "b"};
    c.subset_min = 1;
    c.subset_max = 2;
    EXPECT_NO_THROW(c.validate());
    auto bad = c;
    bad.subset_max = 3;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.n_trials = 0;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.fine_grid.clear();
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.top_k = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Defaults, GridSizes) {
    EXPECT_EQ(default_coarse_grid().size(), 4u);
    EXPECT_GE(default_fine_grid().size(), 16u);
    SearchConfig c;
    EXPECT_EQ(c.n_trials, 300);
    EXPECT_EQ(c.subset_min, 4);
    EXPECT_EQ(c.subset_max, 12);
    EXPECT_EQ(c.top_k, 3);
}

TEST(RunTrial, DeterministicAndContained) {
    const auto& s = small();
    const Hyperparams h{12, 2, 0.03, 10, 5, 0.0};
    const std::vector<std::string> subset{s.data.informative_ids[0], "x01"};
    const auto a = run_trial(subset, h, s.splits, s.pool, s.data.target_id);
    const auto b = run_trial(subset, h, s.splits, s.pool, s.data.target_id);
    ASSERT_TRUE(a.ok) << a.error;
    EXPECT_TRUE(same(a, b));
    EXPECT_GE(a.val_mae, 0.0);
    EXPECT_GE(a.val_rmse, a.val_mae);

    const auto failed = run_trial({"no-such-series"}, h, s.splits, s.pool, s.data.target_id);
    EXPECT_FALSE(failed.ok);
    EXPECT_FALSE(failed.error.empty());
    EXPECT_FALSE(run_trial({}, h, s.splits, s.pool, s.data.target_id).ok);
}

TEST(RunTrial, AllMissingVariableFailsTheTrialOnly) {
    auto series = small().data.pool;
    std::vector<double> v;
    for (int m = 0; m < 24; ++m) v.push_back(100.0 + m);
    series.push_back(fx::monthly("late", 2018, 1, v, 1));
    const auto pool = std::make_shared<const SeriesPool>(series);
    const auto r = run_trial({"late"}, {12, 2, 0.01, 3, 0, 0.0}, small().splits, pool, "target");
    EXPECT_FALSE(r.ok);
}

TEST(RandomSearch, CountsRankingAndIds) {
    const auto& s = small();
    const auto cfg = quick_config(3);
    const auto res = random_search(cfg, s.splits, s.pool, s.data.target_id);
    ASSERT_EQ(res.trials.size(), 8u);
    for (std::size_t k = 0; k < res.trials.size(); ++k) {
        EXPECT_EQ(res.trials[k].trial_id, static_cast<int>(k));
        EXPECT_EQ(res.trials[k].variables, res.trials[k - k % 2].variables);  // one subset per grid pair
        const auto& v = res.trials[k].variables;
        EXPECT_GE(v.size(), 2u);
        EXPECT_LE(v.size(), 4u);
        for (const auto& id : v) EXPECT_NE(std::find(cfg.candidate_variable_ids.begin(), cfg.candidate_variable_ids.end(), id), cfg.candidate_variable_ids.end());
    }
    std::size_t ok = 0;
    for (const auto& t : res.trials) ok += t.ok;
    ASSERT_EQ(res.ranked.size(), ok);
    std::set<int> ids;
    for (const auto& r : res.ranked) ids.insert(r.trial_id);
    EXPECT_EQ(ids.size(), ok);
    EXPECT_TRUE(std::is_sorted(res.ranked.begin(), res.ranked.end(), ranks_before));
}

TEST(RandomSearch, SingleTrial) {
    const auto& s = small();
    auto cfg = quick_config(1);
    cfg.n_trials = 1;
    cfg.coarse_grid.resize(1);
    const auto res = random_search(cfg, s.splits, s.pool, s.data.target_id);
    EXPECT_EQ(res.trials.size(), 1u);
}

TEST(RandomSearch, DeterministicAndThreadIndependent) {
    const auto& s = small();
    auto cfg = quick_config(7);
    const auto a = random_search(cfg, s.splits, s.pool, s.data.target_id);
    const auto b = random_search(cfg, s.splits, s.pool, s.data.target_id);
    cfg.threads = 3;
    const auto c = random_search(cfg, s.splits, s.pool, s.data.target_id);
    ASSERT_EQ(a.ranked.size(), b.ranked.size());
    ASSERT_EQ(a.ranked.size(), c.ranked.size());
    for (std::size_t k = 0; k < a.ranked.size(); ++k) {
        EXPECT_TRUE(same(a.ranked[k], b.ranked[k]));
        EXPECT_TRUE(same(a.ranked[k], c.ranked[k]));
    }
    EXPECT_EQ(search_csv(a.trials), search_csv(c.trials));
}

TEST(RandomSearch, AllTrialsFailed) {
    const auto& s = small();
    auto cfg = quick_config(1);
    cfg.candidate_variable_ids = {"ghost1", "ghost2"};
    cfg.subset_min = 1;
    cfg.subset_max = 2;
    try {
        random_search(cfg, s.splits, s.pool, s.data.target_id);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::AllTrialsFailed);
    }
}

TEST(Refine, WinnerFromTopSubsetsAndNotWorseOnSameGrid) {
    const auto& s = small();
    auto cfg = quick_config(5);
    const TrialContext ctx(s.pool, s.data.target_id, s.splits, {}, cfg.candidate_variable_ids);
    const auto coarse = random_search(cfg, ctx);
    const int first = static_cast<int>(coarse.trials.size());
    const auto refined = refine_top_k(coarse.ranked, cfg, ctx, first);

    std::vector<std::vector<std::string>> top;
    for (const auto& r : coarse.ranked)
        if (top.size() < 2 && std::find(top.begin(), top.end(), r.variables) == top.end()) top.push_back(r.variables);
    EXPECT_NE(std::find(top.begin(), top.end(), refined.winner.variables), top.end());
    EXPECT_EQ(refined.trials.size(), top.size() * cfg.fine_grid.size());
    EXPECT_EQ(refined.trials.front().trial_id, first);

    std::vector<double> maes;
    for (const auto& r : coarse.ranked) maes.push_back(r.val_mae);
    std::sort(maes.begin(), maes.end());
    EXPECT_LE(refined.winner.val_mae, maes[(maes.size() - 1) / 2]);

    auto same_grid = cfg;
    same_grid.fine_grid = cfg.coarse_grid;
    EXPECT_LE(refine_top_k(coarse.ranked, same_grid, ctx, first).winner.val_mae, coarse.ranked.front().val_mae);

    same_grid.top_k = 1;
    const auto one = refine_top_k(coarse.ranked, same_grid, ctx, first);
    EXPECT_EQ(one.trials.size(), cfg.coarse_grid.size());
    EXPECT_EQ(one.winner.variables, coarse.ranked.front().variables);
}

TEST(SearchCsv, HeaderAndFailedRows) {
    TrialResult ok{0, {"a", "b"}, {12, 4, 0.01, 150, 1, 0.0}, 0.5, 0.75, true, {}};
    TrialResult bad{1, {"c"}, {18, 8, 0.03, 300, 1, 0.0}, 0.0, 0.0, false, "InsufficientData: x"};
    EXPECT_EQ(search_csv({ok, bad}),
              "trial_id,variables,hidden_size,n_timesteps,learning_rate,epochs,val_mae,val_rmse,status\n"
              "0,a;b,4,12,0.01,150,0.5,0.75,ok\n"
              "1,c,8,18,0.03,300,,,failed\n");
}
