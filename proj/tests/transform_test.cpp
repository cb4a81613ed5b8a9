#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "nowkit/random.hpp"
#include "nowkit/transform.hpp"

using namespace nowkit;

namespace {

std::vector<double> values_of(const TimeSeries& s) {
    std::vector<double> v;
    for (const auto& o : s.observations) v.push_back(o.value);
    return v;
}

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::ConfigError;
}

}  // namespace

TEST(GrowthRate, HandComputed) {
    const auto g = growth_rate(fx::annual("x", 2000, {100, 110, 121}));
    ASSERT_EQ(g.size(), 2u);
    EXPECT_NEAR(g.observations[0].value, 0.10, 1e-15);
    EXPECT_NEAR(g.observations[1].value, 0.10, 1e-15);
    EXPECT_EQ(g.observations[0].period.year, 2001);
    EXPECT_EQ(g.frequency, Frequency::Annual);
}

TEST(GrowthRate, ConstantLevelsGiveZero) {
    EXPECT_EQ(values_of(growth_rate(fx::monthly("x", 2000, 1, {5, 5, 5, 5}))), (std::vector<double>{0, 0, 0}));
}

TEST(GrowthRate, ZeroBase) {
    EXPECT_EQ(code_of([] { growth_rate(fx::annual("x", 2000, {0, 3})); }), Errc::NonPositiveBase);
}

TEST(GrowthRate, GapsProduceNoOutput) {
    TimeSeries s{"x", Frequency::Annual, {}, {}};
    for (int y : {2000, 2001, 2003, 2004}) s.observations.push_back({{y, 1, Frequency::Annual}, 1.0 + y - 2000});
    const auto g = growth_rate(s);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g.observations[0].period.year, 2001);
    EXPECT_EQ(g.observations[1].period.year, 2004);
    TimeSeries lonely{"y", Frequency::Annual, {{{2000, 1, Frequency::Annual}, 1.0}, {{2002, 1, Frequency::Annual}, 2.0}}, {}};
    EXPECT_EQ(code_of([&] { growth_rate(lonely); }), Errc::InsufficientData);
}

TEST(GrowthRate, LogVariant) {
    const auto g = growth_rate(fx::annual("x", 2000, {1.0, std::exp(0.25)}), GrowthKind::Log);
    EXPECT_NEAR(g.observations[0].value, 0.25, 1e-15);
}

TEST(ReconstructLevel, HandComputedAndIdentity) {
    const std::vector<double> g{0.10, 0.10};
    const auto l = reconstruct_level(100.0, g);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_DOUBLE_EQ(l[1], 110.0);
    EXPECT_NEAR(l[2], 121.0, 1e-12);
    EXPECT_EQ(reconstruct_level(7.5, {}), (std::vector<double>{7.5}));
}

TEST(ReconstructLevel, RoundTripOnRandomPaths) {
    Rng rng(derive_seed(1, "levels"));
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> levels{rng.uniform(0.01, 1000.0)};
        const int n = static_cast<int>(rng.integer(2, 80));
        for (int k = 1; k < n; ++k) levels.push_back(levels.back() * (1.0 + rng.uniform(-0.5, 0.5)));
        const auto g = values_of(growth_rate(fx::annual("x", 1900, levels)));
        const auto back = reconstruct_level(levels.front(), g);
        ASSERT_EQ(back.size(), levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) EXPECT_LT(std::abs(back[k] / levels[k] - 1.0), 1e-10);
    }
}

TEST(SeasonalAdjust, RecoversConstructedLevel) {
    const std::vector<double> s12{3, -1, 2, -4, 0.5, 1.5, -2, 2.5, -0.5, 1, -3, 0};
    ASSERT_NEAR(std::accumulate(s12.begin(), s12.end(), 0.0), 0.0, 1e-15);
    std::vector<double> v;
    for (int m = 0; m < 48; ++m) v.push_back(10.0 + s12[static_cast<std::size_t>(m % 12)]);
    const auto adj = seasonal_adjust(fx::monthly("x", 2010, 1, v));
    ASSERT_EQ(adj.size(), 48u);
    for (const auto& o : adj.observations) EXPECT_NEAR(o.value, 10.0, 1e-9);
}

TEST(SeasonalAdjust, TrendPlusSeasonOnInteriorPoints) {
    const std::vector<double> s4{1.0, -0.25, 0.5, -1.25};
    std::vector<double> v;
    for (int q = 0; q < 40; ++q) v.push_back(50.0 + 0.3 * q + s4[static_cast<std::size_t>(q % 4)]);
    const auto adj = seasonal_adjust(fx::quarterly("q", 2000, 1, v));
    for (int q = 2; q < 38; ++q) EXPECT_NEAR(adj.observations[static_cast<std::size_t>(q)].value, 50.0 + 0.3 * q, 1e-9);
}

TEST(SeasonalAdjust, ConstantAndPureTrendUnchanged) {
    const auto flat = fx::monthly("c", 2000, 3, std::vector<double>(30, 4.2));
    EXPECT_EQ(values_of(seasonal_adjust(flat)), values_of(flat));
    std::vector<double> trend;
    for (int m = 0; m < 60; ++m) trend.push_back(1.0 + 0.01 * m);
    const auto adj = seasonal_adjust(fx::monthly("t", 2000, 1, trend));
    for (std::size_t m = 6; m < 54; ++m) EXPECT_NEAR(adj.observations[m].value, trend[m], 1e-9);
}

TEST(SeasonalAdjust, Preconditions) {
    EXPECT_EQ(code_of([] { seasonal_adjust(fx::annual("a", 2000, {1, 2, 3})); }), Errc::NotApplicable);
    EXPECT_EQ(code_of([] { seasonal_adjust(fx::monthly("m", 2000, 1, std::vector<double>(23, 1.0))); }), Errc::InsufficientData);
    EXPECT_NO_THROW(seasonal_adjust(fx::monthly("m", 2000, 1, std::vector<double>(24, 1.0))));
}

TEST(Standardize, HandComputed) {
    const auto s = fx::annual("x", 2000, {1, 2, 3});
    const auto p = standardize_fit(s, {2000, 2002});
    EXPECT_DOUBLE_EQ(p.mean, 2.0);
    EXPECT_NEAR(p.sd, 0.816497, 1e-6);
    const auto z = values_of(standardize_apply(s, p));
    EXPECT_NEAR(z[0], -1.224745, 1e-6);
    EXPECT_NEAR(z[1], 0.0, 1e-15);
    EXPECT_NEAR(z[2], 1.224745, 1e-6);
    const auto four = standardize_apply(fx::annual("x", 2003, {4}), p);
    EXPECT_NEAR(four.observations[0].value, 2.449490, 1e-6);
}

TEST(Standardize, Errors) {
    EXPECT_EQ(code_of([] { standardize_fit(fx::annual("x", 2000, {5, 5, 5}), {2000, 2002}); }), Errc::ZeroVariance);
    EXPECT_EQ(code_of([] { standardize_fit(fx::annual("x", 2000, {1, 2, 3}), {2002, 2010}); }), Errc::InsufficientData);
}

TEST(Standardize, FitRangeExcludesLaterYears) {
    const auto s = fx::annual("x", 2001, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 1000, -1000});
    const auto p = standardize_fit(s, {2001, 2011});
    EXPECT_DOUBLE_EQ(p.mean, 6.0);
    EXPECT_EQ(p.fitted_on, (YearRange{2001, 2011}));
}

TEST(Standardize, TrainingSpanHasUnitMoments) {
    Rng rng(derive_seed(5, "std"));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v;
        for (int k = 0; k < 120; ++k) v.push_back(rng.normal() * 37.0 + 1e3);
        const auto s = fx::monthly("x", 2001, 1, v);
        const YearRange fit{2001, 2008};
        const auto z = standardize_apply(s, standardize_fit(s, fit));
        double sum = 0.0, sq = 0.0;
        int n = 0;
        for (const auto& o : z.observations)
            if (fit.contains(o.period.year)) {
                sum += o.value;
                ++n;
            }
        const double mean = sum / n;
        for (const auto& o : z.observations)
            if (fit.contains(o.period.year)) sq += (o.value - mean) * (o.value - mean);
        EXPECT_LT(std::abs(mean), 1e-12);
        EXPECT_LT(std::abs(std::sqrt(sq / n) - 1.0), 1e-12);
    }
}

TEST(Align, QuarterlyAndAnnualPlacement) {
    const MonthGrid grid{MonthIndex::of(2020, 1), MonthIndex::of(2020, 12)};
    const auto q = align_to_monthly(fx::quarterly("q", 2020, 1, {7.0}), grid);
    EXPECT_EQ(q.at(MonthIndex::of(2020, 3)), 7.0);
    EXPECT_FALSE(q.at(MonthIndex::of(2020, 1)).has_value());
    EXPECT_FALSE(q.at(MonthIndex::of(2020, 2)).has_value());
    const auto a = align_to_monthly(fx::annual("a", 2020, {3.0}), grid);
    EXPECT_EQ(a.at(MonthIndex::of(2020, 12)), 3.0);
    EXPECT_EQ(a.missing_count(), 11u);
}

TEST(Align, MonthlyIsOneToOne) {
    const auto s = fx::monthly("m", 2019, 6, {1, 2, 3, 4, 5, 6, 7});
    const auto col = align_to_monthly(s, {MonthIndex::of(2019, 6), MonthIndex::of(2019, 12)});
    EXPECT_EQ(col.missing_count(), 0u);
    for (int k = 0; k < 7; ++k) EXPECT_EQ(col.values[static_cast<std::size_t>(k)], k + 1.0);
}

TEST(Align, EmptyOverlap) {
    EXPECT_EQ(code_of([] { align_to_monthly(fx::annual("a", 2000, {1}), {MonthIndex::of(2010, 1), MonthIndex::of(2010, 12)}); }),
              Errc::EmptyOverlap);
}

TEST(FillMissing, Cases) {
    const AlignedColumn col{"x", MonthIndex::of(2000, 1), {std::nullopt, 1.0, std::nullopt}};
    const auto f = fill_missing(col);
    EXPECT_EQ(f.values, (std::vector<std::optional<double>>{0.0, 1.0, 0.0}));
    const AlignedColumn full{"x", MonthIndex::of(2000, 1), {2.0, 3.0}};
    EXPECT_EQ(fill_missing(full).values, full.values);
    const AlignedColumn none{"x", MonthIndex::of(2000, 1), {std::nullopt, std::nullopt}};
    EXPECT_EQ(code_of([&] { fill_missing(none); }), Errc::AllMissing);
}

namespace {

std::shared_ptr<const SeriesPool> pool_of(std::vector<TimeSeries> s) { return std::make_shared<const SeriesPool>(std::move(s)); }

AlignedColumn column(const TimeSeries& s) {
    return align_to_monthly(s, {period_to_month(s.observations.front().period), period_to_month(s.observations.back().period)});
}

}  // namespace

TEST(DesignMatrix, RaggedEdgeAtMarch) {
    std::vector<double> v(72);
    std::iota(v.begin(), v.end(), 1.0);
    const auto s = fx::monthly("m", 2012, 1, v, 1);
    const auto pool = pool_of({s});
    const auto snap = snapshot_at(pool, {2015, 3});
    const std::vector<AlignedColumn> cols{column(s)};
    const auto dm = build_design_matrix(cols, 2015, 12, &snap);
    ASSERT_EQ(dm.values.size(), 12u);
    EXPECT_EQ(dm.observed[0], 1);
    EXPECT_EQ(dm.observed[1], 1);
    EXPECT_EQ(dm(0, 0), 37.0);
    EXPECT_EQ(dm(1, 0), 38.0);
    for (int r = 2; r < 12; ++r) {
        EXPECT_EQ(dm.observed[static_cast<std::size_t>(r)], 0);
        EXPECT_EQ(dm(r, 0), 0.0);
    }
    EXPECT_EQ(dm.filled_cells(), 10u);
}

TEST(DesignMatrix, FullDataBySevenMonthsAfter) {
    std::vector<TimeSeries> series;
    for (int lag = 0; lag <= 7; ++lag) series.push_back(fx::monthly("m" + std::to_string(lag), 2013, 1, std::vector<double>(48, 1.0 + lag), lag));
    series.push_back(fx::quarterly("q", 2013, 1, std::vector<double>(16, 2.0), 4));
    const auto pool = pool_of(series);
    std::vector<AlignedColumn> cols;
    for (const auto& s : series) cols.push_back(column(s));
    const auto snap = snapshot_at(pool, {2016, 7});
    const auto dm = build_design_matrix(cols, 2015, 12, &snap);
    EXPECT_EQ(dm.filled_cells(), 8u);  // the quarterly column only has quarter-end cells
    const auto full = build_design_matrix(cols, 2015, 12, nullptr);
    EXPECT_EQ(dm, full);
}

TEST(DesignMatrix, SingleRowIsDecember) {
    const auto s = fx::monthly("m", 2015, 1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    const std::vector<AlignedColumn> cols{column(s)};
    const auto dm = build_design_matrix(cols, 2015, 1, nullptr);
    EXPECT_EQ(dm.n_timesteps, 1);
    EXPECT_EQ(dm.first_month(), MonthIndex::of(2015, 12));
    EXPECT_EQ(dm(0, 0), 12.0);
}

TEST(DesignMatrix, AllMissingUnlessAllowed) {
    const auto s = fx::monthly("m", 2015, 1, std::vector<double>(12, 1.0), 3);
    const auto pool = pool_of({s});
    const std::vector<AlignedColumn> cols{column(s)};
    const auto snap = snapshot_at(pool, {2015, 2});
    EXPECT_EQ(code_of([&] { build_design_matrix(cols, 2015, 12, &snap); }), Errc::AllMissing);
    const auto dm = build_design_matrix(cols, 2015, 12, &snap, {.allow_all_missing = true});
    EXPECT_EQ(dm.filled_cells(), 12u);
    for (double x : dm.values) EXPECT_EQ(x, 0.0);
}

TEST(DesignMatrix, MonotoneInVintage) {
    Rng rng(derive_seed(11, "monotone"));
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TimeSeries> series;
        for (int k = 0; k < 4; ++k) {
            std::vector<double> v(60);
            for (auto& x : v) x = rng.normal();
            const int lag = static_cast<int>(rng.integer(0, 12));
            if (k % 2 == 0)
                series.push_back(fx::monthly("m" + std::to_string(k), 2012, 1, v, lag));
            else
                series.push_back(fx::quarterly("q" + std::to_string(k), 2012, 1, std::vector<double>(v.begin(), v.begin() + 20), lag));
        }
        const auto pool = pool_of(series);
        std::vector<AlignedColumn> cols;
        for (const auto& s : series) cols.push_back(column(s));
        std::optional<DesignMatrix> prev;
        for (const auto& v : trace_schedule(2015)) {
            const auto snap = snapshot_at(pool, v);
            const auto dm = build_design_matrix(cols, 2015, 18, &snap, {.allow_all_missing = true});
            for (double x : dm.values) EXPECT_TRUE(std::isfinite(x));
            if (prev) {
                for (std::size_t c = 0; c < dm.values.size(); ++c) {
                    EXPECT_GE(dm.observed[c], prev->observed[c]);
                    if (prev->observed[c]) EXPECT_EQ(dm.values[c], prev->values[c]);
                }
                EXPECT_LE(dm.filled_cells(), prev->filled_cells());
            }
            prev = dm;
        }
    }
}
