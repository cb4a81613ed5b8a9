#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nowkit/random.hpp"
#include "nowkit/series.hpp"

namespace nowkit::synthetic {

// Data-generating process with a known answer: an annual target whose growth is
// a linear mix of the yearly average of three monthly AR(1) growth paths, plus
// noise, hidden among distractors of mixed frequency.

struct DgpSettings {
    std::uint64_t seed = 20211015;
    int first_year = 1989;
    int last_year = 2019;
    int n_monthly_distractors = 12;
    int n_quarterly_distractors = 3;
    int n_annual_distractors = 2;
    double ar = 0.8;                  // AR(1) coefficient of monthly growth
    double innovation_sd = 0.006;     // monthly growth innovation sd
    double drift = 0.002;             // mean monthly growth
    std::vector<double> betas = {0.012, -0.010, 0.008};
    double target_mean_growth = -0.012;
    double noise_sd = 0.0015;
    double target_initial_level = 0.5;
    int target_lag_months = 24;
};

struct Dataset {
    std::vector<TimeSeries> pool;  // target first, then candidates
    std::string target_id;
    std::vector<std::string> candidate_ids;
    std::vector<std::string> informative_ids;
};

namespace detail {

inline std::string var_name(int k) {
    std::string n = std::to_string(k);
    if (n.size() < 2) n.insert(n.begin(), '0');
    return "x" + n;
}

/// Monthly growth path, one value per month of the DGP span (plus burn-in).
inline std::vector<double> ar_path(Rng& rng, const DgpSettings& s, int months) {
    std::vector<double> g(static_cast<std::size_t>(months));
    double dev = 0.0;
    const double stat_sd = s.innovation_sd / std::sqrt(1.0 - s.ar * s.ar);
    dev = stat_sd * rng.normal();
    for (int burn = 0; burn < 24; ++burn) dev = s.ar * dev + s.innovation_sd * rng.normal();
    for (auto& x : g) {
        dev = s.ar * dev + s.innovation_sd * rng.normal();
        x = s.drift + dev;
    }
    return g;
}

inline std::vector<double> levels_from_growth(const std::vector<double>& g, double start) {
    std::vector<double> out;
    double l = start;
    for (double x : g) {
        l *= 1.0 + x;
        out.push_back(l);
    }
    return out;
}

}  // namespace detail

inline Dataset generate(const DgpSettings& s = {}) {
    Rng rng(derive_seed(s.seed, "dgp"));
    const int years = s.last_year - s.first_year + 1;
    const int months = 12 * years;
    const int n_inf = static_cast<int>(s.betas.size());
    const int n_cand = n_inf + s.n_monthly_distractors + s.n_quarterly_distractors + s.n_annual_distractors;

    // Informative variables sit at scattered, fixed positions among candidates.
    std::vector<int> informative_slots;
    for (int k = 0; k < n_inf; ++k) informative_slots.push_back((k * 7 + 3) % n_cand);

    Dataset d;
    d.target_id = "target";
    const double stat_sd = s.innovation_sd / std::sqrt(1.0 - s.ar * s.ar);

    std::vector<std::vector<double>> informative_growth;
    int next_monthly = 0, next_quarterly = 0, next_annual = 0;
    std::vector<TimeSeries> candidates;
    for (int slot = 0; slot < n_cand; ++slot) {
        const std::string id = detail::var_name(slot + 1);
        d.candidate_ids.push_back(id);
        auto it = std::find(informative_slots.begin(), informative_slots.end(), slot);
        TimeSeries ts{id, Frequency::Monthly, {}, {}};
        if (it != informative_slots.end()) {
            const int k = static_cast<int>(it - informative_slots.begin());
            auto g = detail::ar_path(rng, s, months);
            informative_growth.push_back(g);
            d.informative_ids.push_back(id);
            ts.schedule.lag_months = 1 + k;
            const auto lv = detail::levels_from_growth(g, 100.0);
            for (int m = 0; m < months; ++m)
                ts.observations.push_back({{s.first_year + m / 12, m % 12 + 1, Frequency::Monthly}, lv[static_cast<std::size_t>(m)]});
        } else if (next_monthly < s.n_monthly_distractors) {
            const auto g = detail::ar_path(rng, s, months);
            const auto lv = detail::levels_from_growth(g, 50.0 + 10.0 * next_monthly);
            const bool seasonal = next_monthly % 3 == 0;
            ts.schedule.lag_months = 1 + next_monthly % 4;
            for (int m = 0; m < months; ++m) {
                const double season = seasonal ? 0.8 * std::sin(6.283185307179586 * (m % 12) / 12.0) : 0.0;
                ts.observations.push_back({{s.first_year + m / 12, m % 12 + 1, Frequency::Monthly},
                                           lv[static_cast<std::size_t>(m)] + season});
            }
            ++next_monthly;
        } else if (next_quarterly < s.n_quarterly_distractors) {
            const auto g = detail::ar_path(rng, s, months);
            const auto lv = detail::levels_from_growth(g, 80.0);
            ts.frequency = Frequency::Quarterly;
            ts.schedule.lag_months = 2 + next_quarterly % 3;
            for (int q = 0; q < 4 * years; ++q)
                ts.observations.push_back({{s.first_year + q / 4, q % 4 + 1, Frequency::Quarterly}, lv[static_cast<std::size_t>(3 * q + 2)]});
            ++next_quarterly;
        } else {
            const auto g = detail::ar_path(rng, s, months);
            const auto lv = detail::levels_from_growth(g, 120.0);
            ts.frequency = Frequency::Annual;
            ts.schedule.lag_months = 5 + next_annual % 3;
            for (int y = 0; y < years; ++y)
                ts.observations.push_back({{s.first_year + y, 1, Frequency::Annual}, lv[static_cast<std::size_t>(12 * y + 11)]});
            ++next_annual;
        }
        candidates.push_back(std::move(ts));
    }

    TimeSeries target{d.target_id, Frequency::Annual, {}, {s.target_lag_months}};
    double level = s.target_initial_level;
    target.observations.push_back({{s.first_year, 1, Frequency::Annual}, level});
    for (int y = 1; y < years; ++y) {
        double growth = s.target_mean_growth + s.noise_sd * rng.normal();
        for (int k = 0; k < n_inf; ++k) {
            double avg = 0.0;
            for (int m = 12 * y; m < 12 * y + 12; ++m) avg += (informative_growth[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] - s.drift) / stat_sd;
            growth += s.betas[static_cast<std::size_t>(k)] * avg / 12.0;
        }
        level *= 1.0 + growth;
        target.observations.push_back({{s.first_year + y, 1, Frequency::Annual}, level});
    }
    d.pool.push_back(std::move(target));
    for (auto& c : candidates) d.pool.push_back(std::move(c));
    return d;
}

}  // namespace nowkit::synthetic
