#include "newsfame/dist_fit.hpp"
#include "newsfame/forecast.hpp"
#include "newsfame/hmm.hpp"
#include "newsfame/series.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace newsfame;

namespace {

const Date kStart = parse_date("2005-06-01");

HmmModel model(double beta, double height_mu) {
    HmmModel m;
    m.beta = beta;
    m.gamma = 0.25;
    m.normal_log_fame = {std::log(2.0), 0.5, std::nullopt, 0};
    m.peak_height_dist = {height_mu, 0.5, std::nullopt, 0};
    m.rise_time_dist = {std::log(3.0), 0.3, std::nullopt, 0};
    return m;
}

} // namespace

TEST(Property, FameMonotoneInFrequency) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(30);
        for (auto& x : v) x = u(rng);
        auto w = v;
        w[29] += 1.0 + u(rng);
        const FrequencySeries a("a", kStart, v), b("b", kStart, w);
        for (std::size_t win : {1u, 5u, 10u}) {
            EXPECT_LT(fame(a, win, 29).value, fame(b, win, 29).value) << win;
        }
        EXPECT_GE(fame(a, 1, 29).value, 0.0);
    }
}

TEST(Property, LognormalRecoveryAcrossSeeds) {
    int pass = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::lognormal_distribution<double> d(2.0, 0.8);
        std::vector<double> x(10'000);
        for (auto& v : x) v = d(rng);
        const auto f = fit_lognormal(x);
        const double se_mu = 0.8 / 100.0, se_sigma = 0.8 / std::sqrt(2.0 * 10'000);
        if (std::abs(f.mu - 2.0) <= 3 * se_mu && std::abs(f.sigma - 0.8) <= 3 * se_sigma) ++pass;
    }
    EXPECT_GE(pass, 18);
}

TEST(Property, PowerLawLogLinear) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> sl(-3.5, -0.5), ic(-2, 2), xs(1, 1e4);
    for (int k = 0; k < 200; ++k) {
        const auto f = PowerLawTailFit::from_coefficients(sl(rng), ic(rng));
        const double x = xs(rng);
        const double a = powerlaw_tail_prob(f, x), b = powerlaw_tail_prob(f, 10 * x);
        if (a >= 1.0 || b <= 0.0) continue; // clamped
        EXPECT_NEAR(std::log10(b) - std::log10(a), f.slope, 1e-9);
    }
}

TEST(Property, MaxFameSumsAndSymmetry) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mu(0, 4), sg(0.2, 1.5);
    for (int trial = 0; trial < 30; ++trial) {
        std::map<std::string, LogNormalFit> fits;
        for (int e = 0; e < 2 + trial % 5; ++e) fits["e" + std::to_string(e)] = {mu(rng), sg(rng), std::nullopt, 1};
        double s = 0;
        for (const auto& [id, p] : max_fame_prob_lognormal(fits)) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            s += p;
        }
        EXPECT_LE(s, 1.05);
    }
    for (std::size_t n : {2u, 3u, 7u}) {
        std::map<std::string, HmmModel> models;
        for (std::size_t e = 0; e < n; ++e) models["e" + std::to_string(e)] = model(0.02, 4.0);
        const auto hmm = max_fame_prob_hmm(models);
        for (const auto& [id, p] : hmm) EXPECT_DOUBLE_EQ(p, hmm.begin()->second);
        std::map<std::string, LogNormalFit> fits;
        for (std::size_t e = 0; e < n; ++e) fits["e" + std::to_string(e)] = {1.0, 0.7, std::nullopt, 1};
        if (n == 2) {
            for (const auto& [id, p] : max_fame_prob_lognormal(fits)) EXPECT_DOUBLE_EQ(p, 0.5);
        }
    }
}

TEST(Property, HmmMaxFameMonotoneInBeta) {
    const HmmModel rival = model(0.02, 4.0);
    double prev = -1;
    for (double beta : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
        const double p = max_fame_prob_hmm({{"a", model(beta, 4.0)}, {"b", rival}}).at("a");
        EXPECT_GE(p, prev) << beta;
        prev = p;
    }
}

TEST(Property, CommonRescalingKeepsArgmax) {
    // Multiplying every frequency by c shifts every log-scale mu by ln c.
    std::map<std::string, LogNormalFit> fits{{"a", {2.0, 0.5, std::nullopt, 1}},
                                             {"b", {1.2, 0.9, std::nullopt, 1}},
                                             {"c", {0.3, 0.4, std::nullopt, 1}}};
    const auto base = max_fame_prob_lognormal(fits);
    for (double c : {0.01, 3.0, 1e4}) {
        auto scaled = fits;
        for (auto& [id, f] : scaled) f.mu += std::log(c);
        const auto p = max_fame_prob_lognormal(scaled);
        for (const auto& [id, v] : base) EXPECT_NEAR(p.at(id), v, 1e-12);
    }
}

TEST(Property, ExtrapolationBound) {
    for (double p : {1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.1}) {
        for (std::size_t n : {1u, 2u, 10u, 100u, 1000u}) {
            const auto e = extrapolate_n_periods(p, n);
            const double np = static_cast<double>(n) * p;
            EXPECT_LE(e.exact, e.linear + 1e-15);
            if (np <= 1) { EXPECT_LE(std::abs(np - e.exact), np * np / 2 + 1e-15); }
            EXPECT_LE(e.linear, 1.0);
        }
    }
}

TEST(Property, BecomeFamousMonotone) {
    ForwardFameModel m{0, 20, 1, 1, PowerLawTailFit::from_coefficients(-1.7, 0.4), 1000};
    double prev = 2;
    for (double t = 1; t < 1e7; t *= 2.3) {
        const auto r = become_famous_prob(m, t);
        EXPECT_LE(r.probability, prev);
        EXPECT_DOUBLE_EQ(r.expected_count, r.probability * 1000);
        prev = r.probability;
    }
}

TEST(Property, EquivalenceMonotoneAndBelowDiagonal) {
    std::mt19937_64 rng(12);
    std::lognormal_distribution<double> d(0.0, 1.5);
    std::vector<std::string> ids;
    std::map<std::string, double> fame_map;
    for (int e = 0; e < 60; ++e) {
        ids.push_back("e" + std::to_string(e));
        fame_map[ids.back()] = d(rng);
    }
    const auto curve = fame_equivalence(GroupDefinition("g", ids), fame_map);
    ASSERT_EQ(curve.size(), 101u);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_GE(curve[i].beta_pct, curve[i - 1].beta_pct - 1e-9);
        EXPECT_LE(curve[i].beta_pct, curve[i].alpha_pct + 1e-9);
    }
}
