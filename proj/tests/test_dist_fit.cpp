#include "newsfame/dist_fit.hpp"
#include "newsfame/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace newsfame;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::io_error;
}

} // namespace

TEST(FitLognormal, TwoPoints) {
    const std::vector<double> v{1.0, std::exp(2.0)};
    const auto f = fit_lognormal(v);
    EXPECT_NEAR(f.mu, 1.0, 1e-14);
    EXPECT_NEAR(f.sigma, 1.0, 1e-14);
    EXPECT_FALSE(f.truncation_point.has_value());
    EXPECT_EQ(f.sample_size, 2u);
}

TEST(FitLognormal, Errors) {
    EXPECT_EQ(code_of([] { fit_lognormal(std::vector<double>(5, std::exp(1.0))); }), ErrorCode::degenerate_sample);
    EXPECT_EQ(code_of([] { fit_lognormal(std::vector<double>{1.0, 0.0}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { fit_lognormal(std::vector<double>{1.0}); }), ErrorCode::insufficient_data);
}

TEST(FitLognormal, RecoversGenerator) {
    std::mt19937_64 rng(1234);
    std::lognormal_distribution<double> d(2.0, 0.5);
    std::vector<double> v(10'000);
    for (auto& x : v) x = d(rng);
    const auto f = fit_lognormal(v);
    EXPECT_NEAR(f.mu, 2.0, 0.02);
    EXPECT_NEAR(f.sigma, 0.5, 0.02);
}

TEST(FitTruncated, UntruncatedLimit) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d(0.3, 1.2);
    std::vector<double> logs(500);
    for (auto& x : logs) x = d(rng);
    std::vector<double> raw;
    for (double x : logs) raw.push_back(std::exp(x));
    const auto a = fit_truncated_lognormal(logs, kNegInf);
    const auto b = fit_lognormal(raw);
    EXPECT_NEAR(a.mu, b.mu, 1e-12);
    EXPECT_NEAR(a.sigma, b.sigma, 1e-12);
    EXPECT_FALSE(a.truncation_point.has_value());
}

TEST(FitTruncated, RecoversRejectionSample) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> d(0.5, 1.0);
    std::vector<double> v;
    while (v.size() < 20'000) {
        const double x = d(rng);
        if (x >= 0.0) v.push_back(x);
    }
    const auto f = fit_truncated_lognormal(v, 0.0);
    EXPECT_NEAR(f.mu, 0.5, 0.05);
    EXPECT_NEAR(f.sigma, 1.0, 0.05);
    ASSERT_TRUE(f.truncation_point.has_value());
    EXPECT_EQ(*f.truncation_point, 0.0);
}

TEST(FitTruncated, Errors) {
    EXPECT_EQ(code_of([] { fit_truncated_lognormal(std::vector<double>(10, 0.0), 0.0); }),
              ErrorCode::degenerate_sample);
    EXPECT_EQ(code_of([] { fit_truncated_lognormal(std::vector<double>{1.0, -1.0, 2.0}, 0.0); }),
              ErrorCode::invalid_argument);
}

TEST(LognormalTail, StandardValues) {
    const LogNormalFit f{1.5, 0.7, std::nullopt, 10};
    EXPECT_NEAR(lognormal_tail_prob(f, 1.5), 0.5, 1e-15);
    EXPECT_NEAR(lognormal_tail_prob(f, 2.2), 0.158655253931457, 1e-12);
    EXPECT_NEAR(lognormal_tail_prob(f, -1e6), 1.0, 1e-15);
    EXPECT_EQ(lognormal_tail_prob(f, 1e6), 0.0);
}

TEST(LognormalTail, TruncatedRenormalised) {
    const LogNormalFit f{0.0, 1.0, 0.0, 10};
    EXPECT_EQ(lognormal_tail_prob(f, -3.0), 1.0);
    EXPECT_EQ(lognormal_tail_prob(f, 0.0), 1.0);
    // Pr(X > 1 | X > 0) = Q(1) / Q(0)
    EXPECT_NEAR(lognormal_tail_prob(f, 1.0), 0.158655253931457 / 0.5, 1e-12);
    // Deep tail stays positive and finite.
    const LogNormalFit deep{0.0, 1.0, 40.0, 10};
    const double p = lognormal_tail_prob(deep, 41.0);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
}

TEST(LognormalTail, MatchesEmpiricalOnSyntheticGroup) {
    // Total fame of a synthetic group: ln(1 + sum of log-normal members).
    std::mt19937_64 rng(21);
    std::lognormal_distribution<double> d(1.0, 0.8);
    std::vector<double> total(5000);
    for (auto& t : total) {
        double s = 0;
        for (int k = 0; k < 20; ++k) s += d(rng);
        t = std::log1p(s);
    }
    const auto fit = fit_normal(total);
    const auto ccdf = empirical_ccdf(total);
    double gap = 0;
    for (const auto& p : ccdf.points) gap = std::max(gap, std::abs(p.prob - lognormal_tail_prob(fit, p.x)));
    EXPECT_LT(gap, 0.05);
}

TEST(EmpiricalCcdf, RankArithmetic) {
    const auto c = empirical_ccdf(std::vector<double>{3, 1, 4, 2});
    ASSERT_EQ(c.points.size(), 3u);
    EXPECT_EQ(c.points[0].x, 1.0);
    EXPECT_EQ(c.points[0].prob, 0.75);
    EXPECT_EQ(c.points[1].prob, 0.5);
    EXPECT_EQ(c.points[2].x, 3.0);
    EXPECT_EQ(c.points[2].prob, 0.25);
    EXPECT_EQ(c.sample_size, 4u);
}

TEST(EmpiricalCcdf, Degenerate) {
    EXPECT_EQ(code_of([] { empirical_ccdf(std::vector<double>(6, 2.0)); }), ErrorCode::degenerate_sample);
    EXPECT_THROW(empirical_ccdf(std::vector<double>{}), Error);
}

TEST(EmpiricalCcdf, ZerosCountButAreNotPoints) {
    const auto c = empirical_ccdf(std::vector<double>{0, 0, 1, 2});
    ASSERT_EQ(c.points.size(), 1u);
    EXPECT_EQ(c.points[0].x, 1.0);
    EXPECT_EQ(c.points[0].prob, 0.25);
}

TEST(EmpiricalCcdf, CountingOracle) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> d(1, 300);
    std::vector<double> v(5000);
    for (auto& x : v) x = d(rng);
    const auto c = empirical_ccdf(v);
    double prev_x = 0, prev_p = 2;
    for (const auto& p : c.points) {
        const auto above = std::count_if(v.begin(), v.end(), [&](double x) { return x > p.x; });
        EXPECT_EQ(p.prob, static_cast<double>(above) / v.size());
        EXPECT_GT(p.x, prev_x);
        EXPECT_LT(p.prob, prev_p);
        prev_x = p.x;
        prev_p = p.prob;
    }
}

TEST(PowerLawFit, ExactLine) {
    EmpiricalCcdf c;
    c.sample_size = 3;
    for (double x : {10.0, 100.0, 1000.0}) c.points.push_back({x, std::pow(x, -2.0)});
    const auto f = fit_powerlaw_tail(c, 1.0);
    EXPECT_NEAR(f.slope, -2.0, 1e-9);
    EXPECT_NEAR(f.intercept, 0.0, 1e-9);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(f.sample_size, 3u);
}

TEST(PowerLawFit, TooFewPoints) {
    EmpiricalCcdf c;
    c.points = {{1, 0.5}, {2, 0.25}, {3, 0.1}};
    EXPECT_EQ(code_of([&] { fit_powerlaw_tail(c, 2.0); }), ErrorCode::insufficient_data);
}

TEST(PowerLawFit, ParetoSample) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(50'000);
    for (auto& x : v) x = std::pow(1.0 - u(rng), -1.0 / 2.0);
    const auto f = fit_powerlaw_tail(empirical_ccdf(v), 1.0);
    EXPECT_NEAR(-f.slope, 2.0, 0.1);
}

TEST(PowerLawProb, PublishedCoefficients) {
    const auto a = PowerLawTailFit::from_coefficients(-1.415, 0.079);
    EXPECT_NEAR(powerlaw_tail_prob(a, 3000) / 1.44e-5, 1.0, 0.01);
    const auto b = PowerLawTailFit::from_coefficients(-1.734, 0.362);
    EXPECT_NEAR(powerlaw_tail_prob(b, 20000) / 8.02e-8, 1.0, 0.01);
    const auto c = PowerLawTailFit::from_coefficients(-2.803, -1.060);
    EXPECT_NEAR(powerlaw_tail_prob(c, 100) / 2.16e-7, 1.0, 0.01);
}

TEST(PowerLawProb, ClampAndDomain) {
    const auto f = PowerLawTailFit::from_coefficients(-1.0, 2.0, 5.0);
    EXPECT_EQ(powerlaw_tail_prob(f, 5.0), 1.0);
    EXPECT_EQ(code_of([&] { powerlaw_tail_prob(f, 4.0); }), ErrorCode::invalid_argument);
    EXPECT_THROW(PowerLawTailFit::from_coefficients(0.5, 0.0), Error);
}

TEST(ExpectedCount, Arithmetic) {
    EXPECT_NEAR(expected_count(1.44e-5, 1'022'651), 14.73, 0.01);
    EXPECT_NEAR(expected_count(8.017e-8, 3e8), 24.05, 0.01);
    EXPECT_EQ(expected_count(0.0, 1e9), 0.0);
    EXPECT_THROW(expected_count(1.5, 10), Error);
}
