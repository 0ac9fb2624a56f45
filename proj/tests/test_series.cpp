#include "newsfame/error.hpp"
#include "newsfame/series.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace newsfame;

namespace {

const Date kStart = parse_date("2020-01-01");

FrequencySeries make(std::string id, std::vector<double> v) {
    return FrequencySeries(std::move(id), kStart, std::move(v));
}

// Independent recomputation: plain loop, no shared helper.
double oracle_fame(const std::vector<double>& v, std::size_t window, std::size_t end) {
    long double sum = 0;
    for (std::size_t i = end + 1 - window; i <= end; ++i) sum += v[i];
    return std::log(1.0 + static_cast<double>(sum / window));
}

} // namespace

TEST(FrequencySeries, RejectsNegativeAndEmpty) {
    EXPECT_THROW(make("a", {}), Error);
    EXPECT_THROW(make("a", {1.0, -0.5}), Error);
    EXPECT_THROW(make("a", {NAN}), Error);
}

TEST(FrequencySeries, DatesAndSlices) {
    const auto s = make("a", {1, 2, 3, 4});
    EXPECT_EQ(format_date(s.end_date()), "2020-01-04");
    EXPECT_EQ(s.index_of(parse_date("2020-01-03")), 2u);
    EXPECT_FALSE(s.index_of(parse_date("2019-12-31")).has_value());
    const auto sl = s.slice(1, 2);
    EXPECT_EQ(format_date(sl.start_date()), "2020-01-02");
    EXPECT_EQ(sl.size(), 2u);
    EXPECT_DOUBLE_EQ(sl[1], 3.0);
}

TEST(Fame, PaperAverages) {
    const auto clooney = make("c", std::vector<double>(10, 0.963));
    EXPECT_NEAR(fame(clooney, 10, 9).value, 0.675, 0.001);
    const auto leeb = make("l", std::vector<double>(10, 0.263));
    EXPECT_NEAR(fame(leeb, 10, 9).value, 0.234, 0.001);
}

TEST(Fame, ZeroWindowIsZero) {
    const auto s = make("a", {0, 0, 0, 5});
    EXPECT_EQ(fame(s, 3, 2).value, 0.0);
}

TEST(Fame, InsufficientHistory) {
    const auto s = make("a", {1, 2, 3});
    try {
        fame(s, 4, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
    }
    EXPECT_THROW(fame(s, 0, 2), Error);
}

TEST(FameSeries, WindowOneIsLog1p) {
    const auto s = make("a", {std::exp(1.0) - 1.0, 0.0});
    const auto f = fame_series(s, 1);
    ASSERT_EQ(f.values.size(), 2u);
    EXPECT_NEAR(f.values[0], 1.0, 1e-15);
    EXPECT_EQ(f.values[1], 0.0);
}

TEST(FameSeries, ConstantSeries) {
    const auto s = make("a", std::vector<double>(20, 3.5));
    for (double v : fame_series(s, 7).values) EXPECT_NEAR(v, std::log1p(3.5), 1e-14);
}

TEST(FameSeries, RampMatchesRecomputation) {
    std::vector<double> v;
    for (int i = 0; i < 50; ++i) v.push_back(0.37 * i + (i % 3));
    const auto s = make("a", v);
    const auto f = fame_series(s, 6);
    EXPECT_EQ(f.first_index, 5u);
    ASSERT_EQ(f.values.size(), 45u);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        EXPECT_NEAR(f.values[k], oracle_fame(v, 6, k + 5), 1e-12);
    }
}

TEST(PeakFame, SingleSpike) {
    std::vector<double> v(365, 0.0);
    v[100] = 50.0;
    EXPECT_NEAR(peak_fame(make("a", v), 0, 364, 5).value, std::log1p(10.0), 1e-14);
}

TEST(PeakFame, BruteForceOracle) {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> d(0.2);
    std::vector<double> v(200);
    for (auto& x : v) x = d(rng);
    const auto s = make("a", v);
    double best = 0.0;
    for (std::size_t end = 20 + 4; end <= 150; ++end) best = std::max(best, oracle_fame(v, 5, end));
    EXPECT_NEAR(peak_fame(s, 20, 150, 5).value, best, 1e-12);
    EXPECT_NEAR(peak_fame(s, parse_date("2020-01-21"), parse_date("2020-05-30"), 5).value, best, 1e-12);
}

TEST(PeakFame, PeriodShorterThanWindow) {
    EXPECT_THROW(peak_fame(make("a", {1, 2, 3, 4, 5, 6}), 0, 2, 5), Error);
}

TEST(GroupDefinition, Validation) {
    EXPECT_THROW(GroupDefinition("g", {}), Error);
    EXPECT_THROW(GroupDefinition("g", {"a", "b", "a"}), Error);
    GroupDefinition g("g", {"a", "b"});
    EXPECT_EQ(g.size(), 2u);
    EXPECT_TRUE(g.contains("b"));
    EXPECT_FALSE(g.contains("c"));
}

TEST(GroupFame, TwoConstantMembers) {
    SeriesMap m;
    m.emplace("a", make("a", std::vector<double>(5, 3.0)));
    m.emplace("b", make("b", std::vector<double>(5, 1.0)));
    GroupDefinition g("g", {"a", "b"});
    EXPECT_NEAR(group_fame_series(g, m, GroupFameKind::total, 1).values[2], std::log(5.0), 1e-14);
    EXPECT_NEAR(group_fame_series(g, m, GroupFameKind::average, 1).values[2], std::log(3.0), 1e-14);
    EXPECT_NEAR(group_fame_series(g, m, GroupFameKind::maximum, 1).values[2], std::log(4.0), 1e-14);
}

TEST(GroupFame, SingleMemberEqualsEntity) {
    SeriesMap m;
    m.emplace("a", make("a", {1, 5, 0, 2, 9, 3}));
    GroupDefinition g("g", {"a"});
    const auto ref = fame_series(m.at("a"), 2).values;
    for (auto kind : {GroupFameKind::total, GroupFameKind::average, GroupFameKind::maximum}) {
        const auto got = group_fame_series(g, m, kind, 2).values;
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_DOUBLE_EQ(got[k], ref[k]);
    }
}

TEST(GroupFame, TenMembersBruteForce) {
    std::mt19937_64 rng(11);
    std::gamma_distribution<double> d(0.8, 4.0);
    SeriesMap m;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> raw;
    for (int e = 0; e < 10; ++e) {
        std::vector<double> v(60);
        for (auto& x : v) x = d(rng);
        ids.push_back("e" + std::to_string(e));
        raw.push_back(v);
        m.emplace(ids.back(), make(ids.back(), v));
    }
    GroupDefinition g("g", ids);
    const std::size_t w = 4;
    const auto total = group_fame_series(g, m, GroupFameKind::total, w);
    const auto avg = group_fame_series(g, m, GroupFameKind::average, w);
    const auto mx = group_fame_series(g, m, GroupFameKind::maximum, w);
    for (std::size_t k = 0; k < total.values.size(); ++k) {
        const std::size_t end = k + w - 1;
        double sum = 0, top = 0;
        for (const auto& v : raw) {
            double mean = 0;
            for (std::size_t i = end + 1 - w; i <= end; ++i) mean += v[i];
            mean /= w;
            sum += mean;
            top = std::max(top, mean);
        }
        EXPECT_NEAR(total.values[k], std::log1p(sum), 1e-12);
        EXPECT_NEAR(avg.values[k], std::log1p(sum / 10), 1e-12);
        EXPECT_NEAR(mx.values[k], std::log1p(top), 1e-12);
        EXPECT_GE(total.values[k], mx.values[k]);
        EXPECT_GE(mx.values[k], avg.values[k]);
    }
}

TEST(GroupFame, MissingMemberNamed) {
    SeriesMap m;
    m.emplace("a", make("a", {1, 2}));
    GroupDefinition g("g", {"a", "ghost"});
    try {
        group_fame_series(g, m, GroupFameKind::total, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::missing_member);
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }
}

TEST(GroupFame, ParseKind) {
    EXPECT_EQ(parse_group_fame_kind("maximum"), GroupFameKind::maximum);
    EXPECT_STREQ(to_string(GroupFameKind::average), "average");
    EXPECT_THROW(parse_group_fame_kind("median"), Error);
}

namespace {

// Accumulation oracle: walk entities top-down until the mass matches.
double oracle_beta(std::vector<double> fames, double alpha_pct) {
    std::sort(fames.begin(), fames.end());
    const double n = static_cast<double>(fames.size());
    const double bottom_count = alpha_pct / 100.0 * n;
    double bottom = 0;
    for (std::size_t i = 0; i < fames.size(); ++i) {
        const double take = std::clamp(bottom_count - static_cast<double>(i), 0.0, 1.0);
        bottom += take * fames[i];
    }
    double acc = 0, count = 0;
    for (std::size_t i = fames.size(); i-- > 0;) {
        if (acc + fames[i] >= bottom) {
            count += fames[i] > 0 ? (bottom - acc) / fames[i] : 0;
            return 100.0 * count / n;
        }
        acc += fames[i];
        count += 1;
    }
    return 100.0;
}

} // namespace

TEST(FameEquivalence, EqualFameIsDiagonal) {
    GroupDefinition g("g", {"a", "b", "c", "d"});
    const auto pts = fame_equivalence(g, {{"a", 2}, {"b", 2}, {"c", 2}, {"d", 2}});
    for (const auto& p : pts) EXPECT_NEAR(p.beta_pct, p.alpha_pct, 1e-9);
    EXPECT_DOUBLE_EQ(pts.back().alpha_pct, 100.0);
    EXPECT_DOUBLE_EQ(pts.back().beta_pct, 100.0);
}

TEST(FameEquivalence, OneDominantEntity) {
    GroupDefinition g("g", {"a", "b", "c", "d", "e"});
    const auto pts = fame_equivalence(g, {{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}, {"e", 96}});
    const auto it = std::find_if(pts.begin(), pts.end(), [](const auto& p) { return p.alpha_pct == 80.0; });
    ASSERT_NE(it, pts.end());
    EXPECT_NEAR(it->beta_pct, 100.0 / 120.0, 1e-9); // 20% * 4/96
}

TEST(FameEquivalence, PowerLawBelowDiagonal) {
    std::vector<std::string> ids;
    std::map<std::string, double> fames;
    std::vector<double> raw;
    for (int i = 1; i <= 200; ++i) {
        ids.push_back("e" + std::to_string(i));
        fames[ids.back()] = 1000.0 * std::pow(i, -1.5);
        raw.push_back(fames[ids.back()]);
    }
    GroupDefinition g("g", ids);
    const auto pts = fame_equivalence(g, fames);
    double prev = -1;
    for (const auto& p : pts) {
        EXPECT_GE(p.beta_pct, prev);
        prev = p.beta_pct;
        if (p.alpha_pct > 0 && p.alpha_pct < 100) {
            EXPECT_LT(p.beta_pct, p.alpha_pct);
            EXPECT_NEAR(p.beta_pct, oracle_beta(raw, p.alpha_pct), 1e-9);
        }
    }
}

TEST(FameEquivalence, Errors) {
    GroupDefinition g2("g", {"a", "b"});
    EXPECT_THROW(fame_equivalence(g2, {{"a", 0}, {"b", 0}}), Error);
    EXPECT_THROW(fame_equivalence(g2, {{"a", 1}, {"b", -1}}), Error);
    GroupDefinition g1("g", {"a"});
    EXPECT_THROW(fame_equivalence(g1, {{"a", 1}}), Error);
}
