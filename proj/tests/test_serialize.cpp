#include "newsfame/error.hpp"
#include "newsfame/io.hpp"
#include "newsfame/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace newsfame;

TEST(Serialize, LognormalFitRoundTrip) {
    const LogNormalFit f{0.123456789, 1.5, 0.0, 42};
    const Json j = to_json(f, "truncated_lognormal_mle");
    EXPECT_EQ(j["fit_method"], "truncated_lognormal_mle");
    EXPECT_EQ(j["sample_size"], 42);
    const auto back = lognormal_fit_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.mu, f.mu);
    EXPECT_EQ(back.sigma, f.sigma);
    EXPECT_EQ(back.truncation_point, f.truncation_point);
    EXPECT_TRUE(to_json(LogNormalFit{})["truncation_point"].is_null());
}

TEST(Serialize, PowerLawFields) {
    auto f = PowerLawTailFit::from_coefficients(-1.415, 0.079, 1.0);
    const Json j = to_json(f);
    for (const char* key : {"slope", "intercept", "x_min", "sample_size", "r_squared", "fit_method"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["fit_method"], "supplied_coefficients");
    EXPECT_EQ(powerlaw_fit_from_json(j).slope, -1.415);
}

TEST(Serialize, HmmModelRoundTrip) {
    HmmModel m;
    m.beta = 0.0125;
    m.gamma = 0.31;
    m.normal_log_fame = {1.1, 0.4, std::nullopt, 100};
    m.peak_height_dist = {5.0, 0.7, std::nullopt, 8};
    m.rise_time_dist = {1.0, 0.2, std::nullopt, 8};
    const auto back = hmm_model_from_json(Json::parse(to_json(m).dump()));
    EXPECT_EQ(back.beta, m.beta);
    EXPECT_EQ(back.gamma, m.gamma);
    EXPECT_EQ(back.peak_height_dist.mu, m.peak_height_dist.mu);
    EXPECT_EQ(back.rise_time_dist.sigma, m.rise_time_dist.sigma);
    Json broken = to_json(m);
    broken.erase("gamma");
    EXPECT_THROW(hmm_model_from_json(broken), Error);
}

TEST(Serialize, PulseDates) {
    const FrequencySeries s("a", parse_date("2008-03-01"), std::vector<double>(40, 1.0));
    const Pulse p{3, 5, 9, 20.0, 2.5, pulse_amplitude(20.0, 2.5), 0.25};
    const Json j = to_json(p, s);
    EXPECT_EQ(j["start_date"], "2008-03-04");
    EXPECT_EQ(j["peak_date"], "2008-03-06");
    EXPECT_EQ(j["end_date"], "2008-03-10");
    EXPECT_EQ(j["height"], 20.0);
    EXPECT_EQ(j["rise_days"], 2.5);
    EXPECT_EQ(j["residual"], 0.25);
}

TEST(PlotCsv, CcdfColumns) {
    EmpiricalCcdf c;
    c.points = {{0.5, 0.9}, {10, 0.1}, {100, 0.01}};
    std::ostringstream out;
    write_ccdf_csv(out, c, PowerLawTailFit::from_coefficients(-1.0, 0.0, 1.0));
    EXPECT_EQ(out.str(), "x,prob,fitted_prob\n0.5,0.9,\n10,0.1,0.1\n100,0.01,0.01\n");
}

TEST(PlotCsv, LogLogColumns) {
    EmpiricalCcdf c;
    c.points = {{10, 0.1}, {100, 0.01}};
    std::ostringstream out;
    write_loglog_csv(out, c, PowerLawTailFit::from_coefficients(-1.0, 0.0, 1.0));
    EXPECT_EQ(out.str(), "log10_x,log10_prob,fitted_log10_prob\n1,-1,-1\n2,-2,-2\n");
}

TEST(PlotCsv, PulseFit) {
    std::vector<double> v(10, 0.0);
    for (int t = 1; t <= 5; ++t) v[2 + t - 1] = pulse_shape(10, 2, t);
    const Pulse p{2, 3, 6, 10, 2, pulse_amplitude(10, 2), 0};
    std::ostringstream out;
    write_pulse_fit_csv(out, v, p);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,observed,fitted");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto c1 = line.find(',');
        const auto c2 = line.rfind(',');
        EXPECT_EQ(line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1));
    }
    EXPECT_EQ(rows, 5);
}

TEST(Tables, Alignment) {
    const auto t = format_table({"Entity", "P"}, {{"a", "0.5000"}, {"longer", "1.0000"}});
    EXPECT_EQ(t, "Entity       P\n--------------\na       0.5000\nlonger  1.0000\n");
    EXPECT_EQ(format_prob(1.44e-5), "1.44E-05");
    EXPECT_EQ(format_prob(0.25), "0.2500");
    EXPECT_EQ(format_prob(0.0), "0.0000");
}

TEST(Tables, ForwardRow) {
    ForwardFameModel m{0, 20, 1, 1, PowerLawTailFit::from_coefficients(-1.415, 0.079), 1'022'651};
    const auto r = become_famous_prob(m, 3000);
    const auto text = forward_fame_table(m, {{3000, r}});
    EXPECT_NE(text.find("0-20"), std::string::npos);
    EXPECT_NE(text.find("-1.415"), std::string::npos);
    EXPECT_NE(text.find("1.44E-05"), std::string::npos);
    EXPECT_NE(text.find("14.7"), std::string::npos);
}
