#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scfqkd/pipeline.hpp"

using namespace scfqkd;

namespace {

ChannelConfig table1(double distance_km) {
    ChannelConfig channel;
    channel.distance_km = distance_km;
    return channel;
}

}  // namespace

TEST_CASE("pipeline reproduces the independent reference at 100 km") {
    // frozen from a 50-digit evaluation of the full bound chain at
    // nu = 1e-8, mu = 1e-3, p0 = 0.97, Table-I channel, N = 1, r = 0
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 1e-3, 0.97, 0.0, 1.0);
    const PipelineResult result = evaluate_pipeline(protocol, table1(100.0), Mode::original);
    CHECK(result.coeffs.c2_bar == doctest::Approx(0.0010063330061629705).epsilon(1e-11));
    CHECK(result.stats.s_b_l == doctest::Approx(1.1519381157278632e-4).epsilon(1e-11));
    CHECK(result.stats.s_z_l == doctest::Approx(3.0174502419697419e-5).epsilon(1e-11));
    CHECK(result.summary.n_ph_upper == doctest::Approx(5.6055667999830993e-7).epsilon(1e-10));
    CHECK(result.summary.n_u == doctest::Approx(3.4919941718213049e-6).epsilon(1e-11));
    CHECK(result.summary.e_ph_upper == doctest::Approx(0.16052623584590426).epsilon(1e-10));
    CHECK(result.report.key_rate == doctest::Approx(4.8614416534303007e-7).epsilon(1e-9));
    CHECK_FALSE(result.report.no_key);
    CHECK_FALSE(result.report.clamped);
}

TEST_CASE("pipeline clamps a loss-making configuration to zero") {
    // same channel, badly balanced sources: raw rate is negative
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 0.01, 0.9, 0.0, 1.0);
    const PipelineResult result = evaluate_pipeline(protocol, table1(50.0), Mode::original);
    CHECK(result.summary.e_ph_upper == doctest::Approx(0.24415002350631067).epsilon(1e-10));
    CHECK(result.report.key_rate == 0.0);
    CHECK(result.report.clamped);
}

TEST_CASE("vacuous phase bound kills every mode") {
    // large mu at long distance drives the bound past 1/2
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 0.5, 0.9, 0.0, 1.0);
    const ChannelConfig channel = table1(100.0);
    for (const Mode mode : {Mode::original, Mode::twcc, Mode::aopp}) {
        const PipelineResult result = evaluate_pipeline(protocol, channel, mode);
        REQUIRE(result.summary.e_ph_upper >= 0.5);
        CHECK(result.report.key_rate == 0.0);
        CHECK(result.report.no_key);
    }
}

TEST_CASE("twcc and aopp reports carry their pairing intermediates") {
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 2e-3, 0.97, 0.0, 1.0);
    const ChannelConfig channel = table1(80.0);

    const PipelineResult twcc = evaluate_pipeline(protocol, channel, Mode::twcc);
    const TwccStats expected_twcc = expected_twcc_stats(twcc.stats, protocol);
    CHECK(twcc.report.twcc.n_t1 == doctest::Approx(expected_twcc.n_t1));
    CHECK(twcc.report.twcc.e_3 == doctest::Approx(expected_twcc.e_3));
    CHECK(twcc.report.n_u_post ==
          doctest::Approx(twcc.summary.n_u * twcc.summary.n_u / (2.0 * expected_twcc.n_t)));
    CHECK(twcc.report.e_ph_post ==
          doctest::Approx(twcc_phase_error_iteration(twcc.summary.e_ph_upper)));

    const PipelineResult aopp = evaluate_pipeline(protocol, channel, Mode::aopp);
    const AoppStats expected_aopp = expected_aopp_stats(aopp.stats, protocol);
    CHECK(aopp.report.aopp.n_g == doctest::Approx(expected_aopp.n_g));
    CHECK(aopp.report.n_u_post ==
          doctest::Approx((expected_aopp.n_u0 / expected_aopp.n_b0) *
                          (expected_aopp.n_u1 / expected_aopp.n_b1) * expected_aopp.n_g));
}

TEST_CASE("rates scale linearly in N") {
    const ChannelConfig channel = table1(100.0);
    for (const Mode mode : {Mode::original, Mode::twcc, Mode::aopp}) {
        const double unit = evaluate_key_rate(
            ProtocolConfig::symmetric(1e-8, 1e-3, 0.97, 0.0, 1.0), channel, mode);
        const double big = evaluate_key_rate(
            ProtocolConfig::symmetric(1e-8, 1e-3, 0.97, 0.0, 1e10), channel, mode);
        CHECK(unit == doctest::Approx(big).epsilon(1e-12));
    }
}

TEST_CASE("report_from_stats demands the stats its mode needs") {
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 1e-3, 0.97, 0.0, 1.0);
    const ChannelConfig channel = table1(100.0);
    const WindowStats stats = asymptotic_stats(protocol, channel);
    CHECK_THROWS_AS(report_from_stats(stats, protocol, channel, Mode::twcc, nullptr, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(report_from_stats(stats, protocol, channel, Mode::aopp, nullptr, nullptr),
                    std::invalid_argument);
    const KeyRateReport report =
        report_from_stats(stats, protocol, channel, Mode::original, nullptr, nullptr);
    CHECK(report.key_rate ==
          doctest::Approx(evaluate_key_rate(protocol, channel, Mode::original)));
}

TEST_CASE("invalid configurations are rejected before evaluation") {
    ProtocolConfig bad = ProtocolConfig::symmetric(0.2, 0.1, 0.5, 0.0, 1.0);
    CHECK_THROWS_AS(evaluate_pipeline(bad, table1(10.0), Mode::original), ConfigError);
}
