#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scfqkd/channel.hpp"
#include "scfqkd/fock.hpp"

using namespace scfqkd;

namespace {

ChannelConfig table1(double distance_km) {
    ChannelConfig channel;
    channel.distance_km = distance_km;
    return channel;
}

ChannelConfig bare(double eta, double e_d = 0.0, double p_d = 0.0) {
    ChannelConfig channel;
    channel.distance_km = 0.0;
    channel.eta_d = eta;
    channel.e_d = e_d;
    channel.p_d = p_d;
    return channel;
}

}  // namespace

TEST_CASE("side transmittance") {
    CHECK(side_transmittance(table1(0.0)) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(side_transmittance(table1(100.0)) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(side_transmittance(table1(200.0)) == doctest::Approx(0.006).epsilon(1e-14));
}

TEST_CASE("click probabilities: no light, no dark counts") {
    const ClickProbs probs = window_click_probs(0.0, 0.0, bare(0.6));
    CHECK(probs.s_l == 0.0);
    CHECK(probs.s_r == 0.0);
}

TEST_CASE("click probabilities: perfect destructive interference") {
    // equal inputs, E_d = 0: the right port sees only dark counts
    const double p_d = 1e-9;
    const ChannelConfig channel = bare(0.19, 0.0, p_d);
    const ClickProbs probs = window_click_probs(0.5, 0.5, channel);
    CHECK(probs.s_l == doctest::Approx(0.17304086671055595).epsilon(1e-13));
    CHECK(probs.s_r == doctest::Approx(8.2695913311640318e-10).epsilon(1e-13));
    // s_r equals p_d (1 - P_L)
    const double one_minus_pl = (1.0 - p_d) * std::exp(-2.0 * 0.19 * 0.5);
    CHECK(probs.s_r == doctest::Approx(p_d * one_minus_pl).epsilon(1e-12));
}

TEST_CASE("click probabilities: reference point and negative input") {
    const ClickProbs probs = window_click_probs(0.1, 1e-8, table1(100.0));
    CHECK(probs.s_l == doctest::Approx(0.0029882730876791226).epsilon(1e-12));
    CHECK(probs.s_r == doctest::Approx(0.0029847923909159333).epsilon(1e-12));
    CHECK_THROWS_AS(window_click_probs(-0.1, 0.0, table1(100.0)), std::domain_error);
}

TEST_CASE("click probabilities: swapping arms changes nothing") {
    const ChannelConfig channel = table1(120.0);
    for (const auto& [wa, wb] : {std::pair{0.1, 1e-8}, {0.5, 0.02}, {1.0, 0.3}}) {
        const ClickProbs fwd = window_click_probs(wa, wb, channel);
        const ClickProbs rev = window_click_probs(wb, wa, channel);
        CHECK(fwd.s_l == doctest::Approx(rev.s_l).epsilon(1e-15));
        CHECK(fwd.s_r == doctest::Approx(rev.s_r).epsilon(1e-15));
    }
}

TEST_CASE("left port is the constructive port") {
    for (const double e_d : {0.0, 0.04, 0.2, 0.49}) {
        for (const double w : {1e-6, 1e-3, 0.1, 1.0}) {
            const ClickProbs probs = window_click_probs(w, w, bare(0.5, e_d, 1e-9));
            CHECK(probs.s_l > probs.s_r);
        }
    }
}

TEST_CASE("click probabilities degrade continuously and monotonically in eta") {
    // protocol operating regime: intensities well below saturation
    for (const auto& [wa, wb] : {std::pair{1e-8, 1e-8}, {0.05, 0.05}, {0.05, 1e-8}}) {
        double prev_l = -1.0, prev_r = -1.0;
        for (int i = 0; i <= 50; ++i) {
            const double eta = double(i) / 50.0;
            const ClickProbs probs = window_click_probs(wa, wb, bare(eta, 0.04, 1e-9));
            if (i > 0) {
                CHECK(probs.s_l >= prev_l - 1e-15);
                CHECK(probs.s_r >= prev_r - 1e-15);
            }
            prev_l = probs.s_l;
            prev_r = probs.s_r;
        }
    }
}

TEST_CASE("asymptotic stats: dead channel") {
    ChannelConfig channel = bare(0.6, 0.0, 0.0);
    const ProtocolConfig protocol = ProtocolConfig::symmetric(0.0, 0.0, 0.5, 0.0, 1.0);
    const WindowStats stats = asymptotic_stats(protocol, channel);
    CHECK(stats.s_o() == 0.0);
    CHECK(stats.s_b() == 0.0);
    CHECK(stats.s_z() == 0.0);
    CHECK(stats.d_eff == 0.0);
    CHECK(stats.e_k == 0.0);
    CHECK(stats.zero_throughput);
}

TEST_CASE("asymptotic stats: p0 -> 1 leaves only disagreeing O windows") {
    const ProtocolConfig protocol =
        ProtocolConfig::symmetric(1e-8, 0.01, 1.0 - 1e-9, 0.0, 1.0);
    const WindowStats stats = asymptotic_stats(protocol, table1(100.0));
    CHECK(stats.d_eff == doctest::Approx(stats.s_o()).epsilon(1e-3));
    CHECK(stats.e_k == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("asymptotic stats satisfy the composition identity") {
    const ProtocolConfig protocol = ProtocolConfig::symmetric(1e-8, 1e-3, 0.97, 0.0, 1.0);
    const WindowStats stats = asymptotic_stats(protocol, table1(100.0));
    CHECK_NOTHROW(validate(stats, protocol));
    CHECK(stats.e_k == doctest::Approx(0.030809244011504252).epsilon(1e-10));
    CHECK(stats.d_eff == doctest::Approx(3.6029998741163755e-6).epsilon(1e-10));
    CHECK(effective_key_bits(stats, protocol) == doctest::Approx(stats.d_eff).epsilon(1e-12));
}

TEST_CASE("analytic model agrees with the Fock oracle at the reference point") {
    const ChannelConfig channel = table1(100.0);
    const ClickProbs analytic = window_click_probs(0.1, 1e-8, channel);
    const ClickProbs oracle = fock::oracle_click_probs(0.1, 1e-8, channel);
    CHECK(std::abs(analytic.s_l - oracle.s_l) <= 1e-9);
    CHECK(std::abs(analytic.s_r - oracle.s_r) <= 1e-9);
}

TEST_CASE("expected TWCC stats: pure untagged key keeps every pair error-free") {
    const ProtocolConfig protocol = ProtocolConfig::symmetric(0.0, 0.1, 0.5, 0.0, 1e6);
    WindowStats stats;
    stats.s_z_l = 1e-3;
    stats.s_z_r = 1e-3;
    stats.d_eff = 2.0 * protocol.p0 * protocol.px() * stats.s_z();
    stats.e_k = 0.0;
    const TwccStats twcc = expected_twcc_stats(stats, protocol);
    CHECK(twcc.n_t == doctest::Approx(effective_key_bits(stats, protocol)));
    CHECK(twcc.n_t1 + twcc.n_t2 + twcc.n_t3 == doctest::Approx(0.5 * twcc.n_t).epsilon(1e-12));
    CHECK(twcc.e_1 == 0.0);
    CHECK(twcc.e_2 == 0.0);
    CHECK(twcc.e_3 == 0.0);
}

TEST_CASE("expected TWCC and AOPP stats on a mixed class population") {
    // p0 = 0.5 makes the class weights transparent: q = (0.35, 0.35, 0.1, 0.2)
    const ProtocolConfig protocol = ProtocolConfig::symmetric(0.3, 0.5, 0.5, 0.0, 1e6);
    WindowStats stats;
    stats.s_o_l = 0.04;
    stats.s_b_l = 0.08;
    stats.s_z_l = 0.07;
    stats.s_z_r = 0.07;
    stats.d_eff = 0.25 * stats.s_o() + 0.25 * stats.s_b() + 0.5 * stats.s_z();
    stats.e_k = (0.25 * stats.s_o() + 0.25 * stats.s_b()) / stats.d_eff;
    CHECK(stats.d_eff == doctest::Approx(0.1).epsilon(1e-12));

    const auto q = key_class_fractions(stats, protocol);
    const double q_z1 = q[int(PairClass::strong_weak)];
    const double q_z0 = q[int(PairClass::weak_strong)];
    const double q_o = q[int(PairClass::weak_weak)];
    const double q_b = q[int(PairClass::strong_strong)];
    CHECK(q_z1 == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(q_z0 == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(q_o == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(q_b == doctest::Approx(0.2).epsilon(1e-12));

    const TwccStats twcc = expected_twcc_stats(stats, protocol);
    const double pairs = 0.5 * twcc.n_t;
    CHECK(twcc.n_t1 == doctest::Approx(pairs * (q_b * q_b + q_z0 * q_z0)).epsilon(1e-12));
    CHECK(twcc.n_t2 == doctest::Approx(pairs * (q_o * q_o + q_z1 * q_z1)).epsilon(1e-12));
    CHECK(twcc.n_t3 ==
          doctest::Approx(pairs * 2.0 * (q_b * q_o + q_z0 * q_z1)).epsilon(1e-12));
    CHECK(twcc.e_1 == doctest::Approx(q_b * q_b / (q_b * q_b + q_z0 * q_z0)).epsilon(1e-12));
    CHECK(twcc.e_3 ==
          doctest::Approx(q_b * q_o / (q_b * q_o + q_z0 * q_z1)).epsilon(1e-12));
    // survival probability matches the per-bit error rate E_K
    const double e_k = stats.e_k;
    CHECK(twcc.n_t1 + twcc.n_t2 + twcc.n_t3 ==
          doctest::Approx(pairs * (e_k * e_k + (1 - e_k) * (1 - e_k))).epsilon(1e-12));

    const AoppStats aopp = expected_aopp_stats(stats, protocol);
    CHECK(aopp.n_b0 == doctest::Approx(twcc.n_t * (q_b + q_z0)).epsilon(1e-12));
    CHECK(aopp.n_b1 == doctest::Approx(twcc.n_t * (q_o + q_z1)).epsilon(1e-12));
    CHECK(aopp.n_g == doctest::Approx(std::min(aopp.n_b0, aopp.n_b1)).epsilon(1e-12));
    CHECK(aopp.n_u0 == doctest::Approx(twcc.n_t * q_z0).epsilon(1e-12));
    CHECK(aopp.n_u1 == doctest::Approx(twcc.n_t * q_z1).epsilon(1e-12));
    const double e0 = q_b / (q_b + q_z0), e1 = q_o / (q_o + q_z1);
    const double survive = e0 * e1 + (1 - e0) * (1 - e1);
    CHECK(aopp.n_t_aopp == doctest::Approx(aopp.n_g * survive).epsilon(1e-12));
    CHECK(aopp.e_aopp == doctest::Approx(e0 * e1 / survive).epsilon(1e-12));
}

TEST_CASE("expected AOPP stats flag an empty pairing") {
    const ProtocolConfig protocol = ProtocolConfig::symmetric(0.0, 0.1, 0.5, 0.0, 1e6);
    WindowStats stats;  // no clicks at all
    const AoppStats aopp = expected_aopp_stats(stats, protocol);
    CHECK(aopp.empty);
    CHECK(aopp.n_g == 0.0);
}
