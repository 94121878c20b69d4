#include "scfqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace scfqkd {

double side_transmittance(const ChannelConfig& channel) {
    return channel.eta_d * std::pow(10.0, -channel.alpha_f * (channel.distance_km / 2.0) / 10.0);
}

ClickProbs window_click_probs(double w_a, double w_b, const ChannelConfig& channel) {
    if (!(w_a >= 0.0) || !(w_b >= 0.0))
        throw std::domain_error("window_click_probs: intensities must be >= 0");
    const double eta = side_transmittance(channel);
    const double a = std::sqrt(eta * w_a);
    const double b = std::sqrt(eta * w_b);
    const double i_l = 0.5 * (a + b) * (a + b);
    const double i_r = 0.5 * (a - b) * (a - b);
    const double i_l_mixed = (1.0 - channel.e_d) * i_l + channel.e_d * i_r;
    const double i_r_mixed = (1.0 - channel.e_d) * i_r + channel.e_d * i_l;
    // 1 - (1-p_d) e^{-I} = -expm1(-I) + p_d e^{-I}, stable for tiny I.
    const double p_l = -std::expm1(-i_l_mixed) + channel.p_d * std::exp(-i_l_mixed);
    const double p_r = -std::expm1(-i_r_mixed) + channel.p_d * std::exp(-i_r_mixed);
    ClickProbs probs;
    probs.s_l = p_l * (1.0 - channel.p_d) * std::exp(-i_r_mixed);
    probs.s_r = p_r * (1.0 - channel.p_d) * std::exp(-i_l_mixed);
    return probs;
}

WindowStats asymptotic_stats(const ProtocolConfig& protocol, const ChannelConfig& channel) {
    const ClickProbs o = window_click_probs(protocol.nu_upper_a, protocol.nu_upper_b, channel);
    const ClickProbs b = window_click_probs(protocol.mu_upper_a, protocol.mu_upper_b, channel);
    const ClickProbs z_sw = window_click_probs(protocol.mu_upper_a, protocol.nu_upper_b, channel);
    const ClickProbs z_ws = window_click_probs(protocol.nu_upper_a, protocol.mu_upper_b, channel);

    WindowStats stats;
    stats.s_o_l = o.s_l;
    stats.s_o_r = o.s_r;
    stats.s_b_l = b.s_l;
    stats.s_b_r = b.s_r;
    stats.s_z_l = 0.5 * (z_sw.s_l + z_ws.s_l);
    stats.s_z_r = 0.5 * (z_sw.s_r + z_ws.s_r);

    const double p0 = protocol.p0, px = protocol.px();
    const double error_part = p0 * p0 * stats.s_o() + px * px * stats.s_b();
    stats.d_eff = error_part + 2.0 * p0 * px * stats.s_z();
    if (stats.d_eff > 0.0) {
        stats.e_k = error_part / stats.d_eff;
    } else {
        stats.e_k = 0.0;
        stats.zero_throughput = true;
    }
    return stats;
}

double effective_key_bits(const WindowStats& stats, const ProtocolConfig& protocol) {
    return protocol.n_windows * (1.0 - protocol.r) * stats.d_eff;
}

std::array<double, kNumPairClasses> key_class_fractions(const WindowStats& stats,
                                                        const ProtocolConfig& protocol) {
    std::array<double, kNumPairClasses> fractions{0.0, 0.0, 0.0, 0.0};
    if (!(stats.d_eff > 0.0)) return fractions;
    const double p0 = protocol.p0, px = protocol.px();
    // The two Z~ orientations each occur with probability p0*px.
    fractions[static_cast<int>(PairClass::strong_weak)] = p0 * px * stats.s_z() / stats.d_eff;
    fractions[static_cast<int>(PairClass::weak_strong)] = p0 * px * stats.s_z() / stats.d_eff;
    fractions[static_cast<int>(PairClass::weak_weak)] = p0 * p0 * stats.s_o() / stats.d_eff;
    fractions[static_cast<int>(PairClass::strong_strong)] = px * px * stats.s_b() / stats.d_eff;
    return fractions;
}

TwccStats expected_twcc_stats(const WindowStats& stats, const ProtocolConfig& protocol) {
    TwccStats twcc;
    twcc.n_t = effective_key_bits(stats, protocol);
    if (!(twcc.n_t > 0.0)) return twcc;
    const auto q = key_class_fractions(stats, protocol);
    // Per-bit populations keyed by (Bob bit, error status). O windows give
    // Bob bit 1 and a bit error, B windows Bob bit 0 and an error; the two
    // Z~ orientations are the error-free populations.
    const double p0_err = q[static_cast<int>(PairClass::strong_strong)];
    const double p0_ok = q[static_cast<int>(PairClass::weak_strong)];
    const double p1_err = q[static_cast<int>(PairClass::weak_weak)];
    const double p1_ok = q[static_cast<int>(PairClass::strong_weak)];
    // A pair survives parity comparison iff both members are errors or
    // neither is; the kept bit inherits that shared status.
    const double pairs = 0.5 * twcc.n_t;
    const double keep1 = p0_err * p0_err + p0_ok * p0_ok;           // Bob 00
    const double keep2 = p1_err * p1_err + p1_ok * p1_ok;           // Bob 11
    const double keep3 = 2.0 * (p0_err * p1_err + p0_ok * p1_ok);   // Bob odd
    twcc.n_t1 = pairs * keep1;
    twcc.n_t2 = pairs * keep2;
    twcc.n_t3 = pairs * keep3;
    twcc.e_1 = keep1 > 0.0 ? p0_err * p0_err / keep1 : 0.0;
    twcc.e_2 = keep2 > 0.0 ? p1_err * p1_err / keep2 : 0.0;
    twcc.e_3 = keep3 > 0.0 ? 2.0 * p0_err * p1_err / keep3 : 0.0;
    return twcc;
}

AoppStats expected_aopp_stats(const WindowStats& stats, const ProtocolConfig& protocol) {
    AoppStats aopp;
    const double n_t = effective_key_bits(stats, protocol);
    if (!(n_t > 0.0)) {
        aopp.empty = true;
        return aopp;
    }
    const auto q = key_class_fractions(stats, protocol);
    const double q_b = q[static_cast<int>(PairClass::strong_strong)];
    const double q_o = q[static_cast<int>(PairClass::weak_weak)];
    const double q_z0 = q[static_cast<int>(PairClass::weak_strong)];
    const double q_z1 = q[static_cast<int>(PairClass::strong_weak)];
    aopp.n_b0 = n_t * (q_b + q_z0);
    aopp.n_b1 = n_t * (q_o + q_z1);
    aopp.n_u0 = n_t * q_z0;
    aopp.n_u1 = n_t * q_z1;
    aopp.n_g = std::min(aopp.n_b0, aopp.n_b1);
    if (!(aopp.n_g > 0.0)) {
        aopp.empty = true;
        return aopp;
    }
    // Error probabilities of the 0-bit and 1-bit members of a pair; a pair
    // survives (Alice parity odd) iff the statuses agree.
    const double e0 = q_b / (q_b + q_z0);
    const double e1 = q_o / (q_o + q_z1);
    const double survive = e0 * e1 + (1.0 - e0) * (1.0 - e1);
    aopp.n_t_aopp = aopp.n_g * survive;
    aopp.e_aopp = survive > 0.0 ? e0 * e1 / survive : 0.0;
    return aopp;
}

}  // namespace scfqkd
