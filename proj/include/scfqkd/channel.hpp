#pragma once

#include "scfqkd/core.hpp"

namespace scfqkd {

// One-side total transmittance: detector efficiency times fiber loss over
// half the Alice--Bob distance (Charlie sits in the middle).
//   eta = eta_d * 10^(-alpha_f * (distance_km/2) / 10)
double side_transmittance(const ChannelConfig& channel);

struct ClickProbs {
    double s_l = 0.0;  // exactly the left (constructive) detector clicks
    double s_r = 0.0;  // exactly the right (destructive) detector clicks
};

// Coherent-interference model of one window with phase difference fully
// compensated. With a = sqrt(eta w_A), b = sqrt(eta w_B):
//   ideal port intensities  I_L = (a+b)^2/2, I_R = (a-b)^2/2,
//   misalignment mixing     I_L' = (1-E_d) I_L + E_d I_R (and symmetrically),
//   detector click          P_d  = 1 - (1-p_d) e^{-I_d'},
//   effective event         S_L  = P_L (1-P_R), S_R = P_R (1-P_L).
// Throws std::domain_error for negative intensities.
ClickProbs window_click_probs(double w_a, double w_b, const ChannelConfig& channel);

// Asymptotic per-window-class frequencies for sources emitting at their
// intensity upper bounds (operating point = worst case): (nu,nu) -> O,
// (mu,mu) -> B, the two Z~ orientations averaged. Bit errors are exactly
// the O- and B-window effective events, so
//   E_K = (p0^2 S_O + px^2 S_B) / D_eff.
WindowStats asymptotic_stats(const ProtocolConfig& protocol, const ChannelConfig& channel);

// n_t = N (1-r) D_eff, the number of effective key-generation bits.
double effective_key_bits(const WindowStats& stats, const ProtocolConfig& protocol);

// Raw-key class fractions: probabilities that an effective key bit came
// from each source pairing. Order follows PairClass.
std::array<double, kNumPairClasses> key_class_fractions(const WindowStats& stats,
                                                        const ProtocolConfig& protocol);

// Expected standard-TWCC outcome for an asymptotically large raw key:
// random pairing keeps a pair when both members share the same
// error status, classified by Bob's pair content.
TwccStats expected_twcc_stats(const WindowStats& stats, const ProtocolConfig& protocol);

// Expected AOPP outcome: Bob pairs 0-bits with 1-bits, survivors are the
// pairs with odd Alice-side parity (both members errors, or neither).
AoppStats expected_aopp_stats(const WindowStats& stats, const ProtocolConfig& protocol);

}  // namespace scfqkd
