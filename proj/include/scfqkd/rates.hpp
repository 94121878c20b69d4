#pragma once

#include "scfqkd/core.hpp"

namespace scfqkd {

// Decomposition coefficients of the chi+ state into its O-window,
// B-window and residual components. c0 and c1 are free positive choices
// subject to c0*c1 = 1; c2_bar bounds the residual for every window.
struct BoundCoefficients {
    double c0 = 1.0;
    double c1 = 1.0;
    double c2_bar = 0.0;
};

// Throws std::invalid_argument unless c0, c1 > 0, |c0*c1 - 1| <= 1e-12
// and c2_bar >= 0.
void validate(const BoundCoefficients& coeffs);

// c0 = e^{(nu - mu)/2}, c1 = e^{(mu - nu)/2} with the mean of the two
// parties' intensity bounds (identical to them in the symmetric case).
// c2_bar is left at 0; use c2_upper_bound or make_coefficients to fill it.
BoundCoefficients default_coefficients(const ProtocolConfig& protocol);

// Worst-case residual bound:
//   c2_bar^2 = prod_{s in {A,B}} ( c0 + c1 - 2 e^{-nu_s/2 - mu_s/2}
//                                  + 2 sqrt(1 - e^{-nu_s}) sqrt(1 - e^{-mu_s}) ).
// Each factor is nonnegative whenever c0*c1 = 1 (AM-GM); a negative factor
// indicates corrupted inputs and fails hard.
double c2_upper_bound(const ProtocolConfig& protocol, double c0, double c1);

// default_coefficients with c2_bar filled in.
BoundCoefficients make_coefficients(const ProtocolConfig& protocol);

// Generic input-output click-probability bounds for a state
// xi0|phi0> + xi1|phi1> + xi2|phi2> with normalized components, given the
// click probabilities S0, S1 of |phi0>, |phi1>. The xi are nonnegative
// reals; results are clamped into [0,1].
double input_output_upper(double xi0, double xi1, double xi2, double s0, double s1);
double input_output_lower(double xi0, double xi1, double xi2, double s0, double s1);

struct PhaseErrorBound {
    double n_ph_upper = 0.0;
    bool clamped = false;  // the bracket went negative and was clamped to 0
};

// Upper bound on the number of phase errors among untagged bits:
//   (1/2) p0 px (1-r) N [ c0^2 (S_O^R - S_O^L) + c1^2 (S_B^R - S_B^L) + c2_bar^2
//     + 2 c0 c1 (sqrt(S_O^R S_B^R) + sqrt(S_O^L S_B^L))
//     + 2 c0 c2_bar (sqrt(S_O^R) + sqrt(S_O^L))
//     + 2 c1 c2_bar (sqrt(S_B^R) + sqrt(S_B^L)) + 4 S_Z^L ].
PhaseErrorBound phase_error_count_upper(const WindowStats& stats, const ProtocolConfig& protocol,
                                        const BoundCoefficients& coeffs);

// n_u = 2 p0 px (1-r) N (S_Z^L + S_Z^R).
double untagged_count(const WindowStats& stats, const ProtocolConfig& protocol);

// e_ph = n_ph_upper / n_u clamped into [0,1]; defined as 1 when n_u = 0.
double phase_error_rate(double n_ph_upper, double n_u);

SecuritySummary make_security_summary(const WindowStats& stats, const ProtocolConfig& protocol,
                                      const BoundCoefficients& coeffs);

// R = (1/N) { n_u [1 - H(e_ph)] - f n_t H(E_K) }, clamped at 0.
// A phase-error bound at or above 1/2 certifies nothing, so the privacy
// factor [1 - H(e_ph)] is taken as 0 there (no_key flag).
KeyRateReport key_rate_original(const SecuritySummary& summary, double n_t, double e_k, double f,
                                double n_windows);

// Phase-flip iteration shared by both two-way methods: a pair survives
// when its members' phase errors agree, so e -> 2e(1-e). The iteration is
// monotone only below 1/2; a bound already >= 1/2 stays at the vacuous 1/2.
double twcc_phase_error_iteration(double e_ph);

// R' = (1/N) { n_u^twcc [1 - H(e_ph^twcc)] - f sum_i n_ti H(E_i) } with
// n_u^twcc = n_u^2 / (2 n_t) and e_ph^twcc = 2 e_ph (1 - e_ph).
KeyRateReport key_rate_twcc(const SecuritySummary& summary, const TwccStats& twcc, double f,
                            double n_windows);

// R'' = (1/N) { n_u^aopp [1 - H(e_ph^aopp)] - f n_t^aopp H(E_aopp) } with
// n_u^aopp = (n_u0/n_b0)(n_u1/n_b1) n_g and the same phase iteration.
KeyRateReport key_rate_aopp(const SecuritySummary& summary, const AoppStats& aopp, double f,
                            double n_windows);

}  // namespace scfqkd
