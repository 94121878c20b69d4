#include "scfqkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scfqkd {

void validate(const BoundCoefficients& c) {
    if (!(c.c0 > 0.0) || !(c.c1 > 0.0))
        throw std::invalid_argument("bound coefficients: c0, c1 must be positive");
    if (!(std::abs(c.c0 * c.c1 - 1.0) <= 1e-12))
        throw std::invalid_argument("bound coefficients: c0*c1 must equal 1");
    if (!(c.c2_bar >= 0.0)) throw std::invalid_argument("bound coefficients: c2_bar must be >= 0");
}

BoundCoefficients default_coefficients(const ProtocolConfig& protocol) {
    const double nu = 0.5 * (protocol.nu_upper_a + protocol.nu_upper_b);
    const double mu = 0.5 * (protocol.mu_upper_a + protocol.mu_upper_b);
    BoundCoefficients coeffs;
    coeffs.c0 = std::exp(0.5 * (nu - mu));
    coeffs.c1 = std::exp(0.5 * (mu - nu));
    coeffs.c2_bar = 0.0;
    return coeffs;
}

namespace {

double c2_factor(double nu, double mu, double c0, double c1) {
    // -expm1(-x) = 1 - e^{-x} without cancellation for small intensities.
    return c0 + c1 - 2.0 * std::exp(-0.5 * (nu + mu)) +
           2.0 * std::sqrt(-std::expm1(-nu)) * std::sqrt(-std::expm1(-mu));
}

}  // namespace

double c2_upper_bound(const ProtocolConfig& protocol, double c0, double c1) {
    if (!(c0 > 0.0) || !(c1 > 0.0) || !(std::abs(c0 * c1 - 1.0) <= 1e-12))
        throw std::invalid_argument("c2_upper_bound: need c0, c1 > 0 with c0*c1 = 1");
    const double fa = c2_factor(protocol.nu_upper_a, protocol.mu_upper_a, c0, c1);
    const double fb = c2_factor(protocol.nu_upper_b, protocol.mu_upper_b, c0, c1);
    // c0 + c1 >= 2 >= 2 e^{-nu/2-mu/2}, so both factors are nonnegative.
    if (fa < 0.0 || fb < 0.0)
        throw std::logic_error("c2_upper_bound: negative factor despite c0*c1 = 1");
    return std::sqrt(fa * fb);
}

BoundCoefficients make_coefficients(const ProtocolConfig& protocol) {
    BoundCoefficients coeffs = default_coefficients(protocol);
    coeffs.c2_bar = c2_upper_bound(protocol, coeffs.c0, coeffs.c1);
    return coeffs;
}

namespace {

void require_probability(double s, const char* what) {
    if (!(s >= 0.0) || !(s <= 1.0))
        throw std::domain_error(std::string("input-output bound: ") + what +
                                " must be a probability in [0, 1]");
}

void require_xi(double xi) {
    if (!(xi >= 0.0))
        throw std::domain_error("input-output bound: coefficients must be nonnegative reals");
}

}  // namespace

double input_output_upper(double xi0, double xi1, double xi2, double s0, double s1) {
    require_xi(xi0);
    require_xi(xi1);
    require_xi(xi2);
    require_probability(s0, "S0");
    require_probability(s1, "S1");
    const double value = xi0 * xi0 * s0 + xi1 * xi1 * s1 + xi2 * xi2 +
                         2.0 * xi0 * xi1 * std::sqrt(s0 * s1) + 2.0 * xi0 * xi2 * std::sqrt(s0) +
                         2.0 * xi1 * xi2 * std::sqrt(s1);
    return std::min(1.0, value);
}

double input_output_lower(double xi0, double xi1, double xi2, double s0, double s1) {
    require_xi(xi0);
    require_xi(xi1);
    require_xi(xi2);
    require_probability(s0, "S0");
    require_probability(s1, "S1");
    const double value = xi0 * xi0 * s0 + xi1 * xi1 * s1 -
                         2.0 * xi0 * xi1 * std::sqrt(s0 * s1) - 2.0 * xi0 * xi2 * std::sqrt(s0) -
                         2.0 * xi1 * xi2 * std::sqrt(s1);
    return std::max(0.0, value);
}

PhaseErrorBound phase_error_count_upper(const WindowStats& stats, const ProtocolConfig& protocol,
                                        const BoundCoefficients& coeffs) {
    validate(coeffs);
    const double c0 = coeffs.c0, c1 = coeffs.c1, c2 = coeffs.c2_bar;
    const double bracket = c0 * c0 * (stats.s_o_r - stats.s_o_l) +
                           c1 * c1 * (stats.s_b_r - stats.s_b_l) + c2 * c2 +
                           2.0 * c0 * c1 *
                               (std::sqrt(stats.s_o_r * stats.s_b_r) +
                                std::sqrt(stats.s_o_l * stats.s_b_l)) +
                           2.0 * c0 * c2 * (std::sqrt(stats.s_o_r) + std::sqrt(stats.s_o_l)) +
                           2.0 * c1 * c2 * (std::sqrt(stats.s_b_r) + std::sqrt(stats.s_b_l)) +
                           4.0 * stats.s_z_l;
    const double prefactor =
        0.5 * protocol.p0 * protocol.px() * (1.0 - protocol.r) * protocol.n_windows;
    PhaseErrorBound bound;
    bound.clamped = bracket < 0.0;
    bound.n_ph_upper = bound.clamped ? 0.0 : prefactor * bracket;
    return bound;
}

double untagged_count(const WindowStats& stats, const ProtocolConfig& protocol) {
    return 2.0 * protocol.p0 * protocol.px() * (1.0 - protocol.r) * protocol.n_windows *
           (stats.s_z_l + stats.s_z_r);
}

double phase_error_rate(double n_ph_upper, double n_u) {
    if (!(n_u > 0.0)) return 1.0;
    return std::clamp(n_ph_upper / n_u, 0.0, 1.0);
}

SecuritySummary make_security_summary(const WindowStats& stats, const ProtocolConfig& protocol,
                                      const BoundCoefficients& coeffs) {
    SecuritySummary summary;
    summary.c0 = coeffs.c0;
    summary.c1 = coeffs.c1;
    summary.c2_bar = coeffs.c2_bar;
    const PhaseErrorBound bound = phase_error_count_upper(stats, protocol, coeffs);
    summary.n_ph_upper = bound.n_ph_upper;
    summary.nph_clamped = bound.clamped;
    summary.n_u = untagged_count(stats, protocol);
    summary.no_untagged = !(summary.n_u > 0.0);
    summary.e_ph_upper = phase_error_rate(summary.n_ph_upper, summary.n_u);
    return summary;
}

namespace {

// Privacy-amplification factor 1 - H(e). An upper bound at or above 1/2
// certifies no secrecy at all, which is not what the raw formula would
// say for e > 1/2 (H decreases again), so zero it explicitly.
double privacy_factor(double e_ph, bool& no_key) {
    if (e_ph >= 0.5) {
        no_key = true;
        return 0.0;
    }
    return 1.0 - binary_entropy(e_ph);
}

double clamp_rate(double raw, bool& clamped) {
    clamped = raw < 0.0;
    return clamped ? 0.0 : raw;
}

}  // namespace

KeyRateReport key_rate_original(const SecuritySummary& summary, double n_t, double e_k, double f,
                                double n_windows) {
    KeyRateReport report;
    report.mode = Mode::original;
    report.summary = summary;
    report.n_t = n_t;
    report.e_k = e_k;
    report.n_u_post = summary.n_u;
    report.e_ph_post = summary.e_ph_upper;
    const double priv = privacy_factor(summary.e_ph_upper, report.no_key);
    const double raw = (summary.n_u * priv - f * n_t * binary_entropy(e_k)) / n_windows;
    report.key_rate = clamp_rate(raw, report.clamped);
    return report;
}

double twcc_phase_error_iteration(double e_ph) {
    if (e_ph >= 0.5) return 0.5;
    return 2.0 * e_ph * (1.0 - e_ph);
}

KeyRateReport key_rate_twcc(const SecuritySummary& summary, const TwccStats& twcc, double f,
                            double n_windows) {
    KeyRateReport report;
    report.mode = Mode::twcc;
    report.summary = summary;
    report.twcc = twcc;
    report.n_t = twcc.n_t;
    const double n_u_twcc =
        twcc.n_t > 0.0 ? summary.n_u * summary.n_u / (2.0 * twcc.n_t) : 0.0;
    const double e_ph_twcc = twcc_phase_error_iteration(summary.e_ph_upper);
    report.n_u_post = n_u_twcc;
    report.e_ph_post = e_ph_twcc;
    const double priv = privacy_factor(e_ph_twcc, report.no_key);
    const double correction = twcc.n_t1 * binary_entropy(twcc.e_1) +
                              twcc.n_t2 * binary_entropy(twcc.e_2) +
                              twcc.n_t3 * binary_entropy(twcc.e_3);
    const double raw = (n_u_twcc * priv - f * correction) / n_windows;
    report.key_rate = clamp_rate(raw, report.clamped);
    return report;
}

KeyRateReport key_rate_aopp(const SecuritySummary& summary, const AoppStats& aopp, double f,
                            double n_windows) {
    KeyRateReport report;
    report.mode = Mode::aopp;
    report.summary = summary;
    report.aopp = aopp;
    report.n_t = aopp.n_t_aopp;
    double n_u_aopp = 0.0;
    if (aopp.n_b0 > 0.0 && aopp.n_b1 > 0.0)
        n_u_aopp = (aopp.n_u0 / aopp.n_b0) * (aopp.n_u1 / aopp.n_b1) * aopp.n_g;
    const double e_ph_aopp = twcc_phase_error_iteration(summary.e_ph_upper);
    report.n_u_post = n_u_aopp;
    report.e_ph_post = e_ph_aopp;
    const double priv = privacy_factor(e_ph_aopp, report.no_key);
    const double raw =
        (n_u_aopp * priv - f * aopp.n_t_aopp * binary_entropy(aopp.e_aopp)) / n_windows;
    report.key_rate = clamp_rate(raw, report.clamped);
    return report;
}

}  // namespace scfqkd
