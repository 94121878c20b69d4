#include "scfqkd/core.hpp"

#include <cmath>

namespace scfqkd {

const char* to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::original: return "original";
        case Mode::twcc: return "twcc";
        case Mode::aopp: return "aopp";
    }
    return "?";
}

Mode mode_from_string(std::string_view name) {
    if (name == "original") return Mode::original;
    if (name == "twcc") return Mode::twcc;
    if (name == "aopp") return Mode::aopp;
    throw ConfigError("mode", "unknown mode '" + std::string(name) +
                                  "' (expected original, twcc or aopp)");
}

ProtocolConfig ProtocolConfig::symmetric(double nu, double mu, double p0, double r,
                                         double n_windows) {
    ProtocolConfig cfg;
    cfg.nu_upper_a = cfg.nu_upper_b = nu;
    cfg.mu_upper_a = cfg.mu_upper_b = mu;
    cfg.p0 = p0;
    cfg.r = r;
    cfg.n_windows = n_windows;
    return cfg;
}

namespace {

// NaN-proof range checks: a NaN fails every comparison, so `!(x >= lo)`
// rejects it along with genuine out-of-range values.
void require_in(double value, double lo, double hi, const char* field) {
    if (!(value >= lo) || !(value <= hi))
        throw ConfigError(field, "value " + std::to_string(value) + " outside [" +
                                     std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void require_nonneg(double value, const char* field) {
    if (!(value >= 0.0)) throw ConfigError(field, "must be >= 0");
}

}  // namespace

void validate(const ProtocolConfig& p) {
    require_nonneg(p.nu_upper_a, "nu_upper_A");
    require_nonneg(p.nu_upper_b, "nu_upper_B");
    require_nonneg(p.mu_upper_a, "mu_upper_A");
    require_nonneg(p.mu_upper_b, "mu_upper_B");
    if (!(p.nu_upper_a <= p.mu_upper_a))
        throw ConfigError("nu_upper_A", "weak-source bound exceeds strong-source bound mu_upper_A");
    if (!(p.nu_upper_b <= p.mu_upper_b))
        throw ConfigError("nu_upper_B", "weak-source bound exceeds strong-source bound mu_upper_B");
    if (!(p.p0 > 0.0) || !(p.p0 < 1.0)) throw ConfigError("p0", "must lie strictly inside (0, 1)");
    if (!(p.r >= 0.0) || !(p.r < 1.0)) throw ConfigError("r", "must lie in [0, 1)");
    if (!(p.n_windows >= 0.0) || std::isinf(p.n_windows))
        throw ConfigError("N", "must be a finite count >= 0");
}

void validate(const ChannelConfig& c) {
    require_nonneg(c.distance_km, "distance_km");
    require_nonneg(c.alpha_f, "alpha_f");
    require_in(c.eta_d, 0.0, 1.0, "eta_d");
    require_in(c.p_d, 0.0, 1.0, "p_d");
    require_in(c.e_d, 0.0, 1.0, "E_d");
    if (!(c.f >= 1.0)) throw ConfigError("f", "error-correction inefficiency must be >= 1");
}

void validate_config(const ProtocolConfig& protocol, const ChannelConfig& channel) {
    validate(protocol);
    validate(channel);
}

void validate(const WindowStats& s, const ProtocolConfig& p, double tol) {
    require_in(s.s_o_l, 0.0, 1.0, "S_O_L");
    require_in(s.s_o_r, 0.0, 1.0, "S_O_R");
    require_in(s.s_b_l, 0.0, 1.0, "S_B_L");
    require_in(s.s_b_r, 0.0, 1.0, "S_B_R");
    require_in(s.s_z_l, 0.0, 1.0, "S_Z_L");
    require_in(s.s_z_r, 0.0, 1.0, "S_Z_R");
    require_in(s.e_k, 0.0, 1.0, "E_K");
    require_in(s.d_eff, 0.0, 1.0, "D_eff");
    const double px = p.px();
    const double composed = p.p0 * p.p0 * s.s_o() + px * px * s.s_b() + 2.0 * p.p0 * px * s.s_z();
    if (std::abs(composed - s.d_eff) > tol * std::max(1.0, std::abs(composed)))
        throw ConfigError("D_eff", "inconsistent with window-class composition");
}

std::int64_t ObservedCounts::key_total() const noexcept {
    std::int64_t total = 0;
    for (const auto& per_class : key) total += per_class[0] + per_class[1];
    return total;
}

std::int64_t ObservedCounts::key_errors() const noexcept {
    const auto& ww = key[static_cast<int>(PairClass::weak_weak)];
    const auto& ss = key[static_cast<int>(PairClass::strong_strong)];
    return ww[0] + ww[1] + ss[0] + ss[1];
}

std::int64_t ObservedCounts::key_untagged() const noexcept {
    const auto& sw = key[static_cast<int>(PairClass::strong_weak)];
    const auto& ws = key[static_cast<int>(PairClass::weak_strong)];
    return sw[0] + sw[1] + ws[0] + ws[1];
}

double binary_entropy(double x) {
    if (!(x >= 0.0) || !(x <= 1.0))
        throw std::domain_error("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace scfqkd
