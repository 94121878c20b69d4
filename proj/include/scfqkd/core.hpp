#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scfqkd {

// Raised by configuration validation; carries the name of the first
// offending field so callers can produce exact diagnostics.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config error: field '" + field + "': " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Mode { original, twcc, aopp };

const char* to_string(Mode mode) noexcept;
Mode mode_from_string(std::string_view name);  // throws ConfigError("mode")

enum class Detector : std::uint8_t { left = 0, right = 1 };

// Source pairing of a time window. Exactly one strong source makes a
// Z~ window; both weak is an O window; both strong a B window.
enum class PairClass : std::uint8_t {
    strong_weak = 0,    // Alice strong, Bob weak   (Z~; bits 1/1)
    weak_strong = 1,    // Alice weak, Bob strong   (Z~; bits 0/0)
    weak_weak = 2,      // O window                 (bits 0/1, always a bit error)
    strong_strong = 3,  // B window                 (bits 1/0, always a bit error)
};

inline constexpr int kNumPairClasses = 4;

inline bool is_untagged(PairClass c) noexcept {
    return c == PairClass::strong_weak || c == PairClass::weak_strong;
}

// Bit assignment: Alice takes weak -> 0, strong -> 1; Bob takes weak -> 1,
// strong -> 0. Z~ windows therefore always agree, O and B windows never do.
inline int alice_bit(PairClass c) noexcept {
    return (c == PairClass::strong_weak || c == PairClass::strong_strong) ? 1 : 0;
}
inline int bob_bit(PairClass c) noexcept {
    return (c == PairClass::weak_strong || c == PairClass::strong_strong) ? 0 : 1;
}

// Source-side protocol parameters. Intensities are the *upper bounds*
// nu^U, mu^U of the weak (imperfect-vacuum) and strong sources; the
// security analysis depends on nothing else about the source states.
struct ProtocolConfig {
    double nu_upper_a = 0.0;  // weak-source intensity bound, Alice [photons/pulse]
    double nu_upper_b = 0.0;  // weak-source intensity bound, Bob
    double mu_upper_a = 0.0;  // strong-source intensity bound, Alice
    double mu_upper_b = 0.0;  // strong-source intensity bound, Bob
    double p0 = 0.5;          // probability of choosing the weak source
    double r = 0.0;           // test-window probability
    double n_windows = 1.0;   // total number of time windows N

    double px() const noexcept { return 1.0 - p0; }

    // Symmetric-case constructor: both parties share nu, mu.
    static ProtocolConfig symmetric(double nu, double mu, double p0, double r = 0.0,
                                    double n_windows = 1.0);
};

// Interference channel and detection parameters (symmetric arms:
// Charlie sits halfway, both detectors identical).
struct ChannelConfig {
    double distance_km = 0.0;  // total Alice--Bob fiber length
    double alpha_f = 0.2;      // fiber loss coefficient [dB/km]
    double eta_d = 0.6;        // detector efficiency
    double p_d = 1e-9;         // dark-count probability per pulse per detector
    double e_d = 0.04;         // misalignment error
    double f = 1.1;            // error-correction inefficiency
};

// Throw ConfigError naming the first violated field; accept otherwise.
void validate(const ProtocolConfig& protocol);
void validate(const ChannelConfig& channel);
void validate_config(const ProtocolConfig& protocol, const ChannelConfig& channel);

// Per-window-class, per-detector effective-event frequencies plus the
// key-window aggregates. In asymptotic mode these are exact probabilities;
// the Monte-Carlo estimator fills the same struct from observed counts.
struct WindowStats {
    double s_o_l = 0.0, s_o_r = 0.0;  // O windows (both weak)
    double s_b_l = 0.0, s_b_r = 0.0;  // B windows (both strong)
    double s_z_l = 0.0, s_z_r = 0.0;  // Z~ windows (exactly one strong)
    double e_k = 0.0;                 // bit-flip error rate of effective key bits
    double d_eff = 0.0;               // effective probability of a key window
    bool zero_throughput = false;     // d_eff == 0; e_k defined as 0

    double s_o() const noexcept { return s_o_l + s_o_r; }
    double s_b() const noexcept { return s_b_l + s_b_r; }
    double s_z() const noexcept { return s_z_l + s_z_r; }
};

// Range checks plus the composition identity
// d_eff = p0^2 S_O + px^2 S_B + 2 p0 px S_Z (within tol).
void validate(const WindowStats& stats, const ProtocolConfig& protocol, double tol = 1e-9);

// Observed effective-event counts. Test windows resolve only the window
// class (sources are announced); key windows additionally resolve the
// source pairing, which the simulator knows as ground truth.
struct ObservedCounts {
    std::array<std::int64_t, 2> test_o{0, 0};  // [detector]
    std::array<std::int64_t, 2> test_b{0, 0};
    std::array<std::int64_t, 2> test_z{0, 0};
    // Effective key-generation events, [pair class][detector].
    std::array<std::array<std::int64_t, 2>, kNumPairClasses> key{};

    std::int64_t key_total() const noexcept;
    std::int64_t key_errors() const noexcept;    // weak_weak + strong_strong events
    std::int64_t key_untagged() const noexcept;  // Z~-class events
};

// Everything the security analysis produces for one protocol run.
struct SecuritySummary {
    double c0 = 1.0, c1 = 1.0;  // decomposition coefficients, c0*c1 = 1
    double c2_bar = 0.0;        // upper bound of the residual coefficient c2
    double n_ph_upper = 0.0;    // upper bound on the phase-error count
    double n_u = 0.0;           // untagged-bit count
    double e_ph_upper = 0.0;    // phase-flip error-rate upper bound, in [0,1]
    bool nph_clamped = false;   // phase-error bracket went negative and was clamped
    bool no_untagged = false;   // n_u == 0; e_ph_upper defined as 1
};

// Standard-TWCC pairing outcome (observed or expected).
struct TwccStats {
    double n_t = 0.0;                            // raw key bits fed into pairing
    double n_t1 = 0.0, n_t2 = 0.0, n_t3 = 0.0;   // survivors: Bob pair 00 / 11 / odd
    double e_1 = 0.0, e_2 = 0.0, e_3 = 0.0;      // bit-flip error rates per class
};

// AOPP pairing outcome (observed or expected).
struct AoppStats {
    double n_b0 = 0.0, n_b1 = 0.0;  // Bob 0-bit / 1-bit populations
    double n_g = 0.0;               // pairs formed: min(n_b0, n_b1)
    double n_u0 = 0.0, n_u1 = 0.0;  // untagged members of each population
    double n_t_aopp = 0.0;          // survived bits (Alice-side odd parity)
    double e_aopp = 0.0;            // bit-flip error rate of survivors
    bool empty = false;             // n_g == 0; e_aopp defined as 0
};

// Key rate and the intermediates of the mode that produced it.
struct KeyRateReport {
    Mode mode = Mode::original;
    double key_rate = 0.0;  // per time window
    bool clamped = false;   // raw rate was negative and clamped to 0
    bool no_key = false;    // phase-error bound left no extractable secrecy

    SecuritySummary summary;
    double n_t = 0.0;       // effective key bits entering error correction
    double e_k = 0.0;       // their bit-flip error rate (original mode)
    double n_u_post = 0.0;  // untagged bits after post-processing (n_u for original)
    double e_ph_post = 0.0; // phase bound after the pairing iteration
    TwccStats twcc;         // filled for Mode::twcc
    AoppStats aopp;         // filled for Mode::aopp
};

// H(x) = -x log2 x - (1-x) log2 (1-x), extended by continuity with
// H(0) = H(1) = 0. Throws std::domain_error outside [0,1].
double binary_entropy(double x);

}  // namespace scfqkd
