#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scfqkd/channel.hpp"
#include "scfqkd/core.hpp"

namespace scfqkd::mc {

// All randomness derives from one 64-bit seed. Windows are processed in
// fixed chunks of kChunkWindows; chunk c uses the generator seeded with
// derive_stream(seed, kStreamWindows, c), so results are bit-identical
// for any worker count. Post-processing draws from its own streams.
struct SimSeed {
    std::uint64_t value = 1;
};

inline constexpr std::uint64_t kStreamWindows = 0;
inline constexpr std::uint64_t kStreamTwcc = 1;
inline constexpr std::uint64_t kStreamAopp = 2;
inline constexpr std::int64_t kChunkWindows = std::int64_t(1) << 16;

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

// Canonical double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
inline double uniform_double(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by multiply-shift with rejection.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

// One effective key-generation event. The pair class fixes both bits per
// the protocol's assignment; they are stored anyway since post-processing
// operates on bits alone.
struct KeyEvent {
    PairClass cls;
    std::uint8_t alice;
    std::uint8_t bob;
    Detector det;
};

struct RawKeySample {
    std::vector<KeyEvent> events;
};

struct SimResult {
    ObservedCounts counts;
    RawKeySample sample;
};

// Samples N windows: source choices (p0 each side), test/key split (r),
// and the detector outcome of the window's true source pairing. Test
// windows accumulate per-class counts, key windows append to the raw key.
// workers > 1 parallelizes over chunks without changing the output.
SimResult simulate_counts(const ProtocolConfig& protocol, const ChannelConfig& channel,
                          SimSeed seed, int workers = 1);

// Frequency estimators: S_O^d = n_O^d / (N p0^2 r) and so on; E_K and
// D_eff from the key-window counts. Requires r > 0 and N > 0.
WindowStats estimate_stats(const ObservedCounts& counts, const ProtocolConfig& protocol);

// Standard TWCC at bit level: a random pairing of the raw key, pairs with
// equal Alice/Bob parity keep their first bit. Odd leftover bit dropped.
TwccStats simulate_twcc(const RawKeySample& sample, SimSeed seed);

// AOPP at bit level: Bob pairs his 0-bits with his 1-bits at random,
// survivors are the pairs whose Alice parity is odd; the kept bit is the
// 0-bit member.
AoppStats simulate_aopp(const RawKeySample& sample, SimSeed seed);

// Side-by-side comparison of a simulation against the analytic channel
// model: per-count z-scores with binomial sigmas, and a delta-method
// z-score for the estimated phase-error bound.
struct CountCheck {
    std::string label;
    double observed = 0.0;
    double expected = 0.0;
    double sigma = 0.0;
    double z = 0.0;
};

struct McValidation {
    std::vector<CountCheck> counts;  // six test counts plus n_u0, n_u1
    double e_ph_mc = 0.0;
    double e_ph_analytic = 0.0;
    double e_ph_sigma = 0.0;
    double e_ph_z = 0.0;

    double max_abs_count_z() const;
    bool counts_ok(double max_z = 5.0) const { return max_abs_count_z() <= max_z; }
    bool e_ph_ok(double max_z = 3.0) const { return std::abs(e_ph_z) <= max_z; }
};

McValidation validate_against_analytic(const SimResult& result, const ProtocolConfig& protocol,
                                       const ChannelConfig& channel);

}  // namespace scfqkd::mc
