#include "scfqkd/montecarlo.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "scfqkd/rates.hpp"

namespace scfqkd::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t state = seed;
    std::uint64_t z = splitmix64(state);
    state = z ^ (0xA0761D6478BD642FULL * (purpose + 1));
    z = splitmix64(state);
    state = z ^ (0xE7037ED1A0B428DBULL * (index + 1));
    return splitmix64(state);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    // Lemire's multiply-shift with rejection of the biased low range.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = rng();
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        if (static_cast<std::uint64_t>(m) >= threshold)
            return static_cast<std::uint64_t>(m >> 64);
    }
}

namespace {

PairClass classify(bool a_weak, bool b_weak) {
    if (a_weak && b_weak) return PairClass::weak_weak;
    if (!a_weak && !b_weak) return PairClass::strong_strong;
    return a_weak ? PairClass::weak_strong : PairClass::strong_weak;
}

struct ChunkResult {
    ObservedCounts counts;
    std::vector<KeyEvent> events;
};

void accumulate(ObservedCounts& total, const ObservedCounts& part) {
    for (int d = 0; d < 2; ++d) {
        total.test_o[d] += part.test_o[d];
        total.test_b[d] += part.test_b[d];
        total.test_z[d] += part.test_z[d];
        for (int c = 0; c < kNumPairClasses; ++c) total.key[c][d] += part.key[c][d];
    }
}

}  // namespace

SimResult simulate_counts(const ProtocolConfig& protocol, const ChannelConfig& channel,
                          SimSeed seed, int workers) {
    validate_config(protocol, channel);
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (protocol.n_windows != std::floor(protocol.n_windows) || protocol.n_windows > 0x1p53)
        throw ConfigError("N", "Monte-Carlo mode needs an exact integer window count");
    const std::int64_t n_windows = static_cast<std::int64_t>(protocol.n_windows);

    // Click probabilities per source pairing, indexed by PairClass.
    std::array<ClickProbs, kNumPairClasses> probs{};
    probs[static_cast<int>(PairClass::strong_weak)] =
        window_click_probs(protocol.mu_upper_a, protocol.nu_upper_b, channel);
    probs[static_cast<int>(PairClass::weak_strong)] =
        window_click_probs(protocol.nu_upper_a, protocol.mu_upper_b, channel);
    probs[static_cast<int>(PairClass::weak_weak)] =
        window_click_probs(protocol.nu_upper_a, protocol.nu_upper_b, channel);
    probs[static_cast<int>(PairClass::strong_strong)] =
        window_click_probs(protocol.mu_upper_a, protocol.mu_upper_b, channel);

    const std::int64_t n_chunks = (n_windows + kChunkWindows - 1) / kChunkWindows;
    std::vector<ChunkResult> chunks(static_cast<std::size_t>(n_chunks));

    auto run_chunk = [&](std::int64_t chunk_index) {
        ChunkResult& out = chunks[static_cast<std::size_t>(chunk_index)];
        std::mt19937_64 rng(derive_stream(seed.value, kStreamWindows,
                                          static_cast<std::uint64_t>(chunk_index)));
        const std::int64_t begin = chunk_index * kChunkWindows;
        const std::int64_t end = std::min(begin + kChunkWindows, n_windows);
        for (std::int64_t i = begin; i < end; ++i) {
            // Fixed draw pattern per window keeps chunk streams aligned.
            const double u_src_a = uniform_double(rng);
            const double u_src_b = uniform_double(rng);
            const double u_test = uniform_double(rng);
            const double u_out = uniform_double(rng);

            const PairClass cls = classify(u_src_a < protocol.p0, u_src_b < protocol.p0);
            const ClickProbs& cp = probs[static_cast<int>(cls)];
            Detector det;
            if (u_out < cp.s_l) {
                det = Detector::left;
            } else if (u_out < cp.s_l + cp.s_r) {
                det = Detector::right;
            } else {
                continue;  // no click or double click: not effective
            }
            const int d = static_cast<int>(det);
            if (u_test < protocol.r) {
                switch (cls) {
                    case PairClass::weak_weak: out.counts.test_o[d]++; break;
                    case PairClass::strong_strong: out.counts.test_b[d]++; break;
                    default: out.counts.test_z[d]++; break;
                }
            } else {
                out.counts.key[static_cast<int>(cls)][d]++;
                out.events.push_back(KeyEvent{cls, static_cast<std::uint8_t>(alice_bit(cls)),
                                              static_cast<std::uint8_t>(bob_bit(cls)), det});
            }
        }
    };

    if (workers == 1 || n_chunks <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        const int n_threads = static_cast<int>(std::min<std::int64_t>(workers, n_chunks));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::int64_t c = next.fetch_add(1);
                    if (c >= n_chunks) return;
                    run_chunk(c);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    SimResult result;
    std::size_t total_events = 0;
    for (const auto& chunk : chunks) total_events += chunk.events.size();
    result.sample.events.reserve(total_events);
    for (const auto& chunk : chunks) {
        accumulate(result.counts, chunk.counts);
        result.sample.events.insert(result.sample.events.end(), chunk.events.begin(),
                                    chunk.events.end());
    }
    return result;
}

WindowStats estimate_stats(const ObservedCounts& counts, const ProtocolConfig& protocol) {
    validate(protocol);
    if (!(protocol.r > 0.0))
        throw ConfigError("r", "frequency estimation divides by r; need r > 0");
    if (!(protocol.n_windows > 0.0)) throw ConfigError("N", "need N > 0");
    const double n = protocol.n_windows;
    const double p0 = protocol.p0, px = protocol.px(), r = protocol.r;

    WindowStats stats;
    stats.s_o_l = double(counts.test_o[0]) / (n * p0 * p0 * r);
    stats.s_o_r = double(counts.test_o[1]) / (n * p0 * p0 * r);
    stats.s_b_l = double(counts.test_b[0]) / (n * px * px * r);
    stats.s_b_r = double(counts.test_b[1]) / (n * px * px * r);
    stats.s_z_l = double(counts.test_z[0]) / (2.0 * n * p0 * px * r);
    stats.s_z_r = double(counts.test_z[1]) / (2.0 * n * p0 * px * r);

    const std::int64_t total = counts.key_total();
    stats.d_eff = double(total) / (n * (1.0 - r));
    if (total > 0) {
        stats.e_k = double(counts.key_errors()) / double(total);
    } else {
        stats.e_k = 0.0;
        stats.zero_throughput = true;
    }
    return stats;
}

namespace {

template <typename T>
void shuffle_indices(std::vector<T>& indices, std::mt19937_64& rng) {
    for (std::size_t i = indices.size(); i > 1; --i) {
        const std::size_t j = uniform_below(rng, i);
        std::swap(indices[i - 1], indices[j]);
    }
}

}  // namespace

TwccStats simulate_twcc(const RawKeySample& sample, SimSeed seed) {
    const auto& events = sample.events;
    TwccStats stats;
    stats.n_t = double(events.size());
    const std::size_t n_paired = events.size() & ~std::size_t(1);  // odd leftover dropped
    if (n_paired == 0) return stats;

    std::vector<std::uint32_t> order(events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(derive_stream(seed.value, kStreamTwcc, 0));
    shuffle_indices(order, rng);

    std::int64_t kept[3] = {0, 0, 0}, errs[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n_paired; i += 2) {
        const KeyEvent& first = events[order[i]];
        const KeyEvent& second = events[order[i + 1]];
        const int bob_parity = first.bob ^ second.bob;
        const int alice_parity = first.alice ^ second.alice;
        if (bob_parity != alice_parity) continue;
        int cls;  // 0: Bob 00, 1: Bob 11, 2: odd parity
        if (bob_parity == 1)
            cls = 2;
        else
            cls = first.bob ? 1 : 0;
        kept[cls]++;
        if (first.alice != first.bob) errs[cls]++;  // kept bit = first of pair
    }
    stats.n_t1 = double(kept[0]);
    stats.n_t2 = double(kept[1]);
    stats.n_t3 = double(kept[2]);
    stats.e_1 = kept[0] ? double(errs[0]) / double(kept[0]) : 0.0;
    stats.e_2 = kept[1] ? double(errs[1]) / double(kept[1]) : 0.0;
    stats.e_3 = kept[2] ? double(errs[2]) / double(kept[2]) : 0.0;
    return stats;
}

double McValidation::max_abs_count_z() const {
    double max_z = 0.0;
    for (const auto& check : counts) max_z = std::max(max_z, std::abs(check.z));
    return max_z;
}

McValidation validate_against_analytic(const SimResult& result, const ProtocolConfig& protocol,
                                       const ChannelConfig& channel) {
    validate_config(protocol, channel);
    if (!(protocol.r > 0.0)) throw ConfigError("r", "validation needs test windows; need r > 0");
    const double n = protocol.n_windows;
    const double p0 = protocol.p0, px = protocol.px(), r = protocol.r;
    const WindowStats analytic = asymptotic_stats(protocol, channel);
    const ClickProbs z_sw = window_click_probs(protocol.mu_upper_a, protocol.nu_upper_b, channel);
    const ClickProbs z_ws = window_click_probs(protocol.nu_upper_a, protocol.mu_upper_b, channel);

    McValidation report;
    const auto add_check = [&](std::string label, double observed, double prob_per_window) {
        CountCheck check;
        check.label = std::move(label);
        check.observed = observed;
        check.expected = n * prob_per_window;
        check.sigma = std::sqrt(n * prob_per_window * (1.0 - prob_per_window));
        check.z = check.sigma > 0.0 ? (check.observed - check.expected) / check.sigma
                                    : (check.observed == check.expected ? 0.0 : INFINITY);
        report.counts.push_back(std::move(check));
    };

    const auto& counts = result.counts;
    add_check("n_O^L", double(counts.test_o[0]), p0 * p0 * r * analytic.s_o_l);
    add_check("n_O^R", double(counts.test_o[1]), p0 * p0 * r * analytic.s_o_r);
    add_check("n_B^L", double(counts.test_b[0]), px * px * r * analytic.s_b_l);
    add_check("n_B^R", double(counts.test_b[1]), px * px * r * analytic.s_b_r);
    add_check("n_Z^L", double(counts.test_z[0]), 2.0 * p0 * px * r * analytic.s_z_l);
    add_check("n_Z^R", double(counts.test_z[1]), 2.0 * p0 * px * r * analytic.s_z_r);
    const auto& key = counts.key;
    add_check("n_u0", double(key[int(PairClass::weak_strong)][0] +
                             key[int(PairClass::weak_strong)][1]),
              p0 * px * (1.0 - r) * (z_ws.s_l + z_ws.s_r));
    add_check("n_u1", double(key[int(PairClass::strong_weak)][0] +
                             key[int(PairClass::strong_weak)][1]),
              p0 * px * (1.0 - r) * (z_sw.s_l + z_sw.s_r));

    // Phase-error bound from the six estimated frequencies; its sigma by
    // the delta method with binomial count variances.
    const BoundCoefficients coeffs = make_coefficients(protocol);
    const auto e_ph_of = [&](const std::array<double, 6>& c) {
        WindowStats stats;
        stats.s_o_l = c[0] / (n * p0 * p0 * r);
        stats.s_o_r = c[1] / (n * p0 * p0 * r);
        stats.s_b_l = c[2] / (n * px * px * r);
        stats.s_b_r = c[3] / (n * px * px * r);
        stats.s_z_l = c[4] / (2.0 * n * p0 * px * r);
        stats.s_z_r = c[5] / (2.0 * n * p0 * px * r);
        return make_security_summary(stats, protocol, coeffs).e_ph_upper;
    };
    std::array<double, 6> observed = {double(counts.test_o[0]), double(counts.test_o[1]),
                                      double(counts.test_b[0]), double(counts.test_b[1]),
                                      double(counts.test_z[0]), double(counts.test_z[1])};
    report.e_ph_mc = e_ph_of(observed);
    report.e_ph_analytic = make_security_summary(analytic, protocol, coeffs).e_ph_upper;

    double variance = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double sigma_i = report.counts[static_cast<std::size_t>(i)].sigma;
        if (sigma_i == 0.0) continue;
        const double h = std::max(0.5, 0.5 * sigma_i);
        std::array<double, 6> up = observed, down = observed;
        up[static_cast<std::size_t>(i)] += h;
        double slope;
        if (observed[static_cast<std::size_t>(i)] - h >= 0.0) {
            down[static_cast<std::size_t>(i)] -= h;
            slope = (e_ph_of(up) - e_ph_of(down)) / (2.0 * h);
        } else {
            slope = (e_ph_of(up) - report.e_ph_mc) / h;
        }
        variance += slope * slope * sigma_i * sigma_i;
    }
    report.e_ph_sigma = std::sqrt(variance);
    report.e_ph_z = report.e_ph_sigma > 0.0
                        ? (report.e_ph_mc - report.e_ph_analytic) / report.e_ph_sigma
                        : 0.0;
    return report;
}

AoppStats simulate_aopp(const RawKeySample& sample, SimSeed seed) {
    const auto& events = sample.events;
    AoppStats stats;
    std::vector<std::uint32_t> zeros, ones;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].bob == 0) {
            zeros.push_back(static_cast<std::uint32_t>(i));
            if (is_untagged(events[i].cls)) stats.n_u0 += 1.0;
        } else {
            ones.push_back(static_cast<std::uint32_t>(i));
            if (is_untagged(events[i].cls)) stats.n_u1 += 1.0;
        }
    }
    stats.n_b0 = double(zeros.size());
    stats.n_b1 = double(ones.size());
    const std::size_t n_g = std::min(zeros.size(), ones.size());
    stats.n_g = double(n_g);
    if (n_g == 0) {
        stats.empty = true;
        return stats;
    }

    std::mt19937_64 rng0(derive_stream(seed.value, kStreamAopp, 0));
    std::mt19937_64 rng1(derive_stream(seed.value, kStreamAopp, 1));
    shuffle_indices(zeros, rng0);
    shuffle_indices(ones, rng1);

    std::int64_t survivors = 0, errors = 0;
    for (std::size_t i = 0; i < n_g; ++i) {
        const KeyEvent& zero_member = events[zeros[i]];
        const KeyEvent& one_member = events[ones[i]];
        if ((zero_member.alice ^ one_member.alice) != 1) continue;  // Alice announces odd parities
        survivors++;
        if (zero_member.alice != zero_member.bob) errors++;  // kept bit = 0-bit member
    }
    stats.n_t_aopp = double(survivors);
    stats.e_aopp = survivors ? double(errors) / double(survivors) : 0.0;
    return stats;
}

}  // namespace scfqkd::mc
