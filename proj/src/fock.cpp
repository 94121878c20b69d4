#include "scfqkd/fock.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace scfqkd::fock {

double FockState::norm2() const noexcept {
    double sum = 0.0;
    for (const auto& a : amplitudes) sum += std::norm(a);
    return sum;
}

double FockState::mean_photons() const noexcept {
    double sum = 0.0;
    for (std::size_t n = 1; n < amplitudes.size(); ++n) sum += double(n) * std::norm(amplitudes[n]);
    return sum;
}

int default_cutoff(double intensity) {
    return std::max(40, static_cast<int>(std::ceil(10.0 * intensity + 10.0)));
}

FockState coherent_fock(double intensity, int n_max) {
    if (!(intensity >= 0.0)) throw std::domain_error("coherent_fock: intensity must be >= 0");
    if (n_max < 0) n_max = default_cutoff(intensity);
    FockState state;
    state.amplitudes.resize(n_max + 1);
    double amp = std::exp(-0.5 * intensity);
    state.amplitudes[0] = amp;
    for (int n = 1; n <= n_max; ++n) {
        amp *= std::sqrt(intensity / n);
        state.amplitudes[n] = amp;
    }
    return state;
}

double JointPhotonDistribution::total() const noexcept {
    double sum = 0.0;
    for (double v : p) sum += v;
    return sum;
}

namespace {

std::vector<double> log_factorials(int n_max) {
    std::vector<double> lfact(n_max + 1, 0.0);
    for (int n = 2; n <= n_max; ++n) lfact[n] = lfact[n - 1] + std::log(double(n));
    return lfact;
}

// Pascal triangle in doubles; rows up to n inclusive.
std::vector<std::vector<double>> binomial_rows(int n) {
    std::vector<std::vector<double>> rows(n + 1);
    for (int i = 0; i <= n; ++i) {
        rows[i].resize(i + 1, 1.0);
        for (int j = 1; j < i; ++j) rows[i][j] = rows[i - 1][j - 1] + rows[i - 1][j];
    }
    return rows;
}

}  // namespace

JointPhotonDistribution beamsplitter_output(const FockState& state_a, const FockState& state_b) {
    const int na_max = state_a.n_max();
    const int nb_max = state_b.n_max();
    const int n_tot = na_max + nb_max;
    const auto lfact = log_factorials(n_tot);
    const auto binom = binomial_rows(std::max(na_max, nb_max));

    // g[n][l] = sqrt(l! (n-l)!) for output splits of n photons.
    std::vector<std::vector<double>> g(n_tot + 1);
    for (int n = 0; n <= n_tot; ++n) {
        g[n].resize(n + 1);
        for (int l = 0; l <= n; ++l) g[n][l] = std::exp(0.5 * (lfact[l] + lfact[n - l]));
    }

    std::vector<std::complex<double>> amp(std::size_t(n_tot + 1) * (n_tot + 1));
    const double half_log2 = 0.5 * std::numbers::ln2;
    for (int na = 0; na <= na_max; ++na) {
        for (int nb = 0; nb <= nb_max; ++nb) {
            const std::complex<double> weight = state_a.amplitudes[na] * state_b.amplitudes[nb];
            if (weight == std::complex<double>(0.0, 0.0)) continue;
            const int n = na + nb;
            const std::complex<double> base =
                weight * std::exp(-0.5 * (lfact[na] + lfact[nb]) - double(n) * half_log2);
            for (int j = 0; j <= na; ++j) {
                for (int k = 0; k <= nb; ++k) {
                    const int l = j + k;
                    const double sign = ((nb - k) & 1) ? -1.0 : 1.0;
                    amp[std::size_t(l) * (n_tot + 1) + (n - l)] +=
                        base * (binom[na][j] * binom[nb][k] * sign * g[n][l]);
                }
            }
        }
    }

    JointPhotonDistribution dist;
    dist.n_tot = n_tot;
    dist.p.resize(amp.size());
    for (std::size_t i = 0; i < amp.size(); ++i) dist.p[i] = std::norm(amp[i]);
    return dist;
}

JointPhotonDistribution reroute_misalignment(const JointPhotonDistribution& dist, double e_d) {
    if (!(e_d >= 0.0) || !(e_d <= 1.0))
        throw std::domain_error("reroute_misalignment: e_d must lie in [0, 1]");
    if (e_d == 0.0) return dist;
    const int n_tot = dist.n_tot;
    const auto binom = binomial_rows(n_tot);
    std::vector<double> pow_e(n_tot + 1, 1.0), pow_1me(n_tot + 1, 1.0);
    for (int i = 1; i <= n_tot; ++i) {
        pow_e[i] = pow_e[i - 1] * e_d;
        pow_1me[i] = pow_1me[i - 1] * (1.0 - e_d);
    }

    JointPhotonDistribution out;
    out.n_tot = n_tot;
    out.p.assign(dist.p.size(), 0.0);
    for (int nl = 0; nl <= n_tot; ++nl) {
        for (int nr = 0; nr + nl <= n_tot; ++nr) {
            const double mass = dist.at(nl, nr);
            if (mass == 0.0) continue;
            // u photons stay at L, v photons defect from R to L.
            for (int u = 0; u <= nl; ++u) {
                const double wu = binom[nl][u] * pow_1me[u] * pow_e[nl - u];
                for (int v = 0; v <= nr; ++v) {
                    const double wv = binom[nr][v] * pow_e[v] * pow_1me[nr - v];
                    out.at(u + v, (nl - u) + (nr - v)) += mass * wu * wv;
                }
            }
        }
    }
    return out;
}

ClickProbs detect(const JointPhotonDistribution& dist, double p_d) {
    const int n_tot = dist.n_tot;
    ClickProbs probs;
    for (int nl = 0; nl <= n_tot; ++nl) {
        for (int nr = 0; nr + nl <= n_tot; ++nr) {
            const double mass = dist.at(nl, nr);
            if (mass == 0.0) continue;
            const double click_l = nl > 0 ? 1.0 : p_d;
            const double click_r = nr > 0 ? 1.0 : p_d;
            probs.s_l += mass * click_l * (1.0 - click_r);
            probs.s_r += mass * click_r * (1.0 - click_l);
        }
    }
    return probs;
}

namespace {

void require_truncation(const FockState& state, const char* which) {
    const double deficit = state.tail_deficit();
    if (deficit > 1e-12) {
        std::ostringstream msg;
        msg << "fock oracle: input " << which << " truncated too aggressively (tail mass "
            << deficit << " > 1e-12 at n_max " << state.n_max() << ")";
        throw TruncationError(msg.str());
    }
}

}  // namespace

ClickProbs beamsplitter_click_probs(const FockState& state_a, const FockState& state_b,
                                    const ChannelConfig& channel) {
    require_truncation(state_a, "A");
    require_truncation(state_b, "B");
    const JointPhotonDistribution raw = beamsplitter_output(state_a, state_b);
    const JointPhotonDistribution mixed = reroute_misalignment(raw, channel.e_d);
    return detect(mixed, channel.p_d);
}

ClickProbs oracle_click_probs(double w_a, double w_b, const ChannelConfig& channel, int n_max) {
    const double eta = side_transmittance(channel);
    const FockState state_a = coherent_fock(eta * w_a, n_max);
    const FockState state_b = coherent_fock(eta * w_b, n_max);
    return beamsplitter_click_probs(state_a, state_b, channel);
}

}  // namespace scfqkd::fock
