#pragma once

#include <complex>
#include <vector>

#include "scfqkd/channel.hpp"
#include "scfqkd/core.hpp"

// Truncated Fock-space propagation of the two input pulses through the
// 50:50 beamsplitter, followed by the same classical misalignment and
// dark-count layer as the analytic channel model. Test/diagnostic path
// only; any disagreement with channel::window_click_probs isolates the
// interference-statistics layer.
namespace scfqkd::fock {

class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& message) : std::runtime_error(message) {}
};

struct FockState {
    std::vector<std::complex<double>> amplitudes;  // index = photon number, 0..n_max

    int n_max() const noexcept { return static_cast<int>(amplitudes.size()) - 1; }
    double norm2() const noexcept;
    double mean_photons() const noexcept;
    // Probability mass lost to truncation (1 - norm^2 for a truncated
    // coherent state).
    double tail_deficit() const noexcept { return 1.0 - norm2(); }
};

// n_max = max(40, ceil(10 w + 10)): coherent tail beyond this is < 1e-12
// for any intensity in the operating range (w <= 2).
int default_cutoff(double intensity);

// Truncated coherent state: amplitudes e^{-w/2} w^{n/2} / sqrt(n!).
// n_max < 0 selects default_cutoff(intensity).
FockState coherent_fock(double intensity, int n_max = -1);

// Joint photon-number distribution over the two output ports,
// p(n_l, n_r) stored row-major with n_l, n_r in 0..n_tot.
struct JointPhotonDistribution {
    int n_tot = 0;
    std::vector<double> p;

    double& at(int n_l, int n_r) { return p[static_cast<std::size_t>(n_l) * (n_tot + 1) + n_r]; }
    double at(int n_l, int n_r) const {
        return p[static_cast<std::size_t>(n_l) * (n_tot + 1) + n_r];
    }
    double total() const noexcept;
};

// Exact output distribution of the 50:50 beamsplitter acting on the two
// (pure) input states: a^dag -> (l^dag + r^dag)/sqrt(2),
// b^dag -> (l^dag - r^dag)/sqrt(2), expanded over the joint Fock basis.
JointPhotonDistribution beamsplitter_output(const FockState& state_a, const FockState& state_b);

// Classical misalignment: every photon independently ends up at the wrong
// port with probability e_d (binomial rerouting). For coherent inputs this
// is exactly the analytic model's intensity cross-mixing.
JointPhotonDistribution reroute_misalignment(const JointPhotonDistribution& dist, double e_d);

// Threshold detectors with dark counts applied to a photon-number
// distribution; returns exactly-one-click probabilities.
ClickProbs detect(const JointPhotonDistribution& dist, double p_d);

// Full oracle path. Channel transmittance must already be folded into the
// input intensities by the caller; only e_d and p_d are read from the
// channel. Refuses (TruncationError) when either input's tail mass
// exceeds 1e-12.
ClickProbs beamsplitter_click_probs(const FockState& state_a, const FockState& state_b,
                                    const ChannelConfig& channel);

// Convenience wrapper mirroring channel::window_click_probs: folds the
// channel transmittance into the intensities, builds coherent states and
// runs the Fock-space path.
ClickProbs oracle_click_probs(double w_a, double w_b, const ChannelConfig& channel,
                              int n_max = -1);

}  // namespace scfqkd::fock
