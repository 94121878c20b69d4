#pragma once

#include <functional>

#include "scfqkd/channel.hpp"
#include "scfqkd/core.hpp"

namespace scfqkd {

using Objective2D = std::function<double(double, double)>;

struct BoxBounds {
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
};

struct SearchOptions {
    int grid_x = 40;
    int grid_y = 40;
    double rel_tol = 1e-4;  // refinement stops once sweeps improve less than this
    int max_sweeps = 400;
};

struct BoxMaximum {
    double x = 0.0, y = 0.0;
    double value = 0.0;
    bool any_positive = false;  // at least one grid/refinement point was > 0
};

// Derivative-free maximization on a positive box: logarithmic coarse grid
// followed by multiplicative coordinate descent. The refinement only ever
// moves on strict improvement, so the result dominates the grid best.
// Deterministic; requires strictly positive bounds.
BoxMaximum maximize_log_box(const Objective2D& objective, const BoxBounds& box,
                            const SearchOptions& options);

// Key-rate maximization over (p0, mu) at fixed nu and channel, symmetric
// sources, asymptotic pipeline objective.
struct OptimizationProblem {
    double nu = 0.0;
    Mode mode = Mode::original;
    double p0_lo = 1e-6, p0_hi = 1.0 - 1e-6;
    double mu_hi = 1.0;  // lower bound is max(nu, 1e-7)
    int grid_p0 = 40, grid_mu = 40;
    double rel_tol = 1e-4;
    double r = 0.0;          // asymptotic default
    double n_windows = 1.0;  // the per-window rate is scale free
};

struct OptimizationResult {
    double p0 = 0.0;
    double mu = 0.0;
    double key_rate = 0.0;
    bool no_key = false;      // the whole search stayed at rate 0
    bool mu_at_bound = false; // optimum sits on the mu upper bound
};

OptimizationResult optimize_key_rate(const OptimizationProblem& problem,
                                     const ChannelConfig& channel);

}  // namespace scfqkd
