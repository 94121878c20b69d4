#include "scfqkd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scfqkd/pipeline.hpp"

namespace scfqkd {

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(count));
    if (count == 1 || hi <= lo) {
        nodes.push_back(lo);
        return nodes;
    }
    const double log_lo = std::log(lo), log_hi = std::log(hi);
    for (int i = 0; i < count; ++i)
        nodes.push_back(std::exp(log_lo + (log_hi - log_lo) * double(i) / double(count - 1)));
    nodes.front() = lo;
    nodes.back() = hi;
    return nodes;
}

}  // namespace

BoxMaximum maximize_log_box(const Objective2D& objective, const BoxBounds& box,
                            const SearchOptions& options) {
    if (!(box.x_lo > 0.0) || !(box.y_lo > 0.0) || !(box.x_hi >= box.x_lo) ||
        !(box.y_hi >= box.y_lo))
        throw std::invalid_argument("maximize_log_box: need positive, ordered bounds");
    if (options.grid_x < 1 || options.grid_y < 1)
        throw std::invalid_argument("maximize_log_box: grid must have at least one node");

    const auto xs = log_grid(box.x_lo, box.x_hi, options.grid_x);
    const auto ys = log_grid(box.y_lo, box.y_hi, options.grid_y);

    BoxMaximum best;
    best.x = xs.front();
    best.y = ys.front();
    best.value = objective(best.x, best.y);
    for (const double x : xs) {
        for (const double y : ys) {
            const double value = objective(x, y);
            if (value > best.value) {
                best.x = x;
                best.y = y;
                best.value = value;
            }
        }
    }
    best.any_positive = best.value > 0.0;
    if (!best.any_positive) {
        best.value = std::max(0.0, best.value);
        return best;
    }

    // Multiplicative coordinate descent from the grid best. Step starts at
    // one grid spacing and shrinks; every accepted move strictly improves.
    double step_x = options.grid_x > 1
                        ? std::pow(box.x_hi / box.x_lo, 1.0 / double(options.grid_x - 1))
                        : 2.0;
    double step_y = options.grid_y > 1
                        ? std::pow(box.y_hi / box.y_lo, 1.0 / double(options.grid_y - 1))
                        : 2.0;
    step_x = std::max(step_x, 1.0 + 1e-9);
    step_y = std::max(step_y, 1.0 + 1e-9);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        const double sweep_start = best.value;
        bool moved = false;
        for (int axis = 0; axis < 2; ++axis) {
            double& coord = axis == 0 ? best.x : best.y;
            const double lo = axis == 0 ? box.x_lo : box.y_lo;
            const double hi = axis == 0 ? box.x_hi : box.y_hi;
            const double step = axis == 0 ? step_x : step_y;
            for (int walk = 0; walk < 200; ++walk) {
                const double up = std::min(hi, coord * step);
                const double down = std::max(lo, coord / step);
                const double value_up = up != coord ? objective(axis == 0 ? up : best.x,
                                                                axis == 0 ? best.y : up)
                                                    : best.value;
                const double value_down = down != coord ? objective(axis == 0 ? down : best.x,
                                                                    axis == 0 ? best.y : down)
                                                        : best.value;
                if (value_up > best.value && value_up >= value_down) {
                    coord = up;
                    best.value = value_up;
                    moved = true;
                } else if (value_down > best.value) {
                    coord = down;
                    best.value = value_down;
                    moved = true;
                } else {
                    break;
                }
            }
        }
        if (!moved) {
            step_x = std::sqrt(step_x);
            step_y = std::sqrt(step_y);
            if (step_x < 1.0 + 1e-7 && step_y < 1.0 + 1e-7) break;
        } else if (best.value - sweep_start < options.rel_tol * best.value &&
                   step_x < 1.0 + 1e-7 && step_y < 1.0 + 1e-7) {
            break;
        }
    }
    return best;
}

OptimizationResult optimize_key_rate(const OptimizationProblem& problem,
                                     const ChannelConfig& channel) {
    validate(channel);
    if (!(problem.nu >= 0.0)) throw ConfigError("nu", "must be >= 0");
    if (!(problem.p0_lo > 0.0) || !(problem.p0_hi < 1.0) || !(problem.p0_lo <= problem.p0_hi))
        throw ConfigError("p0", "optimization bounds must satisfy 0 < lo <= hi < 1");
    const double mu_lo = std::max(problem.nu, 1e-7);
    if (!(problem.mu_hi >= mu_lo))
        throw ConfigError("mu", "upper bound below the feasible region [nu, mu_hi]");

    // Search over px = 1 - p0 so that the log grid resolves the p0 -> 1
    // region where optima live.
    BoxBounds box;
    box.x_lo = 1.0 - problem.p0_hi;
    box.x_hi = 1.0 - problem.p0_lo;
    box.y_lo = mu_lo;
    box.y_hi = problem.mu_hi;

    SearchOptions options;
    options.grid_x = problem.grid_p0;
    options.grid_y = problem.grid_mu;
    options.rel_tol = problem.rel_tol;

    const auto objective = [&](double px, double mu) {
        const ProtocolConfig protocol =
            ProtocolConfig::symmetric(problem.nu, mu, 1.0 - px, problem.r, problem.n_windows);
        return evaluate_key_rate(protocol, channel, problem.mode);
    };

    const BoxMaximum best = maximize_log_box(objective, box, options);
    OptimizationResult result;
    result.no_key = !best.any_positive;
    result.p0 = result.no_key ? 0.0 : 1.0 - best.x;
    result.mu = result.no_key ? 0.0 : best.y;
    result.key_rate = best.value;
    result.mu_at_bound = !result.no_key && std::abs(best.y - problem.mu_hi) <= 1e-12 * problem.mu_hi;
    return result;
}

}  // namespace scfqkd
