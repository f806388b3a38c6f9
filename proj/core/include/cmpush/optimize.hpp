#pragma once

#include <Eigen/Core>
#include <functional>

namespace cmpush {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BoxBounds {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lo).cwiseMin(hi);
    }
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
};

/// Box-constrained quasi-Newton descent (damped BFGS with projection and
/// backtracking line search, forward-difference gradients).
MinimizeResult minimize_bounded(const Objective& f, const Eigen::VectorXd& x0,
                                const BoxBounds& bounds, int max_iters = 50,
                                double grad_rel_step = 1e-6, double tol = 1e-10);

/// Derivative-free Nelder-Mead with box clamping, for small noisy problems.
MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const BoxBounds& bounds,
                           double initial_step = 0.3, int max_evals = 400);

}  // namespace cmpush
