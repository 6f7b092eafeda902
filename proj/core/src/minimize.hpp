#pragma once

// Thin wrapper around GSL's BFGS minimizer with central-difference gradients.
// Internal to the library.

#include <Eigen/Dense>
#include <functional>

namespace fluidfrag::detail {

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

MinimizeResult minimize_bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                             double initial_step = 0.1, double grad_tol = 1e-9,
                             int max_iter = 400);

}  // namespace fluidfrag::detail
