// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace occupancy::detail {

// f(x, grad, hess) returns the objective; grad/hess may be null.
using ConvexObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*, Eigen::MatrixXd*)>;

struct NewtonResult {
    Eigen::VectorXd x;
    double residual = 0.0;
    std::size_t iterations = 0;
};

// Newton with Armijo backtracking; stops when the gradient sup-norm is below tol.
NewtonResult minimize_newton(const ConvexObjective& f, Eigen::VectorXd x, double tol, std::size_t max_iterations,
                             bool pseudo_inverse = false);

}  // namespace occupancy::detail
