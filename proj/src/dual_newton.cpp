// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "dual_newton.hpp"

#include <cmath>
#include <exception>

namespace occupancy::detail {

NewtonResult minimize_newton(const ConvexObjective& f, Eigen::VectorXd x, double tol, std::size_t max_iterations,
                             bool pseudo_inverse) {
    const auto n = x.size();
    Eigen::VectorXd g(n), g_new(n);
    Eigen::MatrixXd h(n, n);
    double fx = f(x, &g, &h);
    std::size_t it = 0;
    for (; it < max_iterations && g.lpNorm<Eigen::Infinity>() > tol; ++it) {
        Eigen::VectorXd d = pseudo_inverse ? Eigen::VectorXd(h.completeOrthogonalDecomposition().solve(-g))
                                           : Eigen::VectorXd(h.ldlt().solve(-g));
        if (!d.allFinite() || g.dot(d) >= 0.0) d = -g;
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            const Eigen::VectorXd cand = x + step * d;
            double fc;
            try {
                fc = f(cand, &g_new, nullptr);
            } catch (const std::exception&) {
                continue;
            }
            if (!std::isfinite(fc) || !g_new.allFinite()) continue;
            // Near the optimum f stalls at rounding level; accept gradient decrease instead.
            if (fc <= fx + 1e-4 * step * g.dot(d) ||
                (fc <= fx + 1e-12 * std::abs(fx) && g_new.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>())) {
                x = cand;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        fx = f(x, &g, &h);
    }
    return NewtonResult{x, g.lpNorm<Eigen::Infinity>(), it};
}

}  // namespace occupancy::detail
