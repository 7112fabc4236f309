// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
// Brute-force entropy minimization over truncated count distributions. Shares no
// formulas with the twist solvers: it works on the raw primal constraints.
#include <algorithm>
#include <cmath>
#include <limits>

#include "dual_newton.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/simulation.hpp"

namespace occupancy {

namespace {

constexpr double kZeroTarget = 1e-12;

struct Active {
    // a[c][k][j] for the constraints kept after support removal.
    std::vector<std::vector<std::vector<double>>> a;
    Eigen::VectorXd b;
};

struct Program {
    std::size_t K = 0, L = 0;
    std::vector<double> w;
    std::vector<std::vector<double>> log_q;  // -inf outside the support
    Active act;

    // Tilted class distributions at multipliers lambda.
    std::vector<std::vector<double>> tilt(const Eigen::VectorXd& lambda, std::vector<double>* log_z) const {
        std::vector<std::vector<double>> pi(K, std::vector<double>(L, 0.0));
        if (log_z) log_z->assign(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<double> e(L);
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < L; ++j) {
                e[j] = log_q[k][j];
                if (!std::isfinite(e[j])) continue;
                for (Eigen::Index c = 0; c < lambda.size(); ++c) e[j] += lambda[c] * act.a[c][k][j];
                mx = std::max(mx, e[j]);
            }
            double z = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
                pi[k][j] = std::isfinite(e[j]) ? std::exp(e[j] - mx) : 0.0;
                z += pi[k][j];
            }
            for (double& v : pi[k]) v /= z;
            if (log_z) (*log_z)[k] = mx + std::log(z);
        }
        return pi;
    }

    double dual(const Eigen::VectorXd& lambda, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
        std::vector<double> log_z;
        const auto pi = tilt(lambda, &log_z);
        const Eigen::Index m = lambda.size();
        double f = -lambda.dot(act.b);
        for (std::size_t k = 0; k < K; ++k) f += w[k] * log_z[k];
        if (grad || hess) {
            Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(K, m);
            for (std::size_t k = 0; k < K; ++k)
                for (Eigen::Index c = 0; c < m; ++c)
                    for (std::size_t j = 0; j < L; ++j) mean(k, c) += pi[k][j] * act.a[c][k][j];
            if (grad) {
                *grad = -act.b;
                for (std::size_t k = 0; k < K; ++k) *grad += w[k] * mean.row(k).transpose();
            }
            if (hess) {
                hess->setZero(m, m);
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t j = 0; j < L; ++j) {
                        if (pi[k][j] == 0.0) continue;
                        for (Eigen::Index c = 0; c < m; ++c) {
                            const double dc = act.a[c][k][j] - mean(k, c);
                            for (Eigen::Index d = 0; d <= c; ++d)
                                (*hess)(c, d) += w[k] * pi[k][j] * dc * (act.a[d][k][j] - mean(k, d));
                        }
                    }
                for (Eigen::Index c = 0; c < m; ++c)
                    for (Eigen::Index d = 0; d < c; ++d) (*hess)(d, c) = (*hess)(c, d);
            }
        }
        return f;
    }
};

Program prepare(const TruncatedProgram& p) {
    if (!(p.beta > 0.0)) throw DomainError("oracle needs beta > 0");
    if (p.class_weights.empty() || p.class_weights.size() != p.class_labels.size())
        throw DomainError("oracle needs one label per class weight");
    if (poisson::upper_tail(static_cast<long>(p.truncation), p.beta) > 1e-12)
        throw DomainError("truncation too small for beta");
    Program g;
    g.K = p.class_weights.size();
    g.L = p.truncation + 1;
    g.w = p.class_weights;
    g.log_q.assign(g.K, std::vector<double>(g.L));
    for (std::size_t k = 0; k < g.K; ++k)
        for (std::size_t j = 0; j < g.L; ++j) g.log_q[k][j] = poisson::log_pmf(static_cast<long>(j), p.beta);

    std::vector<const LinearConstraint*> kept;
    for (const auto& c : p.constraints) {
        if (c.coefficients.size() != g.K) throw DomainError("constraint '" + c.name + "' has wrong class count");
        for (const auto& row : c.coefficients)
            if (row.size() != g.L) throw DomainError("constraint '" + c.name + "' has wrong truncation");
        bool nonneg = true;
        for (const auto& row : c.coefficients)
            for (double v : row) nonneg = nonneg && v >= 0.0;
        if (nonneg && std::fabs(c.target) <= kZeroTarget) {
            for (std::size_t k = 0; k < g.K; ++k)
                for (std::size_t j = 0; j < g.L; ++j)
                    if (c.coefficients[k][j] > 0.0) g.log_q[k][j] = -std::numeric_limits<double>::infinity();
        } else {
            kept.push_back(&c);
        }
    }
    for (std::size_t k = 0; k < g.K; ++k)
        if (std::none_of(g.log_q[k].begin(), g.log_q[k].end(), [](double v) { return std::isfinite(v); }))
            throw InfeasibleTruncation("class " + std::to_string(p.class_labels[k]) + " has empty support");

    g.act.b.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        g.act.a.push_back(kept[c]->coefficients);
        g.act.b[static_cast<Eigen::Index>(c)] = kept[c]->target;
    }
    return g;
}

// One coordinate solve per constraint.
void sweep(const Program& g, Eigen::VectorXd& lambda) {
    for (Eigen::Index c = 0; c < lambda.size(); ++c) {
        for (int it = 0; it < 30; ++it) {
            Eigen::VectorXd grad;
            Eigen::MatrixXd hess;
            const double f0 = g.dual(lambda, &grad, &hess);
            const double d1 = grad[c], d2 = hess(c, c);
            if (std::fabs(d1) < 1e-14) break;
            double step = d2 > 1e-300 ? -d1 / d2 : -d1;
            step = std::clamp(step, -20.0, 20.0);
            Eigen::VectorXd trial = lambda;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                trial[c] = lambda[c] + step;
                if (g.dual(trial, nullptr, nullptr) <= f0 + 1e-4 * step * d1) {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
            lambda = trial;
        }
    }
}

}  // namespace

OracleResult entropy_min_oracle(const TruncatedProgram& p, const OracleOptions& opt) {
    const Program g = prepare(p);
    const Eigen::Index m = g.act.b.size();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    OracleResult res;
    if (m > 0) {
        for (; res.sweeps < opt.max_sweeps; ++res.sweeps) {
            Eigen::VectorXd grad;
            g.dual(lambda, &grad, nullptr);
            if (grad.lpNorm<Eigen::Infinity>() < opt.sweep_tolerance) break;
            sweep(g, lambda);
            if (!lambda.allFinite() || lambda.lpNorm<Eigen::Infinity>() > 1e4)
                throw InfeasibleTruncation("multipliers diverged during sweeps");
        }
        const auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* gr, Eigen::MatrixXd* h) { return g.dual(x, gr, h); };
        const auto nr = detail::minimize_newton(f, lambda, opt.tolerance, opt.max_newton_iterations, true);
        lambda = nr.x;
        res.newton_iterations = nr.iterations;
        if (!lambda.allFinite() || lambda.lpNorm<Eigen::Infinity>() > 1e4)
            throw InfeasibleTruncation("multipliers diverged");
    }
    res.argmin = g.tilt(lambda, nullptr);

    for (std::size_t k = 0; k < g.K; ++k)
        for (std::size_t j = 0; j < g.L; ++j)
            res.value += p.class_weights[k] *
                         xlogx_over_y(res.argmin[k][j], poisson::pmf(static_cast<long>(j), p.beta));
    for (const auto& c : p.constraints) {
        double lhs = 0.0;
        for (std::size_t k = 0; k < g.K; ++k)
            for (std::size_t j = 0; j < g.L; ++j) lhs += p.class_weights[k] * c.coefficients[k][j] * res.argmin[k][j];
        res.kkt_residual = std::max(res.kkt_residual, std::fabs(lhs - c.target));
    }
    if (res.kkt_residual > 1e-8)
        throw InfeasibleTruncation("constraints unmet (residual " + std::to_string(res.kkt_residual) + ")");
    return res;
}

namespace {

std::vector<std::vector<double>> zeros(std::size_t K, std::size_t N) {
    return std::vector<std::vector<double>>(K, std::vector<double>(N + 1, 0.0));
}

LinearConstraint mean_constraint(std::size_t K, std::size_t N, double beta) {
    LinearConstraint c{"mean", zeros(K, N), beta};
    for (auto& row : c.coefficients)
        for (std::size_t j = 0; j <= N; ++j) row[j] = static_cast<double>(j);
    return c;
}

}  // namespace

TruncatedProgram endpoint_program(const EndpointConstraint& c, std::size_t truncation) {
    const std::size_t I = c.capacity();
    TruncatedProgram p;
    p.beta = c.beta;
    p.truncation = truncation;
    for (std::size_t k = 0; k <= I + 1; ++k) {
        if (c.alpha[k] > 0.0) {
            p.class_weights.push_back(c.alpha[k]);
            p.class_labels.push_back(k);
        }
    }
    const std::size_t K = p.class_weights.size(), N = truncation;
    p.constraints.push_back(mean_constraint(K, N, c.beta));
    const auto ca = c.alpha.cumulative(), cw = c.omega.cumulative();
    // Urns that started at or below level i and ended above it.
    for (std::size_t i = 0; i <= I; ++i) {
        LinearConstraint e{"excess_" + std::to_string(i), zeros(K, N), std::max(0.0, ca[i] - cw[i])};
        for (std::size_t q = 0; q < K; ++q) {
            const std::size_t k = p.class_labels[q];
            if (k > i) continue;
            for (std::size_t j = i - k + 1; j <= N; ++j) e.coefficients[q][j] = 1.0;
        }
        p.constraints.push_back(std::move(e));
    }
    for (std::size_t i = 0; i <= I; ++i) {
        if (c.omega[i] > 0.0) continue;
        LinearConstraint z{"empty_level_" + std::to_string(i), zeros(K, N), 0.0};
        for (std::size_t q = 0; q < K; ++q) {
            const std::size_t k = p.class_labels[q];
            if (k <= i && i - k <= N) z.coefficients[q][i - k] = 1.0;
        }
        p.constraints.push_back(std::move(z));
    }
    return p;
}

TruncatedProgram overflow_program(std::size_t capacity, double beta, double zeta, std::size_t truncation) {
    TruncatedProgram p;
    p.beta = beta;
    p.truncation = truncation;
    p.class_weights = {1.0};
    p.class_labels = {0};
    p.constraints.push_back(mean_constraint(1, truncation, beta));
    LinearConstraint s{"spare_capacity", zeros(1, truncation), zeta};
    for (std::size_t j = 0; j < capacity && j <= truncation; ++j) s.coefficients[0][j] = static_cast<double>(capacity - j);
    p.constraints.push_back(std::move(s));
    return p;
}

TruncatedProgram coupon_program(const SimplexVector& alpha, double beta, double xi, std::size_t truncation) {
    const std::size_t I = alpha.capacity();
    TruncatedProgram p;
    p.beta = beta;
    p.truncation = truncation;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k] > 0.0) {
            p.class_weights.push_back(alpha[k]);
            p.class_labels.push_back(k);
        }
    }
    const std::size_t K = p.class_weights.size();
    p.constraints.push_back(mean_constraint(K, truncation, beta));
    LinearConstraint low{"low_occupancy", zeros(K, truncation), xi};
    for (std::size_t q = 0; q < K; ++q) {
        const std::size_t k = p.class_labels[q];
        for (std::size_t j = 0; k + j <= I && j <= truncation; ++j) low.coefficients[q][j] = 1.0;
    }
    p.constraints.push_back(std::move(low));
    return p;
}

SimplexVector occupancy_of(const TruncatedProgram& p, const OracleResult& r, std::size_t capacity) {
    std::vector<double> v(capacity + 2, 0.0);
    for (std::size_t q = 0; q < p.class_weights.size(); ++q) {
        for (std::size_t j = 0; j < r.argmin[q].size(); ++j) {
            const std::size_t level = std::min(p.class_labels[q] + j, capacity + 1);
            v[level] += p.class_weights[q] * r.argmin[q][j];
        }
    }
    return SimplexVector(std::move(v), 1e-9);
}

}  // namespace occupancy
