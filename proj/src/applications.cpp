// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "dual_newton.hpp"

namespace occupancy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SimplexVector zero_cost_endpoint(const SimplexVector& alpha, double beta) {
    return SimplexVector(zero_cost_path(alpha)(beta).gamma, 1e-10);
}

double log_sum_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

}  // namespace

ClassicalSolution classical_rate(double omega0, double beta) {
    if (!(omega0 > 0.0 && omega0 < 1.0)) throw DomainError("classical_rate: omega0 must lie in (0, 1)");
    if (!(beta > 0.0)) throw DomainError("classical_rate: beta must be positive");
    ClassicalSolution s;
    const SimplexVector omega({omega0, 1.0 - omega0});
    s.extremal = build_empty_extremal(omega, beta);
    s.rho = s.extremal.twist.rho;
    s.C = s.extremal.twist.C;
    s.J = terminal_rate_empty(omega, beta);
    return s;
}

PathFunction ClassicalSolution::path(std::size_t levels) const { return as_path(extremal, levels); }

double zero_cost_spare_capacity(std::size_t capacity, double beta) {
    double z = 0.0;
    for (std::size_t i = 0; i < capacity; ++i)
        z += static_cast<double>(capacity - i) * poisson::pmf(static_cast<long>(i), beta);
    return z;
}

double OverflowSolution::Q() const { return poisson::upper_tail(static_cast<long>(capacity) - 1, rho * beta); }

double OverflowSolution::R() const {
    const double mu = rho * beta / nu;
    return std::exp(static_cast<double>(capacity) * std::log(nu) - rho * beta * (1.0 - 1.0 / nu)) *
           poisson::cdf(static_cast<long>(capacity) - 1, mu);
}

CountDistribution OverflowSolution::distribution() const {
    const double lambda = rho * beta;
    const std::size_t n = std::max(CountDistribution::default_truncation(lambda), capacity + 1);
    std::vector<double> head(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double spare = i < capacity ? static_cast<double>(capacity - i) : 0.0;
        head[i] = C * std::exp(poisson::log_pmf(static_cast<long>(i), lambda) + spare * std::log(nu));
    }
    return CountDistribution(std::move(head), C, lambda);
}

SimplexVector OverflowSolution::terminal_state() const {
    const auto pi = distribution();
    std::vector<double> w(capacity + 2);
    double s = 0.0;
    for (std::size_t i = 0; i <= capacity; ++i) s += w[i] = pi[i];
    w.back() = std::max(0.0, 1.0 - s);
    return SimplexVector(std::move(w), 1e-9);
}

OverflowSolution overflow_rate(std::size_t capacity, double beta, double eta, const OverflowOptions& opt) {
    if (capacity < 1) throw DomainError("overflow_rate: capacity must be at least 1");
    if (!(beta > 0.0)) throw DomainError("overflow_rate: beta must be positive");
    const double cap = static_cast<double>(capacity);
    if (!(eta > std::max(0.0, beta - cap) && eta < beta))
        throw DomainError("overflow_rate: eta must lie in ([beta - I]+, beta)");
    OverflowSolution s;
    s.capacity = capacity;
    s.beta = beta;
    s.eta = eta;
    s.zeta = eta + cap - beta;
    const double zeta_star = zero_cost_spare_capacity(capacity, beta);
    if (std::abs(s.zeta - zeta_star) <= 1e-12 * std::max(1.0, zeta_star) || (s.zeta < zeta_star && !opt.lower_tail)) {
        s.residual = 0.0;
        return s;
    }

    // Dual in (z, l) = (log rho, log nu): pi_i proportional to P_i(beta) e^{z i + l (I - i)+}.
    const long I = static_cast<long>(capacity);
    auto objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        const double z = v(0), l = v(1), rho = std::exp(z), lambda = rho * beta;
        std::vector<double> t(capacity + 1);
        double top = -kInf;
        for (long i = 0; i <= I; ++i) {
            t[static_cast<std::size_t>(i)] =
                poisson::log_pmf(i, beta) + z * static_cast<double>(i) + l * static_cast<double>(I - i);
            top = std::max(top, t[static_cast<std::size_t>(i)]);
        }
        const double q = poisson::upper_tail(I, lambda);
        const double tail_log = (rho - 1.0) * beta + safe_log(q);
        top = std::max(top, tail_log);
        double S = 0.0;
        for (double& x : t) S += (x = std::exp(x - top));
        const double tail_w = std::isfinite(tail_log) ? std::exp(tail_log - top) : 0.0;
        S += tail_w;
        const double f = top + std::log(S) - z * beta - l * s.zeta;
        if (g) {
            Eigen::Vector2d mu = Eigen::Vector2d::Zero();
            Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
            for (long i = 0; i <= I; ++i) {
                const double p = t[static_cast<std::size_t>(i)] / S;
                const double a = static_cast<double>(i), b = static_cast<double>(I - i);
                mu(0) += p * a;
                mu(1) += p * b;
                m2(0, 0) += p * a * a;
                m2(0, 1) += p * a * b;
                m2(1, 1) += p * b * b;
            }
            if (tail_w > 0.0) {
                const double pt = tail_w / S;
                mu(0) += pt * lambda * poisson::upper_tail(I - 1, lambda) / q;
                m2(0, 0) += pt * (lambda * lambda * poisson::upper_tail(I - 2, lambda) +
                                  lambda * poisson::upper_tail(I - 1, lambda)) / q;
            }
            m2(1, 0) = m2(0, 1);
            *g = mu - Eigen::Vector2d(beta, s.zeta);
            if (h) *h = m2 - mu * mu.transpose();
        }
        return f;
    };
    const auto sol = detail::minimize_newton(objective, Eigen::Vector2d::Zero(), 1e-13, 200);
    if (sol.residual > 1e-10) throw SolverFailure("overflow_rate: dual Newton did not converge", sol.residual);
    s.rho = std::exp(sol.x(0));
    s.nu = std::exp(sol.x(1));
    const double R = s.R(), Q = s.Q();
    s.C = 1.0 / (R + Q);
    const double lambda = s.rho * beta;
    const double e1 = s.C * (R + Q) - 1.0;
    const double e2 = s.C * (lambda / s.nu * R + lambda * Q) - beta;
    const double e3 = s.C * (cap * poisson::pmf(I, lambda) + (cap - lambda / s.nu) * R) - s.zeta;
    s.residual = std::max({std::abs(e1), std::abs(e2), std::abs(e3)});
    if (s.residual > 1e-9) throw SolverFailure("overflow_rate: constraint equations not satisfied", s.residual);
    s.J = std::log(s.C) + beta * (1.0 - s.rho) + beta * std::log(s.rho) + s.zeta * std::log(s.nu);
    return s;
}

double zero_cost_low_fraction(const SimplexVector& alpha, double beta) {
    const long I = static_cast<long>(alpha.capacity());
    double xi = 0.0;
    for (long k = 0; k <= I; ++k) xi += alpha[static_cast<std::size_t>(k)] * poisson::cdf(I - k, beta);
    return xi;
}

double minimum_low_fraction(const SimplexVector& alpha, double beta) {
    const std::size_t I = alpha.capacity();
    double budget = beta, xi = 0.0;
    for (std::size_t k = 0; k <= I; ++k) xi += alpha[k];
    // Cheapest first: class k leaves the low set with I - k + 1 balls.
    for (std::size_t k = I + 1; k-- > 0;) {
        const double cost = static_cast<double>(I - k + 1);
        const double moved = std::min(alpha[k], budget / cost);
        xi -= moved;
        budget -= moved * cost;
        if (budget <= 0.0) break;
    }
    return std::max(0.0, xi);
}

CountDistribution CouponSolution::class_distribution(std::size_t k) const {
    const double lambda = rho * beta;
    const long m = static_cast<long>(capacity) - static_cast<long>(k);
    const double scale = class_scales.at(k);
    const std::size_t n = std::max(CountDistribution::default_truncation(lambda), capacity + 1);
    std::vector<double> head(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        head[j] = scale * poisson::pmf(static_cast<long>(j), lambda) * (static_cast<long>(j) <= m ? W : 1.0);
    return CountDistribution(std::move(head), scale, lambda);
}

double CouponSolution::entropy_rate() const {
    const auto ref = CountDistribution::poisson(beta);
    double j = 0.0;
    for (const auto& [k, s] : class_scales) j += alpha[k] * relative_entropy(class_distribution(k), ref);
    return j;
}

SimplexVector CouponSolution::terminal_state() const {
    std::vector<double> w(capacity + 2, 0.0);
    for (const auto& [k, s] : class_scales) {
        const auto pi = class_distribution(k);
        for (std::size_t i = k; i <= capacity; ++i) w[i] += alpha[k] * pi[i - k];
    }
    double low = 0.0;
    for (std::size_t i = 0; i <= capacity; ++i) low += w[i];
    w.back() = std::max(0.0, 1.0 - low);
    return SimplexVector(std::move(w), 1e-9);
}

CouponSolution coupon_rate(const SimplexVector& alpha, double beta, double xi) {
    if (!(beta > 0.0)) throw DomainError("coupon_rate: beta must be positive");
    if (!(xi > 0.0)) throw DomainError("coupon_rate: xi must be positive");
    CouponSolution s;
    s.alpha = alpha;
    s.capacity = alpha.capacity();
    s.beta = beta;
    s.xi = xi;
    std::vector<std::size_t> classes;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        if (alpha[k] > 0.0) classes.push_back(k);
    const double xi_star = zero_cost_low_fraction(alpha, beta);
    if (xi >= xi_star - 1e-12) {
        for (std::size_t k : classes) s.class_scales[k] = 1.0;
        return s;
    }
    const double xi_min = minimum_low_fraction(alpha, beta);
    if (xi < xi_min - 1e-12)
        throw InfeasibleInput("conservation", "not enough balls to push the low-occupancy fraction below " +
                                                  std::to_string(xi_min));
    if (xi <= xi_min + 1e-12) throw DomainError("coupon_rate: xi on the boundary of the attainable region");

    const long I = static_cast<long>(s.capacity);
    auto objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        const double y = v(0), u = v(1), rho = std::exp(y), lambda = rho * beta;
        double f = -y * beta - u * xi;
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
        for (std::size_t k : classes) {
            const long m = I - static_cast<long>(k);
            const double a = alpha[k];
            const double F = poisson::cdf(m, lambda), Q = poisson::upper_tail(m, lambda);
            const double ll = u + safe_log(F), lh = safe_log(Q);
            const double ls = log_sum_exp(ll, lh);
            f += a * ((rho - 1.0) * beta + ls);
            if (!g) continue;
            const double pl = std::isfinite(ll) ? std::exp(ll - ls) : 0.0;
            const double ph = std::isfinite(lh) ? std::exp(lh - ls) : 0.0;
            // Conditional first and second moments of j within the low and high parts.
            const double l1 = F > 0.0 ? lambda * poisson::cdf(m - 1, lambda) / F : 0.0;
            const double l2 = F > 0.0 ? (lambda * lambda * poisson::cdf(m - 2, lambda) + lambda * poisson::cdf(m - 1, lambda)) / F : 0.0;
            const double h1 = Q > 0.0 ? lambda * poisson::upper_tail(m - 1, lambda) / Q : 0.0;
            const double h2 = Q > 0.0 ? (lambda * lambda * poisson::upper_tail(m - 2, lambda) +
                                         lambda * poisson::upper_tail(m - 1, lambda)) / Q : 0.0;
            const double ej = pl * l1 + ph * h1, ej2 = pl * l2 + ph * h2;
            grad(0) += a * ej;
            grad(1) += a * pl;
            hess(0, 0) += a * (ej2 - ej * ej);
            hess(0, 1) += a * (pl * l1 - ej * pl);
            hess(1, 1) += a * (pl - pl * pl);
        }
        if (g) {
            *g = grad - Eigen::Vector2d(beta, xi);
            hess(1, 0) = hess(0, 1);
            if (h) *h = hess;
        }
        return f;
    };
    const auto sol = detail::minimize_newton(objective, Eigen::Vector2d::Zero(), 1e-13, 200);
    if (sol.residual > 1e-10) throw SolverFailure("coupon_rate: dual Newton did not converge", sol.residual);
    s.rho = std::exp(sol.x(0));
    s.W = std::exp(sol.x(1));
    const double lambda = s.rho * beta;
    double sum_log_c = 0.0;
    for (std::size_t k : classes) {
        const long m = I - static_cast<long>(k);
        const double c = 1.0 / (s.W * poisson::cdf(m, lambda) + poisson::upper_tail(m, lambda));
        s.class_scales[k] = c;
        sum_log_c += alpha[k] * std::log(c);
    }
    s.J = beta * (1.0 - s.rho + std::log(s.rho)) + xi * std::log(s.W) + sum_log_c;

    double mean = 0.0, low = 0.0, worst = 0.0;
    for (std::size_t k : classes) {
        const auto pi = s.class_distribution(k);
        worst = std::max(worst, std::abs(pi.mass() - 1.0));
        mean += alpha[k] * pi.mean();
        for (long j = 0; j <= I - static_cast<long>(k); ++j) low += alpha[k] * pi[static_cast<std::size_t>(j)];
    }
    s.residual = std::max({worst, std::abs(mean - beta), std::abs(low - xi)});
    if (s.residual > 1e-9) throw SolverFailure("coupon_rate: constraint residual too large", s.residual);
    return s;
}

TerminalSetResult terminal_set_rate(const SimplexVector& alpha, double beta, const TerminalSetQuery& q) {
    const std::size_t I = alpha.capacity();
    switch (q.family) {
        case ConstraintFamily::SpareCapacityAtLeast: {
            if (!(alpha == SimplexVector::empty_urns(I)))
                throw UnsupportedConstraintFamily("spare-capacity constraints need empty initial urns");
            if (q.threshold <= zero_cost_spare_capacity(I, beta))
                return TerminalSetResult{0.0, zero_cost_endpoint(alpha, beta)};
            const auto s = overflow_rate(I, beta, q.threshold - static_cast<double>(I) + beta);
            return TerminalSetResult{s.J, s.terminal_state()};
        }
        case ConstraintFamily::LowOccupancyAtMost: {
            if (q.threshold >= zero_cost_low_fraction(alpha, beta))
                return TerminalSetResult{0.0, zero_cost_endpoint(alpha, beta)};
            const auto s = coupon_rate(alpha, beta, q.threshold);
            return TerminalSetResult{s.J, s.terminal_state()};
        }
    }
    throw UnsupportedConstraintFamily("unknown constraint family");
}

}  // namespace occupancy
