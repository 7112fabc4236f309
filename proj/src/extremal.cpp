// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occupancy {

namespace {

constexpr double kNegativeSlack = 1e-12;

double clamp_entry(double v) {
    if (v >= 0.0) return v;
    if (v < -kNegativeSlack) throw SolverFailure("extremal evaluation produced a negative entry", v);
    return 0.0;
}

double power_over_factorial(std::size_t j, double x) {
    if (j == 0) return 1.0;
    if (x == 0.0) return 0.0;
    return std::exp(static_cast<double>(j) * std::log(x) - std::lgamma(static_cast<double>(j) + 1.0));
}

}  // namespace

ClassCurve::ClassCurve(double beta, double rho, double scale, std::vector<double> coefficients)
    : beta_(beta), rho_(rho), scale_(scale), coefficients_(std::move(coefficients)) {
    if (!(beta_ > 0.0) || !(rho_ > 0.0) || scale_ < 0.0) throw DomainError("invalid class curve parameters");
}

double ClassCurve::magnitude(std::size_t order, double x) const {
    double v = 0.0;
    if (scale_ > 0.0) v = scale_ * std::exp(static_cast<double>(order) * std::log(rho_) - rho_ * x);
    const std::size_t m = coefficients_.size();
    if (order >= m) return v;
    const double u = 1.0 - x / beta_;
    // sum_{k >= order} a_k k!/(k - order)! u^{k - order}, by Horner from the top.
    double acc = 0.0;
    for (std::size_t k = m; k-- > order;) {
        double falling = 1.0;
        for (std::size_t t = 0; t < order; ++t) falling *= static_cast<double>(k - t);
        acc = acc * u + coefficients_[k] * falling;
    }
    return v + acc * std::pow(beta_, -static_cast<double>(order));
}

double ClassCurve::gamma(std::size_t j, double x) const { return power_over_factorial(j, x) * magnitude(j, x); }

double ClassCurve::theta(std::size_t j, double x) const { return power_over_factorial(j, x) * magnitude(j + 1, x); }

double ClassCurve::tail_gamma(double x) const {
    if (scale_ == 0.0) return 0.0;
    return scale_ * poisson::upper_tail(degree(), rho_ * x);
}

PathPoint ClassMixture::evaluate(double x, std::size_t extra_levels) const {
    if (x < 0.0 || x > beta) throw DomainError("extremal evaluated outside [0, beta]");
    const std::size_t top = capacity + extra_levels;
    const std::size_t deepest = std::max(top, working_capacity);
    PathPoint p;
    p.gamma.assign(top + 2, 0.0);
    p.theta.assign(top + 2, 0.0);
    for (const auto& [k, w] : weights) {
        const ClassCurve& c = curves.at(k);
        for (std::size_t i = k; i <= deepest; ++i) {
            const std::size_t slot = std::min(i, top + 1);
            p.gamma[slot] += w * c.gamma(i - k, x);
            p.theta[slot] += w * c.theta(i - k, x);
        }
        if (exponential) {
            const double lambda = c.rho() * x;
            const long cut = static_cast<long>(deepest) - static_cast<long>(k);
            const double tail = c.scale() == 0.0 ? 0.0 : c.scale() * poisson::upper_tail(cut, lambda);
            p.gamma[top + 1] += w * tail;
            p.theta[top + 1] += w * c.rho() * tail;
        }
    }
    for (double& v : p.gamma) v = clamp_entry(v);
    for (double& v : p.theta) v = clamp_entry(v);
    return p;
}

EmptyExtremal build_empty_extremal(const SimplexVector& omega, double beta, const Tolerances& tol) {
    EmptyExtremal e;
    e.omega = omega;
    e.beta = beta;
    e.twist = solve_twist_empty(omega, beta, tol);
    auto& mx = e.mixture;
    mx.beta = beta;
    mx.capacity = omega.capacity();
    mx.weights[0] = 1.0;
    if (e.twist.kind == TwistCase::Polynomial) {
        const EndpointConstraint c(SimplexVector::empty_urns(omega.capacity()), omega, beta);
        const auto w = standardize_polynomial(c, tol).omega.vector();
        mx.exponential = false;
        mx.rho = 1.0;
        mx.working_capacity = w.size() - 2;
        mx.curves[0] = ClassCurve(beta, 1.0, 0.0, std::vector<double>(w.begin(), w.end() - 1));
    } else {
        mx.exponential = true;
        mx.rho = e.twist.rho;
        mx.working_capacity = omega.capacity();
        std::vector<double> a(omega.capacity() + 1);
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = omega[i] - e.twist.C * poisson::pmf(static_cast<long>(i), e.twist.rho * beta);
        mx.curves[0] = ClassCurve(beta, e.twist.rho, e.twist.C, std::move(a));
    }
    return e;
}

SimplexVector eval_gamma(const EmptyExtremal& e, double x) { return SimplexVector(e.mixture.evaluate(x).gamma, 1e-9); }
SimplexVector eval_theta(const EmptyExtremal& e, double x) { return SimplexVector(e.mixture.evaluate(x).theta, 1e-9); }

GeneralExtremal build_general_extremal(const EndpointConstraint& c, const Tolerances& tol) {
    GeneralExtremal e;
    e.constraint = c;
    e.twist = solve_general(c, {}, tol);
    const auto& w = e.twist.constraint;
    auto& mx = e.mixture;
    mx.beta = c.beta;
    mx.exponential = e.twist.kind == TwistCase::Exponential;
    mx.rho = e.twist.rho;
    mx.capacity = c.capacity();
    mx.working_capacity = w.capacity();
    const double lambda = e.twist.rho * c.beta;
    for (const auto& [k, scale] : e.twist.class_scales) {
        const auto pi = e.twist.class_distribution(k);
        e.class_means[k] = pi.mean();
        const long m = static_cast<long>(w.capacity()) - static_cast<long>(k);
        std::vector<double> a(static_cast<std::size_t>(std::max(m + 1, 0L)));
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = mx.exponential ? pi[j] - scale * poisson::pmf(static_cast<long>(j), lambda) : pi[j];
        mx.weights[k] = w.alpha[k];
        mx.curves[k] = ClassCurve(c.beta, e.twist.rho, mx.exponential ? scale : 0.0, std::move(a));
    }
    return e;
}

SimplexVector eval_gamma(const GeneralExtremal& e, double x) { return SimplexVector(e.mixture.evaluate(x).gamma, 1e-9); }
SimplexVector eval_theta(const GeneralExtremal& e, double x) { return SimplexVector(e.mixture.evaluate(x).theta, 1e-9); }

ExtremalPath build_extremal(const EndpointConstraint& c, const Tolerances& tol) {
    ExtremalPath e;
    e.constraint = c;
    e.decomposition = irreducible_decompose(c, tol);
    for (const auto& p : e.decomposition.pieces)
        e.pieces.push_back(p.constraint ? std::optional<GeneralExtremal>(build_general_extremal(*p.constraint, tol))
                                        : std::nullopt);
    return e;
}

PathPoint ExtremalPath::evaluate(double x) const {
    const double beta = constraint.beta;
    if (x < 0.0 || x > beta) throw DomainError("extremal evaluated outside [0, beta]");
    const std::size_t top = decomposition.working.capacity() + 1;
    PathPoint out;
    out.gamma.assign(top + 1, 0.0);
    out.theta.assign(top + 1, 0.0);
    for (std::size_t n = 0; n < pieces.size(); ++n) {
        const Subproblem& p = decomposition.pieces[n];
        const double speed = p.beta / beta;
        if (!pieces[n]) {
            const std::size_t slot = p.closed ? p.offset : top;
            out.gamma[slot] += p.mass;
            out.theta[slot] += p.mass * speed;
            continue;
        }
        const double s = std::min(x * speed, p.beta);
        const auto local = pieces[n]->mixture.evaluate(s);
        for (std::size_t j = 0; j < local.gamma.size(); ++j) {
            const std::size_t slot = j + 1 == local.gamma.size() ? top : std::min(p.offset + j, top);
            out.gamma[slot] += p.mass * local.gamma[j];
            out.theta[slot] += p.mass * speed * local.theta[j];
        }
    }
    if (decomposition.standardized) {
        out.gamma[top - 1] += out.gamma[top];
        out.theta[top - 1] += out.theta[top];
        out.gamma.pop_back();
        out.theta.pop_back();
    }
    return out;
}

PathFunction as_path(const EmptyExtremal& e, std::size_t extra_levels) {
    return [mx = e.mixture, extra_levels](double x) { return mx.evaluate(x, extra_levels); };
}

PathFunction as_path(const GeneralExtremal& e, std::size_t extra_levels) {
    return [mx = e.mixture, extra_levels](double x) { return mx.evaluate(x, extra_levels); };
}

PathFunction as_path(const ExtremalPath& e) {
    return [e](double x) { return e.evaluate(x); };
}

std::vector<double> el_residual(const PathFunction& path, double beta, const std::vector<double>& x_grid,
                                const ElOptions& opt) {
    const double h = opt.step;
    std::vector<double> worst(opt.equations, 0.0);
    auto ratio = [](const PathPoint& p, std::size_t i) { return p.theta[i] / p.gamma[i]; };
    auto potential = [&](const PathPoint& p, std::size_t i) {
        double g = -std::log(ratio(p, i));
        if (opt.overflow_term) g += std::log(ratio(p, p.gamma.size() - 1));
        return g;
    };
    for (double x : x_grid) {
        if (x <= 0.0 || x >= beta || x - h <= 0.0 || x + h >= beta)
            throw BoundaryEvaluation("E-L residual needs interior points");
        const auto p0 = path(x), pm = path(x - h), pp = path(x + h);
        if (p0.gamma.size() < opt.equations + 1) throw DomainError("too many E-L equations for the path size");
        for (std::size_t i = 0; i < opt.equations; ++i) {
            const double deriv = (potential(pp, i) - potential(pm, i)) / (2.0 * h);
            const double r = -ratio(p0, i) + ratio(p0, i + 1) - deriv;
            worst[i] = std::max(worst[i], std::isfinite(r) ? std::abs(r) : std::numeric_limits<double>::infinity());
        }
    }
    return worst;
}

ElOptions el_options(const GeneralExtremal& e) {
    ElOptions o;
    o.overflow_term = e.mixture.exponential;
    o.equations = e.mixture.exponential ? e.mixture.capacity + 1 : e.mixture.working_capacity;
    return o;
}

ElOptions el_options(const EmptyExtremal& e) {
    ElOptions o;
    o.overflow_term = e.mixture.exponential;
    o.equations = e.mixture.exponential ? e.mixture.capacity + 1 : e.mixture.working_capacity;
    return o;
}

std::vector<double> interior_grid(double beta, std::size_t points, double margin_fraction) {
    std::vector<double> g(points);
    const double lo = margin_fraction * beta, hi = beta - margin_fraction * beta;
    for (std::size_t k = 0; k < points; ++k)
        g[k] = points == 1 ? 0.5 * beta : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

namespace {

// beta + sum_i gamma_i(beta) log m_{0,i}(beta) - sum_k alpha_k log m_{0,k}(0).
double boundary_cost(const ClassMixture& mx, const std::vector<double>& omega_working) {
    const ClassCurve& c0 = mx.curves.at(0);
    const std::size_t cap = mx.working_capacity;
    const double beta = mx.beta;
    double j = beta;
    for (std::size_t i = 0; i <= cap; ++i)
        if (omega_working[i] > 0.0) j += omega_working[i] * std::log(c0.magnitude(i, beta));
    for (const auto& [k, w] : mx.weights) j -= w * std::log(c0.magnitude(k, 0.0));
    if (mx.exponential) {
        const double lambda = mx.rho * beta;
        double m1 = 0.0;
        for (const auto& [k, w] : mx.weights) {
            const long cut = static_cast<long>(cap) - static_cast<long>(k);
            m1 += w * mx.curves.at(k).scale() *
                  (static_cast<double>(k) * poisson::upper_tail(cut, lambda) +
                   lambda * poisson::upper_tail(cut - 1, lambda));
        }
        const double m0 = omega_working[cap + 1];
        if (m0 > 0.0) j += m0 * (std::log(c0.scale()) - lambda) + m1 * std::log(mx.rho);
    }
    return j;
}

void require_agreement(double a, double b) {
    if (std::abs(a - b) > 1e-8 * std::max(1.0, std::abs(b)))
        throw SolverFailure("boundary-term and entropy costs disagree", a - b);
}

}  // namespace

double closed_form_cost(const EmptyExtremal& e) {
    std::vector<double> w = e.omega.vector();
    if (!e.mixture.exponential) {
        const EndpointConstraint c(SimplexVector::empty_urns(e.omega.capacity()), e.omega, e.beta);
        w = standardize_polynomial(c).omega.vector();
    }
    const double b = boundary_cost(e.mixture, w);
    require_agreement(b, terminal_rate_empty(e.omega, e.beta));
    return b;
}

CostReport cost_report(const GeneralExtremal& e) {
    return CostReport{boundary_cost(e.mixture, e.twist.constraint.omega.vector()), e.twist.entropy_rate()};
}

double closed_form_cost(const GeneralExtremal& e) {
    const auto r = cost_report(e);
    require_agreement(r.boundary, r.entropy);
    return r.boundary;
}

double closed_form_cost(const ExtremalPath& e) {
    std::vector<double> rates;
    for (const auto& p : e.pieces) rates.push_back(p ? closed_form_cost(*p) : 0.0);
    return compose_piece_rates(e.decomposition.pieces, rates, e.constraint.beta);
}

bool complete_monotone_check(const ClassCurve& curve, std::size_t orders, double beta, std::size_t points,
                             double margin_fraction) {
    const double hi = beta * (1.0 - margin_fraction);
    for (std::size_t k = 0; k < points; ++k) {
        const double x = hi * static_cast<double>(k) / static_cast<double>(points - 1);
        for (std::size_t i = 0; i <= orders; ++i)
            if (!(curve.magnitude(i, x) > 0.0)) return false;
    }
    return true;
}

bool complete_monotone_check(const EmptyExtremal& e, std::size_t points) {
    const std::size_t orders = e.mixture.working_capacity + (e.mixture.exponential ? 6 : 0);
    return complete_monotone_check(e.curve(), orders, e.beta, points);
}

}  // namespace occupancy
