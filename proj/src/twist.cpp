// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/twist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "dual_newton.hpp"

namespace occupancy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double balls_below_capacity(const SimplexVector& omega) {
    double s = 0.0;
    for (std::size_t i = 1; i <= omega.capacity(); ++i) s += static_cast<double>(i) * omega[i];
    return s;
}

}  // namespace

const char* to_string(TwistCase c) { return c == TwistCase::Exponential ? "exponential" : "polynomial"; }

double solve_rho_empty(const SimplexVector& omega, double beta) {
    const long cap = static_cast<long>(omega.capacity());
    const double over = omega.overflow();
    if (!(over > 0.0)) throw DomainError("solve_rho_empty: omega_{I+} must be positive");
    const double target = (beta - balls_below_capacity(omega)) / over;
    if (!(target > static_cast<double>(cap) + 1.0))
        throw DomainError("solve_rho_empty: conditional mean target must exceed I + 1");
    auto h = [&](double rho) { return poisson::conditional_mean_above(cap, rho * beta); };

    double lo = 1e-8, hi = 1.0;
    while (h(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw SolverFailure("solve_rho_empty: bracket failure", h(hi) - target);
    }
    while (h(lo) > target) {
        lo *= 1e-3;
        if (lo < 1e-300) throw SolverFailure("solve_rho_empty: bracket failure", h(lo) - target);
    }
    for (int it = 0; it < 300 && hi / lo - 1.0 > 4e-16; ++it) {
        const double mid = std::sqrt(lo * hi);
        (h(mid) < target ? lo : hi) = mid;
    }
    double rho = std::sqrt(lo * hi);
    // Newton polish: dh/dlambda = Var(Y | Y > I) / lambda.
    const double lambda = rho * beta;
    const double q = poisson::upper_tail(cap, lambda);
    if (q > 0.0) {
        const double m1 = h(rho);
        const double m2 = (lambda * lambda * poisson::upper_tail(cap - 2, lambda) +
                           lambda * poisson::upper_tail(cap - 1, lambda)) / q;
        const double slope = (m2 - m1 * m1) / lambda * beta;
        if (slope > 0.0) {
            const double cand = rho - (m1 - target) / slope;
            if (cand > 0.0 && std::abs(h(cand) - target) < std::abs(m1 - target)) rho = cand;
        }
    }
    return rho;
}

double compute_C_empty(const SimplexVector& omega, double beta, double rho) {
    const long cap = static_cast<long>(omega.capacity());
    const double lambda = rho * beta;
    const double c1 = omega.overflow() / poisson::upper_tail(cap, lambda);
    const double c2 = (beta - balls_below_capacity(omega)) / (lambda * poisson::upper_tail(cap - 1, lambda));
    if (std::abs(c1 - c2) > 1e-9 * std::max(1.0, std::abs(c1)))
        throw SolverFailure("compute_C_empty: the two expressions for C disagree", c1 - c2);
    return c1;
}

EmptyTwist solve_twist_empty(const SimplexVector& omega, double beta, const Tolerances& tol) {
    const EndpointConstraint c(SimplexVector::empty_urns(omega.capacity()), omega, beta);
    const auto rep = feasibility_check(c, tol);
    if (rep.kind == Feasibility::Infeasible) require_feasible(c, tol);
    if (rep.kind == Feasibility::InfiniteRate) throw DomainError("constraint is feasible but has infinite rate");
    if (rep.kind == Feasibility::Polynomial) return EmptyTwist{1.0, 0.0, TwistCase::Polynomial};
    const double rho = solve_rho_empty(omega, beta);
    return EmptyTwist{rho, compute_C_empty(omega, beta, rho), TwistCase::Exponential};
}

double terminal_rate_empty(const SimplexVector& omega, double beta, const Tolerances& tol) {
    const EndpointConstraint c(SimplexVector::empty_urns(omega.capacity()), omega, beta);
    const auto rep = feasibility_check(c, tol);
    if (rep.kind == Feasibility::Infeasible || rep.kind == Feasibility::InfiniteRate) return kInf;
    const SimplexVector w =
        rep.kind == Feasibility::Polynomial ? standardize_polynomial(c, tol).omega : omega;
    double j = 0.0;
    for (std::size_t i = 0; i <= w.capacity(); ++i) j += xlogx_over_y(w[i], poisson::pmf(static_cast<long>(i), beta));
    if (rep.kind == Feasibility::Polynomial) return j;
    const double rho = solve_rho_empty(omega, beta);
    const double C = compute_C_empty(omega, beta, rho);
    j += omega.overflow() * (std::log(C) + (1.0 - rho) * beta) + (beta - balls_below_capacity(omega)) * std::log(rho);
    return j;
}

CountDistribution minimizer_empty(const SimplexVector& omega, double beta, const Tolerances& tol) {
    const auto tw = solve_twist_empty(omega, beta, tol);
    if (tw.kind == TwistCase::Polynomial) {
        const EndpointConstraint c(SimplexVector::empty_urns(omega.capacity()), omega, beta);
        const auto w = standardize_polynomial(c, tol).omega.vector();
        return CountDistribution(std::vector<double>(w.begin(), w.end() - 1), 0.0, beta);
    }
    const double lambda = tw.rho * beta;
    const std::size_t cap = omega.capacity();
    const std::size_t n = std::max(CountDistribution::default_truncation(lambda), cap + 1);
    std::vector<double> head(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        head[i] = i <= cap ? omega[i] : tw.C * poisson::pmf(static_cast<long>(i), lambda);
    return CountDistribution(std::move(head), tw.C, lambda);
}

namespace {

// Convex dual of the entropy program over the multipliers (log rho, log W_i).
class GeneralDual {
public:
    GeneralDual(const EndpointConstraint& c, bool exponential) : c_(c), exp_(exponential) {
        cap_ = static_cast<long>(c.capacity());
        var_of_level_.assign(static_cast<std::size_t>(cap_) + 1, -1);
        int next = exp_ ? 1 : 0;
        for (long i = 0; i <= cap_; ++i) {
            if (c.omega[static_cast<std::size_t>(i)] <= 0.0) continue;
            // Polynomial gauge: W_I = 1.
            if (!exp_ && i == cap_) {
                pinned_ = true;
                continue;
            }
            var_of_level_[static_cast<std::size_t>(i)] = next++;
        }
        if (!exp_ && !pinned_) throw DomainError("polynomial constraint without mass at level I");
        nv_ = next;
        for (std::size_t k = 0; k < c.alpha.size(); ++k)
            if (c.alpha[k] > 0.0) classes_.push_back(k);
        b_ = Eigen::VectorXd::Zero(nv_);
        if (exp_) b_(0) = c.beta;
        for (std::size_t i = 0; i < var_of_level_.size(); ++i)
            if (var_of_level_[i] >= 0) b_(var_of_level_[i]) = c.omega[i];
    }

    int size() const { return nv_; }
    bool has_level(std::size_t i) const {
        return i <= static_cast<std::size_t>(cap_) && (var_of_level_[i] >= 0 || (pinned_ && i == static_cast<std::size_t>(cap_)));
    }
    double log_weight(const Eigen::VectorXd& v, std::size_t level) const {
        const int idx = var_of_level_[level];
        return idx >= 0 ? v(idx) : 0.0;
    }
    double rate_param(const Eigen::VectorXd& v) const { return exp_ ? c_.beta * std::exp(v(0)) : c_.beta; }

    // log of sum_j P_j(lambda) W_{k+j} (+ tail) for class k.
    double log_normalizer(const Eigen::VectorXd& v, std::size_t k) const { return class_terms(v, k, nullptr, nullptr); }

    double evaluate(const Eigen::VectorXd& v, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
        double f = 0.0;
        if (grad) grad->setZero(nv_);
        if (hess) hess->setZero(nv_, nv_);
        const double rho = exp_ ? std::exp(v(0)) : 1.0;
        for (std::size_t k : classes_) {
            Eigen::VectorXd mu = Eigen::VectorXd::Zero(nv_);
            Eigen::MatrixXd second = Eigen::MatrixXd::Zero(nv_, nv_);
            const double ls = class_terms(v, k, grad ? &mu : nullptr, hess ? &second : nullptr);
            const double a = c_.alpha[k];
            f += a * (ls + (exp_ ? (rho - 1.0) * c_.beta : 0.0));
            if (grad) *grad += a * mu;
            if (hess) *hess += a * (second - mu * mu.transpose());
        }
        f -= v.dot(b_);
        if (grad) *grad -= b_;
        return f;
    }

private:
    // Returns log S_k; fills class means and second moments of the feature vector.
    double class_terms(const Eigen::VectorXd& v, std::size_t k, Eigen::VectorXd* mu, Eigen::MatrixXd* second) const {
        const double lambda = rate_param(v);
        const long m = cap_ - static_cast<long>(k);
        std::vector<std::pair<long, double>> head;
        double top = -kInf;
        for (long j = 0; j <= m; ++j) {
            const std::size_t level = k + static_cast<std::size_t>(j);
            if (!has_level(level)) continue;
            const double t = poisson::log_pmf(j, lambda) + log_weight(v, level);
            head.emplace_back(j, t);
            top = std::max(top, t);
        }
        double tail_log = -kInf, q = 0.0;
        if (exp_) {
            q = poisson::upper_tail(m, lambda);
            if (q > 0.0) tail_log = std::log(q);
            top = std::max(top, tail_log);
        }
        if (!std::isfinite(top)) throw SolverFailure("class without admissible support", 0.0);
        double s = 0.0;
        for (auto& [j, t] : head) s += (t = std::exp(t - top));
        const double tail_w = std::isfinite(tail_log) ? std::exp(tail_log - top) : 0.0;
        s += tail_w;
        if (mu) {
            for (auto& [j, p] : head) {
                p /= s;
                const double jd = static_cast<double>(j);
                const int idx = var_of_level_[k + static_cast<std::size_t>(j)];
                if (exp_) {
                    (*mu)(0) += p * jd;
                    if (second) (*second)(0, 0) += p * jd * jd;
                }
                if (idx >= 0) {
                    (*mu)(idx) += p;
                    if (second) {
                        (*second)(idx, idx) += p;
                        if (exp_) {
                            (*second)(0, idx) += p * jd;
                            (*second)(idx, 0) += p * jd;
                        }
                    }
                }
            }
            if (exp_ && tail_w > 0.0) {
                const double pt = tail_w / s;
                const double m1 = lambda * poisson::upper_tail(m - 1, lambda) / q;
                const double m2 = (lambda * lambda * poisson::upper_tail(m - 2, lambda) +
                                   lambda * poisson::upper_tail(m - 1, lambda)) / q;
                (*mu)(0) += pt * m1;
                if (second) (*second)(0, 0) += pt * m2;
            }
        }
        return top + std::log(s);
    }

    const EndpointConstraint& c_;
    bool exp_;
    long cap_ = 0;
    std::vector<int> var_of_level_;
    bool pinned_ = false;
    int nv_ = 0;
    std::vector<std::size_t> classes_;
    Eigen::VectorXd b_;
};

}  // namespace

GeneralTwist solve_general(const EndpointConstraint& input, const SolverOptions& opt, const Tolerances& tol) {
    const auto rep = feasibility_check(input, tol);
    if (rep.kind == Feasibility::Infeasible) require_feasible(input, tol);
    if (rep.kind == Feasibility::InfiniteRate) throw DomainError("solve_general: constraint has infinite rate");
    const bool exponential = rep.kind == Feasibility::Exponential;

    GeneralTwist out;
    out.kind = exponential ? TwistCase::Exponential : TwistCase::Polynomial;
    out.constraint = exponential ? input : standardize_polynomial(input, tol);
    if (!is_irreducible(out.constraint, tol))
        throw DomainError("solve_general: constraint is reducible; decompose it first");
    const EndpointConstraint& c = out.constraint;
    if (!(c.alpha[0] > 0.0)) throw DomainError("solve_general: alpha_0 must be positive");

    const GeneralDual dual(c, exponential);
    const int n = dual.size();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (opt.start && static_cast<int>(opt.start->size()) == n)
        for (int i = 0; i < n; ++i) v(i) = (*opt.start)[static_cast<std::size_t>(i)];

    const auto sol = detail::minimize_newton(
        [&dual](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) { return dual.evaluate(x, g, h); },
        v, opt.tolerance, opt.max_iterations);
    v = sol.x;
    out.residual = sol.residual;
    out.iterations = sol.iterations;
    if (!(out.residual <= std::max(opt.tolerance, 1e-10)))
        throw SolverFailure("solve_general: Newton iteration did not converge", out.residual);

    out.rho = exponential ? std::exp(v(0)) : 1.0;
    for (std::size_t i = 0; i <= c.capacity(); ++i)
        if (dual.has_level(i)) out.endpoint_weights[i] = std::exp(dual.log_weight(v, i));
    for (std::size_t k = 0; k < c.alpha.size(); ++k)
        if (c.alpha[k] > 0.0) out.class_scales[k] = std::exp(-dual.log_normalizer(v, k));
    return out;
}

CountDistribution GeneralTwist::class_distribution(std::size_t k) const {
    const std::size_t cap = constraint.capacity();
    const double scale = class_scales.at(k);
    const long m = static_cast<long>(cap) - static_cast<long>(k);
    auto weight = [&](std::size_t level) {
        if (level > cap) return 1.0;
        const auto it = endpoint_weights.find(level);
        return it == endpoint_weights.end() ? 0.0 : it->second;
    };
    if (kind == TwistCase::Polynomial) {
        std::vector<double> head(static_cast<std::size_t>(std::max(m, 0L)) + 1, 0.0);
        for (long j = 0; j <= m; ++j)
            head[static_cast<std::size_t>(j)] =
                scale * poisson::pmf(j, constraint.beta) * weight(k + static_cast<std::size_t>(j));
        return CountDistribution(std::move(head), 0.0, constraint.beta);
    }
    const double lambda = rho * constraint.beta;
    const std::size_t n = std::max<std::size_t>(CountDistribution::default_truncation(lambda),
                                                static_cast<std::size_t>(std::max(m, 0L)) + 1);
    std::vector<double> head(n + 1);
    for (std::size_t j = 0; j <= n; ++j) head[j] = scale * poisson::pmf(static_cast<long>(j), lambda) * weight(k + j);
    return CountDistribution(std::move(head), scale, lambda);
}

double GeneralTwist::rate() const {
    const double beta = constraint.beta;
    double j = 0.0;
    for (const auto& [k, s] : class_scales) j += constraint.alpha[k] * std::log(s);
    for (const auto& [i, w] : endpoint_weights) j += constraint.omega[i] * std::log(w);
    if (kind == TwistCase::Exponential) j += beta * (1.0 - rho) + beta * std::log(rho);
    return j;
}

double GeneralTwist::entropy_rate() const {
    const auto ref = CountDistribution::poisson(constraint.beta);
    double j = 0.0;
    for (const auto& [k, s] : class_scales) j += constraint.alpha[k] * relative_entropy(class_distribution(k), ref);
    return j;
}

double GeneralTwist::constraint_residual() const {
    const std::size_t cap = constraint.capacity();
    std::vector<double> level(cap + 1, 0.0);
    double mean = 0.0, worst = 0.0;
    for (const auto& [k, s] : class_scales) {
        const auto pi = class_distribution(k);
        const double a = constraint.alpha[k];
        worst = std::max(worst, std::abs(pi.mass() - 1.0));
        mean += a * pi.mean();
        for (std::size_t i = k; i <= cap; ++i) level[i] += a * pi[i - k];
    }
    for (std::size_t i = 0; i <= cap; ++i) worst = std::max(worst, std::abs(level[i] - constraint.omega[i]));
    return std::max(worst, std::abs(mean - constraint.beta));
}

namespace {

struct PieceSolution {
    Subproblem piece;
    std::optional<GeneralTwist> twist;
};

std::vector<PieceSolution> solve_pieces(const Decomposition& d) {
    std::vector<PieceSolution> out;
    for (const auto& p : d.pieces) {
        PieceSolution s{p, std::nullopt};
        if (p.constraint) s.twist = solve_general(*p.constraint);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

double terminal_rate_general(const EndpointConstraint& c, const Tolerances& tol) {
    const auto rep = feasibility_check(c, tol);
    if (rep.kind == Feasibility::Infeasible || rep.kind == Feasibility::InfiniteRate) return kInf;
    const auto d = irreducible_decompose(c, tol);
    std::vector<double> rates;
    for (const auto& s : solve_pieces(d)) rates.push_back(s.twist ? s.twist->rate() : 0.0);
    return compose_piece_rates(d.pieces, rates, c.beta);
}

std::map<std::size_t, CountDistribution> minimizer_general(const EndpointConstraint& c, const Tolerances& tol) {
    const auto d = irreducible_decompose(c, tol);
    const std::size_t top = d.working.capacity() + 1;
    std::map<std::size_t, CountDistribution> out;
    for (const auto& s : solve_pieces(d)) {
        const auto& p = s.piece;
        if (s.twist) {
            for (const auto& [k, scale] : s.twist->class_scales) {
                const std::size_t global = std::min(p.offset + k, top);
                out.emplace(global, s.twist->class_distribution(k));
            }
        } else if (p.closed || p.beta <= 0.0) {
            out.emplace(p.offset, CountDistribution({1.0}, 0.0, 1.0));
        } else {
            out.emplace(top, CountDistribution::poisson(p.beta));
        }
    }
    return out;
}

double uniqueness_probe(const EndpointConstraint& c, std::size_t starts, std::uint64_t seed) {
    const auto base = solve_general(c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const std::size_t nv = base.endpoint_weights.size() + (base.kind == TwistCase::Exponential ? 1 : 0) -
                           (base.kind == TwistCase::Polynomial ? 1 : 0);
    double worst = 0.0;
    for (std::size_t s = 0; s < starts; ++s) {
        SolverOptions opt;
        std::vector<double> start(nv);
        for (double& x : start) x = u(rng);
        opt.start = start;
        const auto other = solve_general(c, opt);
        worst = std::max(worst, std::abs(other.rho - base.rho));
        for (const auto& [k, sc] : base.class_scales) {
            const auto p = base.class_distribution(k), q = other.class_distribution(k);
            for (std::size_t j = 0; j <= p.truncation(); ++j) worst = std::max(worst, std::abs(p[j] - q[j]));
        }
    }
    return worst;
}

}  // namespace occupancy
