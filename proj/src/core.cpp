// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace occupancy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }
}  // namespace

namespace poisson {

double log_pmf(long i, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("poisson_log_pmf: lambda must be positive");
    if (i < 0) return -kInf;
    return -lambda + static_cast<double>(i) * std::log(lambda) - std::lgamma(static_cast<double>(i) + 1.0);
}

double pmf(long i, double lambda) {
    if (lambda == 0.0) return i == 0 ? 1.0 : 0.0;
    return std::exp(log_pmf(i, lambda));
}

double upper_tail(long n, double lambda) {
    if (n < 0) return 1.0;
    if (lambda == 0.0) return 0.0;
    if (lambda < 0.0) throw DomainError("poisson tail: negative rate");
    return boost::math::gamma_p(static_cast<double>(n) + 1.0, lambda);
}

double cdf(long n, double lambda) {
    if (n < 0) return 0.0;
    if (lambda == 0.0) return 1.0;
    if (lambda < 0.0) throw DomainError("poisson cdf: negative rate");
    return boost::math::gamma_q(static_cast<double>(n) + 1.0, lambda);
}

double conditional_mean_above(long n, double lambda) {
    if (n < 0) return lambda;
    const double above = upper_tail(n, lambda);
    if (above <= 0.0 || lambda == 0.0) return static_cast<double>(n) + 1.0;
    return lambda * upper_tail(n - 1, lambda) / above;
}

}  // namespace poisson

double xlogx_over_y(double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return kInf;
    return x * std::log(x / y);
}

SimplexVector::SimplexVector(std::vector<double> entries, double sum_tolerance) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw DomainError("simplex vector needs at least two entries");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i] >= 0.0) || !std::isfinite(entries_[i])) {
            std::ostringstream os;
            os << "simplex entry " << i << " is negative or not finite (" << entries_[i] << ")";
            throw DomainError(os.str());
        }
    }
    const double s = sum(entries_);
    if (std::abs(s - 1.0) > sum_tolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "simplex entries sum to " << s << ", not 1";
        throw DomainError(os.str());
    }
}

SimplexVector SimplexVector::empty_urns(std::size_t capacity) {
    std::vector<double> v(capacity + 2, 0.0);
    v[0] = 1.0;
    return SimplexVector(std::move(v));
}

std::vector<double> SimplexVector::cumulative() const {
    std::vector<double> psi(entries_.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        acc += entries_[i];
        psi[i] = acc;
    }
    return psi;
}

double relative_entropy(std::span<const double> theta, std::span<const double> gamma) {
    if (theta.size() != gamma.size()) throw DomainError("relative_entropy: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        d += xlogx_over_y(theta[i], gamma[i]);
        if (d == kInf) return kInf;
    }
    return std::max(d, 0.0);
}

double relative_entropy(const SimplexVector& theta, const SimplexVector& gamma) {
    return relative_entropy(theta.entries(), gamma.entries());
}

EndpointConstraint::EndpointConstraint(SimplexVector a, SimplexVector w, double b)
    : alpha(std::move(a)), omega(std::move(w)), beta(b) {
    if (alpha.size() != omega.size()) throw DomainError("alpha and omega have different capacities");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
}

CountDistribution::CountDistribution(std::vector<double> head, double tail_scale, double tail_rate)
    : head_(std::move(head)), tail_scale_(tail_scale), tail_rate_(tail_rate) {
    if (head_.empty()) throw DomainError("count distribution needs a head");
    if (!(tail_scale_ >= 0.0)) throw DomainError("tail scale must be nonnegative");
    if (!(tail_rate_ > 0.0)) throw DomainError("tail rate must be positive");
    for (double h : head_)
        if (!(h >= 0.0)) throw DomainError("count distribution entries must be nonnegative");
}

std::size_t CountDistribution::default_truncation(double rate) {
    return static_cast<std::size_t>(std::ceil(rate + 12.0 * std::sqrt(rate) + 40.0));
}

CountDistribution CountDistribution::poisson(double mean, std::optional<std::size_t> truncation) {
    const std::size_t n = truncation.value_or(default_truncation(mean));
    std::vector<double> head(n + 1);
    for (std::size_t i = 0; i <= n; ++i) head[i] = poisson::pmf(static_cast<long>(i), mean);
    return CountDistribution(std::move(head), 1.0, mean);
}

double CountDistribution::operator[](std::size_t i) const {
    if (i < head_.size()) return head_[i];
    if (tail_scale_ == 0.0) return 0.0;
    return tail_scale_ * poisson::pmf(static_cast<long>(i), tail_rate_);
}

double CountDistribution::tail_mass() const {
    if (tail_scale_ == 0.0) return 0.0;
    return tail_scale_ * poisson::upper_tail(static_cast<long>(truncation()), tail_rate_);
}

double CountDistribution::mass() const { return sum(head_) + tail_mass(); }

double CountDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 1; i < head_.size(); ++i) m += static_cast<double>(i) * head_[i];
    if (tail_scale_ > 0.0)
        m += tail_scale_ * tail_rate_ * poisson::upper_tail(static_cast<long>(truncation()) - 1, tail_rate_);
    return m;
}

bool CountDistribution::normalized(double tol) const { return std::abs(mass() - 1.0) <= tol; }

double relative_entropy(const CountDistribution& p, const CountDistribution& q) {
    const std::size_t n = std::max(p.truncation(), q.truncation());
    double d = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        d += xlogx_over_y(p[i], q[i]);
        if (d == kInf) return kInf;
    }
    if (p.tail_scale() == 0.0) return std::max(d, 0.0);
    if (q.tail_scale() == 0.0) return kInf;
    // Both tails are scaled Poisson: the log ratio is affine in i.
    const double lp = p.tail_rate(), lq = q.tail_rate();
    const long nl = static_cast<long>(n);
    const double mass = poisson::upper_tail(nl, lp);
    const double first_moment = lp * poisson::upper_tail(nl - 1, lp);
    d += p.tail_scale() *
         ((std::log(p.tail_scale() / q.tail_scale()) + lq - lp) * mass + std::log(lp / lq) * first_moment);
    return std::max(d, 0.0);
}

const char* to_string(Feasibility f) {
    switch (f) {
        case Feasibility::Exponential: return "FeasibleExponential";
        case Feasibility::Polynomial: return "FeasiblePolynomial";
        case Feasibility::InfiniteRate: return "FeasibleInfiniteRate";
        case Feasibility::Infeasible: return "Infeasible";
    }
    return "?";
}

FeasibilityReport feasibility_check(const EndpointConstraint& c, const Tolerances& tol) {
    FeasibilityReport r;
    const std::size_t cap = c.capacity();
    const auto ca = c.alpha.cumulative();
    const auto cw = c.omega.cumulative();
    for (std::size_t i = 0; i <= cap; ++i) {
        if (ca[i] - cw[i] < -tol.simplex_sum) {
            r.kind = Feasibility::Infeasible;
            r.violated = "monotonicity";
            r.violated_level = static_cast<int>(i);
            return r;
        }
    }
    double lhs = 0.0, rhs = c.beta;
    for (std::size_t i = 0; i <= cap + 1; ++i) {
        lhs += static_cast<double>(i) * c.omega[i];
        rhs += static_cast<double>(i) * c.alpha[i];
    }
    r.ball_slack = rhs - lhs;
    const double scale = tol.feasibility_rel * std::max(1.0, rhs);
    if (r.ball_slack < -scale) {
        r.kind = Feasibility::Infeasible;
        r.violated = "conservation";
        return r;
    }
    if (std::abs(r.ball_slack) <= scale)
        r.kind = Feasibility::Polynomial;
    else if (c.omega.overflow() <= tol.simplex_sum)
        r.kind = Feasibility::InfiniteRate;
    else
        r.kind = Feasibility::Exponential;
    return r;
}

void require_feasible(const EndpointConstraint& c, const Tolerances& tol) {
    const auto r = feasibility_check(c, tol);
    if (r.kind != Feasibility::Infeasible) return;
    std::ostringstream os;
    if (r.violated == "monotonicity")
        os << "cumulative terminal mass exceeds initial mass at level " << r.violated_level;
    else
        os << "terminal state needs " << -r.ball_slack << " more balls per urn than available";
    throw InfeasibleInput(r.violated, os.str());
}

std::vector<std::size_t> split_levels(const EndpointConstraint& c, const Tolerances& tol) {
    std::vector<std::size_t> out;
    const auto ca = c.alpha.cumulative();
    const auto cw = c.omega.cumulative();
    for (std::size_t i = 0; i < c.capacity(); ++i)
        if (std::abs(ca[i] - cw[i]) <= tol.simplex_sum) out.push_back(i);
    return out;
}

bool is_irreducible(const EndpointConstraint& c, const Tolerances& tol) { return split_levels(c, tol).empty(); }

EndpointConstraint standardize_polynomial(const EndpointConstraint& c, const Tolerances& tol) {
    if (c.omega.overflow() <= tol.simplex_sum) return c;
    std::vector<double> a = c.alpha.vector(), w = c.omega.vector();
    a.push_back(0.0);
    w.push_back(0.0);
    return EndpointConstraint(SimplexVector(std::move(a)), SimplexVector(std::move(w)), c.beta);
}

namespace {

// Slice [from, to] of v, renormalized; the overflow slot is appended as given.
std::vector<double> normalized_slice(const std::vector<double>& v, std::size_t from, std::size_t to, double extra,
                                     double* mass) {
    std::vector<double> out(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(to) + 1);
    out.push_back(extra);
    const double m = sum(out);
    for (double& x : out) x /= m;
    if (mass) *mass = m;
    return out;
}

double local_balls(const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += static_cast<double>(j) * v[j];
    return s;
}

}  // namespace

Decomposition irreducible_decompose(const EndpointConstraint& input, const Tolerances& tol) {
    const auto rep = feasibility_check(input, tol);
    if (rep.kind == Feasibility::Infeasible) require_feasible(input, tol);
    if (rep.kind == Feasibility::InfiniteRate)
        throw DomainError("decomposition needs a finite-rate constraint");

    Decomposition out;
    out.standardized = rep.kind == Feasibility::Polynomial && input.omega.overflow() > tol.simplex_sum;
    out.working = rep.kind == Feasibility::Polynomial ? standardize_polynomial(input, tol) : input;
    const EndpointConstraint& c = out.working;
    const std::size_t cap = c.capacity();
    const auto& a = c.alpha.vector();
    const auto& w = c.omega.vector();
    const auto splits = split_levels(c, tol);

    double used_balls = 0.0;
    std::size_t start = 0;
    for (std::size_t s : splits) {
        const double ma = std::accumulate(a.begin() + static_cast<long>(start), a.begin() + static_cast<long>(s) + 1, 0.0);
        const double mw = std::accumulate(w.begin() + static_cast<long>(start), w.begin() + static_cast<long>(s) + 1, 0.0);
        if (ma <= tol.simplex_sum) {
            if (mw > 10 * tol.simplex_sum) throw DegenerateSplit("piece without initial mass holds terminal mass");
            start = s + 1;
            continue;
        }
        Subproblem p;
        p.mass = ma;
        p.offset = start;
        p.closed = true;
        if (s > start) {
            auto la = normalized_slice(a, start, s, 0.0, nullptr);
            auto lw = normalized_slice(w, start, s, 0.0, nullptr);
            p.beta = local_balls(lw) - local_balls(la);
            p.constraint = EndpointConstraint(SimplexVector(std::move(la), 1e-10), SimplexVector(std::move(lw), 1e-10),
                                              p.beta);
        }
        used_balls += p.mass * p.beta;
        out.pieces.push_back(std::move(p));
        start = s + 1;
    }

    // Last piece: levels start..I plus the global overflow bucket.
    std::size_t first = start;
    while (first <= cap && a[first] <= tol.simplex_sum) {
        if (w[first] > 10 * tol.simplex_sum) throw DegenerateSplit("level without initial mass holds terminal mass");
        ++first;
    }
    const double mass = std::accumulate(a.begin() + static_cast<long>(start), a.end(), 0.0);
    if (mass > tol.simplex_sum) {
        Subproblem p;
        p.mass = mass;
        p.offset = first;
        p.closed = false;
        p.beta = std::max(0.0, (c.beta - used_balls) / mass);
        if (first <= cap) {
            auto la = normalized_slice(a, first, cap, a[cap + 1], nullptr);
            auto lw = normalized_slice(w, first, cap, w[cap + 1], nullptr);
            p.constraint =
                EndpointConstraint(SimplexVector(std::move(la), 1e-10), SimplexVector(std::move(lw), 1e-10), p.beta);
        }
        out.pieces.push_back(std::move(p));
    }
    return out;
}

double compose_piece_rates(const std::vector<Subproblem>& pieces, const std::vector<double>& piece_rates,
                           double beta) {
    double total = 0.0;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const double bp = pieces[p].beta;
        total += pieces[p].mass * (piece_rates[p] + beta - bp + xlogx_over_y(bp, beta));
    }
    return total;
}

}  // namespace occupancy
