// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occupancy/errors.hpp"

namespace occupancy {

struct Tolerances {
    double simplex_sum = 1e-12;
    double feasibility_rel = 1e-9;
};

namespace poisson {

// log P(Y = i) for Y ~ Poisson(lambda), lambda > 0.
double log_pmf(long i, double lambda);
// P(Y = i); lambda == 0 gives the point mass at 0.
double pmf(long i, double lambda);
// P(Y > n); equals 1 for n < 0.
double upper_tail(long n, double lambda);
// P(Y <= n).
double cdf(long n, double lambda);
// E[Y | Y > n].
double conditional_mean_above(long n, double lambda);

}  // namespace poisson

inline double poisson_log_pmf(long i, double lambda) { return poisson::log_pmf(i, lambda); }

// x log(x / y) with 0 log 0 = 0 and x > 0, y = 0 giving +inf.
double xlogx_over_y(double x, double y);

// Occupancy state on levels 0..I plus the overflow bucket I+.
class SimplexVector {
public:
    SimplexVector() = default;
    explicit SimplexVector(std::vector<double> entries, double sum_tolerance = 1e-12);

    // (1, 0, ..., 0) with I + 2 entries.
    static SimplexVector empty_urns(std::size_t capacity);

    std::size_t capacity() const { return entries_.size() - 2; }
    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    double overflow() const { return entries_.back(); }
    std::span<const double> entries() const { return entries_; }
    const std::vector<double>& vector() const { return entries_; }
    // psi_0..psi_I
    std::vector<double> cumulative() const;

    bool operator==(const SimplexVector&) const = default;

private:
    std::vector<double> entries_;
};

double relative_entropy(std::span<const double> theta, std::span<const double> gamma);
double relative_entropy(const SimplexVector& theta, const SimplexVector& gamma);

struct EndpointConstraint {
    SimplexVector alpha;
    SimplexVector omega;
    double beta = 0.0;

    EndpointConstraint() = default;
    EndpointConstraint(SimplexVector a, SimplexVector w, double b);

    std::size_t capacity() const { return omega.capacity(); }
};

// Distribution on {0, 1, ...}: explicit head 0..N plus the tail
// pi_i = tail_scale * P_i(tail_rate) for i > N.
class CountDistribution {
public:
    CountDistribution(std::vector<double> head, double tail_scale, double tail_rate);

    static CountDistribution poisson(double mean, std::optional<std::size_t> truncation = {});
    static std::size_t default_truncation(double rate);

    std::size_t truncation() const { return head_.size() - 1; }
    const std::vector<double>& head() const { return head_; }
    double tail_scale() const { return tail_scale_; }
    double tail_rate() const { return tail_rate_; }

    double operator[](std::size_t i) const;
    double tail_mass() const;
    double mass() const;
    double mean() const;
    bool normalized(double tol = 1e-10) const;

private:
    std::vector<double> head_;
    double tail_scale_;
    double tail_rate_;
};

double relative_entropy(const CountDistribution& p, const CountDistribution& q);

enum class Feasibility { Exponential, Polynomial, InfiniteRate, Infeasible };

const char* to_string(Feasibility f);

struct FeasibilityReport {
    Feasibility kind = Feasibility::Infeasible;
    // "monotonicity" or "conservation" when infeasible.
    std::string violated;
    int violated_level = -1;
    // RHS minus LHS of the conservation inequality.
    double ball_slack = 0.0;
};

FeasibilityReport feasibility_check(const EndpointConstraint& c, const Tolerances& tol = {});

// Throws InfeasibleInput naming the violated condition.
void require_feasible(const EndpointConstraint& c, const Tolerances& tol = {});

// Levels i < I with equal cumulative initial and terminal mass.
std::vector<std::size_t> split_levels(const EndpointConstraint& c, const Tolerances& tol = {});

bool is_irreducible(const EndpointConstraint& c, const Tolerances& tol = {});

// One irreducible block of a decomposed constraint. Local level j maps to
// global level offset + j of the working constraint. Closed pieces end on a
// split level and never use their local overflow bucket; the last piece's
// overflow bucket is the global one. Trivial pieces carry no constraint: a
// single untouched level (closed) or overflow urns only (last).
struct Subproblem {
    std::optional<EndpointConstraint> constraint;
    double mass = 0.0;
    double beta = 0.0;
    std::size_t offset = 0;
    bool closed = false;
};

struct Decomposition {
    // Input after polynomial standardization; piece levels index into it.
    EndpointConstraint working;
    bool standardized = false;
    std::vector<Subproblem> pieces;
};

// Requires a feasible constraint with finite rate.
Decomposition irreducible_decompose(const EndpointConstraint& c, const Tolerances& tol = {});

// Mass-weighted composition of piece rates into the rate of the original constraint.
double compose_piece_rates(const std::vector<Subproblem>& pieces, const std::vector<double>& piece_rates,
                           double beta);

// If omega_{I+} > 0 in a conservation-equality constraint, add one explicit level.
EndpointConstraint standardize_polynomial(const EndpointConstraint& c, const Tolerances& tol = {});

}  // namespace occupancy
