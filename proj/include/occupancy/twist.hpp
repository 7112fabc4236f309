// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "occupancy/core.hpp"

namespace occupancy {

enum class TwistCase { Exponential, Polynomial };

const char* to_string(TwistCase c);

struct EmptyTwist {
    double rho = 1.0;
    double C = 0.0;
    TwistCase kind = TwistCase::Exponential;
};

// Root of E[Y | Y > I] = (beta - sum i omega_i) / omega_{I+}, Y ~ Poisson(rho beta).
double solve_rho_empty(const SimplexVector& omega, double beta);
double compute_C_empty(const SimplexVector& omega, double beta, double rho);
// Either case; throws InfeasibleInput or DomainError when no finite-rate twist exists.
EmptyTwist solve_twist_empty(const SimplexVector& omega, double beta, const Tolerances& tol = {});
double terminal_rate_empty(const SimplexVector& omega, double beta, const Tolerances& tol = {});
CountDistribution minimizer_empty(const SimplexVector& omega, double beta, const Tolerances& tol = {});

struct SolverOptions {
    std::size_t max_iterations = 200;
    double tolerance = 1e-12;
    // Starting point in (log rho, log W_i...) order; zero-cost point when empty.
    std::optional<std::vector<double>> start;
};

// Multipliers of the entropy minimizer pi_{k,j} = C_k P_j(rho beta) W_{k+j}
// (exponential) or D_k P_j(beta) W_{k+j} (polynomial). W is 1 above level I.
struct GeneralTwist {
    TwistCase kind = TwistCase::Exponential;
    double rho = 1.0;
    std::map<std::size_t, double> class_scales;
    std::map<std::size_t, double> endpoint_weights;
    // Constraint actually solved (polynomial inputs are standardized).
    EndpointConstraint constraint;
    double residual = 0.0;
    std::size_t iterations = 0;

    CountDistribution class_distribution(std::size_t k) const;
    // Closed-form rate from the multipliers.
    double rate() const;
    // sum_k alpha_k D(pi_k || P(beta)) evaluated directly.
    double entropy_rate() const;
    // Max violation of the endpoint, conservation and normalization constraints.
    double constraint_residual() const;
};

// Requires a feasible, irreducible, finite-rate constraint.
GeneralTwist solve_general(const EndpointConstraint& c, const SolverOptions& opt = {}, const Tolerances& tol = {});

double terminal_rate_general(const EndpointConstraint& c, const Tolerances& tol = {});

// Per-class minimizing distributions keyed by initial level (assembled across pieces).
std::map<std::size_t, CountDistribution> minimizer_general(const EndpointConstraint& c, const Tolerances& tol = {});

// Largest entrywise difference in pi* (and rho) across random starts.
double uniqueness_probe(const EndpointConstraint& c, std::size_t starts, std::uint64_t seed);

}  // namespace occupancy
