// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>

#include "occupancy/core.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/path.hpp"

namespace occupancy {

struct ClassicalSolution {
    double rho = 1.0;
    double C = 1.0;
    double J = 0.0;
    EmptyExtremal extremal;

    // gamma_0 = e^{-rho x}/rho + 1 - 1/rho and gamma_i = P_i(rho x)/rho, levels 0..levels.
    PathFunction path(std::size_t levels) const;
};

ClassicalSolution classical_rate(double omega0, double beta);

struct OverflowOptions {
    // Solve the small-overflow direction (nu < rho < 1) instead of returning J = 0.
    bool lower_tail = false;
};

struct OverflowSolution {
    double C = 1.0;
    double rho = 1.0;
    double nu = 1.0;
    double zeta = 0.0;
    double eta = 0.0;
    double J = 0.0;
    // Max residual of the three published constraint equations.
    double residual = 0.0;
    std::size_t capacity = 0;
    double beta = 0.0;

    double Q() const;
    double R() const;
    CountDistribution distribution() const;
    SimplexVector terminal_state() const;
};

// Zero-cost spare capacity sum_{i<=I} (I - i) P_i(beta).
double zero_cost_spare_capacity(std::size_t capacity, double beta);
OverflowSolution overflow_rate(std::size_t capacity, double beta, double eta, const OverflowOptions& opt = {});

struct CouponSolution {
    double rho = 1.0;
    std::map<std::size_t, double> class_scales;
    double W = 1.0;
    double xi = 0.0;
    double J = 0.0;
    double residual = 0.0;
    SimplexVector alpha;
    std::size_t capacity = 0;
    double beta = 0.0;

    CountDistribution class_distribution(std::size_t k) const;
    double entropy_rate() const;
    SimplexVector terminal_state() const;
};

// Zero-cost fraction of urns with at most I balls.
double zero_cost_low_fraction(const SimplexVector& alpha, double beta);
// Smallest attainable fraction of urns with at most I balls.
double minimum_low_fraction(const SimplexVector& alpha, double beta);
// alpha is given over levels 0..I+1 (pad shorter class vectors with zeros).
CouponSolution coupon_rate(const SimplexVector& alpha, double beta, double xi);

enum class ConstraintFamily { SpareCapacityAtLeast, LowOccupancyAtMost };

struct TerminalSetQuery {
    ConstraintFamily family = ConstraintFamily::LowOccupancyAtMost;
    // zeta for spare capacity, xi for low occupancy.
    double threshold = 0.0;
};

struct TerminalSetResult {
    double J = 0.0;
    SimplexVector omega;
};

// Minimum rate over {omega : functional(omega) meets the threshold}.
TerminalSetResult terminal_set_rate(const SimplexVector& alpha, double beta, const TerminalSetQuery& q);

}  // namespace occupancy
