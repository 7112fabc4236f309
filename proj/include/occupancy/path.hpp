// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "occupancy/core.hpp"

namespace occupancy {

// Occupancy state and rate vector at one time, both with I + 2 entries.
struct PathPoint {
    std::vector<double> gamma;
    std::vector<double> theta;
};

using PathFunction = std::function<PathPoint(double)>;

struct OccupancyPathGrid {
    std::vector<double> times;
    std::vector<SimplexVector> states;
    // Empty, or one rate vector per time node.
    std::vector<SimplexVector> rates;
};

struct ValidityReport {
    bool valid = true;
    // "a", "b", "c" or "" when valid.
    std::string condition;
    std::size_t time_index = 0;
    std::size_t level = 0;
};

// Adjacent pairs suffice for (c): the cumulative decrease over [x, y] telescopes
// into a sum of adjacent decreases, each bounded by its own time step.
ValidityReport validity_check(const std::vector<double>& times, const std::vector<std::vector<double>>& psi,
                              double tol = 1e-10);
ValidityReport validity_check(const OccupancyPathGrid& path, double tol = 1e-10);

OccupancyPathGrid sample_path(const PathFunction& f, double beta, std::size_t points);

// Composite Simpson over the grid. Rates are taken from the grid when present,
// otherwise from finite differences of psi.
double path_cost(const OccupancyPathGrid& path);

struct QuadratureOptions {
    std::size_t points = 2001;
};

// High-accuracy cost of a closed-form path on [0, beta].
double path_cost(const PathFunction& f, double beta, const QuadratureOptions& opt = {});

// Law-of-large-numbers path started from alpha.
PathFunction zero_cost_path(const SimplexVector& alpha);

// gamma(x) = alpha + (omega - alpha) x / beta.
PathFunction linear_path(const EndpointConstraint& c);

// Convex combination of two paths (valid whenever both are).
PathFunction mix_paths(PathFunction a, PathFunction b, double weight_a);

}  // namespace occupancy
