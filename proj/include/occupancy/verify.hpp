// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "occupancy/core.hpp"

namespace occupancy {

// Portable double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

struct InstanceOptions {
    std::size_t min_capacity = 1;
    std::size_t max_capacity = 5;
    double max_beta = 4.0;
    bool polynomial = false;
    // alpha = (1, 0, ..., 0)
    bool empty_start = false;
};

// Feasible irreducible constraint built from perturbed class distributions.
EndpointConstraint random_constraint(std::mt19937_64& rng, const InstanceOptions& opt = {});
// Closed polynomial block below an exponential block, split at the block boundary.
EndpointConstraint random_reducible_constraint(std::mt19937_64& rng, double max_beta = 4.0);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

CheckResult check_entropy_nonnegativity(std::uint64_t seed, std::size_t draws = 1000);
CheckResult check_entropy_convexity(std::uint64_t seed, std::size_t draws = 1000);
CheckResult check_linear_path_validity(std::uint64_t seed, std::size_t instances = 100);
CheckResult check_simulation_conservation(std::uint64_t seed, std::size_t runs = 20);
CheckResult check_decomposition_additivity(std::uint64_t seed, std::size_t instances = 10);
CheckResult check_overflow_sign_law(std::uint64_t seed, std::size_t instances = 20);

struct StrongMinimumReport {
    std::size_t constraints = 0;
    std::size_t paths = 0;
    std::size_t violations = 0;
    // min over paths of (path cost - extremal cost)
    double worst_gap = 0.0;
};

// Perturbed valid paths sharing the extremal's endpoints never cost less than it.
StrongMinimumReport strong_minimum_trial(std::uint64_t seed, std::size_t constraints = 20,
                                         std::size_t paths_per_constraint = 50, double slack = 1e-7);
CheckResult check_strong_minimum(std::uint64_t seed, std::size_t constraints = 20, std::size_t paths = 50);

std::vector<CheckResult> run_property_suite(std::uint64_t seed);

}  // namespace occupancy
