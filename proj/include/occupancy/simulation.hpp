// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "occupancy/core.hpp"

namespace occupancy {

struct SimConfig {
    std::size_t n = 0;
    double beta = 0.0;
    SimplexVector alpha;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
};

// floor(beta n), guarded against representation error in beta.
std::uint64_t ball_count(std::size_t n, double beta);

// Largest-remainder rounding of alpha * n; ties go to the lower level.
std::vector<std::uint64_t> initial_counts(const SimplexVector& alpha, std::size_t n);

// Trial streams: std::mt19937_64 seeded with SplitMix64 of (seed, trial).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);
// Uniform integer in [0, bound) by multiply-shift with rejection (Lemire).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Counts per level 0..I plus overflow after all throws.
std::vector<std::uint64_t> simulate_counts(const SimConfig& cfg, std::uint64_t trial = 0);
SimplexVector simulate(const SimConfig& cfg, std::uint64_t trial = 0);

struct SimTrajectory {
    std::vector<double> times;
    std::vector<std::uint64_t> balls;
    std::vector<std::vector<std::uint64_t>> counts;
};

// Snapshots after floor(x n) throws for each x in the grid (clipped to the total).
SimTrajectory simulate_trajectory(const SimConfig& cfg, const std::vector<double>& x_grid, std::uint64_t trial = 0);

// Exact integer checks: urn conservation, monotone cumulative counts, at most one urn leaves a level set per ball.
bool trajectory_invariants_hold(const SimTrajectory& t, std::size_t n, std::string* why = nullptr);

using TerminalEvent = std::function<bool(std::span<const std::uint64_t> counts, std::size_t n)>;

struct ExponentEstimate {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    double exponent = 0.0;
    // Wilson 95% interval mapped to the exponent scale.
    double exponent_lo = 0.0;
    double exponent_hi = 0.0;
    bool zero_hits = false;
};

// Event frequency over cfg.trials runs at each n, as -(1/n) log p.
std::vector<ExponentEstimate> empirical_exponent(const SimConfig& cfg, const TerminalEvent& event,
                                                 const std::vector<std::size_t>& n_list, unsigned threads = 0);

struct ExactPmf {
    // log P; -inf when the event is impossible.
    double log_value = 0.0;
    bool precision_loss = false;
    double value() const;
};

// P(exactly m of n urns empty after r uniform throws), by inclusion-exclusion in MPFR.
ExactPmf exact_empty_urn_pmf(long n, long r, long m);

// Generic truncated entropy program: per class k, a distribution on 0..N minimizing
// sum_k w_k D(pi_k || P(beta)) under sum_k w_k sum_j a[k][j] pi_{k,j} = target.
struct LinearConstraint {
    std::string name;
    std::vector<std::vector<double>> coefficients;
    double target = 0.0;
};

struct TruncatedProgram {
    double beta = 0.0;
    std::size_t truncation = 80;
    std::vector<double> class_weights;
    std::vector<std::size_t> class_labels;
    std::vector<LinearConstraint> constraints;
};

struct OracleOptions {
    std::size_t max_sweeps = 500;
    double sweep_tolerance = 1e-8;
    double tolerance = 1e-11;
    std::size_t max_newton_iterations = 200;
};

struct OracleResult {
    double value = 0.0;
    std::vector<std::vector<double>> argmin;
    double kkt_residual = 0.0;
    std::size_t sweeps = 0;
    std::size_t newton_iterations = 0;
};

OracleResult entropy_min_oracle(const TruncatedProgram& p, const OracleOptions& opt = {});

TruncatedProgram endpoint_program(const EndpointConstraint& c, std::size_t truncation = 80);
TruncatedProgram overflow_program(std::size_t capacity, double beta, double zeta, std::size_t truncation = 80);
TruncatedProgram coupon_program(const SimplexVector& alpha, double beta, double xi, std::size_t truncation = 80);

// Terminal occupancy implied by an endpoint-program argmin.
SimplexVector occupancy_of(const TruncatedProgram& p, const OracleResult& r, std::size_t capacity);

}  // namespace occupancy
