// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "occupancy/applications.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/path.hpp"
#include "occupancy/simulation.hpp"
#include "occupancy/twist.hpp"

namespace occupancy {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform_below(rng, hi - lo + 1));
}

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) {
        x = -std::log(1.0 - uniform01(rng));
        s += x;
    }
    for (double& x : v) x /= s;
    return v;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> random_alpha(std::mt19937_64& rng, std::size_t I, bool empty_start, bool overflow_class) {
    std::vector<double> a(I + 2, 0.0);
    if (empty_start) {
        a[0] = 1.0;
        return a;
    }
    const std::size_t top = std::min<std::size_t>(I, uniform_index(rng, 1, 3));
    auto w = dirichlet(rng, top + 1);
    w[0] += 0.5;
    for (std::size_t k = 0; k <= top; ++k) a[k] = w[k];
    if (overflow_class) a[I + 1] = uniform(rng, 0.0, 0.3);
    double s = 0.0;
    for (double x : a) s += x;
    for (double& x : a) x /= s;
    return a;
}

}  // namespace

EndpointConstraint random_constraint(std::mt19937_64& rng, const InstanceOptions& opt) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::size_t I = uniform_index(rng, opt.min_capacity, opt.max_capacity);
        const bool overflow_class = !opt.polynomial && !opt.empty_start && uniform01(rng) < 0.3;
        const auto a = random_alpha(rng, I, opt.empty_start, overflow_class);
        std::vector<double> w(I + 2, 0.0);
        double beta = 0.0;
        for (std::size_t k = 0; k <= I + 1; ++k) {
            if (a[k] == 0.0) continue;
            if (k == I + 1) {
                w[k] += a[k];
                beta += a[k] * uniform(rng, 0.2, 2.0);
                continue;
            }
            const std::size_t head = I - k;
            std::vector<double> pi(head + 1);
            double mean = 0.0, tail = 0.0, z = 0.0;
            if (opt.polynomial) {
                pi = dirichlet(rng, head + 1);
                z = 1.0;
            } else {
                const double mu = uniform(rng, 0.3, 2.5);
                for (std::size_t j = 0; j <= head; ++j)
                    pi[j] = poisson::pmf(static_cast<long>(j), mu) * std::exp(uniform(rng, -0.7, 0.7));
                tail = poisson::upper_tail(static_cast<long>(head), mu);
                mean = tail * poisson::conditional_mean_above(static_cast<long>(head), mu);
                z = tail;
                for (double x : pi) z += x;
            }
            for (std::size_t j = 0; j <= head; ++j) {
                w[k + j] += a[k] * pi[j] / z;
                mean += static_cast<double>(j) * pi[j];
            }
            w[I + 1] += a[k] * tail / z;
            beta += a[k] * mean / z;
        }
        if (beta > opt.max_beta || beta < 0.1) continue;
        try {
            EndpointConstraint c(SimplexVector(a, 1e-12), SimplexVector(w, 1e-12), beta);
            const auto rep = feasibility_check(c);
            const auto want = opt.polynomial ? Feasibility::Polynomial : Feasibility::Exponential;
            if (rep.kind != want || !is_irreducible(c)) continue;
            return c;
        } catch (const Error&) {
            continue;
        }
    }
    throw DomainError("random_constraint: could not draw an instance");
}

EndpointConstraint random_reducible_constraint(std::mt19937_64& rng, double max_beta) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const auto A = random_constraint(rng, {1, 2, max_beta, true, false});
        const auto B = random_constraint(rng, {1, 3, max_beta, false, false});
        const double m = uniform(rng, 0.3, 0.7);
        const std::size_t IA = A.capacity(), IB = B.capacity(), I = IA + 1 + IB;
        std::vector<double> a(I + 2, 0.0), w(I + 2, 0.0);
        for (std::size_t k = 0; k <= IA; ++k) {
            a[k] = m * A.alpha[k];
            w[k] = m * A.omega[k];
        }
        for (std::size_t k = 0; k <= IB + 1; ++k) {
            a[IA + 1 + k] = (1.0 - m) * B.alpha[k];
            w[IA + 1 + k] = (1.0 - m) * B.omega[k];
        }
        const double beta = m * A.beta + (1.0 - m) * B.beta;
        if (beta > max_beta) continue;
        EndpointConstraint c(SimplexVector(a, 1e-12), SimplexVector(w, 1e-12), beta);
        if (feasibility_check(c).kind == Feasibility::Exponential && !is_irreducible(c)) return c;
    }
    throw DomainError("random_reducible_constraint: could not draw an instance");
}

CheckResult check_entropy_nonnegativity(std::uint64_t seed, std::size_t draws) {
    std::mt19937_64 rng(seed);
    CheckResult r{"entropy_nonnegativity", true, ""};
    double worst = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        const std::size_t n = uniform_index(rng, 2, 8);
        auto t = dirichlet(rng, n), g = dirichlet(rng, n);
        if (d % 5 == 0) t[uniform_index(rng, 0, n - 1)] = 0.0;
        const double D = relative_entropy(std::span<const double>(t), std::span<const double>(g));
        const double self = relative_entropy(std::span<const double>(g), std::span<const double>(g));
        worst = std::min(worst, D);
        if (D < -1e-15 || std::fabs(self) > 1e-15) r.passed = false;
    }
    r.detail = std::to_string(draws) + " draws, min D = " + fmt(worst);
    return r;
}

CheckResult check_entropy_convexity(std::uint64_t seed, std::size_t draws) {
    std::mt19937_64 rng(seed);
    CheckResult r{"entropy_convexity", true, ""};
    double worst = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        const std::size_t n = uniform_index(rng, 2, 8);
        const auto t1 = dirichlet(rng, n), t2 = dirichlet(rng, n), g1 = dirichlet(rng, n), g2 = dirichlet(rng, n);
        const double lam = uniform01(rng);
        std::vector<double> tm(n), gm(n);
        for (std::size_t i = 0; i < n; ++i) {
            tm[i] = lam * t1[i] + (1 - lam) * t2[i];
            gm[i] = lam * g1[i] + (1 - lam) * g2[i];
        }
        auto D = [](const std::vector<double>& a, const std::vector<double>& b) {
            return relative_entropy(std::span<const double>(a), std::span<const double>(b));
        };
        const double gap = lam * D(t1, g1) + (1 - lam) * D(t2, g2) - D(tm, gm);
        worst = std::min(worst, gap);
        if (gap < -1e-12) r.passed = false;
    }
    r.detail = std::to_string(draws) + " draws, min chord gap = " + fmt(worst);
    return r;
}

CheckResult check_linear_path_validity(std::uint64_t seed, std::size_t instances) {
    std::mt19937_64 rng(seed);
    CheckResult r{"linear_path_validity", true, ""};
    std::size_t bad = 0;
    for (std::size_t s = 0; s < instances; ++s) {
        InstanceOptions o;
        o.polynomial = s % 3 == 1;
        o.empty_start = s % 3 == 2;
        const auto c = random_constraint(rng, o);
        const auto rep = validity_check(sample_path(linear_path(c), c.beta, 201));
        if (!rep.valid) {
            ++bad;
            r.passed = false;
            if (r.detail.empty()) r.detail = "instance " + std::to_string(s) + " violates (" + rep.condition + "); ";
        }
    }
    r.detail += std::to_string(instances - bad) + "/" + std::to_string(instances) + " valid";
    return r;
}

CheckResult check_simulation_conservation(std::uint64_t seed, std::size_t runs) {
    std::mt19937_64 rng(seed);
    CheckResult r{"simulation_conservation", true, ""};
    for (std::size_t s = 0; s < runs; ++s) {
        const std::size_t I = uniform_index(rng, 1, 4);
        SimConfig cfg{uniform_index(rng, 10, 500), uniform(rng, 0.5, 4.0),
                      SimplexVector(random_alpha(rng, I, s % 2 == 0, s % 3 == 0), 1e-12), seed + s, 1};
        std::vector<double> grid;
        for (int g = 0; g <= 20; ++g) grid.push_back(cfg.beta * g / 20.0);
        const auto t = simulate_trajectory(cfg, grid, s);
        std::string why;
        if (!trajectory_invariants_hold(t, cfg.n, &why) || t.balls.back() != ball_count(cfg.n, cfg.beta)) {
            r.passed = false;
            r.detail = "run " + std::to_string(s) + ": " + (why.empty() ? "wrong ball total" : why) + "; ";
            break;
        }
    }
    r.detail += std::to_string(runs) + " trajectories checked";
    return r;
}

CheckResult check_decomposition_additivity(std::uint64_t seed, std::size_t instances) {
    std::mt19937_64 rng(seed);
    CheckResult r{"decomposition_additivity", true, ""};
    double worst = 0.0;
    for (std::size_t s = 0; s < instances; ++s) {
        const auto c = random_reducible_constraint(rng);
        const auto dec = irreducible_decompose(c);
        double mass = 0.0;
        for (const auto& p : dec.pieces) mass += p.mass;
        const double composed = terminal_rate_general(c);
        const double brute = entropy_min_oracle(endpoint_program(c)).value;
        const double path = path_cost(as_path(build_extremal(c)), c.beta);
        const double err = std::max(std::fabs(composed - brute), std::fabs(path - brute)) / std::max(1.0, brute);
        worst = std::max(worst, err);
        if (dec.pieces.size() < 2 || std::fabs(mass - 1.0) > 1e-12 || err > 1e-6) r.passed = false;
    }
    r.detail = std::to_string(instances) + " reducible instances, max rel error vs brute force = " + fmt(worst);
    return r;
}

CheckResult check_overflow_sign_law(std::uint64_t seed, std::size_t instances) {
    std::mt19937_64 rng(seed);
    CheckResult r{"overflow_sign_law", true, ""};
    std::size_t solved = 0;
    for (std::size_t s = 0; s < instances; ++s) {
        const std::size_t I = uniform_index(rng, 1, 4);
        const double beta = uniform(rng, 0.5, 4.0);
        const double lo = std::max(0.0, beta - static_cast<double>(I));
        const double eta = lo + (beta - lo) * uniform(rng, 0.05, 0.95);
        const auto sol = overflow_rate(I, beta, eta, {true});
        const double zs = zero_cost_spare_capacity(I, beta);
        if (std::fabs(sol.zeta - zs) < 1e-9) continue;
        ++solved;
        const bool ok = sol.zeta > zs ? (sol.nu > sol.rho && sol.rho > 1.0) : (sol.nu < sol.rho && sol.rho < 1.0);
        if (!ok) {
            r.passed = false;
            r.detail = "I=" + std::to_string(I) + " beta=" + fmt(beta) + " eta=" + fmt(eta) + " breaks the law; ";
        }
    }
    r.detail += std::to_string(solved) + " instances on both sides of the zero-cost level";
    return r;
}

namespace {

// gamma = alpha + (omega - alpha) phi(x / beta), phi(u) = u + a sin(pi u) / pi + b sin(2 pi u) / (2 pi).
PathFunction warped_linear_path(const EndpointConstraint& c, double a, double b) {
    const auto ca = c.alpha.cumulative(), cw = c.omega.cumulative();
    std::vector<double> drop(ca.size());
    for (std::size_t i = 0; i < ca.size(); ++i) drop[i] = std::max(0.0, ca[i] - cw[i]);
    return [c, drop, a, b](double x) {
        const double pi = std::numbers::pi, u = x / c.beta;
        const double phi = u + a * std::sin(pi * u) / pi + b * std::sin(2 * pi * u) / (2 * pi);
        const double dphi = 1.0 + a * std::cos(pi * u) + b * std::cos(2 * pi * u);
        PathPoint p;
        p.gamma.resize(c.alpha.size());
        p.theta.resize(c.alpha.size());
        double total = 0.0;
        for (std::size_t i = 0; i < c.alpha.size(); ++i) p.gamma[i] = c.alpha[i] + (c.omega[i] - c.alpha[i]) * phi;
        for (std::size_t i = 0; i < drop.size(); ++i) {
            p.theta[i] = drop[i] * dphi / c.beta;
            total += p.theta[i];
        }
        p.theta.back() = std::max(0.0, 1.0 - total);
        return p;
    };
}

}  // namespace

StrongMinimumReport strong_minimum_trial(std::uint64_t seed, std::size_t constraints, std::size_t paths_per_constraint,
                                         double slack) {
    std::mt19937_64 rng(seed);
    StrongMinimumReport rep;
    rep.worst_gap = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < constraints; ++s) {
        InstanceOptions o;
        o.max_capacity = 4;
        o.polynomial = s % 4 == 1;
        o.empty_start = s % 4 == 2;
        const auto c = random_constraint(rng, o);
        const auto ext = build_extremal(c);
        const double best = closed_form_cost(ext);
        const PathFunction star = as_path(ext);
        // phi' <= beta / S keeps the overflow rate nonnegative.
        const auto ca = c.alpha.cumulative(), cw = c.omega.cumulative();
        double S = 0.0;
        for (std::size_t i = 0; i < ca.size(); ++i) S += std::max(0.0, ca[i] - cw[i]);
        const double room = std::clamp(c.beta / S - 1.0, 0.0, 0.9);
        ++rep.constraints;
        for (std::size_t q = 0; q < paths_per_constraint; ++q) {
            const double a = uniform(rng, -0.9, 0.9) * room * 0.5, b = uniform(rng, -0.9, 0.9) * room * 0.5;
            const double lam = uniform(rng, 0.05, 0.95);
            PathFunction other = q % 2 == 0 ? linear_path(c) : warped_linear_path(c, a, b);
            PathFunction trial = q % 5 == 4 ? other : mix_paths(star, other, 1.0 - lam);
            const double cost = path_cost(trial, c.beta);
            ++rep.paths;
            rep.worst_gap = std::min(rep.worst_gap, cost - best);
            if (cost < best - slack) ++rep.violations;
        }
    }
    return rep;
}

CheckResult check_strong_minimum(std::uint64_t seed, std::size_t constraints, std::size_t paths) {
    const auto rep = strong_minimum_trial(seed, constraints, paths);
    return {"strong_minimum", rep.violations == 0,
            std::to_string(rep.violations) + " violations over " + std::to_string(rep.paths) +
                " perturbed paths, min excess cost = " + fmt(rep.worst_gap)};
}

std::vector<CheckResult> run_property_suite(std::uint64_t seed) {
    return {check_entropy_nonnegativity(seed),      check_entropy_convexity(seed + 1),
            check_linear_path_validity(seed + 2),   check_simulation_conservation(seed + 3),
            check_decomposition_additivity(seed + 4), check_overflow_sign_law(seed + 5),
            check_strong_minimum(seed + 6)};
}

}  // namespace occupancy
