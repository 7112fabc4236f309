// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occupancy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool uniform_spacing(const std::vector<double>& x) {
    if (x.size() < 3) return true;
    const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs((x[i] - x[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) return false;
    return true;
}

// Composite Simpson on nodes lo..hi of a uniform grid (3/8 rule closes an odd panel count).
double simpson(const std::vector<double>& f, double h, std::size_t lo, std::size_t hi) {
    const std::size_t m = hi - lo;
    if (m == 0) return 0.0;
    if (m == 1) return 0.5 * h * (f[lo] + f[hi]);
    double total = 0.0;
    std::size_t end = hi;
    if (m % 2 == 1) {
        end = hi - 3;
        total += 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[hi]);
    }
    for (std::size_t i = lo; i + 2 <= end; i += 2) total += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    return total;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f, std::size_t lo, std::size_t hi) {
    double total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) total += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
    return total;
}

}  // namespace

ValidityReport validity_check(const std::vector<double>& times, const std::vector<std::vector<double>>& psi,
                              double tol) {
    ValidityReport r;
    auto fail = [&](const char* cond, std::size_t t, std::size_t level) {
        r.valid = false;
        r.condition = cond;
        r.time_index = t;
        r.level = level;
        return r;
    };
    for (std::size_t t = 0; t < psi.size(); ++t) {
        for (std::size_t i = 1; i < psi[t].size(); ++i)
            if (psi[t][i] < psi[t][i - 1] - tol) return fail("a", t, i);
        if (t == 0) continue;
        double drop = 0.0;
        for (std::size_t i = 0; i < psi[t].size(); ++i) {
            if (psi[t][i] > psi[t - 1][i] + tol) return fail("b", t, i);
            drop += psi[t - 1][i] - psi[t][i];
        }
        if (drop > times[t] - times[t - 1] + tol) return fail("c", t, 0);
    }
    return r;
}

ValidityReport validity_check(const OccupancyPathGrid& path, double tol) {
    std::vector<std::vector<double>> psi;
    psi.reserve(path.states.size());
    for (const auto& s : path.states) psi.push_back(s.cumulative());
    return validity_check(path.times, psi, tol);
}

OccupancyPathGrid sample_path(const PathFunction& f, double beta, std::size_t points) {
    if (points < 2) throw DomainError("sample_path needs at least two points");
    OccupancyPathGrid g;
    g.times.resize(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double x = k + 1 == points ? beta : beta * static_cast<double>(k) / static_cast<double>(points - 1);
        g.times[k] = x;
        auto p = f(x);
        g.states.emplace_back(std::move(p.gamma), 1e-9);
        g.rates.emplace_back(std::move(p.theta), 1e-9);
    }
    return g;
}

double path_cost(const OccupancyPathGrid& path) {
    const std::size_t n = path.times.size();
    if (n < 2 || path.states.size() != n) throw InvalidPath("path needs matching times and states");
    const auto v = validity_check(path, 1e-9);
    if (!v.valid) throw InvalidPath("validity condition (" + v.condition + ") fails at node " + std::to_string(v.time_index));

    std::vector<double> f(n);
    std::vector<std::vector<double>> psi;
    if (path.rates.empty())
        for (const auto& s : path.states) psi.push_back(s.cumulative());
    for (std::size_t t = 0; t < n; ++t) {
        const auto gamma = path.states[t].entries();
        if (!path.rates.empty()) {
            f[t] = relative_entropy(path.rates[t].entries(), gamma);
            continue;
        }
        const std::size_t lo = t == 0 ? 0 : t - 1, hi = t + 1 == n ? t : t + 1;
        const double dx = path.times[hi] - path.times[lo];
        std::vector<double> theta(gamma.size());
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < gamma.size(); ++i) {
            theta[i] = std::max(0.0, (psi[lo][i] - psi[hi][i]) / dx);
            total += theta[i];
        }
        theta.back() = std::max(0.0, 1.0 - total);
        f[t] = relative_entropy(theta, gamma);
    }

    std::size_t lo = 0, hi = n - 1;
    double ends = 0.0;
    if (!std::isfinite(f[0])) {
        if (n < 3 || !std::isfinite(f[1])) return kInf;
        ends += f[1] * (path.times[1] - path.times[0]);
        lo = 1;
    }
    if (!std::isfinite(f[n - 1])) {
        if (n < 3 || !std::isfinite(f[n - 2])) return kInf;
        ends += f[n - 2] * (path.times[n - 1] - path.times[n - 2]);
        hi = n - 2;
    }
    for (std::size_t t = lo; t <= hi; ++t)
        if (!std::isfinite(f[t])) return kInf;
    if (uniform_spacing(path.times)) {
        const double h = (path.times.back() - path.times.front()) / static_cast<double>(n - 1);
        return ends + simpson(f, h, lo, hi);
    }
    return ends + trapezoid(path.times, f, lo, hi);
}

double path_cost(const PathFunction& fn, double beta, const QuadratureOptions& opt) {
    std::size_t n = std::max<std::size_t>(opt.points, 5);
    if (n % 2 == 0) ++n;
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> f(n, 0.0);
    // x = beta * s(t) with s' = 30 t^2 (1 - t)^2 vanishing at both ends.
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        const double ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        const auto p = fn(beta * s);
        const double d = relative_entropy(p.theta, p.gamma);
        if (!std::isfinite(d)) return kInf;
        f[k] = d * beta * ds;
    }
    return simpson(f, h, 0, n - 1);
}

PathFunction zero_cost_path(const SimplexVector& alpha) {
    return [alpha](double x) {
        const std::size_t cap = alpha.capacity();
        PathPoint p;
        p.gamma.assign(cap + 2, 0.0);
        for (std::size_t j = 0; j <= cap; ++j)
            for (std::size_t k = 0; k <= j; ++k)
                if (alpha[k] > 0.0) p.gamma[j] += alpha[k] * poisson::pmf(static_cast<long>(j - k), x);
        double over = alpha[cap + 1];
        for (std::size_t k = 0; k <= cap; ++k)
            if (alpha[k] > 0.0) over += alpha[k] * poisson::upper_tail(static_cast<long>(cap - k), x);
        p.gamma[cap + 1] = over;
        p.theta = p.gamma;
        return p;
    };
}

PathFunction linear_path(const EndpointConstraint& c) {
    const auto ca = c.alpha.cumulative();
    const auto cw = c.omega.cumulative();
    std::vector<double> theta(c.alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        theta[i] = std::max(0.0, (ca[i] - cw[i]) / c.beta);
        total += theta[i];
    }
    theta.back() = std::max(0.0, 1.0 - total);
    return [c, theta](double x) {
        PathPoint p;
        const double u = x / c.beta;
        p.gamma.resize(c.alpha.size());
        for (std::size_t i = 0; i < p.gamma.size(); ++i)
            p.gamma[i] = std::max(0.0, c.alpha[i] + (c.omega[i] - c.alpha[i]) * u);
        p.theta = theta;
        return p;
    };
}

PathFunction mix_paths(PathFunction a, PathFunction b, double weight_a) {
    return [a = std::move(a), b = std::move(b), weight_a](double x) {
        auto pa = a(x);
        const auto pb = b(x);
        for (std::size_t i = 0; i < pa.gamma.size(); ++i) {
            pa.gamma[i] = weight_a * pa.gamma[i] + (1.0 - weight_a) * pb.gamma[i];
            pa.theta[i] = weight_a * pa.theta[i] + (1.0 - weight_a) * pb.theta[i];
        }
        return pa;
    };
}

}  // namespace occupancy
