#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "occupancy/errors.hpp"
#include "occupancy/path.hpp"
#include "occupancy/twist.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/verify.hpp"

using namespace occupancy;

TEST_CASE("zero-cost path is the Poisson occupancy law") {
    const auto f = zero_cost_path(SimplexVector::empty_urns(3));
    const double t = 1.7;
    const auto p = f(t);
    double head = 0.0;
    for (int i = 0; i <= 3; ++i) {
        const double expected = std::exp(-t) * std::pow(t, i) / std::tgamma(i + 1.0);
        CHECK(p.gamma[i] == doctest::Approx(expected).epsilon(1e-13));
        head += p.gamma[i];
    }
    CHECK(p.gamma[4] == doctest::Approx(1.0 - head).epsilon(1e-12));
    const SimplexVector alpha({0.5, 0.3, 0.2, 0.0});
    const auto at0 = zero_cost_path(alpha)(0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) CHECK(at0.gamma[i] == doctest::Approx(alpha[i]));
}

TEST_CASE("zero-cost path costs nothing and solves the linear dynamics") {
    const SimplexVector alpha({0.5, 0.3, 0.2, 0.0});
    const auto f = zero_cost_path(alpha);
    CHECK(path_cost(sample_path(f, 2.0, 1000)) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(std::fabs(path_cost(f, 2.0)) < 1e-8);
    // gamma_i' = gamma_{i-1} - gamma_i, overflow' = gamma_I
    const double h = 1e-4;
    for (double x : {0.3, 1.0, 1.9}) {
        const auto a = f(x - h), b = f(x + h), m = f(x);
        for (std::size_t i = 0; i < m.gamma.size(); ++i) {
            const double d = (b.gamma[i] - a.gamma[i]) / (2 * h);
            double rhs = 0.0;
            if (i > 0) rhs += m.gamma[i - 1];
            if (i + 1 < m.gamma.size()) rhs -= m.gamma[i];
            CHECK(std::fabs(d - rhs) < 1e-6);
        }
    }
}

TEST_CASE("constant path pushing mass into an empty bucket costs infinity") {
    const PathFunction f = [](double) { return PathPoint{{1.0, 0.0}, {0.0, 1.0}}; };
    CHECK(path_cost(sample_path(f, 1.0, 101)) == std::numeric_limits<double>::infinity());
}

TEST_CASE("validity conditions") {
    const std::vector<double> times{0.0, 0.5, 1.0};
    const std::vector<std::vector<double>> ok{{1.0}, {0.7}, {0.5}};
    CHECK(validity_check(times, ok).valid);
    const std::vector<std::vector<double>> rising{{1.0}, {0.6}, {0.8}};
    const auto r = validity_check(times, rising);
    CHECK_FALSE(r.valid);
    CHECK(r.condition == "b");
    // Two levels dropping 0.4 each in half a unit of time: 0.8 balls > 0.5.
    const std::vector<std::vector<double>> fast{{1.0, 1.0}, {0.6, 0.6}, {0.5, 0.5}};
    const auto f = validity_check(times, fast);
    CHECK_FALSE(f.valid);
    CHECK(f.condition == "c");
    const std::vector<std::vector<double>> outside{{1.0}, {1.2}, {0.5}};
    CHECK_FALSE(validity_check(times, outside).valid);
}

TEST_CASE("linear paths of feasible constraints are valid") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 30; ++t) {
        InstanceOptions o;
        o.polynomial = t % 3 == 0;
        o.empty_start = t % 3 == 1;
        const auto c = random_constraint(rng, o);
        const auto grid = sample_path(linear_path(c), c.beta, 201);
        CHECK(validity_check(grid).valid);
        const auto end = grid.states.back();
        for (std::size_t i = 0; i < end.size(); ++i) CHECK(end[i] == doctest::Approx(c.omega[i]).epsilon(1e-12));
    }
}

TEST_CASE("grid and callable quadrature agree on the empty extremal") {
    const SimplexVector omega({0.2, 0.3, 0.3, 0.2});
    const auto e = build_empty_extremal(omega, 2.0);
    const double J = terminal_rate_empty(omega, 2.0);
    CHECK(path_cost(as_path(e), 2.0) == doctest::Approx(J).epsilon(1e-8));
    CHECK(path_cost(sample_path(as_path(e), 2.0, 4001)) == doctest::Approx(J).epsilon(1e-6));
}

TEST_CASE("mixing keeps endpoints") {
    const EndpointConstraint c(SimplexVector::empty_urns(1), SimplexVector({0.3, 0.3, 0.4}), 1.5);
    const auto e = build_extremal(c);
    const auto m = mix_paths(as_path(e), linear_path(c), 0.5);
    const auto end = m(c.beta);
    for (std::size_t i = 0; i < 3; ++i) CHECK(end.gamma[i] == doctest::Approx(c.omega[i]).epsilon(1e-9));
    CHECK(path_cost(m, c.beta) >= closed_form_cost(e));
}

TEST_CASE("grid cost rejects malformed grids") {
    OccupancyPathGrid g;
    g.times = {0.0, 1.0};
    g.states = {SimplexVector({1.0, 0.0})};
    CHECK_THROWS_AS(path_cost(g), InvalidPath);
}
