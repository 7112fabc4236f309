#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "occupancy/core.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/verify.hpp"

using namespace occupancy;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

SimplexVector zero_cost_one_level(double beta) {
    const double e = std::exp(-beta);
    return SimplexVector({e, beta * e, 1.0 - e - beta * e});
}
}  // namespace

TEST_CASE("poisson pmf values and normalization") {
    CHECK(poisson_log_pmf(0, 3.0) == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(poisson::pmf(0, 3.0) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
    CHECK(poisson::pmf(1, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    double s = 0.0;
    for (long i = 0; i <= 200; ++i) s += poisson::pmf(i, 10.0);
    CHECK(std::fabs(s - 1.0) < 1e-12);
    // log space keeps large indices finite
    CHECK(std::isfinite(poisson_log_pmf(10000, 3.0)));
    CHECK(poisson::pmf(0, 0.0) == 1.0);
    CHECK(poisson::upper_tail(-1, 2.0) == 1.0);
    CHECK(poisson::upper_tail(2, 2.0) + poisson::cdf(2, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(poisson::log_pmf(1, -1.0), DomainError);
}

TEST_CASE("simplex vector validation") {
    CHECK_NOTHROW(SimplexVector({0.3, 0.7}));
    CHECK_THROWS_AS(SimplexVector({0.3, 0.6}), DomainError);
    CHECK_THROWS_AS(SimplexVector({-0.1, 1.1}), DomainError);
    CHECK_THROWS_AS(SimplexVector({1.0}), DomainError);
    const auto e = SimplexVector::empty_urns(3);
    CHECK(e.size() == 5);
    CHECK(e.capacity() == 3);
    CHECK(e[0] == 1.0);
    const auto psi = SimplexVector({0.2, 0.3, 0.5}).cumulative();
    REQUIRE(psi.size() == 2);
    CHECK(psi[1] == doctest::Approx(0.5));
}

TEST_CASE("relative entropy examples") {
    const std::vector<double> a{0.3, 0.7}, one{1.0, 0.0}, other{0.0, 1.0};
    CHECK(relative_entropy(std::span<const double>(a), std::span<const double>(a)) == 0.0);
    CHECK(relative_entropy(std::span<const double>(one), std::span<const double>(other)) == kInf);
    const std::vector<double> t{0.5, 0.5}, g{0.25, 0.75};
    // 0.5 log 2 + 0.5 log(2/3), checked at 40 digits
    CHECK(relative_entropy(std::span<const double>(t), std::span<const double>(g)) ==
          doctest::Approx(0.14384103622589046372).epsilon(1e-15));
    CHECK(xlogx_over_y(0.0, 0.0) == 0.0);
    CHECK(xlogx_over_y(0.1, 0.0) == kInf);
}

TEST_CASE("count distribution tail bookkeeping") {
    const auto p = CountDistribution::poisson(3.0);
    CHECK(p.normalized());
    CHECK(p.mean() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(relative_entropy(p, p) == doctest::Approx(0.0));
    const auto q = CountDistribution::poisson(2.0);
    // D(P(3) || P(2)) = 3 log(3/2) - 1
    CHECK(relative_entropy(p, q) == doctest::Approx(3.0 * std::log(1.5) - 1.0).epsilon(1e-12));
}

TEST_CASE("feasibility classification") {
    for (double beta : {0.3, 1.0, 2.5}) {
        EndpointConstraint c(SimplexVector::empty_urns(1), zero_cost_one_level(beta), beta);
        CHECK(feasibility_check(c).kind == Feasibility::Exponential);
    }
    // Exactly enough balls: sum i omega_i = beta.
    EndpointConstraint poly(SimplexVector::empty_urns(2), SimplexVector({0.3, 0.4, 0.3, 0.0}), 1.0);
    CHECK(feasibility_check(poly).kind == Feasibility::Polynomial);
    // Passes monotonicity and conservation but no finite-mean minimizer exists.
    EndpointConstraint stuck(SimplexVector::empty_urns(1), SimplexVector::empty_urns(1), 1.0);
    CHECK(feasibility_check(stuck).kind == Feasibility::InfiniteRate);

    EndpointConstraint mono(SimplexVector({0.5, 0.5, 0.0}), SimplexVector({0.8, 0.2, 0.0}), 1.0);
    const auto r1 = feasibility_check(mono);
    CHECK(r1.kind == Feasibility::Infeasible);
    CHECK(r1.violated == "monotonicity");
    CHECK(r1.violated_level == 0);
    CHECK_THROWS_AS(require_feasible(mono), InfeasibleInput);
    try {
        require_feasible(mono);
    } catch (const InfeasibleInput& e) {
        CHECK(e.condition() == "monotonicity");
    }

    EndpointConstraint balls(SimplexVector::empty_urns(1), SimplexVector({0.1, 0.1, 0.8}), 0.5);
    const auto r2 = feasibility_check(balls);
    CHECK(r2.kind == Feasibility::Infeasible);
    CHECK(r2.violated == "conservation");
}

TEST_CASE("equality tolerance is relative and configurable") {
    EndpointConstraint near(SimplexVector::empty_urns(2), SimplexVector({0.3, 0.4, 0.3, 0.0}), 1.0 + 1e-11);
    CHECK(feasibility_check(near).kind == Feasibility::Polynomial);
    Tolerances strict;
    strict.feasibility_rel = 1e-13;
    CHECK(feasibility_check(near, strict).kind == Feasibility::InfiniteRate);
}

TEST_CASE("decomposition of the hand example") {
    EndpointConstraint c(SimplexVector({0.5, 0.5, 0.0}), SimplexVector({0.5, 0.0, 0.5}), 1.0);
    CHECK_FALSE(is_irreducible(c));
    const auto d = irreducible_decompose(c);
    REQUIRE(d.pieces.size() == 2);
    CHECK(d.pieces[0].mass == doctest::Approx(0.5));
    CHECK(d.pieces[0].beta == 0.0);
    CHECK_FALSE(d.pieces[0].constraint.has_value());
    REQUIRE(d.pieces[1].constraint.has_value());
    CHECK(d.pieces[1].mass == doctest::Approx(0.5));
    CHECK(d.pieces[1].beta == doctest::Approx(2.0));
    const auto& sub = *d.pieces[1].constraint;
    CHECK(sub.alpha[0] == doctest::Approx(1.0));
    CHECK(sub.omega[0] == doctest::Approx(0.0));
}

TEST_CASE("irreducible input decomposes to itself") {
    EndpointConstraint c(SimplexVector::empty_urns(2), SimplexVector({0.2, 0.3, 0.3, 0.2}), 2.0);
    CHECK(is_irreducible(c));
    const auto d = irreducible_decompose(c);
    REQUIRE(d.pieces.size() == 1);
    REQUIRE(d.pieces[0].constraint.has_value());
    CHECK(d.pieces[0].constraint->omega == c.omega);
    CHECK(d.pieces[0].mass == 1.0);
}

TEST_CASE("decomposition partitions urns and balls") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 10; ++t) {
        const auto c = random_reducible_constraint(rng);
        const auto d = irreducible_decompose(c);
        double mass = 0.0, balls = 0.0;
        for (const auto& p : d.pieces) {
            mass += p.mass;
            balls += p.mass * p.beta;
        }
        CHECK(d.pieces.size() >= 2);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(balls == doctest::Approx(c.beta).epsilon(1e-12));
    }
}

TEST_CASE("polynomial standardization adds one level") {
    EndpointConstraint c(SimplexVector({0.6, 0.3, 0.1, 0.0}), SimplexVector({0.2, 0.3, 0.3, 0.2}), 1.0);
    REQUIRE(feasibility_check(c).kind == Feasibility::Polynomial);
    const auto s = standardize_polynomial(c);
    CHECK(s.capacity() == 3);
    CHECK(s.omega[3] == doctest::Approx(0.2));
    CHECK(s.omega.overflow() == 0.0);
}
