#include <cmath>

#include "doctest.h"
#include "occupancy/applications.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/simulation.hpp"

using namespace occupancy;

namespace {
const SimplexVector kCouponAlpha({0.5, 0.3, 0.2, 0.0, 0.0});
}

TEST_CASE("classical rate reference values") {
    const auto s = classical_rate(0.15, 3.0);
    CHECK(s.rho == doctest::Approx(1.1377213911576848104).epsilon(1e-12));
    CHECK(s.C == doctest::Approx(0.87894980948055582962).epsilon(1e-12));
    CHECK(s.J == doctest::Approx(0.091651542177681840745).epsilon(1e-12));
    const auto m = classical_rate(0.08, 3.0);
    CHECK(m.rho == doctest::Approx(1.0387842186059925).epsilon(1e-12));
    CHECK(m.J == doctest::Approx(0.010043363291513374).epsilon(1e-11));
    const auto z = classical_rate(std::exp(-1.5), 1.5);
    CHECK(z.rho == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(z.J) < 1e-14);
}

TEST_CASE("overflow at the zero-cost point") {
    const double beta = 3.0;
    const std::size_t I = 2;
    const double zs = zero_cost_spare_capacity(I, beta);
    const double eta = zs + beta - static_cast<double>(I);
    const auto s = overflow_rate(I, beta, eta);
    CHECK(s.J == 0.0);
    CHECK(s.rho == 1.0);
    CHECK(s.nu == 1.0);
    CHECK(s.C == 1.0);
}

TEST_CASE("overflow instance against brute force") {
    const auto s = overflow_rate(2, 3.0, 1.5);
    CHECK(s.residual < 1e-9);
    CHECK(s.nu > s.rho);
    CHECK(s.rho > 1.0);
    const auto brute = entropy_min_oracle(overflow_program(2, 3.0, s.zeta));
    CHECK(s.J == doctest::Approx(brute.value).epsilon(1e-10));
    CHECK(s.J == doctest::Approx(0.16092729044214).epsilon(1e-12));
    CHECK(relative_entropy(s.distribution(), CountDistribution::poisson(3.0)) == doctest::Approx(s.J).epsilon(1e-9));
}

TEST_CASE("overflow lower tail") {
    OverflowOptions o;
    o.lower_tail = true;
    const auto s = overflow_rate(2, 3.0, 1.2, o);
    CHECK(s.nu < s.rho);
    CHECK(s.rho < 1.0);
    CHECK(s.J > 0.0);
    CHECK(s.J == doctest::Approx(entropy_min_oracle(overflow_program(2, 3.0, s.zeta)).value).epsilon(1e-9));
    CHECK(overflow_rate(2, 3.0, 1.2).J == 0.0);
}

TEST_CASE("overflow minimizer ratios") {
    const auto s = overflow_rate(3, 2.5, 1.4);
    const auto pi = s.distribution();
    const double lam = s.rho * s.beta;
    for (std::size_t i = 0; i + 1 < 3; ++i)
        CHECK(pi[i + 1] / pi[i] == doctest::Approx(lam / s.nu / static_cast<double>(i + 1)).epsilon(1e-9));
    for (std::size_t i = 3; i < 10; ++i)
        CHECK(pi[i + 1] / pi[i] == doctest::Approx(lam / static_cast<double>(i + 1)).epsilon(1e-9));
}

TEST_CASE("overflow monotone and continuous in eta") {
    double prev = 0.0;
    const double zs = zero_cost_spare_capacity(2, 3.0) + 1.0;
    for (double eta = zs + 0.05; eta < 2.9; eta += 0.1) {
        const double J = overflow_rate(2, 3.0, eta).J;
        CHECK(J > prev);
        prev = J;
        const double dJ = std::fabs(overflow_rate(2, 3.0, eta + 1e-6).J - J);
        CHECK(dJ < 1e-4);
    }
    CHECK_THROWS_AS(overflow_rate(2, 3.0, 3.0), DomainError);
    CHECK_THROWS_AS(overflow_rate(0, 3.0, 1.0), DomainError);
}

TEST_CASE("coupon instance") {
    const auto s = coupon_rate(kCouponAlpha, 2.0, 0.55);
    CHECK(s.J == doctest::Approx(0.18).epsilon(0.01 / 0.18));
    CHECK(s.J == doctest::Approx(0.184321814319956).epsilon(1e-11));
    CHECK(std::log10(std::exp(-100.0 * s.J)) == doctest::Approx(-8.0).epsilon(0.5 / 8.0));
    CHECK(s.entropy_rate() == doctest::Approx(s.J).epsilon(1e-8));
    CHECK(s.residual < 1e-9);
    const auto brute = entropy_min_oracle(coupon_program(kCouponAlpha, 2.0, 0.55));
    CHECK(s.J == doctest::Approx(brute.value).epsilon(1e-10));
}

TEST_CASE("coupon zero-cost level") {
    const double xs = zero_cost_low_fraction(kCouponAlpha, 2.0);
    CHECK(xs == doctest::Approx(0.71).epsilon(0.01 / 0.71));
    const auto z = zero_cost_path(kCouponAlpha)(2.0);
    CHECK(1.0 - z.gamma.back() == doctest::Approx(xs).epsilon(1e-12));
    const auto s = coupon_rate(kCouponAlpha, 2.0, xs);
    CHECK(s.J == 0.0);
    CHECK(s.rho == 1.0);
    CHECK(s.W == 1.0);
}

TEST_CASE("coupon monotone in xi and bounded below") {
    double prev = 0.0;
    const double xs = zero_cost_low_fraction(kCouponAlpha, 2.0);
    const double floor = minimum_low_fraction(kCouponAlpha, 2.0) + 0.02;
    for (double xi = xs - 0.05; xi > floor; xi -= 0.05) {
        const double J = coupon_rate(kCouponAlpha, 2.0, xi).J;
        CHECK(J > prev);
        prev = J;
        CHECK(std::fabs(coupon_rate(kCouponAlpha, 2.0, xi + 1e-6).J - J) < 1e-4);
    }
    const double lo = minimum_low_fraction(kCouponAlpha, 2.0);
    CHECK_THROWS_AS(coupon_rate(kCouponAlpha, 2.0, lo - 0.01), InfeasibleInput);
}

TEST_CASE("terminal set dispatch") {
    const TerminalSetQuery low{ConstraintFamily::LowOccupancyAtMost, 0.55};
    const auto r = terminal_set_rate(kCouponAlpha, 2.0, low);
    CHECK(r.J == doctest::Approx(coupon_rate(kCouponAlpha, 2.0, 0.55).J).epsilon(1e-14));
    const TerminalSetQuery spare{ConstraintFamily::SpareCapacityAtLeast, 0.5};
    const auto o = terminal_set_rate(SimplexVector::empty_urns(2), 3.0, spare);
    CHECK(o.J == doctest::Approx(overflow_rate(2, 3.0, 1.5).J).epsilon(1e-14));
    const TerminalSetQuery loose{ConstraintFamily::LowOccupancyAtMost, 0.99};
    const auto z = terminal_set_rate(kCouponAlpha, 2.0, loose);
    CHECK(z.J == 0.0);
    const auto zc = zero_cost_path(kCouponAlpha)(2.0);
    for (std::size_t i = 0; i < z.omega.size(); ++i) CHECK(z.omega[i] == doctest::Approx(zc.gamma[i]).epsilon(1e-12));
    CHECK_THROWS_AS(terminal_set_rate(kCouponAlpha, 2.0, spare), UnsupportedConstraintFamily);
}
