#include <cmath>
#include <random>

#include "doctest.h"
#include "occupancy/applications.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/verify.hpp"

using namespace occupancy;

namespace {

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

SimplexVector truncated_poisson(std::size_t I, double beta) {
    std::vector<double> v(I + 2);
    double head = 0.0;
    for (std::size_t i = 0; i <= I; ++i) head += v[i] = poisson::pmf(static_cast<long>(i), beta);
    v[I + 1] = 1.0 - head;
    return SimplexVector(v);
}

}  // namespace

TEST_CASE("zero-cost empty extremal is exp(-x)") {
    const auto e = build_empty_extremal(truncated_poisson(2, 1.5), 1.5);
    for (double x : {0.0, 0.4, 1.1, 1.5}) CHECK(e.curve().magnitude(0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-10));
    CHECK(std::fabs(closed_form_cost(e)) < 1e-12);
    const auto th = eval_theta(e, 0.7), ga = eval_gamma(e, 0.7);
    for (std::size_t i = 0; i < th.size(); ++i) CHECK(th[i] == doctest::Approx(ga[i]).epsilon(1e-10));
    const auto el = el_residual(as_path(e), 1.5, interior_grid(1.5, 40), el_options(e));
    CHECK(max_of(el) < 1e-6);
}

TEST_CASE("classical extremal has the closed form") {
    const auto s = classical_rate(0.15, 3.0);
    const double rho = s.rho;
    for (double x : {0.2, 1.0, 2.5}) {
        const auto g = eval_gamma(s.extremal, x);
        CHECK(g[0] == doctest::Approx(std::exp(-rho * x) / rho + 1.0 - 1.0 / rho).epsilon(1e-12));
    }
    const auto p = s.path(3)(2.0);
    for (long i = 1; i <= 3; ++i) CHECK(p.gamma[i] == doctest::Approx(poisson::pmf(i, rho * 2.0) / rho).epsilon(1e-12));
}

TEST_CASE("empty extremal boundary behaviour") {
    const SimplexVector w({0.2, 0.3, 0.3, 0.2});
    const auto e = build_empty_extremal(w, 2.0);
    CHECK(e.curve().magnitude(0, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(e.curve().magnitude(1, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    const auto g0 = eval_gamma(e, 0.0), gb = eval_gamma(e, 2.0);
    CHECK(g0[0] == doctest::Approx(1.0));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(gb[i] == doctest::Approx(w[i]).epsilon(1e-9));
    for (int s = 1; s <= 50; ++s) {
        const double x = 2.0 * s / 51.0;
        const auto th = eval_theta(e, x);
        const auto g = eval_gamma(e, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < th.size(); ++i) sum += th[i];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(th.overflow() / g.overflow() == doctest::Approx(e.twist.rho).epsilon(1e-9));
    }
    CHECK(complete_monotone_check(e));
    CHECK(closed_form_cost(e) == doctest::Approx(terminal_rate_empty(w, 2.0)).epsilon(1e-10));
}

TEST_CASE("analytic derivatives match finite differences") {
    const auto e = build_empty_extremal(SimplexVector({0.2, 0.3, 0.3, 0.2}), 2.0);
    const auto& c = e.curve();
    const double h = 1e-4;
    for (int s = 1; s <= 20; ++s) {
        const double x = 2.0 * s / 21.0;
        for (std::size_t k = 1; k <= 3; ++k) {
            const double fd = -(c.magnitude(k - 1, x + h) - c.magnitude(k - 1, x - h)) / (2 * h);
            CHECK(c.magnitude(k, x) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("taylor identity: levels plus analytic tail sum to one") {
    const auto e = build_empty_extremal(SimplexVector({0.2, 0.3, 0.3, 0.2}), 2.0);
    const auto& c = e.curve();
    for (double x : {0.3, 1.2, 1.9}) {
        double head = 0.0;
        for (std::size_t j = 0; j <= 2; ++j) head += c.gamma(j, x);
        CHECK(head + c.tail_gamma(x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("complete monotonicity detects corrupted coefficients") {
    auto e = build_empty_extremal(SimplexVector({0.2, 0.3, 0.3, 0.2}), 2.0);
    auto& curve = e.mixture.curves.at(0);
    curve.coefficients().back() = -std::fabs(curve.coefficients().back()) - 1.0;
    CHECK_FALSE(complete_monotone_check(curve, 3, 2.0));
}

TEST_CASE("polynomial extremal has a constant top derivative") {
    const SimplexVector w({0.3, 0.4, 0.3, 0.0});
    const double beta = 1.0;
    const auto e = build_empty_extremal(w, beta);
    CHECK(complete_monotone_check(e));
    for (double x : {0.1, 0.5, 0.9})
        CHECK(e.curve().magnitude(2, x) == doctest::Approx(w[2] * 2.0 / (beta * beta)).epsilon(1e-9));
}

TEST_CASE("general extremal reduces to the empty extremal") {
    const SimplexVector w({0.2, 0.3, 0.3, 0.2});
    const auto e = build_empty_extremal(w, 2.0);
    const auto g = build_general_extremal(EndpointConstraint(SimplexVector::empty_urns(2), w, 2.0));
    for (double x : {0.3, 1.0, 1.7}) {
        const auto a = eval_gamma(e, x), b = eval_gamma(g, x);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
}

TEST_CASE("coupon extremal hits the constrained low fraction") {
    const auto s = coupon_rate(SimplexVector({0.5, 0.3, 0.2, 0.0, 0.0}), 2.0, 0.55);
    const auto e = build_general_extremal(EndpointConstraint(s.alpha, s.terminal_state(), 2.0));
    const auto end = eval_gamma(e, 2.0);
    CHECK(1.0 - end.overflow() == doctest::Approx(0.55).epsilon(1e-9));
}

TEST_CASE("class sub-paths are valid") {
    const EndpointConstraint c(SimplexVector({0.5, 0.2, 0.1, 0.1, 0.1}), SimplexVector({0.1, 0.2, 0.2, 0.2, 0.3}), 2.5);
    const auto e = build_general_extremal(c);
    for (const auto& [k, curve] : e.mixture.curves) {
        ClassMixture single = e.mixture;
        single.weights = {{k, 1.0}};
        single.curves = {{k, curve}};
        // A class receives balls at its own share of the unit rate, so time is scaled by 1 / alpha_k.
        std::vector<double> times;
        std::vector<std::vector<double>> psi;
        for (int s = 0; s <= 400; ++s) {
            const double x = c.beta * s / 400.0;
            const auto g = single.evaluate(x).gamma;
            std::vector<double> cum;
            double run = 0.0;
            for (std::size_t i = 0; i + 1 < g.size(); ++i) cum.push_back(run += g[i]);
            CHECK(run + g.back() == doctest::Approx(1.0).epsilon(1e-12));
            times.push_back(x / c.alpha[k]);
            psi.push_back(cum);
        }
        CHECK(validity_check(times, psi).valid);
    }
    CHECK(validity_check(sample_path(as_path(e), c.beta, 2001)).valid);
}

TEST_CASE("cost identities and residuals on mixed instances") {
    std::mt19937_64 rng(4242);
    for (int t = 0; t < 8; ++t) {
        InstanceOptions o;
        o.polynomial = t % 4 == 1;
        o.empty_start = t % 4 == 2;
        const auto c = random_constraint(rng, o);
        const auto e = build_general_extremal(c);
        const auto r = cost_report(e);
        const double q = path_cost(as_path(e), c.beta);
        CHECK(r.boundary == doctest::Approx(r.entropy).epsilon(1e-8));
        CHECK(q == doctest::Approx(r.entropy).epsilon(1e-6));
        const auto el = el_residual(as_path(e), c.beta, interior_grid(c.beta, 40), el_options(e));
        CHECK(max_of(el) < 1e-6);
        const auto end = eval_gamma(e, c.beta);
        for (std::size_t i = 0; i < end.size(); ++i) CHECK(end[i] == doctest::Approx(c.omega[i]).epsilon(1e-9));
    }
}

TEST_CASE("linear path fails the Euler-Lagrange equations") {
    const EndpointConstraint c(SimplexVector({0.6, 0.3, 0.1, 0.0}), SimplexVector({0.2, 0.3, 0.3, 0.2}), 1.5);
    const auto e = build_general_extremal(c);
    const auto el = el_residual(linear_path(c), c.beta, interior_grid(c.beta, 40), el_options(e));
    CHECK(max_of(el) > 1e-2);
}

TEST_CASE("reducible extremal cost equals the composed rate") {
    std::mt19937_64 rng(8);
    const auto c = random_reducible_constraint(rng);
    const auto e = build_extremal(c);
    CHECK(closed_form_cost(e) == doctest::Approx(terminal_rate_general(c)).epsilon(1e-9));
    CHECK(path_cost(as_path(e), c.beta) == doctest::Approx(terminal_rate_general(c)).epsilon(1e-6));
    const auto end = e.evaluate(c.beta);
    for (std::size_t i = 0; i < end.gamma.size(); ++i) CHECK(end.gamma[i] == doctest::Approx(c.omega[i]).epsilon(1e-9));
    CHECK(validity_check(sample_path(as_path(e), c.beta, 1001)).valid);
}
