// Acceptance checks. Each criterion prints one line: "criterion N: PASS|FAIL  detail".
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occupancy/applications.hpp"
#include "occupancy/extremal.hpp"
#include "occupancy/simulation.hpp"
#include "occupancy/twist.hpp"
#include "occupancy/verify.hpp"

using namespace occupancy;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const SimplexVector kCouponAlpha({0.5, 0.3, 0.2, 0.0, 0.0});

// Shared by criteria 4 and 5: 20 instances, every fourth polynomial, a third with empty start.
std::vector<EndpointConstraint> cost_instances() {
    std::mt19937_64 rng(20260401);
    std::vector<EndpointConstraint> out;
    for (int t = 0; t < 20; ++t) {
        InstanceOptions o;
        o.polynomial = t % 4 == 0;
        o.empty_start = t % 3 == 1;
        out.push_back(random_constraint(rng, o));
    }
    return out;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    const auto s = coupon_rate(kCouponAlpha, 2.0, 0.55);
    const double secs = seconds_since(t0);
    const double log10p = -100.0 * s.J / std::log(10.0);
    const bool ok = std::fabs(s.J - 0.18) <= 0.01 && log10p >= -8.5 && log10p <= -7.5 && secs < 1.0;
    return {ok, fmt("J=%.6f log10 P(n=100)=%.3f residual=%.1e time=%.3fs", s.J, log10p, s.residual, secs)};
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    const auto p = zero_cost_path(kCouponAlpha)(2.0);
    const double psi3 = 1.0 - p.gamma.back();
    const double secs = seconds_since(t0);
    return {std::fabs(psi3 - 0.71) <= 0.01 && secs < 0.1, fmt("psi_3(2.0)=%.6f time=%.4fs", psi3, secs)};
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    const double p0 = poisson::pmf(0, 3.0);
    const bool empty_ok = std::fabs(p0 - std::exp(-3.0)) < 1e-15 && std::fabs(p0 - 0.05) < 0.005;

    const double J = classical_rate(0.15, 3.0).J;
    const EndpointConstraint c(SimplexVector::empty_urns(0), SimplexVector({0.15, 0.85}), 3.0);
    const double brute = entropy_min_oracle(endpoint_program(c, 80)).value;
    const bool oracle_ok = std::fabs(J - brute) <= 1e-6;

    bool mono = true;
    double prev = INFINITY, gap = 0.0;
    std::ostringstream seq;
    for (long n : {100L, 200L, 400L, 800L}) {
        const auto p = exact_empty_urn_pmf(n, 3 * n, std::lround(0.15 * n));
        const double e = -p.log_value / static_cast<double>(n);
        mono = mono && !p.precision_loss && e < prev && e > J;
        prev = e;
        gap = e - J;
        seq << e << ' ';
    }
    const double bound = 5.0 * std::log(800.0) / 800.0;
    const double secs = seconds_since(t0);
    const bool ok = empty_ok && oracle_ok && mono && gap < bound && secs < 30.0;
    return {ok, fmt("P0(3)=%.6f J=%.12f |J-oracle|=%.1e exact=[%s] gap800=%.5f<%.5f time=%.2fs", p0, J,
                    std::fabs(J - brute), seq.str().c_str(), gap, bound, secs)};
}

Outcome criterion4() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    int poly = 0;
    for (const auto& c : cost_instances()) {
        poly += feasibility_check(c).kind == Feasibility::Polynomial;
        const auto e = build_general_extremal(c);
        const auto r = cost_report(e);
        const double q = path_cost(as_path(e), c.beta);
        const double scale = std::max(1.0, std::fabs(r.entropy));
        worst = std::max({worst, std::fabs(r.boundary - r.entropy) / scale, std::fabs(q - r.entropy) / scale,
                          std::fabs(q - r.boundary) / scale});
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && poly >= 5 && secs < 60.0,
            fmt("20 instances (%d polynomial) worst pairwise difference=%.2e time=%.2fs", poly, worst, secs)};
}

Outcome criterion5() {
    double worst = 0.0;
    for (const auto& c : cost_instances()) {
        const auto e = build_general_extremal(c);
        for (double r : el_residual(as_path(e), c.beta, interior_grid(c.beta, 60), el_options(e)))
            worst = std::max(worst, r);
    }
    const EndpointConstraint d(SimplexVector({0.6, 0.3, 0.1, 0.0}), SimplexVector({0.2, 0.3, 0.3, 0.2}), 1.5);
    const auto e = build_general_extremal(d);
    double linear = 0.0;
    for (double r : el_residual(linear_path(d), d.beta, interior_grid(d.beta, 60), el_options(e)))
        linear = std::max(linear, r);
    return {worst < 1e-6 && linear > 1e-2,
            fmt("extremal max residual=%.2e linear path residual=%.3e", worst, linear)};
}

Outcome criterion6() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6060);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        InstanceOptions o;
        o.polynomial = t % 5 == 0;
        o.empty_start = t % 3 == 0;
        const auto c = random_constraint(rng, o);
        const double J = terminal_rate_general(c);
        const double brute = entropy_min_oracle(endpoint_program(c, 80)).value;
        worst = std::max(worst, std::fabs(J - brute));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-5 && secs < 120.0, fmt("50 instances worst |J-oracle|=%.2e time=%.2fs", worst, secs)};
}

Outcome criterion7() {
    const auto t0 = Clock::now();
    const double omega0 = 0.08, beta = 3.0;
    const double J = classical_rate(omega0, beta).J;
    SimConfig cfg{50, beta, SimplexVector::empty_urns(0), 7, 1000000};
    const TerminalEvent ev = [omega0](std::span<const std::uint64_t> c, std::size_t n) {
        return static_cast<double>(c[0]) >= std::ceil(omega0 * static_cast<double>(n) - 1e-9);
    };
    const std::vector<std::size_t> ns{50, 100, 200};
    const auto est = empirical_exponent(cfg, ev, ns);
    std::ostringstream mc, exact;
    bool mono = true;
    double prev = INFINITY;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double e = est[i].exponent;
        mono = mono && !est[i].zero_hits && std::fabs(e - J) < std::fabs(prev - J);
        prev = e;
        mc << fmt("%.5f[%.5f,%.5f] ", e, est[i].exponent_lo, est[i].exponent_hi);
        // Exact tail probability of the same event, for reference.
        const long n = static_cast<long>(ns[i]);
        double tail = 0.0;
        for (long m = static_cast<long>(std::ceil(omega0 * n - 1e-9)); m <= n; ++m)
            tail += exact_empty_urn_pmf(n, 3 * n, m).value();
        exact << fmt("%.5f ", -std::log(tail) / static_cast<double>(n));
    }
    const double rel = std::fabs(est.back().exponent - J) / J;
    const double secs = seconds_since(t0);
    return {mono && rel <= 0.15 && secs < 600.0,
            fmt("J=%.6f mc=[%s] exact=[%s] rel200=%.2f monotone=%s time=%.1fs", J, mc.str().c_str(),
                exact.str().c_str(), rel, mono ? "yes" : "no", secs)};
}

Outcome criterion8() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    for (const auto& r : run_property_suite(1)) {
        ok = ok && r.passed;
        d << r.name << '=' << (r.passed ? "ok" : "FAILED") << ' ';
    }
    d << fmt("time=%.1fs", seconds_since(t0));
    return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> all{criterion1, criterion2, criterion3, criterion4,
                                                    criterion5, criterion6, criterion7, criterion8};
    bool ok = true;
    for (int i = 1; i <= 8; ++i) {
        if (only && only != i) continue;
        Outcome r;
        try {
            r = all[i - 1]();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", i, r.pass ? "PASS" : "FAIL", r.detail.c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}
