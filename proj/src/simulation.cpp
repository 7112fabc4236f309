// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include "occupancy/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <mpfr.h>

#include "occupancy/errors.hpp"

namespace occupancy {

std::uint64_t ball_count(std::size_t n, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and nonnegative");
    return static_cast<std::uint64_t>(std::floor(beta * static_cast<double>(n) + 1e-9));
}

std::vector<std::uint64_t> initial_counts(const SimplexVector& alpha, std::size_t n) {
    const std::size_t L = alpha.size();
    std::vector<std::uint64_t> counts(L);
    std::vector<double> rem(L);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < L; ++i) {
        const double target = alpha[i] * static_cast<double>(n);
        counts[i] = static_cast<std::uint64_t>(std::floor(target));
        rem[i] = target - std::floor(target);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % L]];
    // Rounding error can overshoot by one when the remainders are all near zero.
    for (std::size_t i = L; assigned > n && i-- > 0;) {
        if (counts[i] > 0) {
            --counts[i];
            --assigned;
            i = L;
        }
    }
    return counts;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One ball into a uniformly chosen urn; counts has levels 0..I then overflow.
inline void throw_ball(std::vector<std::uint64_t>& counts, std::uint64_t n, std::mt19937_64& rng) {
    std::uint64_t u = uniform_below(rng, n);
    const std::size_t last = counts.size() - 1;
    for (std::size_t j = 0; j < last; ++j) {
        if (u < counts[j]) {
            --counts[j];
            ++counts[j + 1];
            return;
        }
        u -= counts[j];
    }
}

void validate(const SimConfig& cfg) {
    if (cfg.n == 0) throw DomainError("simulation needs n >= 1");
    if (cfg.alpha.size() < 2) throw DomainError("simulation needs an initial state");
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    return splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632BE59BD9B4E019ULL));
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(rng()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::uint64_t> simulate_counts(const SimConfig& cfg, std::uint64_t trial) {
    validate(cfg);
    std::mt19937_64 rng(trial_seed(cfg.seed, trial));
    auto counts = initial_counts(cfg.alpha, cfg.n);
    const std::uint64_t r = ball_count(cfg.n, cfg.beta);
    for (std::uint64_t b = 0; b < r; ++b) throw_ball(counts, cfg.n, rng);
    return counts;
}

SimplexVector simulate(const SimConfig& cfg, std::uint64_t trial) {
    const auto counts = simulate_counts(cfg, trial);
    std::vector<double> v(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) v[i] = static_cast<double>(counts[i]) / static_cast<double>(cfg.n);
    return SimplexVector(std::move(v), 1e-9);
}

SimTrajectory simulate_trajectory(const SimConfig& cfg, const std::vector<double>& x_grid, std::uint64_t trial) {
    validate(cfg);
    std::mt19937_64 rng(trial_seed(cfg.seed, trial));
    auto counts = initial_counts(cfg.alpha, cfg.n);
    const std::uint64_t r = ball_count(cfg.n, cfg.beta);
    SimTrajectory t;
    std::uint64_t thrown = 0;
    for (double x : x_grid) {
        if (x < 0.0) throw DomainError("trajectory grid must be nonnegative");
        const std::uint64_t target = std::min(r, ball_count(cfg.n, x));
        if (target < thrown) throw DomainError("trajectory grid must be nondecreasing");
        for (; thrown < target; ++thrown) throw_ball(counts, cfg.n, rng);
        t.times.push_back(x);
        t.balls.push_back(thrown);
        t.counts.push_back(counts);
    }
    return t;
}

bool trajectory_invariants_hold(const SimTrajectory& t, std::size_t n, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    for (std::size_t s = 0; s < t.counts.size(); ++s) {
        const auto& c = t.counts[s];
        if (std::accumulate(c.begin(), c.end(), std::uint64_t{0}) != n)
            return fail("urn count not conserved at snapshot " + std::to_string(s));
        if (s == 0) continue;
        const auto& p = t.counts[s - 1];
        if (t.balls[s] < t.balls[s - 1]) return fail("ball count decreased at snapshot " + std::to_string(s));
        const std::uint64_t thrown = t.balls[s] - t.balls[s - 1];
        std::uint64_t cum_now = 0, cum_prev = 0, drop_total = 0;
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            cum_now += c[i];
            cum_prev += p[i];
            if (cum_now > cum_prev) return fail("cumulative count rose at level " + std::to_string(i));
            drop_total += cum_prev - cum_now;
        }
        // Each ball moves one urn up one level, lowering exactly one cumulative count by one.
        if (drop_total > thrown) return fail("cumulative drop exceeds balls thrown at snapshot " + std::to_string(s));
    }
    return true;
}

std::vector<ExponentEstimate> empirical_exponent(const SimConfig& cfg, const TerminalEvent& event,
                                                 const std::vector<std::size_t>& n_list, unsigned threads) {
    if (cfg.trials == 0) throw DomainError("empirical_exponent needs trials >= 1");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<ExponentEstimate> out;
    for (std::size_t n : n_list) {
        SimConfig c = cfg;
        c.n = n;
        validate(c);
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, c.trials));
        std::vector<std::size_t> hits(workers, 0);
        auto work = [&](unsigned w) {
            const std::size_t lo = c.trials * w / workers, hi = c.trials * (w + 1) / workers;
            for (std::size_t trial = lo; trial < hi; ++trial) {
                const auto counts = simulate_counts(c, trial);
                if (event(counts, n)) ++hits[w];
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }
        ExponentEstimate e;
        e.n = n;
        e.trials = c.trials;
        e.hits = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
        const double N = static_cast<double>(e.trials), nn = static_cast<double>(n);
        e.p_hat = static_cast<double>(e.hits) / N;
        const double z = 1.959963984540054;
        const double denom = 1.0 + z * z / N;
        const double centre = (e.p_hat + z * z / (2.0 * N)) / denom;
        const double half = z * std::sqrt(e.p_hat * (1.0 - e.p_hat) / N + z * z / (4.0 * N * N)) / denom;
        const double p_lo = std::max(0.0, centre - half), p_hi = std::min(1.0, centre + half);
        const double inf = std::numeric_limits<double>::infinity();
        e.zero_hits = e.hits == 0;
        e.exponent = e.zero_hits ? inf : -std::log(e.p_hat) / nn;
        e.exponent_lo = -std::log(p_hi) / nn;
        e.exponent_hi = p_lo > 0.0 ? -std::log(p_lo) / nn : inf;
        out.push_back(e);
    }
    return out;
}

double ExactPmf::value() const { return std::exp(log_value); }

namespace {

class Mp {
public:
    explicit Mp(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
    ~Mp() { mpfr_clear(v_); }
    Mp(const Mp&) = delete;
    Mp& operator=(const Mp&) = delete;
    mpfr_ptr get() { return v_; }

private:
    mpfr_t v_;
};

struct SumResult {
    double log_abs = 0.0;
    int sign = 0;
    double log2_max_term = -std::numeric_limits<double>::infinity();
};

// sum_{j=0}^{u} (-1)^j C(u, j) ((u - j) / n)^r at the given precision.
SumResult alternating_sum(long n, long r, long u, mpfr_prec_t bits) {
    Mp sum(bits), binom(bits), term(bits), base(bits), tmp(bits);
    mpfr_set_zero(sum.get(), 1);
    mpfr_set_ui(binom.get(), 1, MPFR_RNDN);
    SumResult res;
    for (long j = 0; j <= u; ++j) {
        if (u - j > 0 || r == 0) {
            mpfr_set_si(base.get(), u - j, MPFR_RNDN);
            mpfr_div_si(base.get(), base.get(), n, MPFR_RNDN);
            mpfr_pow_si(term.get(), base.get(), r, MPFR_RNDN);
            mpfr_mul(term.get(), term.get(), binom.get(), MPFR_RNDN);
            if (!mpfr_zero_p(term.get())) {
                long exp2 = 0;
                const double mant = mpfr_get_d_2exp(&exp2, term.get(), MPFR_RNDN);
                res.log2_max_term = std::max(res.log2_max_term, std::log2(std::fabs(mant)) + static_cast<double>(exp2));
            }
            if (j % 2 == 0) {
                mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
            } else {
                mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
            }
        }
        mpfr_mul_si(binom.get(), binom.get(), u - j, MPFR_RNDN);
        mpfr_div_si(binom.get(), binom.get(), j + 1, MPFR_RNDN);
    }
    res.sign = mpfr_sgn(sum.get());
    if (res.sign != 0) {
        mpfr_abs(tmp.get(), sum.get(), MPFR_RNDN);
        mpfr_log(tmp.get(), tmp.get(), MPFR_RNDN);
        res.log_abs = mpfr_get_d(tmp.get(), MPFR_RNDN);
    }
    return res;
}

}  // namespace

ExactPmf exact_empty_urn_pmf(long n, long r, long m) {
    if (n <= 0 || r < 0 || m < 0) throw DomainError("exact pmf needs n >= 1, r >= 0, m >= 0");
    const double ninf = -std::numeric_limits<double>::infinity();
    if (m > n) return {ninf, false};
    if (r == 0) return {m == n ? 0.0 : ninf, false};
    const long u = n - m;
    // At most r urns can be occupied, and r > 0 balls occupy at least one.
    if (u == 0 || u > r) return {ninf, false};

    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(u + 1.0);
    mpfr_prec_t bits = 192;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const SumResult s = alternating_sum(n, r, u, bits);
        const double log2_result = s.sign > 0 ? s.log_abs / std::log(2.0) : ninf;
        const double cancellation = s.log2_max_term - log2_result;
        // Relative error bound ~ u * 2^(cancellation - bits).
        const double log2_rel_error = cancellation - static_cast<double>(bits) + std::log2(static_cast<double>(u) + 1.0);
        if (s.sign > 0 && log2_rel_error < std::log2(1e-12)) return {log_binom + s.log_abs, false};
        const double needed = std::isfinite(cancellation) ? cancellation + 96.0 : 2.0 * static_cast<double>(bits);
        bits = static_cast<mpfr_prec_t>(std::max(2.0 * static_cast<double>(bits), needed));
        if (attempt == 5 || bits > (1 << 20)) {
            if (s.sign > 0 && log2_rel_error < std::log2(1e-6)) return {log_binom + s.log_abs, false};
            return {s.sign > 0 ? log_binom + s.log_abs : ninf, true};
        }
    }
    return {ninf, true};
}

}  // namespace occupancy
