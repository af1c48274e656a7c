// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the full analytic/oracle/Monte Carlo battery at pinned
// tolerances.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "keygraph/harness.hpp"

using namespace keygraph;
namespace h = keygraph::harness;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass)
        ++g_failures;
}

// 1. Oracle equivalence on the exhaustive small grid.
void criterion_oracle_equivalence() {
    bool pass = true;
    std::string detail;
    for (std::int64_t n : {2, 3, 4}) {
        for (std::int64_t P = 2; P <= 5; ++P) {
            for (std::int64_t K = 1; K < P; ++K) {
                for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
                    const ModelParams params(n, Theta(K, P), alpha);
                    const auto rec = exact_vs_formula(params);
                    if (!rec.all_pass()) {
                        pass = false;
                        detail = "first failure at n=" + std::to_string(n) +
                                 " K=" + std::to_string(K) + " P=" + std::to_string(P) +
                                 " alpha=" + h::fmt17(alpha) + " (" + rec.failing() + ")";
                        goto done;
                    }
                }
            }
        }
    }
done:
    report(1, "oracle equivalence on n<=4, P<=5 grid at 1e-12", pass, detail);
}

// 2. Monte Carlo vs analytic moments at (n=50, K=4, P=100, alpha=0.6).
void criterion_mc_vs_analytic() {
    const ModelParams params(50, Theta(4, 100), 0.6);
    const auto sum = run_trials(params, 100000, 42);
    const double analytic = first_moment(params);
    const auto [lo, hi] = probability_bounds(params);
    const double wilson_half = h::wilson_half_width(sum.freq_no_isolated, sum.trials);

    const bool mean_ok =
        std::abs(sum.mean_isolated - analytic) <= 4.0 * sum.stderr_mean;
    const bool freq_ok = sum.freq_no_isolated >= lo - 4.0 * wilson_half &&
                         sum.freq_no_isolated <= hi + 4.0 * wilson_half;
    report(2, "MC mean/frequency vs analytic at n=50, trials=1e5, seed=42",
           mean_ok && freq_ok,
           "mean=" + h::fmt17(sum.mean_isolated) + " analytic=" + h::fmt17(analytic) +
               " freq_I0=" + h::fmt17(sum.freq_no_isolated) + " sandwich=[" +
               h::fmt17(lo) + "," + h::fmt17(hi) + "]");
}

struct TrendRow {
    std::int64_t n;
    double lower, upper, freq, stderr_freq;
};

std::vector<TrendRow> run_trend(double c, std::int64_t trials, std::uint64_t seed) {
    const auto schedule = build_schedule(
        {200, 800, 3200}, [](std::int64_t) { return 1.0; },
        DeviationSpec::c_log(c), DimensionRule::fix_K(4));
    std::vector<TrendRow> rows;
    std::size_t idx = 0;
    for (const auto& e : schedule.entries) {
        const ModelParams params(e.n, e.theta, e.alpha);
        const auto [lo, hi] = probability_bounds(params);
        const auto sum = run_trials(
            params, trials, rng::combine(seed, static_cast<std::uint64_t>(idx)));
        rows.push_back(TrendRow{e.n, lo, hi, sum.freq_no_isolated, sum.stderr_freq});
        ++idx;
    }
    return rows;
}

// 3. One-law trend: c=2 certificate lower bound -> 1.
void criterion_one_law() {
    const auto rows = run_trend(2.0, 2000, 42);
    bool pass = rows.back().lower > 0.95;
    std::string detail = "lower_bound(n=3200)=" + h::fmt17(rows.back().lower);
    for (const auto& r : rows) {
        if (r.freq < r.lower - 4.0 * r.stderr_freq) {
            pass = false;
            detail += " mc_freq below certificate at n=" + std::to_string(r.n);
        }
    }
    report(3, "one-law trend (c=2): lower bound > 0.95 at n=3200, MC consistent",
           pass, detail);
}

// 4. Zero-law trend: c=0.5 second-moment upper bound -> 0.
void criterion_zero_law() {
    const auto rows = run_trend(0.5, 2000, 42);
    bool pass = rows.back().upper < 0.15;
    std::string detail = "upper_bound(n=3200)=" + h::fmt17(rows.back().upper);
    for (const auto& r : rows) {
        if (r.freq > r.upper + 4.0 * r.stderr_freq) {
            pass = false;
            detail += " mc_freq above certificate at n=" + std::to_string(r.n);
        }
    }
    report(4, "zero-law trend (c=0.5): upper bound < 0.15 at n=3200, MC consistent",
           pass, detail);
}

// 5. Bound-chain identity and inequality suite on 1e4 random tuples.
void criterion_identity_suite() {
    h::IdentityOptions opts;
    opts.count = 10000;
    const auto rep = h::run_identities(opts);
    report(5, "bound-chain identities/inequalities on 1e4 random tuples",
           rep.ok(),
           rep.ok() ? std::to_string(rep.checks) + " checks"
                    : rep.failures.front());
}

// 6. Psi asymptotics.
void criterion_psi_asymptotics() {
    bool pass = true;
    std::string detail;
    for (double x : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double dev = std::abs(psi(x) / (x * x) - 0.5);
        if (dev > x) {
            pass = false;
            detail += " x=" + h::fmt17(x) + " dev=" + h::fmt17(dev);
        }
    }
    report(6, "Psi(x)/x^2 within x of 1/2 down to x=1e-6", pass, detail);
}

// 7. Three-factor first-moment expansion on 100 random consistent pairs.
void criterion_expansion() {
    rng::SplitMix64 gen(20260824);
    bool pass = true;
    std::string detail;
    for (int it = 0; it < 100; ++it) {
        const std::int64_t K = 1 + static_cast<std::int64_t>(gen.next_below(6));
        const std::int64_t P =
            2 * K + static_cast<std::int64_t>(gen.next_below(100000));
        const std::int64_t n = 2 + static_cast<std::int64_t>(gen.next_below(9999));
        const double alpha = gen.next_unit();
        const ModelParams params(n, Theta(K, P), alpha);
        const double p = p_edge(params.theta, params.alpha);
        const double gamma =
            static_cast<double>(n) * p - std::log(static_cast<double>(n));
        const double product = first_moment_expansion(params, gamma).product();
        const double direct = first_moment(params);
        if (std::abs(product - direct) > 1e-9 * std::max(direct, 1e-300)) {
            pass = false;
            detail = "mismatch at n=" + std::to_string(n) + " K=" + std::to_string(K) +
                     " P=" + std::to_string(P) + ": " + h::fmt17(product) + " vs " +
                     h::fmt17(direct);
            break;
        }
    }
    report(7, "first-moment expansion product within 1e-9 on 100 random pairs",
           pass, detail);
}

// 8. Byte-identical simulate/sweep output at 1 vs 8 workers.
void criterion_determinism() {
    h::ExperimentConfig sim;
    sim.n = 50;
    sim.K = 4;
    sim.P = 100;
    sim.alpha = 0.6;
    sim.trials = 5000;
    sim.seed = 7;

    std::ostringstream sim1, sim8;
    sim.threads = 1;
    h::run_simulate(sim, sim1);
    sim.threads = 8;
    h::run_simulate(sim, sim8);

    h::ExperimentConfig sweep;
    sweep.n_values = {200, 400};
    sweep.alpha = 1.0;
    sweep.c = 2.0;
    sweep.fix_K = 4;
    sweep.trials = 500;
    sweep.seed = 7;

    std::ostringstream sw1, sw8;
    sweep.threads = 1;
    h::run_sweep(sweep, sw1);
    sweep.threads = 8;
    h::run_sweep(sweep, sw8);

    const bool pass = sim1.str() == sim8.str() && sw1.str() == sw8.str();
    report(8, "simulate and sweep byte-identical at 1 vs 8 workers", pass);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_oracle_equivalence();
    criterion_mc_vs_analytic();
    criterion_one_law();
    criterion_zero_law();
    criterion_identity_suite();
    criterion_psi_asymptotics();
    criterion_expansion();
    criterion_determinism();
    const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::printf("%d/8 criteria passed in %lld ms\n", 8 - g_failures,
                static_cast<long long>(dt));
    return g_failures == 0 ? 0 : 1;
}
