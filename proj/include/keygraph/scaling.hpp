#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "keygraph/keymath.hpp"
#include "keygraph/moments.hpp"

namespace keygraph {

/// Deviation function gamma_n of the critical scaling
/// alpha_n (1 - q(theta_n)) = (log n + gamma_n)/n.
struct DeviationSpec {
    enum class Kind { constant, c_log, log_log, custom };

    Kind kind;
    double value = 0.0;  // gamma for constant, c for c_log, sign for log_log
    std::map<std::int64_t, double> table;

    static DeviationSpec constant(double gamma) {
        return DeviationSpec{Kind::constant, gamma, {}};
    }
    /// gamma_n = (c - 1) log n.
    static DeviationSpec c_log(double c) {
        if (c <= 0.0)
            throw std::invalid_argument("DeviationSpec: c must be positive");
        return DeviationSpec{Kind::c_log, c, {}};
    }
    /// gamma_n = sign * log log n.
    static DeviationSpec log_log(int sign) {
        return DeviationSpec{Kind::log_log, sign >= 0 ? 1.0 : -1.0, {}};
    }
    static DeviationSpec custom(std::map<std::int64_t, double> t) {
        return DeviationSpec{Kind::custom, 0.0, std::move(t)};
    }

    double gamma(std::int64_t n) const {
        if (n < 2)
            throw std::invalid_argument("DeviationSpec: n must be >= 2");
        switch (kind) {
            case Kind::constant:
                return value;
            case Kind::c_log:
                return (value - 1.0) * std::log(static_cast<double>(n));
            case Kind::log_log:
                return value * std::log(std::log(static_cast<double>(n)));
            case Kind::custom: {
                const auto it = table.find(n);
                if (it == table.end())
                    throw std::invalid_argument(
                        "DeviationSpec: no table entry for n=" + std::to_string(n));
                return it->second;
            }
        }
        throw std::logic_error("DeviationSpec: unreachable");
    }
};

struct ScheduleEntry {
    std::int64_t n;
    Theta theta;
    double alpha;
    double gamma_target;
    double gamma_achieved;
    double c_equiv;  // n alpha (1-q) / log n
};

struct ScalingSchedule {
    std::vector<ScheduleEntry> entries;
};

/// Integer dimensioning: which of (K,P) is held fixed.
struct DimensionRule {
    enum class Kind { fix_K, fix_P };
    Kind kind;
    std::int64_t value;

    static DimensionRule fix_K(std::int64_t k) { return {Kind::fix_K, k}; }
    static DimensionRule fix_P(std::int64_t p) { return {Kind::fix_P, p}; }
};

class InfeasibleTargetError : public std::runtime_error {
  public:
    InfeasibleTargetError(std::int64_t n, const std::string& what)
        : std::runtime_error("infeasible target at n=" + std::to_string(n) +
                             ": " + what),
          n_(n) {}
    std::int64_t n() const { return n_; }

  private:
    std::int64_t n_;
};

namespace detail {

constexpr std::int64_t kPoolMax = 1000000000;  // 10^9

// 1 - q(K,P) is non-increasing in P (equal to 1 below P = 2K) and
// increasing in K; pick the integer dimension minimizing |1-q - t|.
inline Theta dimension_theta(std::int64_t n, double target, const DimensionRule& rule) {
    if (rule.kind == DimensionRule::Kind::fix_K) {
        const std::int64_t K = rule.value;
        if (K < 1)
            throw std::invalid_argument("dimension rule: K must be >= 1");
        if (target >= 1.0)
            return Theta(K, K + 1);  // q = 0, 1-q = 1
        // smallest P with 1-q <= target, bisection over [2K, kPoolMax]
        std::int64_t lo = 2 * K, hi = kPoolMax;
        if (one_minus_q(Theta(K, hi)) > target)
            throw InfeasibleTargetError(n, "target below reach of pool bound");
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (one_minus_q(Theta(K, mid)) <= target)
                hi = mid;
            else
                lo = mid + 1;
        }
        Theta best(K, lo);
        double best_err = std::abs(one_minus_q(best) - target);
        if (lo - 1 >= K + 1) {
            const Theta cand(K, lo - 1);
            const double err = std::abs(one_minus_q(cand) - target);
            if (err < best_err) {
                best = cand;
                best_err = err;
            }
        }
        if (best_err > 0.10 * target)
            throw InfeasibleTargetError(n, "no integer P within 10% of target");
        return best;
    }

    const std::int64_t P = rule.value;
    if (P < 2)
        throw std::invalid_argument("dimension rule: P must be >= 2");
    // smallest K with 1-q >= target
    std::int64_t lo = 1, hi = P - 1;
    if (one_minus_q(Theta(hi, P)) < target)
        throw InfeasibleTargetError(n, "target above reach with fixed P");
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (one_minus_q(Theta(mid, P)) >= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    Theta best(lo, P);
    double best_err = std::abs(one_minus_q(best) - target);
    if (lo - 1 >= 1) {
        const Theta cand(lo - 1, P);
        const double err = std::abs(one_minus_q(cand) - target);
        if (err < best_err) {
            best = cand;
            best_err = err;
        }
    }
    if (best_err > 0.10 * target)
        throw InfeasibleTargetError(n, "no integer K within 10% of target");
    return best;
}

}  // namespace detail

/// Dimension integer theta_n against the targets t_n = (log n + gamma_n)/(n alpha_n)
/// and record the achieved deviation values.
inline ScalingSchedule build_schedule(const std::vector<std::int64_t>& n_values,
                                      const std::function<double(std::int64_t)>& alpha_schedule,
                                      const DeviationSpec& deviation,
                                      const DimensionRule& rule) {
    ScalingSchedule schedule;
    schedule.entries.reserve(n_values.size());
    for (std::int64_t n : n_values) {
        const double alpha = alpha_schedule(n);
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("build_schedule: alpha_n must lie in [0,1]");
        const double gamma_target = deviation.gamma(n);
        const double log_n = std::log(static_cast<double>(n));
        if (alpha <= 0.0)
            throw InfeasibleTargetError(n, "alpha_n = 0");
        const double target = (log_n + gamma_target) / (static_cast<double>(n) * alpha);
        if (!(target > 0.0) || target > 1.0)
            throw InfeasibleTargetError(n, "target t_n outside (0,1]");
        const Theta theta = detail::dimension_theta(n, target, rule);
        const double omq = one_minus_q(theta);
        const double gamma_achieved = static_cast<double>(n) * alpha * omq - log_n;
        const double c_equiv = static_cast<double>(n) * alpha * omq / log_n;
        schedule.entries.push_back(
            ScheduleEntry{n, theta, alpha, gamma_target, gamma_achieved, c_equiv});
    }
    return schedule;
}

/// Deviation function induced by a strong scaling constant c: (c-1) log n.
inline double strong_to_deviation(double c, std::int64_t n) {
    if (c <= 0.0)
        throw std::invalid_argument("strong_to_deviation: c must be positive");
    if (n < 2)
        throw std::invalid_argument("strong_to_deviation: n must be >= 2");
    return (c - 1.0) * std::log(static_cast<double>(n));
}

struct RegimeRow {
    std::int64_t n;
    double gamma;
    double alpha;
    double alpha_log_n;
    double p;
    double e_isolated;
};

struct RegimeReport {
    std::vector<RegimeRow> rows;
    double gamma_trend;         // last-quartile mean sign of gamma_n
    double alpha_log_n_slope;   // last-quartile slope of alpha_n log n
    bool alpha_near_one_diverging;  // regime the zero-law theorem does not cover
    std::string label;
};

/// Finite-n diagnostics for the theorem side conditions. Asymptotic
/// hypotheses are not decidable from finite data; the report only tags
/// trends over the supplied schedule.
inline RegimeReport classify_regime(const ScalingSchedule& schedule) {
    if (schedule.entries.empty())
        throw std::invalid_argument("classify_regime: empty schedule");
    RegimeReport report;
    report.label =
        "finite-n diagnostics: asymptotic hypotheses are not decidable from finite data";
    for (const auto& e : schedule.entries) {
        const ModelParams params(e.n, e.theta, e.alpha);
        report.rows.push_back(RegimeRow{
            e.n, e.gamma_achieved, e.alpha,
            e.alpha * std::log(static_cast<double>(e.n)),
            p_edge(e.theta, e.alpha), first_moment(params)});
    }
    const std::size_t m = report.rows.size();
    const std::size_t q_start = m - std::max<std::size_t>(1, m / 4);
    double sign_sum = 0.0;
    for (std::size_t i = q_start; i < m; ++i) {
        const double g = report.rows[i].gamma;
        sign_sum += (g > 0.0) ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
    }
    report.gamma_trend = sign_sum / static_cast<double>(m - q_start);
    report.alpha_log_n_slope =
        (m >= 2) ? (report.rows.back().alpha_log_n - report.rows.front().alpha_log_n)
                 : 0.0;
    report.alpha_near_one_diverging =
        report.alpha_log_n_slope > 0.0 && report.rows.back().alpha >= 1.0 - 1e-9;
    return report;
}

}  // namespace keygraph
