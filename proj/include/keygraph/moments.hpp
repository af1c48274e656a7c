#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "keygraph/graphgen.hpp"
#include "keygraph/keymath.hpp"

namespace keygraph {

/// All exact analytics for one ModelParams.
struct MomentReport {
    ModelParams params;
    double q;
    double p;
    double first_moment;   // E[I_n]
    double cross_moment;   // E[chi_1 chi_2] (0 when n = 1)
    double second_moment;  // E[I_n^2]
    double ratio;          // E[I^2] / (E I)^2, 1 when E I = 0
    double lower_bound_P0;
    double upper_bound_P0;
    double r_n;      // NaN when n < 2 or p = 1
    double r_star;
    double r_circ;
};

/// E[I_n] = n (1-p)^{n-1}.
inline double first_moment(const ModelParams& params) {
    const double p = p_edge(params.theta, params.alpha);
    if (params.n == 1)
        return 1.0;
    if (p >= 1.0)
        return 0.0;
    return static_cast<double>(params.n) *
           std::exp(static_cast<double>(params.n - 1) * std::log1p(-p));
}

/// The three factors of E[I_n] = n^{1/n} e^{-((n-1)/n) gamma} e^{-(n-1) Psi(p)},
/// valid when p = (log n + gamma)/n.
struct ExpansionFactors {
    double root_factor;       // n^{1/n}
    double deviation_factor;  // exp(-((n-1)/n) gamma)
    double psi_factor;        // exp(-(n-1) Psi(p))

    double product() const { return root_factor * deviation_factor * psi_factor; }
};

inline ExpansionFactors first_moment_expansion(const ModelParams& params,
                                               double gamma_n) {
    const double p = p_edge(params.theta, params.alpha);
    if (p >= 1.0)
        throw std::domain_error("first_moment_expansion: requires p < 1");
    const double n = static_cast<double>(params.n);
    const double implied = (std::log(n) + gamma_n) / n;
    if (std::abs(p - implied) > 1e-9 * std::max(1.0, std::abs(p)))
        throw std::invalid_argument(
            "first_moment_expansion: gamma_n inconsistent with p = (log n + gamma_n)/n");
    return ExpansionFactors{
        std::exp(std::log(n) / n),
        std::exp(-(n - 1.0) / n * gamma_n),
        std::exp(-(n - 1.0) * psi(p)),
    };
}

/// E[chi_1 chi_2] as an exact finite sum over the key-ring overlap law:
/// sum_m P(M=m) (1 - alpha 1[m>=1]) Z_m^{n-2},
/// Z_m = (1-p)^2 + alpha^2 (v(theta, 2K-m) - q^2).
inline double cross_moment_exact(const ModelParams& params) {
    if (params.n < 2)
        throw std::invalid_argument("cross_moment_exact: requires n >= 2");
    if (params.alpha == 0.0)
        return 1.0;  // every node isolated with certainty
    const double qv = q(params.theta);
    const double p = p_edge(params.theta, params.alpha);
    const double omp = 1.0 - p;
    const double ompsq = omp * omp;
    const double a2 = params.alpha * params.alpha;
    const double exponent = static_cast<double>(params.n - 2);

    double sum = 0.0, comp = 0.0;  // Kahan
    for (const auto& [m, pm] : overlap_pmf(params.theta)) {
        double z = ompsq + a2 * (v(params.theta, 2 * params.theta.K - m) - qv * qv);
        if (z < 0.0)
            z = 0.0;  // roundoff guard; Z_m >= 0 analytically
        const double power = (params.n == 2) ? 1.0 : std::pow(z, exponent);
        const double factor = (m >= 1) ? (1.0 - params.alpha) : 1.0;
        const double term = pm * factor * power - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

/// E[I_n^2] = n E[chi_1] + n(n-1) E[chi_1 chi_2].
inline double second_moment(const ModelParams& params) {
    if (params.n == 1)
        return 1.0;
    const double n = static_cast<double>(params.n);
    const double p = p_edge(params.theta, params.alpha);
    const double echi =
        (p >= 1.0) ? 0.0 : std::exp((n - 1.0) * std::log1p(-p));
    return n * echi + n * (n - 1.0) * cross_moment_exact(params);
}

/// First/second moment sandwich on P(I_n = 0):
/// max(0, 1 - E I) <= P(I=0) <= min(1, 1 - (E I)^2 / E[I^2]).
inline std::pair<double, double> probability_bounds(const ModelParams& params) {
    const double ei = first_moment(params);
    const double lower = std::max(0.0, 1.0 - ei);
    double upper = 1.0;
    if (ei > 0.0) {
        const double ei2 = second_moment(params);
        upper = std::min(1.0, 1.0 - ei * ei / ei2);
    }
    return {lower, std::max(lower, upper)};
}

struct RChain {
    double r_n;
    double r_star;
    double r_circ;
    double bound_rhs;  // q + (1-q) r_star
};

/// The bound chain R_n, R*_n, R°_n:
/// R_n = sum_m P(M=m)(1 - alpha 1[m>=1]) (1 + Zt_m)^{n-2},
/// Zt_m = alpha^2 (v(theta,2K-m) - q^2) / (1-p)^2,
/// R*_n = exp((n-2) alpha q p / (1-p)^2),
/// R°_n = exp(alpha log n / (1-p)^2).
inline RChain r_chain(const ModelParams& params) {
    if (params.n < 2)
        throw std::invalid_argument("r_chain: requires n >= 2");
    const double qv = q(params.theta);
    const double p = p_edge(params.theta, params.alpha);
    if (p >= 1.0)
        throw std::domain_error("r_chain: requires p < 1");
    const double ompsq = (1.0 - p) * (1.0 - p);
    const double a2 = params.alpha * params.alpha;
    const double exponent = static_cast<double>(params.n - 2);

    double r_n = 0.0, comp = 0.0;
    for (const auto& [m, pm] : overlap_pmf(params.theta)) {
        const double zt =
            a2 * (v(params.theta, 2 * params.theta.K - m) - qv * qv) / ompsq;
        double power;
        if (1.0 + zt <= 0.0)
            power = (params.n == 2) ? 1.0 : 0.0;
        else
            power = std::exp(exponent * std::log1p(zt));
        const double term = pm * ((m >= 1) ? (1.0 - params.alpha) : 1.0) * power - comp;
        const double t = r_n + term;
        comp = (t - r_n) - term;
        r_n = t;
    }
    const double r_star = std::exp(exponent * params.alpha * qv * p / ompsq);
    const double r_circ =
        std::exp(params.alpha * std::log(static_cast<double>(params.n)) / ompsq);
    return RChain{r_n, r_star, r_circ, qv + (1.0 - qv) * r_star};
}

/// Full analytic report for one model instance.
inline MomentReport compute_report(const ModelParams& params) {
    MomentReport rep{params,
                     q(params.theta),
                     p_edge(params.theta, params.alpha),
                     first_moment(params),
                     0.0,
                     1.0,
                     1.0,
                     0.0,
                     1.0,
                     std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN()};
    if (params.n >= 2) {
        rep.cross_moment = cross_moment_exact(params);
        rep.second_moment = second_moment(params);
    }
    if (rep.first_moment > 0.0)
        rep.ratio = rep.second_moment / (rep.first_moment * rep.first_moment);
    const auto [lo, hi] = probability_bounds(params);
    rep.lower_bound_P0 = lo;
    rep.upper_bound_P0 = hi;
    if (params.n >= 2 && rep.p < 1.0) {
        const RChain rc = r_chain(params);
        rep.r_n = rc.r_n;
        rep.r_star = rc.r_star;
        rep.r_circ = rc.r_circ;
    }
    return rep;
}

}  // namespace keygraph
