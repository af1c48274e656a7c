#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace keygraph {

/// Key-ring / key-pool pair (K,P) of the Eschenauer-Gligor scheme.
struct Theta {
    std::int64_t K;
    std::int64_t P;

    Theta(std::int64_t key_ring_size, std::int64_t pool_size)
        : K(key_ring_size), P(pool_size) {
        if (K < 1)
            throw std::invalid_argument("Theta: K must be >= 1");
        if (P < 2)
            throw std::invalid_argument("Theta: P must be >= 2");
        if (K >= P)
            throw std::invalid_argument("Theta: K must be strictly less than P");
    }

    bool operator==(const Theta&) const = default;
};

/// Probability value in [0,1].
using EdgeProb = double;

/// log of a probability, in [-inf, 0].
using LogProb = double;

namespace detail {

// log C(a,b) for 0 <= b <= a, as a sum of b log factors.
inline double log_binomial(std::int64_t a, std::int64_t b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < b; ++i)
        s += std::log(static_cast<double>(a - i) / static_cast<double>(b - i));
    return s;
}

}  // namespace detail

/// log v(theta; r): log probability that a key ring avoids a fixed r-set.
inline LogProb log_v(const Theta& theta, std::int64_t r) {
    if (r < 0)
        throw std::invalid_argument("log_v: r must be nonnegative");
    if (r > theta.P - theta.K)
        return -std::numeric_limits<double>::infinity();
    // C(P-r,K)/C(P,K) telescopes to a product of K factors.
    double s = 0.0;
    for (std::int64_t i = 0; i < theta.K; ++i)
        s += std::log(static_cast<double>(theta.P - r - i) /
                      static_cast<double>(theta.P - i));
    return s;
}

/// v(theta; r) = C(P-r,K)/C(P,K) for r <= P-K, else 0.
inline EdgeProb v(const Theta& theta, std::int64_t r) {
    return std::exp(log_v(theta, r));
}

/// q(theta): probability that two independent key rings are disjoint.
/// Equals v(theta, K) by the same code path.
inline EdgeProb q(const Theta& theta) {
    return v(theta, theta.K);
}

inline LogProb log_q(const Theta& theta) {
    return log_v(theta, theta.K);
}

/// 1 - q(theta) without cancellation. The complement is accumulated
/// through c <- c + a - c*a over the factors 1 - a_i, a_i = K/(P-i),
/// so the result keeps full relative precision even when q is near 1.
inline EdgeProb one_minus_q(const Theta& theta) {
    if (theta.P < 2 * theta.K)
        return 1.0;
    double c = 0.0;
    const double k = static_cast<double>(theta.K);
    for (std::int64_t i = 0; i < theta.K; ++i) {
        const double a = k / static_cast<double>(theta.P - i);
        c = c + a - c * a;
    }
    return c;
}

/// Edge probability of the intersection graph: p = alpha * (1 - q).
inline EdgeProb p_edge(const Theta& theta, EdgeProb alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("p_edge: alpha must lie in [0,1]");
    return alpha * one_minus_q(theta);
}

/// Exact law of M = |K1 ∩ K2|, the overlap of two independent key rings.
/// Support is m in [max(0, 2K-P), K]; prob(m) = C(K,m) C(P-K,K-m) / C(P,K).
inline std::vector<std::pair<std::int64_t, double>> overlap_pmf(const Theta& theta) {
    const std::int64_t m_lo = std::max<std::int64_t>(0, 2 * theta.K - theta.P);
    std::vector<std::pair<std::int64_t, double>> pmf;
    pmf.reserve(static_cast<std::size_t>(theta.K - m_lo + 1));

    double prob;
    if (m_lo == 0) {
        // Anchor at prob(0) = q(theta), same code path as q.
        prob = q(theta);
    } else {
        prob = std::exp(detail::log_binomial(theta.K, m_lo) +
                        detail::log_binomial(theta.P - theta.K, theta.K - m_lo) -
                        detail::log_binomial(theta.P, theta.K));
    }
    pmf.emplace_back(m_lo, prob);
    for (std::int64_t m = m_lo; m < theta.K; ++m) {
        // prob(m+1)/prob(m) = (K-m)^2 / ((m+1)(P-2K+m+1))
        const double km = static_cast<double>(theta.K - m);
        prob *= km * km /
                (static_cast<double>(m + 1) *
                 static_cast<double>(theta.P - 2 * theta.K + m + 1));
        pmf.emplace_back(m + 1, prob);
    }
    return pmf;
}

/// Psi(x) = -x - log(1-x) = integral of t/(1-t) on [0,x].
inline double psi(double x) {
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("psi: x must lie in [0,1)");
    return -x - std::log1p(-x);
}

}  // namespace keygraph
