#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "keygraph/moments.hpp"

namespace keygraph {

/// Exact law of I_n on a tiny instance, by exhaustive enumeration.
struct ExactResult {
    ModelParams params;
    std::map<std::int64_t, double> pmf;  // law of I_n
    double p_no_isolated;                // pmf(0)
    double e_isolated;                   // E[I_n]
    double e_isolated_sq;                // E[I_n^2]
};

class SizeGuardError : public std::runtime_error {
  public:
    explicit SizeGuardError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::uint64_t binomial_u64(std::int64_t a, std::int64_t b) {
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < b; ++i)
        r = r * static_cast<std::uint64_t>(a - i) / static_cast<std::uint64_t>(i + 1);
    return r;
}

// All K-subsets of {1..P} in lexicographic order.
inline std::vector<std::vector<std::int64_t>> all_subsets(std::int64_t P,
                                                          std::int64_t K) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(K));
    for (std::int64_t i = 0; i < K; ++i)
        idx[static_cast<std::size_t>(i)] = i + 1;
    for (;;) {
        out.push_back(idx);
        std::int64_t j = K - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == P - K + j + 1)
            --j;
        if (j < 0)
            break;
        ++idx[static_cast<std::size_t>(j)];
        for (std::int64_t l = j + 1; l < K; ++l)
            idx[static_cast<std::size_t>(l)] = idx[static_cast<std::size_t>(l - 1)] + 1;
    }
    return out;
}

inline bool subsets_intersect(const std::vector<std::int64_t>& a,
                              const std::vector<std::int64_t>& b) {
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
        if (a[x] == b[y])
            return true;
        if (a[x] < b[y])
            ++x;
        else
            ++y;
    }
    return false;
}

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

/// Exhaustive expectation over all key-ring assignments and all ER edge
/// patterns. Guarded to C(P,K)^n 2^{C(n,2)} <= 1e8 enumerated terms.
inline ExactResult enumerate_exact(const ModelParams& params) {
    const std::int64_t n = params.n;
    const std::int64_t npairs = n * (n - 1) / 2;
    const std::uint64_t nsub = detail::binomial_u64(params.theta.P, params.theta.K);
    const double work = std::pow(static_cast<double>(nsub), static_cast<double>(n)) *
                        std::pow(2.0, static_cast<double>(npairs));
    if (!(work <= 1e8))
        throw SizeGuardError("enumerate_exact: C(P,K)^n * 2^{C(n,2)} exceeds 1e8");

    const auto subsets = detail::all_subsets(params.theta.P, params.theta.K);
    const double ring_weight = 1.0 / static_cast<double>(nsub);

    // ER pattern weights alpha^e (1-alpha)^{npairs-e}, exact at the endpoints.
    std::vector<double> pow_a(static_cast<std::size_t>(npairs + 1), 1.0);
    std::vector<double> pow_b(static_cast<std::size_t>(npairs + 1), 1.0);
    for (std::int64_t e = 1; e <= npairs; ++e) {
        pow_a[static_cast<std::size_t>(e)] =
            pow_a[static_cast<std::size_t>(e - 1)] * params.alpha;
        pow_b[static_cast<std::size_t>(e)] =
            pow_b[static_cast<std::size_t>(e - 1)] * (1.0 - params.alpha);
    }

    // Pair order: (0,1),(0,2),...,(0,n-1),(1,2),... ; per-node pair masks.
    std::vector<std::uint64_t> node_mask(static_cast<std::size_t>(n), 0);
    {
        std::int64_t pair = 0;
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j, ++pair) {
                node_mask[static_cast<std::size_t>(i)] |= (std::uint64_t{1} << pair);
                node_mask[static_cast<std::size_t>(j)] |= (std::uint64_t{1} << pair);
            }
    }

    // Conditional law of I_n given the K-adjacency pattern, memoized.
    std::unordered_map<std::uint64_t, std::vector<double>> cond_pmf;
    auto conditional = [&](std::uint64_t kadj_mask) -> const std::vector<double>& {
        auto it = cond_pmf.find(kadj_mask);
        if (it != cond_pmf.end())
            return it->second;
        std::vector<double> pmf(static_cast<std::size_t>(n + 1), 0.0);
        for (std::uint64_t er = 0; er < (std::uint64_t{1} << npairs); ++er) {
            const std::uint64_t adj = er & kadj_mask;
            std::int64_t isolated = 0;
            for (std::int64_t i = 0; i < n; ++i)
                if ((adj & node_mask[static_cast<std::size_t>(i)]) == 0)
                    ++isolated;
            const int e = __builtin_popcountll(er);
            pmf[static_cast<std::size_t>(isolated)] +=
                pow_a[static_cast<std::size_t>(e)] *
                pow_b[static_cast<std::size_t>(npairs - e)];
        }
        return cond_pmf.emplace(kadj_mask, std::move(pmf)).first->second;
    };

    std::vector<detail::Kahan> acc(static_cast<std::size_t>(n + 1));

    // Odometer over the n ring assignments.
    std::vector<std::size_t> assign(static_cast<std::size_t>(n), 0);
    const double w_keys = std::pow(ring_weight, static_cast<double>(n));
    for (;;) {
        std::uint64_t kadj_mask = 0;
        std::int64_t pair = 0;
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j, ++pair)
                if (detail::subsets_intersect(subsets[assign[static_cast<std::size_t>(i)]],
                                              subsets[assign[static_cast<std::size_t>(j)]]))
                    kadj_mask |= (std::uint64_t{1} << pair);
        const auto& cond = conditional(kadj_mask);
        for (std::int64_t k = 0; k <= n; ++k)
            acc[static_cast<std::size_t>(k)].add(w_keys *
                                                 cond[static_cast<std::size_t>(k)]);
        std::int64_t pos = n - 1;
        while (pos >= 0 && assign[static_cast<std::size_t>(pos)] + 1 == subsets.size()) {
            assign[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0)
            break;
        ++assign[static_cast<std::size_t>(pos)];
    }

    ExactResult result{params, {}, 0.0, 0.0, 0.0};
    for (std::int64_t k = 0; k <= n; ++k) {
        const double pk = acc[static_cast<std::size_t>(k)].sum;
        result.pmf[k] = pk;
        result.e_isolated += static_cast<double>(k) * pk;
        result.e_isolated_sq += static_cast<double>(k) * static_cast<double>(k) * pk;
    }
    result.p_no_isolated = result.pmf[0];
    return result;
}

/// Side-by-side record of enumeration vs closed-form analytics.
struct ComparisonRecord {
    double e_isolated_exact;
    double e_isolated_formula;
    double e_isolated_sq_exact;
    double e_isolated_sq_formula;
    double p_no_isolated_exact;
    double lower_bound_P0;
    double upper_bound_P0;
    bool pass_first_moment;
    bool pass_second_moment;
    bool pass_sandwich;

    bool all_pass() const {
        return pass_first_moment && pass_second_moment && pass_sandwich;
    }
    std::string failing() const {
        if (!pass_first_moment)
            return "first_moment";
        if (!pass_second_moment)
            return "second_moment";
        if (!pass_sandwich)
            return "P(I=0) sandwich";
        return "";
    }
};

inline ComparisonRecord exact_vs_formula(const ModelParams& params) {
    const ExactResult exact = enumerate_exact(params);
    const double ei = first_moment(params);
    const double ei2 = second_moment(params);
    const auto [lo, hi] = probability_bounds(params);
    ComparisonRecord rec{exact.e_isolated,    ei,
                         exact.e_isolated_sq, ei2,
                         exact.p_no_isolated, lo,
                         hi,                  false,
                         false,               false};
    rec.pass_first_moment =
        std::abs(exact.e_isolated - ei) <= 1e-12 * std::max(1.0, exact.e_isolated);
    rec.pass_second_moment = std::abs(exact.e_isolated_sq - ei2) <=
                             1e-12 * std::max(1.0, exact.e_isolated_sq);
    rec.pass_sandwich = lo - 1e-12 <= exact.p_no_isolated &&
                        exact.p_no_isolated <= hi + 1e-12;
    return rec;
}

}  // namespace keygraph
