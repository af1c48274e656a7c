#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "keygraph/keymath.hpp"
#include "keygraph/rng.hpp"

namespace keygraph {

/// One fully specified model instance of the intersection graph.
struct ModelParams {
    std::int64_t n;
    Theta theta;
    EdgeProb alpha;

    ModelParams(std::int64_t nodes, Theta t, EdgeProb a)
        : n(nodes), theta(t), alpha(a) {
        if (n < 1)
            throw std::invalid_argument("ModelParams: n must be >= 1");
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("ModelParams: alpha must lie in [0,1]");
    }
};

namespace detail {

constexpr std::uint64_t kKeyStreamTag = 0x6b657972696e6773ULL;  // "keyrings"
constexpr std::uint64_t kErStreamTag = 0x65725f6f7665726cULL;   // "er_overl"

// Index of unordered pair (i,j), i<j, into a flat triangular array.
inline std::size_t pair_index(std::int64_t n, std::int64_t i, std::int64_t j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * n - i - 1) / 2 +
           static_cast<std::size_t>(j - i - 1);
}

inline bool rings_intersect(const std::vector<std::int64_t>& a,
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

}  // namespace detail

/// Symmetric irreflexive boolean relation on {0..n-1}, stored as a
/// bitset over unordered pairs.
class PairRelation {
  public:
    explicit PairRelation(std::int64_t n)
        : n_(n), bits_(static_cast<std::size_t>(n) * (n - 1) / 2, false) {
        if (n > (std::int64_t{1} << 16))
            throw std::invalid_argument("PairRelation: n must be <= 2^16");
    }

    bool operator()(std::int64_t i, std::int64_t j) const {
        if (i == j)
            return false;
        if (i > j)
            std::swap(i, j);
        return bits_[detail::pair_index(n_, i, j)];
    }

    void set(std::int64_t i, std::int64_t j, bool value) {
        if (i > j)
            std::swap(i, j);
        bits_[detail::pair_index(n_, i, j)] = value;
    }

    std::int64_t nodes() const { return n_; }

  private:
    std::int64_t n_;
    std::vector<bool> bits_;
};

/// One realized intersection graph with isolation accounting.
struct GraphSample {
    ModelParams params;
    std::vector<std::vector<std::int64_t>> key_rings;  // sorted, keys in [1,P]
    PairRelation er_edges;
    PairRelation adjacency;
    std::vector<bool> isolated;
    std::int64_t isolated_count;
};

/// n independent uniform K-subsets of {1..P}, via Floyd's distinct sampling
/// (O(K) memory independent of P).
inline std::vector<std::vector<std::int64_t>> sample_key_rings(
    const ModelParams& params, const RngSpec& spec) {
    rng::SplitMix64 gen(rng::substream(spec, detail::kKeyStreamTag));
    std::vector<std::vector<std::int64_t>> rings(
        static_cast<std::size_t>(params.n));
    const std::int64_t K = params.theta.K;
    const std::int64_t P = params.theta.P;
    for (auto& ring : rings) {
        ring.clear();
        ring.reserve(static_cast<std::size_t>(K));
        for (std::int64_t j = P - K + 1; j <= P; ++j) {
            const std::int64_t t =
                1 + static_cast<std::int64_t>(gen.next_below(static_cast<std::uint64_t>(j)));
            const std::int64_t pick =
                std::binary_search(ring.begin(), ring.end(), t) ? j : t;
            ring.insert(std::upper_bound(ring.begin(), ring.end(), pick), pick);
        }
    }
    return rings;
}

/// ER overlay: each unordered pair independently on with probability alpha.
inline PairRelation sample_er_overlay(const ModelParams& params,
                                      const RngSpec& spec) {
    const std::uint64_t er_key = rng::substream(spec, detail::kErStreamTag);
    PairRelation rel(params.n);
    for (std::int64_t i = 0; i < params.n; ++i)
        for (std::int64_t j = i + 1; j < params.n; ++j)
            rel.set(i, j,
                    rng::pair_bernoulli(er_key, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j), params.alpha));
    return rel;
}

/// Full sample of the intersection graph, with per-node isolation flags.
inline GraphSample intersect_and_count(const ModelParams& params,
                                       const RngSpec& spec) {
    auto rings = sample_key_rings(params, spec);
    auto er = sample_er_overlay(params, spec);
    PairRelation adj(params.n);
    std::vector<bool> isolated(static_cast<std::size_t>(params.n), true);
    std::int64_t isolated_count = params.n;
    for (std::int64_t i = 0; i < params.n; ++i) {
        for (std::int64_t j = i + 1; j < params.n; ++j) {
            const bool on = er(i, j) && detail::rings_intersect(
                                            rings[static_cast<std::size_t>(i)],
                                            rings[static_cast<std::size_t>(j)]);
            adj.set(i, j, on);
            if (on) {
                if (isolated[static_cast<std::size_t>(i)]) {
                    isolated[static_cast<std::size_t>(i)] = false;
                    --isolated_count;
                }
                if (isolated[static_cast<std::size_t>(j)]) {
                    isolated[static_cast<std::size_t>(j)] = false;
                    --isolated_count;
                }
            }
        }
    }
    return GraphSample{params, std::move(rings), std::move(er), std::move(adj),
                       std::move(isolated), isolated_count};
}

/// Isolated-node count of one trial without materializing the adjacency.
/// Key-sharing candidate pairs are found through per-key buckets; the ER
/// bit is a pure function of the pair, so the result is identical to
/// intersect_and_count for the same RngSpec.
inline std::int64_t count_isolated(const ModelParams& params, const RngSpec& spec) {
    auto rings = sample_key_rings(params, spec);
    if (params.alpha == 0.0 || params.n == 1)
        return params.n;
    const std::uint64_t er_key = rng::substream(spec, detail::kErStreamTag);

    // (key, node) pairs grouped by key.
    std::vector<std::pair<std::int64_t, std::int64_t>> entries;
    entries.reserve(static_cast<std::size_t>(params.n * params.theta.K));
    for (std::int64_t i = 0; i < params.n; ++i)
        for (std::int64_t key : rings[static_cast<std::size_t>(i)])
            entries.emplace_back(key, i);
    std::sort(entries.begin(), entries.end());

    std::vector<bool> has_neighbor(static_cast<std::size_t>(params.n), false);
    std::int64_t remaining = params.n;
    std::size_t lo = 0;
    while (lo < entries.size() && remaining > 0) {
        std::size_t hi = lo + 1;
        while (hi < entries.size() && entries[hi].first == entries[lo].first)
            ++hi;
        for (std::size_t a = lo; a < hi; ++a) {
            for (std::size_t b = a + 1; b < hi; ++b) {
                const std::int64_t i = entries[a].second;
                const std::int64_t j = entries[b].second;
                if (has_neighbor[static_cast<std::size_t>(i)] &&
                    has_neighbor[static_cast<std::size_t>(j)])
                    continue;
                if (rng::pair_bernoulli(er_key, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j), params.alpha)) {
                    if (!has_neighbor[static_cast<std::size_t>(i)]) {
                        has_neighbor[static_cast<std::size_t>(i)] = true;
                        --remaining;
                    }
                    if (!has_neighbor[static_cast<std::size_t>(j)]) {
                        has_neighbor[static_cast<std::size_t>(j)] = true;
                        --remaining;
                    }
                }
            }
        }
        lo = hi;
    }
    return remaining;
}

/// Empirical summary of a batch of trials.
struct TrialSummary {
    std::int64_t trials;
    double mean_isolated;
    double var_isolated;      // unbiased sample variance
    double stderr_mean;
    double freq_no_isolated;  // fraction of trials with I = 0
    double stderr_freq;
    std::vector<std::int64_t> per_trial;  // filled only when requested
};

inline unsigned thread_cap() {
    if (const char* env = std::getenv("KEYGRAPH_LAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Seeded Monte Carlo over `trials` independent trials; trial t uses
/// stream_index = t. Aggregation is in exact integer arithmetic, so the
/// summary is independent of execution order and worker count.
inline TrialSummary run_trials(const ModelParams& params, std::int64_t trials,
                               std::uint64_t master_seed,
                               bool keep_per_trial = false,
                               unsigned max_threads = 0) {
    if (trials < 1)
        throw std::invalid_argument("run_trials: trials must be >= 1");
    unsigned workers = max_threads ? max_threads : thread_cap();
    if (static_cast<std::int64_t>(workers) > trials)
        workers = static_cast<unsigned>(trials);

    std::vector<std::uint64_t> sums(workers, 0), sumsqs(workers, 0), zeros(workers, 0);
    std::vector<std::int64_t> per_trial;
    if (keep_per_trial)
        per_trial.resize(static_cast<std::size_t>(trials));

    auto work = [&](unsigned w) {
        for (std::int64_t t = static_cast<std::int64_t>(w); t < trials;
             t += static_cast<std::int64_t>(workers)) {
            const std::int64_t c =
                count_isolated(params, RngSpec{master_seed, static_cast<std::uint64_t>(t)});
            sums[w] += static_cast<std::uint64_t>(c);
            sumsqs[w] += static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(c);
            if (c == 0)
                ++zeros[w];
            if (keep_per_trial)
                per_trial[static_cast<std::size_t>(t)] = c;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
        for (auto& th : pool)
            th.join();
    }

    std::uint64_t sum = 0, sumsq = 0, zero = 0;
    for (unsigned w = 0; w < workers; ++w) {
        sum += sums[w];
        sumsq += sumsqs[w];
        zero += zeros[w];
    }

    const double T = static_cast<double>(trials);
    const double mean = static_cast<double>(sum) / T;
    double var = 0.0;
    if (trials > 1)
        var = (static_cast<double>(sumsq) - T * mean * mean) / (T - 1.0);
    if (var < 0.0)
        var = 0.0;
    const double freq = static_cast<double>(zero) / T;
    return TrialSummary{trials,
                        mean,
                        var,
                        std::sqrt(var / T),
                        freq,
                        std::sqrt(freq * (1.0 - freq) / T),
                        std::move(per_trial)};
}

}  // namespace keygraph
