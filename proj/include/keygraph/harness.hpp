#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "keygraph/graphgen.hpp"
#include "keygraph/moments.hpp"
#include "keygraph/oracle.hpp"
#include "keygraph/scaling.hpp"

namespace keygraph::harness {

enum class Mode { eval, simulate, sweep, oracle, identities };

inline Mode parse_mode(const std::string& s) {
    if (s == "eval") return Mode::eval;
    if (s == "simulate") return Mode::simulate;
    if (s == "sweep") return Mode::sweep;
    if (s == "oracle") return Mode::oracle;
    if (s == "identities") return Mode::identities;
    throw std::invalid_argument("unknown mode: " + s);
}

/// 17 significant digits; enough for byte-exact round trips.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double wilson_half_width(double freq, std::int64_t trials,
                                double z = 1.959963984540054) {
    const double t = static_cast<double>(trials);
    const double z2 = z * z;
    return z * std::sqrt(freq * (1.0 - freq) / t + z2 / (4.0 * t * t)) /
           (1.0 + z2 / t);
}

inline std::pair<double, double> wilson_interval(double freq, std::int64_t trials,
                                                 double z = 1.959963984540054) {
    const double t = static_cast<double>(trials);
    const double z2 = z * z;
    const double center = (freq + z2 / (2.0 * t)) / (1.0 + z2 / t);
    const double half = wilson_half_width(freq, trials, z);
    // at the endpoints center and half coincide analytically
    const double lo = (freq == 0.0) ? 0.0 : std::max(0.0, center - half);
    const double hi = (freq == 1.0) ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

/// Minimal JSON writer with caller-controlled key order and %.17g floats.
class JsonWriter {
  public:
    JsonWriter& begin() { return raw("{"); }
    JsonWriter& end() { return raw("}"); }
    JsonWriter& key(const std::string& k) {
        sep();
        out_ << '"' << k << "\":";
        fresh_ = true;
        return *this;
    }
    JsonWriter& value(double v) {
        if (std::isnan(v) || std::isinf(v))
            return raw("null");
        return raw(fmt17(v));
    }
    JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(const std::string& v) { return raw("\"" + v + "\""); }
    JsonWriter& raw(const std::string& s) {
        out_ << s;
        fresh_ = s == "{" || s == "[";
        return *this;
    }
    std::string str() const { return out_.str(); }

  private:
    void sep() {
        if (!fresh_)
            out_ << ",";
    }
    std::ostringstream out_;
    bool fresh_ = true;
};

inline void write_params(JsonWriter& w, const ModelParams& p) {
    w.key("params").raw("{");
    w.key("n").value(p.n);
    w.key("K").value(p.theta.K);
    w.key("P").value(p.theta.P);
    w.key("alpha").value(p.alpha);
    w.raw("}");
}

inline std::string report_to_json(const MomentReport& rep) {
    JsonWriter w;
    w.begin();
    write_params(w, rep.params);
    w.key("q").value(rep.q);
    w.key("p").value(rep.p);
    w.key("first_moment").value(rep.first_moment);
    w.key("cross_moment").value(rep.cross_moment);
    w.key("second_moment").value(rep.second_moment);
    w.key("ratio").value(rep.ratio);
    w.key("lower_bound_P0").value(rep.lower_bound_P0);
    w.key("upper_bound_P0").value(rep.upper_bound_P0);
    w.key("r_n").value(rep.r_n);
    w.key("r_star").value(rep.r_star);
    w.key("r_circ").value(rep.r_circ);
    w.end();
    return w.str();
}

inline std::string exact_result_to_json(const ExactResult& res,
                                        const ComparisonRecord& cmp) {
    JsonWriter w;
    w.begin();
    write_params(w, res.params);
    w.key("pmf_I").raw("{");
    bool first = true;
    std::string body;
    for (const auto& [k, pk] : res.pmf) {
        if (!first)
            body += ",";
        body += "\"" + std::to_string(k) + "\":" + fmt17(pk);
        first = false;
    }
    w.raw(body);
    w.raw("}");
    w.key("p_no_isolated").value(res.p_no_isolated);
    w.key("e_I").value(res.e_isolated);
    w.key("e_I2").value(res.e_isolated_sq);
    w.key("e_I_formula").value(cmp.e_isolated_formula);
    w.key("e_I2_formula").value(cmp.e_isolated_sq_formula);
    w.key("lower_bound_P0").value(cmp.lower_bound_P0);
    w.key("upper_bound_P0").value(cmp.upper_bound_P0);
    w.key("all_pass").raw(cmp.all_pass() ? "true" : "false");
    w.end();
    return w.str();
}

/// Experiment configuration; JSON file fields share these names, CLI flags
/// override them.
struct ExperimentConfig {
    Mode mode = Mode::eval;
    std::optional<std::int64_t> n, K, P;
    std::optional<double> alpha;
    std::vector<std::int64_t> n_values;
    std::optional<double> c;          // strong schedule constant
    std::string gamma_kind = "c_log"; // constant | c_log | log_log
    std::optional<double> gamma_value;
    std::int64_t fix_K = 4;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string output_format = "json";  // csv | json
    std::int64_t grid_count = 10000;
    unsigned threads = 0;  // 0 = KEYGRAPH_LAB_THREADS or hardware
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("n")) cfg.n = j.at("n").get<std::int64_t>();
    if (j.contains("K")) cfg.K = j.at("K").get<std::int64_t>();
    if (j.contains("P")) cfg.P = j.at("P").get<std::int64_t>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("n_values"))
        cfg.n_values = j.at("n_values").get<std::vector<std::int64_t>>();
    if (j.contains("c")) cfg.c = j.at("c").get<double>();
    if (j.contains("gamma_kind")) cfg.gamma_kind = j.at("gamma_kind").get<std::string>();
    if (j.contains("gamma_value")) cfg.gamma_value = j.at("gamma_value").get<double>();
    if (j.contains("fix_K")) cfg.fix_K = j.at("fix_K").get<std::int64_t>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::int64_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.output_path = j.at("out").get<std::string>();
    if (j.contains("format")) cfg.output_format = j.at("format").get<std::string>();
    if (j.contains("grid_count")) cfg.grid_count = j.at("grid_count").get<std::int64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    return cfg;
}

inline ModelParams model_from_config(const ExperimentConfig& cfg) {
    if (!cfg.n || !cfg.K || !cfg.P || !cfg.alpha)
        throw std::invalid_argument("model requires n, K, P, alpha");
    return ModelParams(*cfg.n, Theta(*cfg.K, *cfg.P), *cfg.alpha);
}

inline DeviationSpec deviation_from_config(const ExperimentConfig& cfg) {
    if (cfg.gamma_kind == "c_log") {
        if (!cfg.c)
            throw std::invalid_argument("c_log deviation requires c");
        return DeviationSpec::c_log(*cfg.c);
    }
    if (cfg.gamma_kind == "constant")
        return DeviationSpec::constant(cfg.gamma_value.value_or(0.0));
    if (cfg.gamma_kind == "log_log")
        return DeviationSpec::log_log(cfg.gamma_value.value_or(1.0) >= 0.0 ? 1 : -1);
    throw std::invalid_argument("unknown gamma_kind: " + cfg.gamma_kind);
}

inline int run_eval(const ExperimentConfig& cfg, std::ostream& out) {
    const MomentReport rep = compute_report(model_from_config(cfg));
    out << report_to_json(rep) << "\n";
    return 0;
}

inline int run_simulate(const ExperimentConfig& cfg, std::ostream& out,
                        std::ostream* per_trial_csv = nullptr) {
    if (cfg.trials < 1)
        throw std::invalid_argument("simulate requires trials >= 1");
    const ModelParams params = model_from_config(cfg);
    const bool keep = per_trial_csv != nullptr;
    const TrialSummary sum =
        run_trials(params, cfg.trials, cfg.seed, keep, cfg.threads);
    const auto [wlo, whi] = wilson_interval(sum.freq_no_isolated, sum.trials);
    const MomentReport rep = compute_report(params);

    JsonWriter w;
    w.begin();
    write_params(w, params);
    w.key("trials").value(sum.trials);
    w.key("seed").value(cfg.seed);
    w.key("mc_mean_I").value(sum.mean_isolated);
    w.key("mc_var_I").value(sum.var_isolated);
    w.key("mc_stderr_I").value(sum.stderr_mean);
    w.key("mc_freq_I0").value(sum.freq_no_isolated);
    w.key("mc_stderr_I0").value(sum.stderr_freq);
    w.key("wilson_low").value(wlo);
    w.key("wilson_high").value(whi);
    w.key("analytic").raw(report_to_json(rep));
    w.end();
    out << w.str() << "\n";

    if (per_trial_csv) {
        *per_trial_csv << "trial,isolated_count\n";
        for (std::size_t t = 0; t < sum.per_trial.size(); ++t)
            *per_trial_csv << t << "," << sum.per_trial[t] << "\n";
    }
    return 0;
}

inline const char* kSweepHeader =
    "n,K,P,alpha,gamma_achieved,c_equiv,e_I_analytic,e_I2_analytic,"
    "lower_bound_P0,upper_bound_P0,mc_freq_I0,mc_mean_I,mc_stderr_I0,trials,seed";

/// One row per schedule entry, ascending n; mc columns empty when trials = 0.
inline int run_sweep(const ExperimentConfig& cfg, std::ostream& out) {
    if (cfg.n_values.empty())
        throw std::invalid_argument("sweep requires n_values");
    if (!cfg.alpha)
        throw std::invalid_argument("sweep requires alpha");
    const double alpha = *cfg.alpha;
    std::vector<std::int64_t> ns = cfg.n_values;
    std::sort(ns.begin(), ns.end());
    const ScalingSchedule schedule =
        build_schedule(ns, [alpha](std::int64_t) { return alpha; },
                       deviation_from_config(cfg), DimensionRule::fix_K(cfg.fix_K));

    out << kSweepHeader << "\n";
    std::size_t row = 0;
    for (const auto& e : schedule.entries) {
        const ModelParams params(e.n, e.theta, e.alpha);
        const MomentReport rep = compute_report(params);
        out << e.n << "," << e.theta.K << "," << e.theta.P << ","
            << fmt17(e.alpha) << "," << fmt17(e.gamma_achieved) << ","
            << fmt17(e.c_equiv) << "," << fmt17(rep.first_moment) << ","
            << fmt17(rep.second_moment) << "," << fmt17(rep.lower_bound_P0) << ","
            << fmt17(rep.upper_bound_P0) << ",";
        if (cfg.trials > 0) {
            const std::uint64_t row_seed =
                rng::combine(cfg.seed, static_cast<std::uint64_t>(row));
            const TrialSummary sum =
                run_trials(params, cfg.trials, row_seed, false, cfg.threads);
            out << fmt17(sum.freq_no_isolated) << "," << fmt17(sum.mean_isolated)
                << "," << fmt17(sum.stderr_freq);
        } else {
            out << ",,";
        }
        out << "," << cfg.trials << "," << cfg.seed << "\n";
        ++row;
    }
    return 0;
}

inline int run_oracle(const ExperimentConfig& cfg, std::ostream& out) {
    const ModelParams params = model_from_config(cfg);
    const ExactResult res = enumerate_exact(params);
    const ComparisonRecord cmp = exact_vs_formula(params);
    out << exact_result_to_json(res, cmp) << "\n";
    return cmp.all_pass() ? 0 : 1;
}

struct IdentityOptions {
    std::int64_t count = 10000;
    std::uint64_t seed = 0x1d37171e5ULL;
    // Fault-injection hook for testing the suite itself; default is the
    // library's q.
    std::function<double(const Theta&)> q_fn;
};

struct IdentityReport {
    std::int64_t checks = 0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Randomized grid over (n, K, P, alpha) exercising the bound-chain
/// identities and the combinatorial kernel properties.
inline IdentityReport run_identities(const IdentityOptions& opts) {
    IdentityReport report;
    auto fail = [&](const std::string& msg) { report.failures.push_back(msg); };
    std::function<double(const Theta&)> qf = opts.q_fn;
    if (!qf)
        qf = [](const Theta& t) { return q(t); };

    rng::SplitMix64 gen(rng::mix64(opts.seed));
    for (std::int64_t it = 0; it < opts.count; ++it) {
        const std::int64_t K = 1 + static_cast<std::int64_t>(gen.next_below(8));
        const std::int64_t P =
            2 * K + static_cast<std::int64_t>(gen.next_below(
                        static_cast<std::uint64_t>(1000000 - 2 * K + 1)));
        const std::int64_t n = 2 + static_cast<std::int64_t>(gen.next_below(9999));
        const double alpha = gen.next_unit();
        const Theta theta(K, P);
        const ModelParams params(n, theta, alpha);
        const std::string tag = "(n=" + std::to_string(n) + ",K=" + std::to_string(K) +
                                ",P=" + std::to_string(P) + ",alpha=" + fmt17(alpha) + ")";

        const double qv = qf(theta);
        const double p = p_edge(theta, alpha);

        // (1-p)^2 - alpha^2 q^2 = (1-alpha)(1-alpha+2 alpha q)
        const double lhs = (1.0 - p) * (1.0 - p) - alpha * alpha * qv * qv;
        const double rhs = (1.0 - alpha) * (1.0 - alpha + 2.0 * alpha * qv);
        ++report.checks;
        if (std::abs(lhs - rhs) > 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}))
            fail("factorization identity (1-p)^2 - a^2 q^2 " + tag);

        // q = v(theta, K) exactly
        ++report.checks;
        if (qf(theta) != v(theta, theta.K))
            fail("q = v(theta,K) exact equality " + tag);

        // v(theta, 2K) < q^2 whenever 0 < q < 1, compared in log space
        ++report.checks;
        if (qv > 0.0 && qv < 1.0 && !(log_v(theta, 2 * K) < 2.0 * log_q(theta)))
            fail("v(theta,2K) < q^2 " + tag);

        // r_n <= q + (1-q) r_star
        const RChain rc = r_chain(params);
        ++report.checks;
        if (!(rc.r_n <= rc.bound_rhs + 1e-12 * std::max(1.0, rc.bound_rhs)))
            fail("r_n <= q + (1-q) r_star " + tag);

        // r_star <= r_circ under the gamma_n <= 0 premise (n p <= log n)
        if (static_cast<double>(n) * p <= std::log(static_cast<double>(n))) {
            ++report.checks;
            if (!(rc.r_star <= rc.r_circ * (1.0 + 1e-12)))
                fail("r_star <= r_circ under gamma<=0 " + tag);
        }

        // overlap pmf: total mass 1, mass at 0 equals q
        if (it % 100 == 0) {
            const auto pmf = overlap_pmf(theta);
            double total = 0.0;
            double mass0 = 0.0;
            for (const auto& [m, pm] : pmf) {
                total += pm;
                if (m == 0)
                    mass0 = pm;
            }
            ++report.checks;
            if (std::abs(total - 1.0) > 1e-12)
                fail("overlap pmf sums to 1 " + tag);
            ++report.checks;
            if (std::abs(mass0 - qv) > 1e-12)
                fail("overlap pmf mass at 0 equals q " + tag);
        }
    }

    // Psi asymptotics at fixed small arguments.
    for (double x : {1e-3, 1e-4, 1e-5, 1e-6}) {
        ++report.checks;
        if (std::abs(psi(x) / (x * x) - 0.5) > x)
            fail("Psi(x)/x^2 near 1/2 at x=" + fmt17(x));
    }
    return report;
}

inline int run_identities_mode(const ExperimentConfig& cfg, std::ostream& out) {
    IdentityOptions opts;
    opts.count = cfg.grid_count;
    if (cfg.seed)
        opts.seed = cfg.seed;
    const IdentityReport report = run_identities(opts);
    if (report.checks == 0)
        out << "warning: 0 checks\n";
    for (const auto& f : report.failures)
        out << "FAIL " << f << "\n";
    out << (report.ok() ? "OK" : "FAILED") << " " << report.checks << " checks, "
        << report.failures.size() << " failures\n";
    return report.ok() ? 0 : 1;
}

}  // namespace keygraph::harness
