// keygraph: analytics and seeded Monte Carlo for the random key graph
// intersected with an Erdos-Renyi overlay.
//
// Exit codes: 0 success, 1 invariant failure, 2 invalid configuration,
// 3 infeasible schedule.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "keygraph/harness.hpp"

namespace {

using keygraph::harness::ExperimentConfig;
using keygraph::harness::Mode;

int dispatch(const ExperimentConfig& cfg) {
    namespace h = keygraph::harness;

    std::ofstream file_out;
    const bool to_file = !cfg.output_path.empty();
    if (to_file) {
        file_out.open(cfg.output_path);
        if (!file_out) {
            std::cerr << "error: cannot open output path " << cfg.output_path << "\n";
            return 2;
        }
    }

    switch (cfg.mode) {
        case Mode::eval:
            return h::run_eval(cfg, to_file ? file_out : std::cout);
        case Mode::simulate: {
            // csv output path receives the per-trial dump; JSON goes to stdout.
            if (to_file && cfg.output_format == "csv")
                return h::run_simulate(cfg, std::cout, &file_out);
            return h::run_simulate(cfg, to_file ? file_out : std::cout);
        }
        case Mode::sweep:
            return h::run_sweep(cfg, to_file ? file_out : std::cout);
        case Mode::oracle:
            return h::run_oracle(cfg, to_file ? file_out : std::cout);
        case Mode::identities:
            return h::run_identities_mode(cfg, to_file ? file_out : std::cout);
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random key graph / ER intersection: moment analytics, "
                 "bound chain, and seeded Monte Carlo"};

    std::string config_path, mode_str, gamma_kind, out_path, format;
    std::optional<std::int64_t> n, K, P, trials, fix_K, grid_count;
    std::optional<double> alpha, c, gamma_value;
    std::optional<std::uint64_t> seed;
    std::vector<std::int64_t> n_values;
    std::optional<unsigned> threads;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--mode", mode_str, "eval | simulate | sweep | oracle | identities");
    app.add_option("--n", n, "node count");
    app.add_option("--K", K, "key-ring size");
    app.add_option("--P", P, "key-pool size");
    app.add_option("--alpha", alpha, "ER link probability");
    app.add_option("--c", c, "strong scaling constant (gamma_n = (c-1) log n)");
    app.add_option("--gamma-kind", gamma_kind, "constant | c_log | log_log");
    app.add_option("--gamma-value", gamma_value, "deviation parameter");
    app.add_option("--n-values", n_values, "sweep node counts")->delimiter(',');
    app.add_option("--fix-K", fix_K, "fixed K for schedule dimensioning");
    app.add_option("--trials", trials, "Monte Carlo trials");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--grid-count", grid_count, "identities grid size");
    app.add_option("--threads", threads, "worker cap (0 = auto)");
    app.add_option("--out", out_path, "output file path");
    app.add_option("--format", format, "csv | json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read config " << config_path << "\n";
                return 2;
            }
            cfg = keygraph::harness::config_from_json(nlohmann::json::parse(in));
        }
        if (!mode_str.empty()) cfg.mode = keygraph::harness::parse_mode(mode_str);
        if (n) cfg.n = n;
        if (K) cfg.K = K;
        if (P) cfg.P = P;
        if (alpha) cfg.alpha = alpha;
        if (c) cfg.c = c;
        if (!gamma_kind.empty()) cfg.gamma_kind = gamma_kind;
        if (gamma_value) cfg.gamma_value = gamma_value;
        if (!n_values.empty()) cfg.n_values = n_values;
        if (fix_K) cfg.fix_K = *fix_K;
        if (trials) cfg.trials = *trials;
        if (seed) cfg.seed = *seed;
        if (grid_count) cfg.grid_count = *grid_count;
        if (threads) cfg.threads = *threads;
        if (!out_path.empty()) cfg.output_path = out_path;
        if (!format.empty()) cfg.output_format = format;

        return dispatch(cfg);
    } catch (const keygraph::InfeasibleTargetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
