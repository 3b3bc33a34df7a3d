// Experiment CLI: run learners over (horizon x seed) grids, execute
// verification corpora, aggregate result tables, and dump collection-schedule
// datasets.
//
// Exit codes: 0 success, 2 config error, 3 budget error, 4 verification
// failures present.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "hfmdp/collect.hpp"
#include "hfmdp/experiment.hpp"
#include "hfmdp/generators.hpp"
#include "hfmdp/mdp_io.hpp"

using namespace hfmdp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerifyFailures = 4;

int cmd_run(const std::string& config_path, ExperimentConfig overrides,
            const std::vector<std::string>& given) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    auto has = [&](const std::string& flag) {
        return std::find(given.begin(), given.end(), flag) != given.end();
    };
    if (has("--mdp")) cfg.mdp_spec = overrides.mdp_spec;
    if (has("--algo")) cfg.algo = overrides.algo;
    if (has("--epsilon")) cfg.epsilon = overrides.epsilon;
    if (has("--delta")) cfg.delta = overrides.delta;
    if (has("--scale")) cfg.scale = overrides.scale;
    if (has("--horizons")) cfg.horizons = overrides.horizons;
    if (has("--seed")) cfg.seeds = overrides.seeds;
    if (has("--out")) cfg.out_path = overrides.out_path;
    if (has("--budget-episodes")) cfg.budget_episodes = overrides.budget_episodes;
    if (has("--budget-queries")) cfg.budget_queries = overrides.budget_queries;
    if (has("--reuse-phase-samples")) cfg.reuse_phase_samples = true;
    const auto rows = run_experiment(cfg);
    if (cfg.out_path.empty()) write_experiment_csv(rows, std::cout);
    else std::cerr << "wrote " << rows.size() << " rows to " << cfg.out_path << "\n";
    return 0;
}

int cmd_verify(const std::string& corpus, std::uint64_t seed, const std::string& out_path,
               std::uint64_t trials) {
    VerifyOptions opt;
    if (trials > 0) opt.mc_trials = trials;
    const auto reports = run_verify_suite(corpus, seed, opt);
    if (out_path.empty()) {
        write_reports_csv(reports, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError(out_path + ": cannot open output file");
        write_reports_csv(reports, out);
    }
    for (const CheckReport& r : reports)
        if (r.hypothesis_ok && !r.pass) return kExitVerifyFailures;
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
    const auto rows = read_experiment_csv(in_path);
    const auto agg = aggregate_report(rows);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError(out_path + ": cannot open output file");
        write_report_csv(agg, out);
    }
    std::cout << report_text(agg);
    return 0;
}

int cmd_dump_dataset(const std::string& mdp_spec, int horizon, std::uint64_t n_lists,
                     std::uint64_t seed, double scale, std::uint64_t budget,
                     const std::string& out_path) {
    const FiniteMdp m = make_mdp(mdp_spec, horizon, seed);
    CollectOptions opt;
    opt.max_episodes = budget;
    TrajectoryDataset d = collect_samples(m, n_lists, RngStream(seed, 2), nullptr, opt);
    d.scale = scale;
    save_dataset(d, out_path);
    std::cerr << "wrote " << d.lists.size() << " lists of " << d.list_length()
              << " tuples to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular-MDP experiment runner and verification suite"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a learner over a (horizon x seed) grid");
    std::string config_path, mdp_spec, algo_str = "oracle-only", scale = "desk", out_path;
    std::string horizons_str, seeds_str;
    double epsilon = 0.1, delta = 0.1;
    std::uint64_t budget_episodes = 1000000, budget_queries = 10000000;
    bool reuse = false;
    run->add_option("--config", config_path, "Config file (key = value lines)");
    run->add_option("--mdp", mdp_spec, "MDP file path or generator spec");
    run->add_option("--algo", algo_str, "oracle-only | pessimistic | generative");
    run->add_option("--epsilon", epsilon, "Target accuracy");
    run->add_option("--delta", delta, "Failure probability");
    run->add_option("--scale", scale, "theory | desk | positive number");
    run->add_option("--horizons", horizons_str, "Comma list / a..b ranges");
    run->add_option("--seed", seeds_str, "Comma list / a..b ranges");
    run->add_option("--out", out_path, "Output CSV path (stdout when omitted)");
    run->add_option("--budget-episodes", budget_episodes, "Max episodes per cell");
    run->add_option("--budget-queries", budget_queries, "Max generative queries per cell");
    run->add_flag("--reuse-phase-samples", reuse,
                  "Off-spec: reuse quantile-phase episodes for model building");

    // verify
    auto* verify = app.add_subcommand("verify", "Run a verification corpus");
    std::string corpus = "lemmas-deterministic", verify_out;
    std::uint64_t verify_seed = 1, verify_trials = 0;
    verify->add_option("--corpus", corpus, "lemmas-deterministic | concentration | empty");
    verify->add_option("--seed", verify_seed, "Corpus seed");
    verify->add_option("--out", verify_out, "Output CSV path (stdout when omitted)");
    verify->add_option("--trials", verify_trials, "Monte Carlo trials per checker");

    // report
    auto* report = app.add_subcommand("report", "Aggregate an experiment table");
    std::string report_in, report_out;
    report->add_option("--in", report_in, "Experiment CSV")->required();
    report->add_option("--out", report_out, "Aggregate CSV path");

    // dump-dataset
    auto* dump = app.add_subcommand("dump-dataset", "Collect and save a schedule dataset");
    std::string dump_mdp, dump_out;
    int dump_h = 8;
    std::uint64_t dump_n = 1, dump_seed = 1, dump_budget = 1000000;
    double dump_scale = 1.0;
    dump->add_option("--mdp", dump_mdp, "MDP file path or generator spec")->required();
    dump->add_option("--horizons", dump_h, "Horizon");
    dump->add_option("-n,--lists", dump_n, "Number of lists");
    dump->add_option("--seed", dump_seed, "Seed");
    dump->add_option("--scale", dump_scale, "Scale recorded in the header");
    dump->add_option("--budget-episodes", dump_budget, "Episode budget");
    dump->add_option("--out", dump_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            ExperimentConfig overrides;
            overrides.mdp_spec = mdp_spec;
            overrides.algo = parse_algo(algo_str);
            overrides.epsilon = epsilon;
            overrides.delta = delta;
            overrides.scale = scale;
            if (!horizons_str.empty()) overrides.horizons = parse_int_list(horizons_str);
            if (!seeds_str.empty()) overrides.seeds = parse_seed_list(seeds_str);
            overrides.out_path = out_path;
            overrides.budget_episodes = budget_episodes;
            overrides.budget_queries = budget_queries;
            overrides.reuse_phase_samples = reuse;
            std::vector<std::string> given;
            for (const auto* o : run->get_options())
                if (o->count() > 0) given.push_back(o->get_name());
            return cmd_run(config_path, overrides, given);
        }
        if (verify->parsed()) return cmd_verify(corpus, verify_seed, verify_out, verify_trials);
        if (report->parsed()) return cmd_report(report_in, report_out);
        if (dump->parsed())
            return cmd_dump_dataset(dump_mdp, dump_h, dump_n, dump_seed, dump_scale,
                                    dump_budget, dump_out);
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
