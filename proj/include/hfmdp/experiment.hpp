#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfmdp/planner.hpp"
#include "hfmdp/types.hpp"
#include "hfmdp/verify.hpp"

// Experiment runner: configs, the (horizon x seed) sweep with exact
// suboptimality evaluation, verification corpora, and CSV aggregation.

namespace hfmdp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algo { kOracleOnly, kPessimistic, kGenerative };

Algo parse_algo(const std::string& name);
std::string algo_name(Algo a);

struct ExperimentConfig {
    std::string mdp_spec;  // generator spec or file path
    Algo algo = Algo::kOracleOnly;
    double epsilon = 0.1;
    double delta = 0.1;
    std::string scale = "desk";  // "theory", "desk", or a positive number
    std::vector<int> horizons;
    std::vector<std::uint64_t> seeds;
    std::string out_path;
    std::uint64_t budget_episodes = 1000000;
    std::uint64_t budget_queries = 10000000;
    bool reuse_phase_samples = false;
};

/// key = value text config; '#' comments. Keys: mdp, algo, epsilon, delta,
/// scale, horizons, seeds, out, budget_episodes, budget_queries,
/// reuse_phase_samples. Seed/horizon lists accept commas and a..b ranges.
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

std::vector<int> parse_int_list(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Resolves "theory"/"desk"/number into a numeric scale for one (mdp, algo)
/// cell. "desk" picks the largest scale whose cost fits the budget.
double resolve_scale(const std::string& scale, Algo algo, const FiniteMdp& m, double eps,
                     double delta, std::uint64_t budget_episodes,
                     std::uint64_t budget_queries);

struct ExperimentRow {
    int horizon = 0;
    std::uint64_t seed = 0;
    std::uint64_t episodes = 0;
    std::uint64_t batches = 0;
    double suboptimality = 0.0;
    double epsilon_hat = 0.0;  // certified accuracy gap; 0 for exact planners
    double runtime_ms = 0.0;
};

/// Runs every (horizon, seed) cell, evaluates the returned policy exactly
/// against the true optimum, writes CSV to cfg.out_path (when set) and
/// returns the rows sorted by (horizon, seed).
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out);
std::vector<ExperimentRow> read_experiment_csv(const std::string& path);

struct ReportRow {
    int horizon = 0;
    std::uint64_t n = 0;
    double median_suboptimality = 0.0;
    double iqr_suboptimality = 0.0;
    double median_episodes = 0.0;
    double median_batches = 0.0;
};

/// Per-horizon aggregates (median and interquartile range via linear
/// interpolation between order statistics).
std::vector<ReportRow> aggregate_report(const std::vector<ExperimentRow>& rows);
void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);
std::string report_text(const std::vector<ReportRow>& rows);

double quantile_interpolated(std::vector<double> values, double p);

// --- verification corpora ----------------------------------------------------

struct VerifyOptions {
    std::uint64_t mc_trials = 100000;  // per Monte Carlo checker
    std::uint64_t mc_lists = 20000;    // schedule simulations for quantile oracles
};

/// Named corpora: "lemmas-deterministic", "concentration", "empty".
/// Throws ConfigError for unknown names.
std::vector<CheckReport> run_verify_suite(const std::string& corpus, std::uint64_t seed,
                                          const VerifyOptions& opt = {});

void write_reports_csv(const std::vector<CheckReport>& reports, std::ostream& out);

/// RFC-style CSV escaping (quotes fields containing commas/quotes/newlines).
std::string csv_escape(const std::string& field);

}  // namespace hfmdp
