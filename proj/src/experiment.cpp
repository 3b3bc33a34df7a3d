#include "hfmdp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hfmdp/collect.hpp"
#include "hfmdp/generators.hpp"
#include "hfmdp/mdp_io.hpp"

namespace hfmdp {

Algo parse_algo(const std::string& name) {
    if (name == "oracle-only") return Algo::kOracleOnly;
    if (name == "pessimistic") return Algo::kPessimistic;
    if (name == "generative") return Algo::kGenerative;
    throw ConfigError("unknown algorithm '" + name +
                      "' (expected oracle-only, pessimistic or generative)");
}

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::kOracleOnly: return "oracle-only";
        case Algo::kPessimistic: return "pessimistic";
        case Algo::kGenerative: return "generative";
    }
    return "?";
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(tok.substr(0, dots));
            const int hi = std::stoi(tok.substr(dots + 2));
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else if (!tok.empty()) {
            out.push_back(std::stoi(tok));
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            const std::uint64_t lo = std::stoull(tok.substr(0, dots));
            const std::uint64_t hi = std::stoull(tok.substr(dots + 2));
            for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
        } else if (!tok.empty()) {
            out.push_back(std::stoull(tok));
        }
    }
    return out;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const size_t b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "mdp") cfg.mdp_spec = val;
            else if (key == "algo") cfg.algo = parse_algo(val);
            else if (key == "epsilon") cfg.epsilon = std::stod(val);
            else if (key == "delta") cfg.delta = std::stod(val);
            else if (key == "scale") cfg.scale = val;
            else if (key == "horizons") cfg.horizons = parse_int_list(val);
            else if (key == "seeds") cfg.seeds = parse_seed_list(val);
            else if (key == "out") cfg.out_path = val;
            else if (key == "budget_episodes") cfg.budget_episodes = std::stoull(val);
            else if (key == "budget_queries") cfg.budget_queries = std::stoull(val);
            else if (key == "reuse_phase_samples")
                cfg.reuse_phase_samples = (val == "1" || val == "true" || val == "yes");
            else
                throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for '" +
                              key + "': " + e.what());
        }
    }
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.mdp_spec.empty()) throw ConfigError("config needs an mdp source");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
        throw ConfigError("epsilon must lie in (0, 1]");
    if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
    if (cfg.horizons.empty()) throw ConfigError("config needs a nonempty horizon list");
    if (cfg.seeds.empty()) throw ConfigError("config needs a nonempty seed list");
    for (int h : cfg.horizons)
        if (h <= 0) throw ConfigError("horizons must be positive");
    if (cfg.scale != "theory" && cfg.scale != "desk") {
        try {
            if (std::stod(cfg.scale) <= 0.0) throw ConfigError("scale must be positive");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("scale must be 'theory', 'desk' or a positive number");
        }
    }
}

double resolve_scale(const std::string& scale, Algo algo, const FiniteMdp& m, double eps,
                     double delta, std::uint64_t budget_episodes,
                     std::uint64_t budget_queries) {
    if (scale == "theory") return 1.0;
    if (scale != "desk") return std::stod(scale);
    if (algo == Algo::kOracleOnly) return 1.0;
    if (algo == Algo::kGenerative) {
        const double per_pair = std::floor(static_cast<double>(budget_queries) /
                                           (static_cast<double>(m.n_pairs()) + 1.0));
        if (per_pair < 1.0)
            throw BudgetError("query budget below one draw per pair", per_pair);
        const double theory = generative_draws_theory(m.n_states, m.n_actions, m.horizon, eps);
        return std::max((per_pair - 1.0) / theory, 1e-300);
    }
    const double per_list = schedule_episode_cost(m, 1.0);
    const double lists = std::floor(static_cast<double>(budget_episodes) / per_list);
    if (lists < 2.0)
        throw BudgetError("episode budget below two schedule lists", 2.0 * per_list);
    const double n_collect = planning_lists_theory(m.n_states, m.n_actions, eps, delta);
    const double eps_est = planning_epsilon_est(m.n_states, m.n_actions, eps);
    const double n_estimate =
        std::ceil(300.0 * std::log(6.0 * m.n_states * m.n_actions / delta) / eps_est);
    return std::max((lists - 2.0) / (n_collect + n_estimate), 1e-300);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<ExperimentRow> rows;
    std::vector<int> horizons = cfg.horizons;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    for (int h : horizons) {
        for (std::uint64_t seed : seeds) {
            const FiniteMdp m = make_mdp(cfg.mdp_spec, h, seed);
            const double scale = resolve_scale(cfg.scale, cfg.algo, m, cfg.epsilon, cfg.delta,
                                               cfg.budget_episodes, cfg.budget_queries);
            PipelineOptions opt;
            opt.max_episodes = cfg.budget_episodes;
            opt.max_queries = cfg.budget_queries;
            opt.reuse_phase_samples = cfg.reuse_phase_samples;
            RngStream rng(seed, static_cast<std::uint64_t>(h));
            const PlanResult star = optimal_nonstationary(m);
            ExperimentRow row;
            row.horizon = h;
            row.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            switch (cfg.algo) {
                case Algo::kOracleOnly: {
                    row.suboptimality = star.value - finite_horizon_value(m, star.policy);
                    break;
                }
                case Algo::kGenerative: {
                    const GenerativeResult res =
                        run_generative_pipeline(m, cfg.epsilon, cfg.delta, scale, rng, opt);
                    row.batches = res.log.batches(h);
                    row.suboptimality = star.value - finite_horizon_value(m, res.policy);
                    break;
                }
                case Algo::kPessimistic: {
                    const PipelineResult res = run_pessimistic_pipeline(
                        m, cfg.epsilon, cfg.delta, scale, rng, opt, &m);
                    row.episodes = res.diagnostics.log.episodes;
                    row.suboptimality = star.value - finite_horizon_value(m, res.policy);
                    row.epsilon_hat = res.diagnostics.epsilon_hat;
                    break;
                }
            }
            const auto t1 = std::chrono::steady_clock::now();
            row.runtime_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
            rows.push_back(row);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        return a.horizon != b.horizon ? a.horizon < b.horizon : a.seed < b.seed;
    });
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        if (!out) throw ConfigError(cfg.out_path + ": cannot open output file");
        write_experiment_csv(rows, out);
    }
    return rows;
}

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
    out << "h,seed,episodes,batches,suboptimality,epsilon_hat,runtime_ms\n";
    for (const ExperimentRow& r : rows)
        out << r.horizon << "," << r.seed << "," << r.episodes << "," << r.batches << ","
            << fmt(r.suboptimality) << "," << fmt(r.epsilon_hat) << "," << fmt(r.runtime_ms)
            << "\n";
}

std::vector<ExperimentRow> read_experiment_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open table");
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("h,seed,episodes,batches,suboptimality", 0) != 0)
        throw ConfigError(path + ": missing experiment CSV header");
    std::vector<ExperimentRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() < 7)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        ExperimentRow r;
        r.horizon = std::stoi(f[0]);
        r.seed = std::stoull(f[1]);
        r.episodes = std::stoull(f[2]);
        r.batches = std::stoull(f[3]);
        r.suboptimality = std::stod(f[4]);
        r.epsilon_hat = std::stod(f[5]);
        r.runtime_ms = std::stod(f[6]);
        rows.push_back(r);
    }
    return rows;
}

double quantile_interpolated(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = p * (static_cast<double>(values.size()) - 1.0);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<ReportRow> aggregate_report(const std::vector<ExperimentRow>& rows) {
    std::vector<int> horizons;
    for (const ExperimentRow& r : rows) horizons.push_back(r.horizon);
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    std::vector<ReportRow> out;
    for (int h : horizons) {
        std::vector<double> sub, eps_count, batch_count;
        for (const ExperimentRow& r : rows) {
            if (r.horizon != h) continue;
            sub.push_back(r.suboptimality);
            eps_count.push_back(static_cast<double>(r.episodes));
            batch_count.push_back(static_cast<double>(r.batches));
        }
        ReportRow row;
        row.horizon = h;
        row.n = sub.size();
        row.median_suboptimality = quantile_interpolated(sub, 0.5);
        row.iqr_suboptimality =
            quantile_interpolated(sub, 0.75) - quantile_interpolated(sub, 0.25);
        row.median_episodes = quantile_interpolated(eps_count, 0.5);
        row.median_batches = quantile_interpolated(batch_count, 0.5);
        out.push_back(row);
    }
    return out;
}

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << "h,n,median_suboptimality,iqr_suboptimality,median_episodes,median_batches\n";
    for (const ReportRow& r : rows)
        out << r.horizon << "," << r.n << "," << fmt(r.median_suboptimality) << ","
            << fmt(r.iqr_suboptimality) << "," << fmt(r.median_episodes) << ","
            << fmt(r.median_batches) << "\n";
}

std::string report_text(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "horizon  n      median-subopt  iqr-subopt     episodes  batches\n";
    for (const ReportRow& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8d %-6llu %- 14.6g %- 14.6g %-9.6g %-9.6g\n",
                      r.horizon, static_cast<unsigned long long>(r.n),
                      r.median_suboptimality, r.iqr_suboptimality, r.median_episodes,
                      r.median_batches);
        os << buf;
    }
    return os.str();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_reports_csv(const std::vector<CheckReport>& reports, std::ostream& out) {
    out << "lemma_id,instance_id,hypothesis_ok,lhs,rhs,slack,pass\n";
    for (const CheckReport& r : reports)
        out << csv_escape(r.lemma_id) << "," << csv_escape(r.instance_id) << ","
            << (r.hypothesis_ok ? 1 : 0) << "," << fmt(r.lhs) << "," << fmt(r.rhs) << ","
            << fmt(r.slack) << "," << (r.pass ? 1 : 0) << "\n";
}

namespace {

Policy random_stationary(const FiniteMdp& m, RngStream& rng) {
    std::vector<int> map(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
        map[s] = static_cast<int>(rng.next_u64() % m.n_actions);
    return Policy::make_stationary(map);
}

std::vector<CheckReport> deterministic_corpus(std::uint64_t seed, const VerifyOptions& opt) {
    std::vector<CheckReport> out;
    RngStream rng(seed, 0xdece);
    out.push_back(check_log_facts(10000));

    for (int i = 0; i < 20; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 3);
        const MarkovChain c = random_chain(S, rng.next_u64(), i % 2 ? 0.4 : 0.0);
        const int len = S + 1 + static_cast<int>(rng.next_u64() % (S + 3));
        std::vector<int> seq(len);
        for (int& s : seq) s = static_cast<int>(rng.next_u64() % S);
        out.push_back(check_reduction(c, seq));
    }
    for (int i = 0; i < 50; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 3);
        const MarkovChain c = random_chain(S, rng.next_u64(), i % 2 ? 0.5 : 0.0);
        const int L = S + static_cast<int>(rng.next_u64() % (13 - S));
        out.push_back(check_mc_main(c, static_cast<int>(rng.next_u64() % S), L));
    }
    for (int i = 0; i < 30; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 3);
        const MarkovChain c = random_chain(S, rng.next_u64(), i % 3 ? 0.3 : 0.0);
        const int s = static_cast<int>(rng.next_u64() % S);
        out.push_back(check_sum_unexpanded(c, s));
        out.push_back(check_sum_expanded(c, s, static_cast<int>(rng.next_u64() % 4),
                                         1 + static_cast<int>(rng.next_u64() % 3)));
    }
    for (int i = 0; i < 20; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 2);
        const int H = S == 2 ? 16 : 31;
        const FiniteMdp m = random_dense(S, 2, H, rng.next_u64());
        const Policy pi = random_stationary(m, rng);
        out.push_back(check_discount_finite(m, pi));
        out.push_back(check_half_trajectory(m, pi));
    }
    for (int i = 0; i < 10; ++i) {
        const FiniteMdp m = random_dense(2, 2, 16, rng.next_u64());
        out.push_back(check_stationary_near_optimal(m));
    }
    for (int i = 0; i < 10; ++i) {
        const FiniteMdp m = random_dense(2, 2, 32, rng.next_u64());
        out.push_back(check_reaching_stationary(m, static_cast<int>(rng.next_u64() % 2),
                                                static_cast<int>(rng.next_u64() % 2)));
    }
    for (int i = 0; i < 5; ++i) {
        FiniteMdp m = random_dense(2, 2, 16, rng.next_u64());
        const int z_s = static_cast<int>(rng.next_u64() % 2);
        const int z_a = static_cast<int>(rng.next_u64() % 2);
        m.initial.assign(m.n_states, 0.0);
        m.initial[z_s] = 1.0;
        int f = 0;  // largest threshold some policy reaches with prob >= eps
        for (int cand = m.horizon; cand >= 1; --cand)
            if (max_visit_probability(m, z_s, z_a, cand) >= 0.25) {
                f = cand;
                break;
            }
        out.push_back(check_quantile_comparison(m, z_s, z_a, 0.25, f));
    }
    for (int i = 0; i < 200; ++i) {
        const MultAddInstance inst = sample_mult_add_instance(rng);
        out.push_back(check_mult_add(inst));
    }
    for (int i = 0; i < 10; ++i) {
        const FiniteMdp m = random_dense(2, 2, 6, rng.next_u64());
        const Policy pi = random_stationary(m, rng);
        const double eps = 0.3;
        out.push_back(
            check_perturbation_lower(m, sample_perturbation_lower(m, pi, eps, rng), pi, eps));
        out.push_back(
            check_perturbation_upper(m, sample_perturbation_upper(m, pi, eps, rng), pi, eps));
        out.push_back(check_perturbation_generative(
            m, sample_perturbation_generative(m, eps, rng), pi, eps));
    }
    for (int i = 0; i < 5; ++i) {
        const FiniteMdp m = random_dense(2, 2, 8, rng.next_u64());
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                out.push_back(check_reward_structure(m, s, a, 1e-6));
    }
    {
        const FiniteMdp m = random_dense(2, 2, 8, rng.next_u64());
        out.push_back(check_stationary_quantile(m, 0.25, std::min<std::uint64_t>(opt.mc_lists, 20000),
                                                rng.substream(77)));
    }
    return out;
}

std::vector<CheckReport> concentration_corpus(std::uint64_t seed, const VerifyOptions& opt) {
    std::vector<CheckReport> out;
    const FiniteMdp m = coinflip(4);
    const Policy pi = Policy::make_stationary({0, 1});
    int which = 0;
    for (double d : {0.1, 0.25}) {
        RngStream r1(seed, 100 + which);
        RngStream r2(seed, 200 + which);
        RngStream r3(seed, 300 + which);
        out.push_back(check_visit_upperbound(m, pi, 0, 0, 1, d, opt.mc_trials, r1));
        out.push_back(check_martingale_concentration(m, pi, 0, 0, 1, d, opt.mc_trials, r2));
        out.push_back(
            check_prob_approx_error(m, pi, 0, 0, 1, d, 4096, opt.mc_trials, r3));
        ++which;
    }
    return out;
}

}  // namespace

std::vector<CheckReport> run_verify_suite(const std::string& corpus, std::uint64_t seed,
                                          const VerifyOptions& opt) {
    if (corpus == "lemmas-deterministic") return deterministic_corpus(seed, opt);
    if (corpus == "concentration") return concentration_corpus(seed, opt);
    if (corpus == "empty") return {};
    throw ConfigError("unknown corpus '" + corpus +
                      "' (expected lemmas-deterministic, concentration or empty)");
}

}  // namespace hfmdp
