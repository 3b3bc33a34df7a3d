#include "hfmdp/collect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hfmdp {

QuantileTable QuantileTable::unbounded(int n_states, int n_actions) {
    QuantileTable t;
    t.n_states = n_states;
    t.n_actions = n_actions;
    t.m.assign(static_cast<size_t>(n_states) * n_actions, kUnbounded);
    return t;
}

std::vector<SampleTuple> switched_rollout(const FiniteMdp& m, int target_s, int target_a,
                                          const Policy& pi1, const Policy& pi2,
                                          RngStream& rng) {
    std::vector<SampleTuple> out;
    out.reserve(m.horizon);
    int s = rng.sample_discrete(m.initial);
    bool seen = false;  // target occurred at a strictly earlier step
    for (int h = 0; h < m.horizon; ++h) {
        const int a = seen ? pi2.action(0, s) : pi1.action(0, s);
        const DiscreteReward& rd = m.reward_dist(s, a);
        const double r = rd.values[rng.sample_discrete(rd.probs)];
        const int s2 = rng.sample_discrete(m.row(s, a));
        out.push_back(SampleTuple{s, a, r, s2});
        if (s == target_s && a == target_a) seen = true;
        s = s2;
    }
    return out;
}

double schedule_episode_cost(const FiniteMdp& m, double n_lists) {
    const double pair_count = stationary_policy_count(m.n_states, m.n_actions);
    return n_lists * m.n_states * m.n_actions * pair_count * pair_count;
}

namespace {

// Runs the full schedule, feeding each cell's episode to `sink(sa, tuples)`.
template <typename Sink>
void run_schedule(const FiniteMdp& m, std::uint64_t n_lists, RngStream& rng,
                  InteractionLog* log, const CollectOptions& opt, Sink&& sink) {
    const double episodes = schedule_episode_cost(m, static_cast<double>(n_lists));
    if (episodes > static_cast<double>(opt.max_episodes))
        throw BudgetError("collection schedule needs " + std::to_string(episodes) +
                              " episodes, budget is " + std::to_string(opt.max_episodes),
                          episodes);
    const std::vector<Policy> policies =
        enumerate_stationary_policies(m, ~std::uint64_t{0});
    const std::uint64_t n_pol = policies.size();
    std::uint64_t cell = 0;
    for (std::uint64_t i = 0; i < n_lists; ++i) {
        sink.begin_list(i);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                for (std::uint64_t p1 = 0; p1 < n_pol; ++p1) {
                    for (std::uint64_t p2 = 0; p2 < n_pol; ++p2) {
                        RngStream cell_rng = rng.substream(cell++);
                        sink.episode(switched_rollout(m, s, a, policies[p1], policies[p2],
                                                      cell_rng));
                        if (log) ++log->episodes;
                    }
                }
            }
        }
    }
}

struct StoreSink {
    TrajectoryDataset* d;
    void begin_list(std::uint64_t) { d->lists.emplace_back(); }
    void episode(std::vector<SampleTuple>&& tuples) {
        auto& list = d->lists.back();
        list.insert(list.end(), tuples.begin(), tuples.end());
    }
};

struct CountSink {
    int n_actions;
    size_t n_pairs;
    std::vector<std::vector<std::uint64_t>>* counts;
    void begin_list(std::uint64_t) { counts->emplace_back(n_pairs, 0); }
    void episode(std::vector<SampleTuple>&& tuples) {
        auto& row = counts->back();
        for (const SampleTuple& t : tuples) ++row[t.s * n_actions + t.a];
    }
};

}  // namespace

TrajectoryDataset collect_samples(const FiniteMdp& m, std::uint64_t n_lists, RngStream rng,
                                  InteractionLog* log, const CollectOptions& opt) {
    TrajectoryDataset d;
    d.n_states = m.n_states;
    d.n_actions = m.n_actions;
    d.horizon = m.horizon;
    d.seed = rng.seed();
    d.lists.reserve(n_lists);
    StoreSink sink{&d};
    run_schedule(m, n_lists, rng, log, opt, sink);
    return d;
}

std::vector<std::vector<std::uint64_t>> schedule_counts(const FiniteMdp& m,
                                                        std::uint64_t n_lists, RngStream rng,
                                                        InteractionLog* log,
                                                        const CollectOptions& opt) {
    std::vector<std::vector<std::uint64_t>> counts;
    counts.reserve(n_lists);
    CountSink sink{m.n_actions, static_cast<size_t>(m.n_states) * m.n_actions, &counts};
    run_schedule(m, n_lists, rng, log, opt, sink);
    return counts;
}

QuantileTable quantiles_from_counts(const std::vector<std::vector<std::uint64_t>>& counts,
                                    int n_states, int n_actions, double epsilon_est,
                                    double delta_est, double n_lists_theory) {
    QuantileTable t;
    t.n_states = n_states;
    t.n_actions = n_actions;
    t.epsilon_est = epsilon_est;
    t.delta_est = delta_est;
    t.n_lists = counts.size();
    t.n_lists_theory = n_lists_theory;
    const std::uint64_t n = counts.size();
    if (n == 0) throw ValidationError("quantile estimation needs at least one list");
    const std::uint64_t rank = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(n) * epsilon_est / 2.0));
    const std::uint64_t k = std::min<std::uint64_t>(std::max<std::uint64_t>(rank, 1), n);
    t.m.assign(static_cast<size_t>(n_states) * n_actions, 0);
    std::vector<std::uint64_t> vals(n);
    for (size_t sa = 0; sa < t.m.size(); ++sa) {
        for (std::uint64_t i = 0; i < n; ++i) vals[i] = counts[i][sa];
        std::nth_element(vals.begin(), vals.begin() + (k - 1), vals.end(),
                         std::greater<std::uint64_t>());
        t.m[sa] = vals[k - 1];  // k-th largest
    }
    return t;
}

QuantileTable estimate_quantiles(const FiniteMdp& m, double epsilon_est, double delta_est,
                                 double scale, RngStream rng, InteractionLog* log,
                                 const CollectOptions& opt) {
    if (!(epsilon_est > 0.0 && epsilon_est <= 1.0) || !(delta_est > 0.0 && delta_est <= 1.0))
        throw ValidationError("epsilon_est and delta_est must lie in (0, 1]");
    if (!(scale > 0.0)) throw ValidationError("scale must be positive");
    const double n_theory =
        std::ceil(300.0 * std::log(6.0 * m.n_states * m.n_actions / delta_est) / epsilon_est);
    const double n_scaled = std::ceil(scale * 300.0 *
                                      std::log(6.0 * m.n_states * m.n_actions / delta_est) /
                                      epsilon_est);
    const double episodes = schedule_episode_cost(m, n_scaled);
    if (episodes > static_cast<double>(opt.max_episodes))
        throw BudgetError("quantile estimation needs " + std::to_string(episodes) +
                              " episodes, budget is " + std::to_string(opt.max_episodes),
                          episodes);
    const std::uint64_t n = static_cast<std::uint64_t>(n_scaled);
    const auto counts = schedule_counts(m, n, rng, log, opt);
    return quantiles_from_counts(counts, m.n_states, m.n_actions, epsilon_est, delta_est,
                                 n_theory);
}

std::uint64_t count_occurrences(const std::vector<SampleTuple>& list, int s, int a) {
    std::uint64_t n = 0;
    for (const SampleTuple& t : list)
        if (t.s == s && t.a == a) ++n;
    return n;
}

void write_dataset(const TrajectoryDataset& d, std::ostream& out) {
    char buf[64];
    out << "[dataset] states=" << d.n_states << " actions=" << d.n_actions
        << " horizon=" << d.horizon << " lists=" << d.lists.size() << " seed=" << d.seed
        << " scale=";
    std::snprintf(buf, sizeof buf, "%.17g", d.scale);
    out << buf << "\n";
    for (size_t i = 0; i < d.lists.size(); ++i) {
        out << "[list " << i << "]\n";
        for (const SampleTuple& t : d.lists[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", t.r);
            out << t.s << " " << t.a << " " << buf << " " << t.s2 << "\n";
        }
    }
}

void save_dataset(const TrajectoryDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    write_dataset(d, out);
}

TrajectoryDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    TrajectoryDataset d;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        if (line[0] == '[') {
            std::string tag;
            is >> tag;
            if (tag == "[dataset]") {
                std::string kv;
                while (is >> kv) {
                    const size_t eq = kv.find('=');
                    if (eq == std::string::npos)
                        throw ParseError(path + ":" + std::to_string(lineno) +
                                         ": malformed header token '" + kv + "'");
                    const std::string key = kv.substr(0, eq);
                    const std::string val = kv.substr(eq + 1);
                    if (key == "states") d.n_states = std::stoi(val);
                    else if (key == "actions") d.n_actions = std::stoi(val);
                    else if (key == "horizon") d.horizon = std::stoi(val);
                    else if (key == "seed") d.seed = std::stoull(val);
                    else if (key == "scale") d.scale = std::stod(val);
                    else if (key != "lists")
                        throw ParseError(path + ":" + std::to_string(lineno) +
                                         ": unknown header key '" + key + "'");
                }
                header_seen = true;
            } else if (tag == "[list") {
                d.lists.emplace_back();
            } else {
                throw ParseError(path + ":" + std::to_string(lineno) + ": unknown section");
            }
            continue;
        }
        if (!header_seen || d.lists.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": tuple outside a list");
        SampleTuple t;
        if (!(is >> t.s >> t.a >> t.r >> t.s2))
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed tuple");
        d.lists.back().push_back(t);
    }
    validate_dataset(d);
    return d;
}

}  // namespace hfmdp
