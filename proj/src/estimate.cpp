#include "hfmdp/estimate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hfmdp {

EstimatedModel build_truncated_model(const TrajectoryDataset& d, const QuantileTable& mst) {
    if (mst.n_states != d.n_states || mst.n_actions != d.n_actions)
        throw ValidationError("quantile table dimensions do not match the dataset");
    EstimatedModel em;
    em.n_states = d.n_states;
    em.n_actions = d.n_actions;
    em.horizon = d.horizon;
    em.provenance = Provenance::kTruncatedEpisodic;
    const int pairs = d.n_states * d.n_actions;
    em.p_hat.assign(pairs, std::vector<double>(d.n_states, 0.0));
    em.r_hat.assign(pairs, 0.0);
    em.visits.assign(pairs, 0);
    em.mu_hat.assign(d.n_states, 0.0);

    std::vector<std::vector<std::uint64_t>> next_count(pairs,
                                                       std::vector<std::uint64_t>(d.n_states, 0));
    std::vector<double> reward_sum(pairs, 0.0);
    std::vector<std::uint64_t> prior(pairs, 0);  // per-list running occurrence count

    for (const auto& list : d.lists) {
        if (!list.empty()) em.mu_hat[list[0].s] += 1.0;
        std::fill(prior.begin(), prior.end(), 0);
        for (const SampleTuple& t : list) {
            const int sa = t.s * d.n_actions + t.a;
            if (prior[sa] < mst.m[sa]) {  // Trunc indicator
                ++em.visits[sa];
                ++next_count[sa][t.s2];
                reward_sum[sa] += t.r;
            }
            ++prior[sa];
        }
    }
    const double n = static_cast<double>(d.lists.size());
    if (n > 0)
        for (double& x : em.mu_hat) x /= n;
    for (int sa = 0; sa < pairs; ++sa) {
        const double denom = static_cast<double>(std::max<std::uint64_t>(1, em.visits[sa]));
        for (int s2 = 0; s2 < d.n_states; ++s2)
            em.p_hat[sa][s2] = static_cast<double>(next_count[sa][s2]) / denom;
        em.r_hat[sa] = reward_sum[sa] / denom;
    }
    return em;
}

EstimatedModel build_generative_model(const FiniteMdp& m, std::uint64_t n_draws,
                                      RngStream rng, InteractionLog* log) {
    if (n_draws == 0) throw ValidationError("generative model needs at least one draw");
    EstimatedModel em;
    em.n_states = m.n_states;
    em.n_actions = m.n_actions;
    em.horizon = m.horizon;
    em.provenance = Provenance::kGenerative;
    const int pairs = m.n_pairs();
    em.p_hat.assign(pairs, std::vector<double>(m.n_states, 0.0));
    em.r_hat.assign(pairs, 0.0);
    em.visits.assign(pairs, n_draws);
    em.mu_hat.assign(m.n_states, 0.0);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const int sa = m.pair_index(s, a);
            double rsum = 0;
            for (std::uint64_t i = 0; i < n_draws; ++i) {
                auto [r, s2] = generative_query(m, s, a, rng);
                em.p_hat[sa][s2] += 1.0;
                rsum += r;
                if (log) ++log->queries;
            }
            for (double& x : em.p_hat[sa]) x /= static_cast<double>(n_draws);
            em.r_hat[sa] = rsum / static_cast<double>(n_draws);
        }
    }
    for (std::uint64_t i = 0; i < n_draws; ++i) {
        em.mu_hat[rng.sample_discrete(m.initial)] += 1.0;
        if (log) ++log->queries;
    }
    for (double& x : em.mu_hat) x /= static_cast<double>(n_draws);
    return em;
}

IntervalModelSet confidence_widths(const EstimatedModel& model, const QuantileTable& mst,
                                   std::uint64_t n_lists, double epsilon_est, double delta) {
    if (n_lists == 0) throw ValidationError("confidence widths need n_lists >= 1");
    if (!(epsilon_est > 0.0 && epsilon_est <= 1.0) || !(delta > 0.0 && delta <= 1.0))
        throw ValidationError("epsilon_est and delta must lie in (0, 1]");
    const int S = model.n_states, A = model.n_actions;
    IntervalModelSet set;
    set.center = model;
    set.epsilon_est = epsilon_est;
    set.delta = delta;
    set.n_lists = n_lists;
    set.width_p.assign(S * A, std::vector<double>(S, 1.0));
    set.full_simplex.assign(S * A, 0);
    const double log_p = std::log(18.0 * S * S * A / delta);
    for (int sa = 0; sa < S * A; ++sa) {
        if (mst.m[sa] == 0 || model.visits[sa] == 0) {
            set.full_simplex[sa] = 1;
            continue;
        }
        const double denom = static_cast<double>(mst.m[sa]) *
                             static_cast<double>(n_lists) * epsilon_est;
        for (int s2 = 0; s2 < S; ++s2) {
            const double first = 512.0 * log_p / denom;
            const double second = 32.0 * std::sqrt(model.p_hat[sa][s2] * log_p / denom);
            set.width_p[sa][s2] = std::max(first, second);
        }
    }
    const double w_mu = std::sqrt(std::log(18.0 * S / delta) / static_cast<double>(n_lists));
    set.width_mu.assign(S, w_mu);
    return set;
}

bool contains(const IntervalModelSet& set, const FiniteMdp& m) {
    const int S = set.center.n_states, A = set.center.n_actions;
    if (m.n_states != S || m.n_actions != A)
        throw ValidationError("model dimensions do not match the confidence set");
    for (int sa = 0; sa < S * A; ++sa) {
        if (set.full_simplex[sa]) continue;
        for (int s2 = 0; s2 < S; ++s2) {
            const double diff =
                std::fabs(set.center.p_hat[sa][s2] - m.transition[sa][s2]);
            if (diff > set.width_p[sa][s2] + 1e-12) return false;
        }
    }
    for (int s = 0; s < S; ++s)
        if (std::fabs(set.center.mu_hat[s] - m.initial[s]) > set.width_mu[s] + 1e-12)
            return false;
    return true;
}

namespace {

const char* provenance_name(Provenance p) {
    return p == Provenance::kGenerative ? "generative" : "truncated-episodic";
}

}  // namespace

void write_model_set(const IntervalModelSet& set, std::ostream& out) {
    const EstimatedModel& em = set.center;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "[dims] states=" << em.n_states << " actions=" << em.n_actions
        << " horizon=" << em.horizon << "\n";
    out << "[provenance] " << provenance_name(em.provenance) << "\n";
    out << "[params] epsilon_est=" << num(set.epsilon_est) << " delta=" << num(set.delta)
        << " lists=" << set.n_lists << "\n";
    out << "[initial]\n";
    for (double p : em.mu_hat) out << num(p) << "\n";
    out << "[width-initial]\n";
    for (double w : set.width_mu) out << num(w) << "\n";
    for (int s = 0; s < em.n_states; ++s) {
        for (int a = 0; a < em.n_actions; ++a) {
            const int sa = em.pair_index(s, a);
            out << "[transition " << s << " " << a << "]\n";
            for (double p : em.p_hat[sa]) out << num(p) << "\n";
            out << "[reward " << s << " " << a << "]\n" << num(em.r_hat[sa]) << " 1\n";
            out << "[visits " << s << " " << a << "]\n" << em.visits[sa] << "\n";
            out << "[width " << s << " " << a << "]\n";
            if (set.full_simplex[sa]) {
                out << "simplex\n";
            } else {
                for (double w : set.width_p[sa]) out << num(w) << "\n";
            }
        }
    }
}

void save_model_set(const IntervalModelSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    write_model_set(set, out);
}

IntervalModelSet load_model_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    IntervalModelSet set;
    EstimatedModel& em = set.center;
    std::string line;
    int lineno = 0;
    enum class Section { kNone, kInitial, kWidthInitial, kTransition, kReward, kVisits, kWidth };
    Section section = Section::kNone;
    int cur_sa = -1;
    size_t fill = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string first;
        if (!(is >> first)) continue;
        if (first[0] == '[') {
            if (first == "[dims]") {
                std::string kv;
                while (is >> kv) {
                    const size_t eq = kv.find('=');
                    if (eq == std::string::npos) fail("malformed [dims]");
                    const int v = std::stoi(kv.substr(eq + 1));
                    const std::string key = kv.substr(0, eq);
                    if (key == "states") em.n_states = v;
                    else if (key == "actions") em.n_actions = v;
                    else if (key == "horizon") em.horizon = v;
                }
                if (em.n_states <= 0 || em.n_actions <= 0 || em.horizon <= 0)
                    fail("bad [dims]");
                const int pairs = em.n_states * em.n_actions;
                em.p_hat.assign(pairs, std::vector<double>(em.n_states, 0.0));
                em.r_hat.assign(pairs, 0.0);
                em.visits.assign(pairs, 0);
                em.mu_hat.assign(em.n_states, 0.0);
                set.width_p.assign(pairs, std::vector<double>(em.n_states, 1.0));
                set.width_mu.assign(em.n_states, 0.0);
                set.full_simplex.assign(pairs, 0);
                section = Section::kNone;
            } else if (first == "[provenance]") {
                std::string p;
                is >> p;
                em.provenance = (p == "generative") ? Provenance::kGenerative
                                                    : Provenance::kTruncatedEpisodic;
            } else if (first == "[params]") {
                std::string kv;
                while (is >> kv) {
                    const size_t eq = kv.find('=');
                    if (eq == std::string::npos) fail("malformed [params]");
                    const std::string key = kv.substr(0, eq);
                    if (key == "epsilon_est") set.epsilon_est = std::stod(kv.substr(eq + 1));
                    else if (key == "delta") set.delta = std::stod(kv.substr(eq + 1));
                    else if (key == "lists") set.n_lists = std::stoull(kv.substr(eq + 1));
                }
            } else if (first == "[initial]") {
                section = Section::kInitial;
                fill = 0;
            } else if (first == "[width-initial]") {
                section = Section::kWidthInitial;
                fill = 0;
            } else {
                int s, a;
                std::string close;
                if (!(is >> s >> close)) fail("malformed section header");
                if (!close.empty() && close.back() == ']') close.pop_back();
                a = std::stoi(close);
                if (s < 0 || s >= em.n_states || a < 0 || a >= em.n_actions)
                    fail("pair index out of range");
                cur_sa = em.pair_index(s, a);
                fill = 0;
                if (first == "[transition") section = Section::kTransition;
                else if (first == "[reward") section = Section::kReward;
                else if (first == "[visits") section = Section::kVisits;
                else if (first == "[width") section = Section::kWidth;
                else fail("unknown section '" + first + "'");
            }
            continue;
        }
        switch (section) {
            case Section::kInitial:
                if (fill >= em.mu_hat.size()) fail("too many [initial] entries");
                em.mu_hat[fill++] = std::stod(first);
                break;
            case Section::kWidthInitial:
                if (fill >= set.width_mu.size()) fail("too many [width-initial] entries");
                set.width_mu[fill++] = std::stod(first);
                break;
            case Section::kTransition:
                if (fill >= em.p_hat[cur_sa].size()) fail("too many row entries");
                em.p_hat[cur_sa][fill++] = std::stod(first);
                break;
            case Section::kReward:
                em.r_hat[cur_sa] = std::stod(first);
                break;
            case Section::kVisits:
                em.visits[cur_sa] = std::stoull(first);
                break;
            case Section::kWidth:
                if (first == "simplex") {
                    set.full_simplex[cur_sa] = 1;
                } else {
                    if (fill >= set.width_p[cur_sa].size()) fail("too many width entries");
                    set.width_p[cur_sa][fill++] = std::stod(first);
                }
                break;
            case Section::kNone:
                fail("value outside any section");
        }
    }
    if (em.n_states == 0) throw ParseError(path + ": missing [dims]");
    return set;
}

}  // namespace hfmdp
