#include "hfmdp/types.hpp"

#include <cmath>
#include <cstdlib>

namespace hfmdp {

namespace {

void check_distribution(const std::vector<double>& p, size_t expected_size,
                        const std::string& what) {
    if (p.size() != expected_size)
        throw ValidationError(what + ": expected " + std::to_string(expected_size) +
                              " entries, got " + std::to_string(p.size()));
    double sum = 0;
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0))
            throw ValidationError(what + ": entry " + std::to_string(x) +
                                  " outside [0,1]");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > kProbTol)
        throw ValidationError(what + ": sums to " + std::to_string(sum) +
                              ", not 1 within 1e-12");
}

}  // namespace

std::uint64_t TrajectoryDataset::list_length() const {
    std::uint64_t pairs = 1;
    for (int i = 0; i < 2 * n_states; ++i) pairs *= static_cast<std::uint64_t>(n_actions);
    return static_cast<std::uint64_t>(n_states) * n_actions * pairs * horizon;
}

void validate_mdp(const FiniteMdp& m) {
    if (m.n_states <= 0 || m.n_actions <= 0 || m.horizon <= 0)
        throw ValidationError("mdp dims must be positive");
    if (m.transition.size() != static_cast<size_t>(m.n_pairs()))
        throw ValidationError("transition table has wrong number of rows");
    if (m.reward.size() != static_cast<size_t>(m.n_pairs()))
        throw ValidationError("reward table has wrong number of rows");
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            check_distribution(m.row(s, a), m.n_states,
                               "transition row (s=" + std::to_string(s) +
                                   ", a=" + std::to_string(a) + ")");
            const DiscreteReward& r = m.reward_dist(s, a);
            if (r.values.size() != r.probs.size() || r.values.empty())
                throw ValidationError("reward (s=" + std::to_string(s) + ", a=" +
                                      std::to_string(a) + "): malformed support");
            double psum = 0;
            for (size_t i = 0; i < r.values.size(); ++i) {
                if (!(r.values[i] >= 0.0 && r.values[i] <= 1.0))
                    throw ValidationError("reward (s=" + std::to_string(s) + ", a=" +
                                          std::to_string(a) + "): support value " +
                                          std::to_string(r.values[i]) + " outside [0,1]");
                if (!(r.probs[i] >= 0.0 && r.probs[i] <= 1.0))
                    throw ValidationError("reward (s=" + std::to_string(s) + ", a=" +
                                          std::to_string(a) + "): probability outside [0,1]");
                psum += r.probs[i];
            }
            if (std::fabs(psum - 1.0) > kProbTol)
                throw ValidationError("reward (s=" + std::to_string(s) + ", a=" +
                                      std::to_string(a) + "): probabilities sum to " +
                                      std::to_string(psum));
        }
    }
    check_distribution(m.initial, m.n_states, "initial distribution");
}

void validate_chain(const MarkovChain& c) {
    if (c.n_states <= 0) throw ValidationError("chain needs at least one state");
    if (c.transition.size() != static_cast<size_t>(c.n_states))
        throw ValidationError("chain transition table has wrong number of rows");
    for (int s = 0; s < c.n_states; ++s)
        check_distribution(c.transition[s], c.n_states,
                           "chain row s=" + std::to_string(s));
    check_distribution(c.initial, c.n_states, "chain initial distribution");
}

void validate_policy(const Policy& p, const FiniteMdp& m) {
    if (p.stationary) {
        if (p.steps.size() != 1)
            throw ValidationError("stationary policy must hold exactly one map");
    } else if (p.n_steps() != m.horizon) {
        throw ValidationError("non-stationary policy has " +
                              std::to_string(p.n_steps()) + " step maps, horizon is " +
                              std::to_string(m.horizon));
    }
    for (const auto& map : p.steps) {
        if (map.size() != static_cast<size_t>(m.n_states))
            throw ValidationError("policy map covers wrong number of states");
        for (int a : map)
            if (a < 0 || a >= m.n_actions)
                throw ValidationError("policy action index " + std::to_string(a) +
                                      " out of range");
    }
}

void validate_trajectory(const Trajectory& t, const FiniteMdp& m) {
    if (t.steps.size() != static_cast<size_t>(m.horizon))
        throw ValidationError("trajectory length " + std::to_string(t.steps.size()) +
                              " != horizon " + std::to_string(m.horizon));
    for (const TimeStep& st : t.steps) {
        if (st.state < 0 || st.state >= m.n_states)
            throw ValidationError("trajectory state index out of range");
        if (st.action < 0 || st.action >= m.n_actions)
            throw ValidationError("trajectory action index out of range");
        if (!(st.reward >= 0.0 && st.reward <= 1.0))
            throw ValidationError("trajectory reward outside [0,1]");
    }
    if (t.final_state < 0 || t.final_state >= m.n_states)
        throw ValidationError("trajectory final state out of range");
}

void validate_dataset(const TrajectoryDataset& d) {
    const std::uint64_t want = d.list_length();
    for (size_t i = 0; i < d.lists.size(); ++i) {
        if (d.lists[i].size() != want)
            throw ValidationError("list " + std::to_string(i) + " has " +
                                  std::to_string(d.lists[i].size()) +
                                  " tuples, expected " + std::to_string(want));
        for (const SampleTuple& t : d.lists[i]) {
            if (t.s < 0 || t.s >= d.n_states || t.s2 < 0 || t.s2 >= d.n_states ||
                t.a < 0 || t.a >= d.n_actions || !(t.r >= 0.0 && t.r <= 1.0))
                throw ValidationError("list " + std::to_string(i) +
                                      " contains an invalid tuple");
        }
    }
}

double stationary_policy_count(int n_states, int n_actions) {
    return std::pow(static_cast<double>(n_actions), static_cast<double>(n_states));
}

std::vector<Policy> enumerate_stationary_policies(const FiniteMdp& m, std::uint64_t cap) {
    const double count = stationary_policy_count(m.n_states, m.n_actions);
    if (count > static_cast<double>(cap))
        throw BudgetError("enumeration needs " + std::to_string(count) +
                              " policies, cap is " + std::to_string(cap),
                          count);
    const std::uint64_t n = static_cast<std::uint64_t>(count);
    std::vector<Policy> out;
    out.reserve(n);
    std::vector<int> map(m.n_states, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        out.push_back(Policy::make_stationary(map));
        // lexicographic increment: state 0 is the most significant digit
        for (int s = m.n_states - 1; s >= 0; --s) {
            if (++map[s] < m.n_actions) break;
            map[s] = 0;
        }
    }
    return out;
}

BoundedRewardCheck validate_bounded_total_reward(const FiniteMdp& m) {
    const int S = m.n_states, A = m.n_actions, H = m.horizon;
    // u[h][s] = max over action sequences of the sum of max-support rewards
    // reachable from s at step h along positive-probability transitions.
    std::vector<std::vector<double>> u(H + 1, std::vector<double>(S, 0.0));
    std::vector<std::vector<int>> best_a(H, std::vector<int>(S, 0));
    std::vector<std::vector<int>> best_s2(H, std::vector<int>(S, 0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -1.0;
            for (int a = 0; a < A; ++a) {
                double cont = -1.0;
                int arg_s2 = 0;
                for (int s2 = 0; s2 < S; ++s2) {
                    if (m.row(s, a)[s2] > 0.0 && u[h + 1][s2] > cont) {
                        cont = u[h + 1][s2];
                        arg_s2 = s2;
                    }
                }
                const double total = m.reward_dist(s, a).max_value() + cont;
                if (total > best) {
                    best = total;
                    best_a[h][s] = a;
                    best_s2[h][s] = arg_s2;
                }
            }
            u[h][s] = best;
        }
    }
    BoundedRewardCheck out;
    int start = -1;
    double worst = -1.0;
    for (int s = 0; s < S; ++s) {
        if (m.initial[s] > 0.0 && u[0][s] > worst) {
            worst = u[0][s];
            start = s;
        }
    }
    out.worst_total = worst;
    out.ok = worst <= 1.0 + 1e-9;
    if (!out.ok) {
        int s = start;
        for (int h = 0; h < H; ++h) {
            out.witness_states.push_back(s);
            out.witness_actions.push_back(best_a[h][s]);
            s = best_s2[h][s];
        }
    }
    return out;
}

MarkovChain induce_chain(const FiniteMdp& m, const Policy& pi) {
    if (!pi.stationary)
        throw ValidationError("induce_chain requires a stationary policy");
    MarkovChain c;
    c.n_states = m.n_states;
    c.initial = m.initial;
    c.transition.reserve(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
        c.transition.push_back(m.row(s, pi.action(0, s)));
    return c;
}

}  // namespace hfmdp
