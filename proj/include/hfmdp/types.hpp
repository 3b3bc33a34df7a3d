#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for finite tabular MDPs: the model tuple, induced Markov
// chains, deterministic policies (stationary and per-step), trajectories and
// the multi-episode sample lists produced by the collection schedule.

namespace hfmdp {

// Absolute tolerance for stochasticity checks (row sums, distribution sums).
inline constexpr double kProbTol = 1e-12;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
    BudgetError(const std::string& what, double required)
        : std::runtime_error(what), required_count(required) {}
    double required_count;
};

/// Finite discrete reward distribution with support in [0, 1].
struct DiscreteReward {
    std::vector<double> values;
    std::vector<double> probs;

    double mean() const {
        double m = 0;
        for (size_t i = 0; i < values.size(); ++i)
            m += values[i] * probs[i];
        return m;
    }
    double second_moment() const {
        double m = 0;
        for (size_t i = 0; i < values.size(); ++i)
            m += values[i] * values[i] * probs[i];
        return m;
    }
    double max_value() const {
        double m = 0;
        for (double v : values)
            if (v > m) m = v;
        return m;
    }
    static DiscreteReward point_mass(double v) { return DiscreteReward{{v}, {1.0}}; }
};

/// The tuple (S, A, P, R, H, mu). Transition rows and rewards are indexed by
/// the flattened pair index s * n_actions + a. Immutable after construction.
struct FiniteMdp {
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    std::vector<std::vector<double>> transition;  // [s*A+a] -> vector over S
    std::vector<DiscreteReward> reward;           // [s*A+a]
    std::vector<double> initial;                  // mu over S

    int pair_index(int s, int a) const { return s * n_actions + a; }
    int n_pairs() const { return n_states * n_actions; }
    const std::vector<double>& row(int s, int a) const { return transition[pair_index(s, a)]; }
    const DiscreteReward& reward_dist(int s, int a) const { return reward[pair_index(s, a)]; }
    double mean_reward(int s, int a) const { return reward_dist(s, a).mean(); }
};

/// Markov chain (S, P, mu).
struct MarkovChain {
    int n_states = 0;
    std::vector<std::vector<double>> transition;  // [s] -> vector over S
    std::vector<double> initial;
};

/// Deterministic policy; stationary (one state->action map) or per-step maps
/// for steps 0..H-1.
struct Policy {
    bool stationary = true;
    std::vector<std::vector<int>> steps;  // stationary: exactly one map

    int action(int h, int s) const { return stationary ? steps[0][s] : steps[h][s]; }
    int n_steps() const { return static_cast<int>(steps.size()); }

    static Policy make_stationary(std::vector<int> map) {
        Policy p;
        p.stationary = true;
        p.steps.push_back(std::move(map));
        return p;
    }
    static Policy make_nonstationary(std::vector<std::vector<int>> maps) {
        Policy p;
        p.stationary = false;
        p.steps = std::move(maps);
        return p;
    }
};

struct TimeStep {
    int state;
    int action;
    double reward;
};

/// One H-step episode: H (s, a, r) records plus the terminal state.
struct Trajectory {
    std::vector<TimeStep> steps;
    int final_state = 0;
};

/// A state-action path with terminal state, as used by trajectory-probability
/// computations (no rewards).
struct StateActionPath {
    std::vector<std::pair<int, int>> steps;  // (s_h, a_h), h in [H]
    int final_state = 0;
};

struct SampleTuple {
    int s;
    int a;
    double r;
    int s2;
};

/// Output of the sample-collection schedule: N lists, each a concatenation of
/// one episode per ((s, a), (pi1, pi2)) cell, |S||A| * |A|^(2|S|) * H tuples.
struct TrajectoryDataset {
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::vector<std::vector<SampleTuple>> lists;

    std::uint64_t list_length() const;  // |S||A| * |A|^(2|S|) * H
};

// Validation. Throws ValidationError naming the offending row on failure.
void validate_mdp(const FiniteMdp& m);
void validate_chain(const MarkovChain& c);
void validate_policy(const Policy& p, const FiniteMdp& m);
void validate_trajectory(const Trajectory& t, const FiniteMdp& m);
void validate_dataset(const TrajectoryDataset& d);

/// Number of stationary policies |A|^|S|, as a double (may be huge).
double stationary_policy_count(int n_states, int n_actions);

/// All |A|^|S| stationary policies in lexicographic order (state 0 varies
/// slowest). Throws BudgetError if the count exceeds `cap`.
std::vector<Policy> enumerate_stationary_policies(const FiniteMdp& m,
                                                  std::uint64_t cap = 1000000);

/// Result of the bounded-total-reward check (Assumption "sum of rewards <= 1
/// along every positive-probability trajectory"). On failure the witness holds
/// the per-step action (and state) choices of a violating trajectory.
struct BoundedRewardCheck {
    bool ok = false;
    double worst_total = 0.0;
    std::vector<int> witness_states;
    std::vector<int> witness_actions;
};

/// Backward DP over max-support rewards: U_H = 0,
/// U_h(s) = max_a (rmax(s,a) + max_{s' in supp P(s,a)} U_{h+1}(s')).
/// Accepts iff max over supp(mu) of U_0 <= 1 (tolerance 1e-9).
BoundedRewardCheck validate_bounded_total_reward(const FiniteMdp& m);

/// Chain with rows P(.|s, pi(s)) and the same mu. Throws if pi is not
/// stationary.
MarkovChain induce_chain(const FiniteMdp& m, const Policy& pi);

}  // namespace hfmdp
