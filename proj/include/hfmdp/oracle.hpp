#pragma once

#include <cstdint>
#include <vector>

#include "hfmdp/types.hpp"

// Exact (non-sampled) computations on small instances: policy values, optimal
// policies, reaching probabilities, discounted values, trajectory
// probabilities and exact visitation-count quantiles. Ground truth for all
// derived expectations and property tests. Pure functions over immutable
// inputs.

namespace hfmdp {

/// Exact distribution of the number of visits to one (s, a) pair over an
/// episode. Support is {0, ..., horizon}.
struct VisitationDistribution {
    int state = 0;
    int action = 0;
    std::vector<double> pmf;  // index = visit count
};

/// Exact V^pi by backward induction. `horizon` <= m.horizon evaluates the
/// first `horizon` steps only (0 means use m.horizon).
double finite_horizon_value(const FiniteMdp& m, const Policy& pi, int horizon = 0);

struct PlanResult {
    Policy policy;
    double value = 0.0;
};

/// Optimal non-stationary policy by backward induction with max over actions;
/// argmax ties broken by lowest action index.
PlanResult optimal_nonstationary(const FiniteMdp& m, int horizon = 0);

/// Best stationary policy by exhaustive enumeration (lexicographically first
/// maximizer). Throws BudgetError past `cap` policies.
PlanResult best_stationary(const FiniteMdp& m, int horizon = 0, std::uint64_t cap = 1000000);

/// Exact discounted value of a stationary policy: direct solve of
/// v = r^pi + gamma P^pi v, returns mu . v.
double discounted_value(const FiniteMdp& m, const Policy& pi, double gamma);

/// Discounted-optimal stationary policy via policy iteration (lowest-index
/// greedy ties).
PlanResult optimal_discounted_stationary(const FiniteMdp& m, double gamma);

/// Probability of being at state s after exactly L steps of the chain.
double reach_probability(const MarkovChain& c, int s, int L, int max_steps = 10000);

/// State-occupancy vectors d_0 = mu, d_{t+1} = d_t P for t = 0..L.
std::vector<std::vector<double>> occupancy_sequence(const MarkovChain& c, int L);

/// Probability of a state sequence T = (s_0, ..., s_{L-1}) in the chain:
/// mu(s_0) * prod P(s_{h+1} | s_h).
double sequence_probability(const MarkovChain& c, const std::vector<int>& states);

/// Probability of an H-step state-action path under pi:
/// mu(s_0) * prod P(s_{h+1} | s_h, a_h). Throws ValidationError if some
/// a_h != pi_h(s_h).
double trajectory_probability(const FiniteMdp& m, const Policy& pi, const StateActionPath& t);

/// Exact visit-count distribution of (s, a) under pi by forward DP over
/// (step, state, count). `horizon` as in finite_horizon_value.
VisitationDistribution visitation_distribution(const FiniteMdp& m, const Policy& pi,
                                               int s, int a, int horizon = 0);

/// Largest integer x with Pr[X >= x] >= eps (0 when even x=0 fails, which
/// cannot happen for eps <= 1).
int exact_quantile(const VisitationDistribution& dist, double eps);

/// Largest integer x with sum of pmf[x..] >= eps, for any pmf over 0..n.
int pmf_quantile(const std::vector<double>& pmf, double eps);

/// Max over history-dependent policies of Pr[(s, a) visited >= threshold
/// times], by DP over (step, state, capped count). The optimizer may condition
/// on the running count, so this upper-bounds the max over (step, state)
/// policies; the two coincide on positivity (any single positive-probability
/// path is realizable by a per-step state map).
double max_visit_probability(const FiniteMdp& m, int s, int a, int threshold,
                             int horizon = 0);

}  // namespace hfmdp
