#pragma once

#include <cstdint>
#include <vector>

#include "hfmdp/estimate.hpp"
#include "hfmdp/oracle.hpp"
#include "hfmdp/rng.hpp"
#include "hfmdp/sim.hpp"
#include "hfmdp/types.hpp"

// Pessimistic planning over an interval confidence set. The min over the set
// is computed by robust backward induction with a per-stage adversary: at each
// (h, s, a) the adversary picks the worst row inside box-and-simplex. Because
// the uncertainty is (s, a)-rectangular this solves the time-varying
// relaxation exactly; it lower-bounds the min over time-invariant members.

namespace hfmdp {

/// Per-(step, state) pessimistic values and robust-greedy actions.
struct RobustValueTable {
    int horizon = 0;
    int n_states = 0;
    std::vector<std::vector<double>> value;    // [h][s], h in 0..H (value[H] = 0)
    std::vector<std::vector<int>> greedy;      // [h][s]
};

struct RobustPlanResult {
    Policy policy;
    double value = 0.0;
    RobustValueTable table;
};

/// Distribution q minimizing q . next_values subject to
/// |q - center| <= widths entrywise and q in the simplex. Greedy mass shift
/// toward low values; exact LP optimum. full_simplex rows return a point mass
/// on the argmin state (lowest index ties).
struct WorstCaseRow {
    std::vector<double> q;
    double objective = 0.0;
};
WorstCaseRow worst_case_row(const std::vector<double>& center,
                            const std::vector<double>& widths,
                            const std::vector<double>& next_values,
                            bool full_simplex = false);

/// Pessimistic value of a fixed policy: robust backward induction with the
/// per-stage adversary, then the worst-case initial mixture.
double pessimistic_policy_value(const Policy& pi, const IntervalModelSet& set);

/// Robust plan: max over actions of the pessimistic backup, lowest-index ties.
RobustPlanResult pessimistic_plan(const IntervalModelSet& set);

/// Optimistic counterpart (max over the set); used for the certified accuracy
/// gap in pipeline diagnostics.
RobustPlanResult optimistic_plan(const IntervalModelSet& set);

/// Standard backward induction on an estimated model (no widths).
PlanResult plan_empirical(const EstimatedModel& model);

/// Theoretical repetition count of the episodic planning algorithm,
/// 2^66 (|S|+1)^(24(|S|+1)) log(18|S|^2|A|/delta) |S|^7 |A|^5 / eps^5.
double planning_lists_theory(int n_states, int n_actions, double eps, double delta);

/// The planning percentile eps / (32768 |S||A| (|S|+1)^(12(|S|+1))).
double planning_epsilon_est(int n_states, int n_actions, double eps);

/// Theoretical per-pair draw count of the generative algorithm,
/// 2^29 |S|^5 |A|^3 H / eps^3.
double generative_draws_theory(int n_states, int n_actions, int horizon, double eps);

struct PipelineOptions {
    std::uint64_t max_episodes = 1000000;
    std::uint64_t max_queries = 10000000;
    bool reuse_phase_samples = false;  // off-spec: feed quantile-phase episodes to both phases
};

struct PipelineDiagnostics {
    double lists_theory = 0.0;        // unscaled repetition counts
    double estimate_lists_theory = 0.0;
    std::uint64_t lists = 0;          // actual counts after scaling
    std::uint64_t estimate_lists = 0;
    double epsilon_est = 0.0;
    InteractionLog log;
    double pessimistic_value = 0.0;   // of the returned policy
    double optimistic_value = 0.0;    // max over policies and models
    double epsilon_hat = 0.0;         // optimistic_value - pessimistic_value
    bool true_model_contained = false;  // filled only when the true model is supplied
};

struct PipelineResult {
    Policy policy;
    PipelineDiagnostics diagnostics;
    IntervalModelSet set;
};

/// End-to-end episodic pipeline: estimate quantiles, collect samples, build
/// the truncated model and widths, pessimistic plan. `scale` multiplies both
/// theoretical repetition counts. When `true_model` is non-null the
/// diagnostics record confidence-set membership of the true dynamics.
PipelineResult run_pessimistic_pipeline(const FiniteMdp& m, double eps, double delta,
                                        double scale, RngStream rng,
                                        const PipelineOptions& opt = {},
                                        const FiniteMdp* true_model = nullptr);

struct GenerativeResult {
    Policy policy;
    double value_on_model = 0.0;  // value of the policy on the estimated model
    std::uint64_t draws_per_pair = 0;
    double draws_theory = 0.0;
    InteractionLog log;
};

/// Generative pipeline: N = ceil(scale * theory) draws per pair, empirical
/// model, plain plan. Throws BudgetError when total queries exceed the budget.
GenerativeResult run_generative_pipeline(const FiniteMdp& m, double eps, double delta,
                                         double scale, RngStream rng,
                                         const PipelineOptions& opt = {});

}  // namespace hfmdp
