#include "hfmdp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfmdp/collect.hpp"

namespace hfmdp {

WorstCaseRow worst_case_row(const std::vector<double>& center,
                            const std::vector<double>& widths,
                            const std::vector<double>& next_values, bool full_simplex) {
    const int n = static_cast<int>(next_values.size());
    WorstCaseRow out;
    out.q.assign(n, 0.0);
    if (full_simplex) {
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (next_values[i] < next_values[arg]) arg = i;
        out.q[arg] = 1.0;
        out.objective = next_values[arg];
        return out;
    }
    std::vector<double> lo(n), hi(n);
    double remaining = 1.0;
    for (int i = 0; i < n; ++i) {
        lo[i] = std::max(0.0, center[i] - widths[i]);
        hi[i] = std::min(1.0, center[i] + widths[i]);
        out.q[i] = lo[i];
        remaining -= lo[i];
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return next_values[i] < next_values[j]; });
    for (int i : order) {
        if (remaining <= 0.0) break;
        const double add = std::min(hi[i] - lo[i], remaining);
        out.q[i] += add;
        remaining -= add;
    }
    out.objective = 0.0;
    for (int i = 0; i < n; ++i) out.objective += out.q[i] * next_values[i];
    return out;
}

namespace {

// Best-case (max) counterpart via negation; keeps the lowest-index tie rule.
WorstCaseRow best_case_row(const std::vector<double>& center, const std::vector<double>& widths,
                           const std::vector<double>& next_values, bool full_simplex) {
    std::vector<double> neg(next_values.size());
    for (size_t i = 0; i < neg.size(); ++i) neg[i] = -next_values[i];
    WorstCaseRow r = worst_case_row(center, widths, neg, full_simplex);
    r.objective = -r.objective;
    return r;
}

double robust_backup(const IntervalModelSet& set, int sa, const std::vector<double>& next,
                     bool optimistic) {
    const WorstCaseRow r =
        optimistic
            ? best_case_row(set.center.p_hat[sa], set.width_p[sa], next, set.full_simplex[sa])
            : worst_case_row(set.center.p_hat[sa], set.width_p[sa], next, set.full_simplex[sa]);
    return set.center.r_hat[sa] + r.objective;
}

double initial_mixture(const IntervalModelSet& set, const std::vector<double>& v0,
                       bool optimistic) {
    const WorstCaseRow r = optimistic ? best_case_row(set.center.mu_hat, set.width_mu, v0, false)
                                      : worst_case_row(set.center.mu_hat, set.width_mu, v0, false);
    return r.objective;
}

RobustPlanResult robust_plan(const IntervalModelSet& set, bool optimistic) {
    const int H = set.center.horizon, S = set.center.n_states, A = set.center.n_actions;
    RobustPlanResult out;
    out.table.horizon = H;
    out.table.n_states = S;
    out.table.value.assign(H + 1, std::vector<double>(S, 0.0));
    out.table.greedy.assign(H, std::vector<int>(S, 0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const double v = robust_backup(set, s * A + a, out.table.value[h + 1], optimistic);
                if (v > best) {
                    best = v;
                    best_a = a;
                }
            }
            out.table.value[h][s] = best;
            out.table.greedy[h][s] = best_a;
        }
    }
    out.policy = Policy::make_nonstationary(out.table.greedy);
    out.value = initial_mixture(set, out.table.value[0], optimistic);
    return out;
}

}  // namespace

double pessimistic_policy_value(const Policy& pi, const IntervalModelSet& set) {
    const int H = set.center.horizon, S = set.center.n_states, A = set.center.n_actions;
    if (!pi.stationary && pi.n_steps() < H)
        throw ValidationError("policy does not cover the planning horizon");
    std::vector<double> v(S, 0.0), next(S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s)
            v[s] = robust_backup(set, s * A + pi.action(h, s), next, false);
        std::swap(v, next);
    }
    return initial_mixture(set, next, false);
}

RobustPlanResult pessimistic_plan(const IntervalModelSet& set) { return robust_plan(set, false); }

RobustPlanResult optimistic_plan(const IntervalModelSet& set) { return robust_plan(set, true); }

PlanResult plan_empirical(const EstimatedModel& model) {
    const int H = model.horizon, S = model.n_states, A = model.n_actions;
    std::vector<double> v(S, 0.0), next(S, 0.0);
    std::vector<std::vector<int>> maps(H, std::vector<int>(S, 0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const int sa = s * A + a;
                double x = model.r_hat[sa];
                for (int s2 = 0; s2 < S; ++s2) x += model.p_hat[sa][s2] * next[s2];
                if (x > best) {
                    best = x;
                    best_a = a;
                }
            }
            v[s] = best;
            maps[h][s] = best_a;
        }
        std::swap(v, next);
    }
    PlanResult out;
    out.policy = Policy::make_nonstationary(std::move(maps));
    for (int s = 0; s < S; ++s) out.value += model.mu_hat[s] * next[s];
    return out;
}

double planning_lists_theory(int n_states, int n_actions, double eps, double delta) {
    const double s = n_states, a = n_actions;
    return std::exp2(66.0) * std::pow(s + 1.0, 24.0 * (s + 1.0)) *
           std::log(18.0 * s * s * a / delta) * std::pow(s, 7.0) * std::pow(a, 5.0) /
           std::pow(eps, 5.0);
}

double planning_epsilon_est(int n_states, int n_actions, double eps) {
    const double s = n_states, a = n_actions;
    return eps / (32768.0 * s * a * std::pow(s + 1.0, 12.0 * (s + 1.0)));
}

double generative_draws_theory(int n_states, int n_actions, int horizon, double eps) {
    const double s = n_states, a = n_actions;
    return std::exp2(29.0) * std::pow(s, 5.0) * std::pow(a, 3.0) * horizon /
           std::pow(eps, 3.0);
}

PipelineResult run_pessimistic_pipeline(const FiniteMdp& m, double eps, double delta,
                                        double scale, RngStream rng,
                                        const PipelineOptions& opt,
                                        const FiniteMdp* true_model) {
    if (!(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta <= 1.0))
        throw ValidationError("epsilon and delta must lie in (0, 1]");
    if (!(scale > 0.0)) throw ValidationError("scale must be positive");

    PipelineResult out;
    PipelineDiagnostics& diag = out.diagnostics;
    diag.epsilon_est = planning_epsilon_est(m.n_states, m.n_actions, eps);
    diag.lists_theory = planning_lists_theory(m.n_states, m.n_actions, eps, delta);
    const double estimate_formula =
        300.0 * std::log(6.0 * m.n_states * m.n_actions / delta) / diag.epsilon_est;
    diag.estimate_lists_theory = std::ceil(estimate_formula);

    const double collect_scaled = std::max(1.0, std::ceil(scale * diag.lists_theory));
    // same expression estimate_quantiles evaluates, so the two counts agree
    const double estimate_scaled = std::max(1.0, std::ceil(scale * estimate_formula));
    const double total_episodes = opt.reuse_phase_samples
                                      ? schedule_episode_cost(m, std::max(collect_scaled,
                                                                          estimate_scaled))
                                      : schedule_episode_cost(m, collect_scaled) +
                                            schedule_episode_cost(m, estimate_scaled);
    if (total_episodes > static_cast<double>(opt.max_episodes))
        throw BudgetError("pessimistic pipeline needs " + std::to_string(total_episodes) +
                              " episodes, budget is " + std::to_string(opt.max_episodes),
                          total_episodes);

    diag.lists = static_cast<std::uint64_t>(collect_scaled);
    diag.estimate_lists = static_cast<std::uint64_t>(estimate_scaled);

    CollectOptions copt;
    copt.max_episodes = opt.max_episodes;
    QuantileTable mst;
    TrajectoryDataset dataset;
    if (opt.reuse_phase_samples) {
        const std::uint64_t shared = std::max(diag.lists, diag.estimate_lists);
        dataset = collect_samples(m, shared, rng.substream(2), &diag.log, copt);
        std::vector<std::vector<std::uint64_t>> counts;
        counts.reserve(diag.estimate_lists);
        for (std::uint64_t i = 0; i < diag.estimate_lists; ++i) {
            counts.emplace_back(m.n_pairs(), 0);
            for (const SampleTuple& t : dataset.lists[i])
                ++counts.back()[t.s * m.n_actions + t.a];
        }
        mst = quantiles_from_counts(counts, m.n_states, m.n_actions, diag.epsilon_est, delta,
                                    diag.estimate_lists_theory);
        dataset.lists.resize(diag.lists);
    } else {
        mst = estimate_quantiles(m, diag.epsilon_est, delta, scale, rng.substream(1),
                                 &diag.log, copt);
        dataset = collect_samples(m, diag.lists, rng.substream(2), &diag.log, copt);
    }
    dataset.scale = scale;

    const EstimatedModel model = build_truncated_model(dataset, mst);
    out.set = confidence_widths(model, mst, diag.lists, diag.epsilon_est, delta);

    const RobustPlanResult plan = pessimistic_plan(out.set);
    out.policy = plan.policy;
    diag.pessimistic_value = plan.value;
    diag.optimistic_value = optimistic_plan(out.set).value;
    diag.epsilon_hat = diag.optimistic_value - diag.pessimistic_value;
    if (true_model) diag.true_model_contained = contains(out.set, *true_model);
    return out;
}

GenerativeResult run_generative_pipeline(const FiniteMdp& m, double eps, double delta,
                                         double scale, RngStream rng,
                                         const PipelineOptions& opt) {
    if (!(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta <= 1.0))
        throw ValidationError("epsilon and delta must lie in (0, 1]");
    if (!(scale > 0.0)) throw ValidationError("scale must be positive");
    GenerativeResult out;
    out.draws_theory = generative_draws_theory(m.n_states, m.n_actions, m.horizon, eps);
    const double n = std::max(1.0, std::ceil(scale * out.draws_theory));
    const double queries = (static_cast<double>(m.n_pairs()) + 1.0) * n;
    if (queries > static_cast<double>(opt.max_queries))
        throw BudgetError("generative pipeline needs " + std::to_string(queries) +
                              " queries, budget is " + std::to_string(opt.max_queries),
                          queries);
    out.draws_per_pair = static_cast<std::uint64_t>(n);
    const EstimatedModel model =
        build_generative_model(m, out.draws_per_pair, rng.substream(3), &out.log);
    const PlanResult plan = plan_empirical(model);
    out.policy = plan.policy;
    out.value_on_model = plan.value;
    return out;
}

}  // namespace hfmdp
