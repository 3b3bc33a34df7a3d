#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfmdp/oracle.hpp"
#include "hfmdp/rng.hpp"
#include "hfmdp/types.hpp"

// Executable checkers for the structural and concentration claims the library
// relies on. Every checker returns a CheckReport arranged so that the claim
// reads lhs <= rhs; pass reflects exactly that comparison (with a small
// floating-point tolerance), and hypothesis_ok records whether the claim's
// own preconditions held. A checker never passes silently on unsatisfied
// hypotheses: callers assert pass only when hypothesis_ok.

namespace hfmdp {

struct CheckReport {
    std::string lemma_id;
    std::string instance_id;
    bool hypothesis_ok = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    bool pass = false;
};

CheckReport make_report(const std::string& lemma, const std::string& instance,
                        bool hypothesis_ok, double lhs, double rhs, double tol = 1e-9);

/// 4 |S|^(4|S|) as a double.
double chain_blowup_constant(int n_states);

// --- Markov-chain reaching-probability claims -------------------------------

/// Pigeonhole excision: a state sequence longer than |S| shrinks to one of
/// length <= |S| with the same final state and no smaller probability.
CheckReport check_reduction(const MarkovChain& c, const std::vector<int>& sequence);

/// sum_{h<=2L} p_h(s) <= 4 |S|^(4|S|) sum_{h<L} p_h(s), for L >= |S|.
CheckReport check_mc_main(const MarkovChain& c, int s, int L);

/// sum_{h<4|S|} p_h(s) <= 4 |S|^(4|S|) sum_{h<|S|} p_h(s).
CheckReport check_sum_unexpanded(const MarkovChain& c, int s);

/// Same with the arithmetic progression beta*h + alpha, alpha >= 0, beta >= 1.
CheckReport check_sum_expanded(const MarkovChain& c, int s, int alpha, int beta);

// --- Stationary-policy value comparisons ------------------------------------

/// With gamma = 1 - ln(8|S|^(4|S|))/H and H >= 2 ln(8|S|^(4|S|)):
/// V_H / (64 |S|^(8|S|)) <= V_gamma <= 2 V_H for stationary pi.
CheckReport check_discount_finite(const FiniteMdp& m, const Policy& pi);

/// V_{floor(H/2)} >= V_H / (4 |S|^(4|S|)) for stationary pi, H >= 2|S|.
CheckReport check_half_trajectory(const FiniteMdp& m, const Policy& pi);

/// best stationary >= optimal non-stationary / (128 |S|^(8|S|)).
CheckReport check_stationary_near_optimal(const FiniteMdp& m);

/// Best stationary probability of executing z within floor(H/2) steps is at
/// least the best non-stationary probability within H steps divided by
/// 512 (|S|+1)^(12(|S|+1)). Exact via the absorbing-state construction.
CheckReport check_reaching_stationary(const FiniteMdp& m, int z_s, int z_a);

/// If some policy has eps-quantile >= f visits of z (initial distribution
/// pinned at z's state), some stationary policy's half-horizon 1/2-quantile is
/// >= floor(eps f / (2048 |S|^(12|S|))). The witness hypothesis is verified by
/// the exact count-augmented DP; `policy_cap` bounds the stationary
/// enumeration on the conclusion side.
CheckReport check_quantile_comparison(const FiniteMdp& m, int z_s, int z_a, double eps,
                                      int f, std::uint64_t policy_cap = 100000);

// --- Multiplicative perturbation of probability products --------------------

struct MultAddInstance {
    std::vector<double> p;      // entries in [1/m_bar, 1], sum <= 1
    std::vector<double> delta;  // |delta_i| <= eps sqrt(p_i/m_bar), |sum| <= eps n_bar/m_bar
    std::vector<double> gamma;  // |gamma_i| <= sqrt(p_i m_bar)
    double m = 0.0;             // in [0, m_bar]
    double m_bar = 1.0;
    double n_bar = 1.0;
    double eps = 0.0;           // in [0, 1/(8 n_bar)]
};

/// Ratio of prod (p_i + delta_i)^(p_i m + gamma_i) to prod p_i^(...) lies in
/// [1 - 8 n_bar eps, 1 + 8 n_bar eps]; log-space evaluation.
CheckReport check_mult_add(const MultAddInstance& inst);

/// Hypothesis-satisfying random instance.
MultAddInstance sample_mult_add_instance(RngStream& rng);

/// x - x^2 <= log(1+x) <= x and 1 + x <= e^x <= 1 + 2|x| on a grid of
/// n_grid points over [-1/2, 1/2]; lhs is the worst violation, rhs is 0.
CheckReport check_log_facts(int n_grid = 10000);

// --- Trajectory-level concentration (Monte Carlo) ---------------------------

/// Per-episode count of (s,a,s') exceeds (2 Q_{d/2} + 4)/d * P(s'|s,a) with
/// frequency <= d (+3 binomial stderr); Q from the exact visitation DP.
CheckReport check_visit_upperbound(const FiniteMdp& m, const Policy& pi, int s, int a,
                                   int s2, double d, std::uint64_t trials, RngStream rng);

/// |count(s,a,s') - P count(s,a)| exceeds sqrt((4 Q_{d/2} + 8)/d * P) with
/// frequency <= d (+3 stderr).
CheckReport check_martingale_concentration(const FiniteMdp& m, const Policy& pi, int s,
                                           int a, int s2, double d, std::uint64_t trials,
                                           RngStream rng);

/// Pooled-count and empirical-transition bounds over datasets of K episodes:
/// the conjunction of the three displayed conclusions fails with frequency
/// <= d (+3 stderr). Hypotheses: K d >= 64 log(4/d) and the d/4-quantile of
/// the per-episode count is >= 1.
CheckReport check_prob_approx_error(const FiniteMdp& m, const Policy& pi, int s, int a,
                                    int s2, double d, std::uint64_t episodes_per_trial,
                                    std::uint64_t trials, RngStream rng);

// --- Value perturbation ------------------------------------------------------

/// With m_bar(s,a) the eps/(12|S||A|)-quantile of visits under pi and the
/// three closeness conditions on (P_hat, R_hat, mu_hat) verified exactly:
/// V_{M_hat} >= V_M - eps.
CheckReport check_perturbation_lower(const FiniteMdp& m, const FiniteMdp& m_hat,
                                     const Policy& pi, double eps);

/// Identical P and mu, reward closeness only: V_{M_hat} <= V_M + eps.
CheckReport check_perturbation_upper(const FiniteMdp& m, const FiniteMdp& m_hat,
                                     const Policy& pi, double eps);

/// Horizon-based closeness on every (s,a,s'): |V_{M_hat} - V_M| <= eps/2.
CheckReport check_perturbation_generative(const FiniteMdp& m, const FiniteMdp& m_hat,
                                          const Policy& pi, double eps);

/// If some policy visits (s,a) more than once with probability >= eps
/// (exact count-augmented DP), the max reward-support value at (s,a) is
/// <= 2|S|/H. Hypotheses include H >= |S| and bounded total reward.
CheckReport check_reward_structure(const FiniteMdp& m, int s, int a, double eps);

/// For every (s,a): the schedule quantile at percentile
/// eps (|S|+1)^(-12(|S|+1)) / 1024 (Monte Carlo over mc_lists full schedule
/// simulations) is >= eps * m_eps(s,a) / (4096 |S|^(12|S|)), where m_eps is
/// the exact best non-stationary eps-quantile (exhaustive enumeration).
CheckReport check_stationary_quantile(const FiniteMdp& m, double eps,
                                      std::uint64_t mc_lists, RngStream rng,
                                      std::uint64_t policy_cap = 100000);

// --- Hypothesis-satisfying perturbation samplers -----------------------------

/// Random model within the lower-bound lemma's closeness region around m
/// (free but valid rows where the quantile m_bar(s,a) is 0).
FiniteMdp sample_perturbation_lower(const FiniteMdp& m, const Policy& pi, double eps,
                                    RngStream& rng);

/// Rewards-only perturbation within the upper-bound lemma's region.
FiniteMdp sample_perturbation_upper(const FiniteMdp& m, const Policy& pi, double eps,
                                    RngStream& rng);

/// Perturbation within the generative lemma's H-based region.
FiniteMdp sample_perturbation_generative(const FiniteMdp& m, double eps, RngStream& rng);

}  // namespace hfmdp
