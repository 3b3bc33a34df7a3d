#include "hfmdp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfmdp/collect.hpp"

namespace hfmdp {

namespace {

std::string pair_tag(int s, int a) {
    return "(" + std::to_string(s) + "," + std::to_string(a) + ")";
}

// One simulated episode; returns the (s,a) and (s,a,s') visit counts.
std::pair<std::uint64_t, std::uint64_t> simulate_counts(const FiniteMdp& m, const Policy& pi,
                                                        int s, int a, int s2,
                                                        RngStream& rng) {
    std::uint64_t c_sa = 0, c_sas2 = 0;
    int cur = rng.sample_discrete(m.initial);
    for (int h = 0; h < m.horizon; ++h) {
        const int act = pi.action(h, cur);
        const int nxt = rng.sample_discrete(m.row(cur, act));
        if (cur == s && act == a) {
            ++c_sa;
            if (nxt == s2) ++c_sas2;
        }
        cur = nxt;
    }
    return {c_sa, c_sas2};
}

Policy nonstationary_from_index(std::uint64_t idx, int n_states, int n_actions, int horizon) {
    std::vector<std::vector<int>> maps(horizon, std::vector<int>(n_states, 0));
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < n_states; ++s) {
            maps[h][s] = static_cast<int>(idx % n_actions);
            idx /= n_actions;
        }
    return Policy::make_nonstationary(std::move(maps));
}

double nonstationary_policy_count(int n_states, int n_actions, int horizon) {
    return std::pow(static_cast<double>(n_actions),
                    static_cast<double>(n_states) * horizon);
}

// Moves probability mass between random entry pairs; keeps the vector inside
// [0,1], the sum unchanged, and every |perturbation_i| <= caps[i].
std::vector<double> perturb_within(const std::vector<double>& base,
                                   const std::vector<double>& caps, RngStream& rng,
                                   int rounds) {
    const int n = static_cast<int>(base.size());
    std::vector<double> out = base;
    if (n < 2) return out;
    for (int r = 0; r < rounds; ++r) {
        const int i = static_cast<int>(rng.next_u64() % n);
        int j = static_cast<int>(rng.next_u64() % (n - 1));
        if (j >= i) ++j;
        // remaining one-sided budgets for giving from i and receiving at j
        const double give = std::min({caps[i] - (base[i] - out[i]), out[i]});
        const double take = std::min({caps[j] - (out[j] - base[j]), 1.0 - out[j]});
        const double amt = rng.next_double() * std::max(0.0, std::min(give, take));
        out[i] -= amt;
        out[j] += amt;
    }
    return out;
}

}  // namespace

CheckReport make_report(const std::string& lemma, const std::string& instance,
                        bool hypothesis_ok, double lhs, double rhs, double tol) {
    CheckReport r;
    r.lemma_id = lemma;
    r.instance_id = instance;
    r.hypothesis_ok = hypothesis_ok;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.pass = lhs <= rhs + tol;
    return r;
}

double chain_blowup_constant(int n_states) {
    return 4.0 * std::pow(static_cast<double>(n_states), 4.0 * n_states);
}

CheckReport check_reduction(const MarkovChain& c, const std::vector<int>& sequence) {
    const bool hyp = static_cast<int>(sequence.size()) > c.n_states;
    std::vector<int> reduced = sequence;
    while (static_cast<int>(reduced.size()) > c.n_states) {
        // smallest j whose state already appeared, excise [i, j)
        int i = -1, j = -1;
        for (size_t b = 1; b < reduced.size() && j < 0; ++b)
            for (size_t a = 0; a < b; ++a)
                if (reduced[a] == reduced[b]) {
                    i = static_cast<int>(a);
                    j = static_cast<int>(b);
                    break;
                }
        if (j < 0) break;  // cannot happen when length > |S|
        reduced.erase(reduced.begin() + i, reduced.begin() + j);
    }
    const double p_orig = sequence_probability(c, sequence);
    const double p_red = sequence_probability(c, reduced);
    const bool structural = static_cast<int>(reduced.size()) <= c.n_states &&
                            reduced.back() == sequence.back();
    CheckReport r = make_report("lem:reduction", "len=" + std::to_string(sequence.size()),
                                hyp, p_orig, p_red, 1e-12);
    r.pass = r.pass && structural;
    return r;
}

CheckReport check_mc_main(const MarkovChain& c, int s, int L) {
    const bool hyp = L >= c.n_states;
    const auto occ = occupancy_sequence(c, 2 * L);
    double lhs = 0, head = 0;
    for (int h = 0; h <= 2 * L; ++h) {
        lhs += occ[h][s];
        if (h < L) head += occ[h][s];
    }
    const double rhs = chain_blowup_constant(c.n_states) * head;
    return make_report("lem:mc_main", "s=" + std::to_string(s) + ",L=" + std::to_string(L),
                       hyp, lhs, rhs, 1e-9);
}

CheckReport check_sum_unexpanded(const MarkovChain& c, int s) {
    CheckReport r = check_sum_expanded(c, s, 0, 1);
    r.lemma_id = "lem:sum_unexpanded";
    return r;
}

CheckReport check_sum_expanded(const MarkovChain& c, int s, int alpha, int beta) {
    const bool hyp = alpha >= 0 && beta >= 1;
    const int S = c.n_states;
    const int top = hyp ? beta * (4 * S - 1) + alpha : 0;
    const auto occ = occupancy_sequence(c, top);
    double lhs = 0, head = 0;
    for (int h = 0; h < 4 * S; ++h) {
        const double p = hyp ? occ[beta * h + alpha][s] : 0.0;
        lhs += p;
        if (h < S) head += p;
    }
    const double rhs = chain_blowup_constant(S) * head;
    return make_report("lem:sum_expanded",
                       "s=" + std::to_string(s) + ",a=" + std::to_string(alpha) +
                           ",b=" + std::to_string(beta),
                       hyp, lhs, rhs, 1e-9);
}

CheckReport check_discount_finite(const FiniteMdp& m, const Policy& pi) {
    const int S = m.n_states;
    const double log_term = std::log(2.0 * chain_blowup_constant(S));  // ln(8 |S|^4|S|)
    const bool hyp = pi.stationary && m.horizon >= 2.0 * log_term;
    double lhs = 0, rhs = 0;
    if (hyp) {
        const double gamma = 1.0 - log_term / m.horizon;
        const double v_h = finite_horizon_value(m, pi);
        const double v_g = discounted_value(m, pi, gamma);
        const double ratio = 64.0 * std::pow(static_cast<double>(S), 8.0 * S);
        // worst of the two sides, arranged as violation <= 0
        lhs = std::max(v_h / ratio - v_g, v_g - 2.0 * v_h);
        rhs = 0.0;
    }
    return make_report("lem:discount_finite_compare", "H=" + std::to_string(m.horizon), hyp,
                       lhs, rhs, 1e-9);
}

CheckReport check_half_trajectory(const FiniteMdp& m, const Policy& pi) {
    const bool hyp = pi.stationary && m.horizon >= 2 * m.n_states;
    double lhs = 0, rhs = 0;
    if (hyp) {
        lhs = finite_horizon_value(m, pi) / chain_blowup_constant(m.n_states);
        rhs = finite_horizon_value(m, pi, m.horizon / 2);
    }
    return make_report("lem:half_trajectory", "H=" + std::to_string(m.horizon), hyp, lhs, rhs,
                       1e-9);
}

CheckReport check_stationary_near_optimal(const FiniteMdp& m) {
    const int S = m.n_states;
    const double log_term = std::log(2.0 * chain_blowup_constant(S));
    const bool hyp = m.horizon >= 2.0 * log_term;
    const double denom = 128.0 * std::pow(static_cast<double>(S), 8.0 * S);
    const double lhs = optimal_nonstationary(m).value / denom;
    const double rhs = best_stationary(m).value;
    return make_report("cor:non_stationary_nearly_optimal", "H=" + std::to_string(m.horizon),
                       hyp, lhs, rhs, 1e-9);
}

namespace {

// Absorbing construction: executing z jumps to a fresh terminal state and pays
// 1; everything else keeps the original dynamics and pays 0.
FiniteMdp reach_mdp(const FiniteMdp& m, int z_s, int z_a) {
    FiniteMdp r;
    r.n_states = m.n_states + 1;
    r.n_actions = m.n_actions;
    r.horizon = m.horizon;
    const int term = m.n_states;
    r.transition.assign(r.n_pairs(), std::vector<double>(r.n_states, 0.0));
    r.reward.assign(r.n_pairs(), DiscreteReward::point_mass(0.0));
    for (int s = 0; s < r.n_states; ++s) {
        for (int a = 0; a < r.n_actions; ++a) {
            auto& row = r.transition[r.pair_index(s, a)];
            if (s == term || (s == z_s && a == z_a)) {
                row[term] = 1.0;
            } else {
                for (int s2 = 0; s2 < m.n_states; ++s2) row[s2] = m.row(s, a)[s2];
            }
            if (s == z_s && a == z_a)
                r.reward[r.pair_index(s, a)] = DiscreteReward::point_mass(1.0);
        }
    }
    r.initial = m.initial;
    r.initial.push_back(0.0);
    return r;
}

}  // namespace

CheckReport check_reaching_stationary(const FiniteMdp& m, int z_s, int z_a) {
    const double n = m.n_states + 1.0;
    const double log_term = std::log(8.0 * std::pow(n, 4.0 * n));
    const bool hyp = m.horizon >= 2.0 * log_term;
    const FiniteMdp aug = reach_mdp(m, z_s, z_a);
    const double best_nonstat = optimal_nonstationary(aug, m.horizon).value;
    const double best_stat_half = best_stationary(aug, m.horizon / 2).value;
    const double lhs = best_nonstat / (512.0 * std::pow(n, 12.0 * n));
    return make_report("cor:reaching_stationary", "z=" + pair_tag(z_s, z_a), hyp, lhs,
                       best_stat_half, 1e-9);
}

CheckReport check_quantile_comparison(const FiniteMdp& m, int z_s, int z_a, double eps,
                                      int f, std::uint64_t policy_cap) {
    const int S = m.n_states;
    const double log_term = std::log(2.0 * chain_blowup_constant(S));
    bool hyp = m.horizon >= 2.0 * log_term && f >= 0 && f <= m.horizon && eps > 0.0 &&
               eps <= 1.0;
    // initial distribution must be pinned at z's state
    for (int s = 0; s < S && hyp; ++s)
        if (std::fabs(m.initial[s] - (s == z_s ? 1.0 : 0.0)) > kProbTol) hyp = false;
    // witness via the exact count-augmented DP (at H large enough for the
    // claim's own hypothesis, enumerating per-step policies is out of reach)
    if (hyp && f > 0 && max_visit_probability(m, z_s, z_a, f) < eps) hyp = false;
    const double lhs =
        std::floor(eps * f / (2048.0 * std::pow(static_cast<double>(S), 12.0 * S)));
    int best_q = 0;
    for (const Policy& pi : enumerate_stationary_policies(m, policy_cap))
        best_q = std::max(
            best_q, exact_quantile(visitation_distribution(m, pi, z_s, z_a, m.horizon / 2),
                                   0.5));
    return make_report("cor:quantile_comparison",
                       "z=" + pair_tag(z_s, z_a) + ",f=" + std::to_string(f), hyp, lhs,
                       static_cast<double>(best_q), 1e-12);
}

CheckReport check_mult_add(const MultAddInstance& inst) {
    const size_t n = inst.p.size();
    bool hyp = inst.m_bar >= 1.0 && inst.n_bar >= static_cast<double>(n) && n >= 1 &&
               inst.eps >= 0.0 && inst.eps <= 1.0 / (8.0 * inst.n_bar) && inst.m >= 0.0 &&
               inst.m <= inst.m_bar && inst.delta.size() == n && inst.gamma.size() == n;
    double sum_p = 0, sum_d = 0;
    for (size_t i = 0; i < n && hyp; ++i) {
        sum_p += inst.p[i];
        sum_d += inst.delta[i];
        if (inst.p[i] < 1.0 / inst.m_bar - 1e-12 || inst.p[i] > 1.0 + 1e-12) hyp = false;
        if (std::fabs(inst.delta[i]) >
            inst.eps * std::sqrt(inst.p[i] / inst.m_bar) + 1e-12)
            hyp = false;
        if (std::fabs(inst.gamma[i]) > std::sqrt(inst.p[i] * inst.m_bar) + 1e-12)
            hyp = false;
    }
    if (sum_p > 1.0 + 1e-12) hyp = false;
    if (std::fabs(sum_d) > inst.eps * inst.n_bar / inst.m_bar + 1e-12) hyp = false;
    double log_ratio = 0;
    for (size_t i = 0; i < n; ++i)
        log_ratio += (inst.p[i] * inst.m + inst.gamma[i]) *
                     (std::log(inst.p[i] + inst.delta[i]) - std::log(inst.p[i]));
    const double ratio = std::exp(log_ratio);
    const double lhs = std::fabs(ratio - 1.0);
    const double rhs = 8.0 * inst.n_bar * inst.eps;
    return make_report("lem:mult-add", "n=" + std::to_string(n), hyp, lhs, rhs, 1e-9);
}

MultAddInstance sample_mult_add_instance(RngStream& rng) {
    MultAddInstance inst;
    const int n_bar = 1 + static_cast<int>(rng.next_u64() % 6);
    const int n = 1 + static_cast<int>(rng.next_u64() % n_bar);
    inst.n_bar = n_bar;
    inst.m_bar = static_cast<double>(n + rng.next_u64() % 50);
    inst.eps = rng.next_double() / (8.0 * n_bar);
    inst.m = rng.next_double() * inst.m_bar;
    // p_i = 1/m_bar + Dirichlet share of a random surplus; keeps sum <= 1
    const double base = static_cast<double>(n) / inst.m_bar;
    const double surplus = rng.next_double() * (1.0 - base);
    std::vector<double> g(n);
    double gsum = 0;
    for (int i = 0; i < n; ++i) {
        g[i] = -std::log(1.0 - rng.next_double());
        gsum += g[i];
    }
    inst.p.resize(n);
    inst.delta.resize(n);
    inst.gamma.resize(n);
    for (int i = 0; i < n; ++i) {
        inst.p[i] = 1.0 / inst.m_bar + surplus * g[i] / gsum;
        const double db = inst.eps * std::sqrt(inst.p[i] / inst.m_bar);
        inst.delta[i] = (2.0 * rng.next_double() - 1.0) * db;
        const double gb = std::sqrt(inst.p[i] * inst.m_bar);
        inst.gamma[i] = (2.0 * rng.next_double() - 1.0) * gb;
    }
    // enforce the aggregate condition |sum delta| <= eps n_bar / m_bar
    double sum_d = std::accumulate(inst.delta.begin(), inst.delta.end(), 0.0);
    const double agg = inst.eps * inst.n_bar / inst.m_bar;
    if (std::fabs(sum_d) > agg) {
        const double shrink = agg / std::fabs(sum_d);
        for (double& d : inst.delta) d *= shrink;
    }
    return inst;
}

CheckReport check_log_facts(int n_grid) {
    double worst = -1e300;
    for (int i = 0; i <= n_grid; ++i) {
        const double x = -0.5 + static_cast<double>(i) / n_grid;
        const double lg = std::log1p(x);
        const double ex = std::exp(x);
        worst = std::max({worst, x - x * x - lg, lg - x, 1.0 + x - ex,
                          ex - 1.0 - 2.0 * std::fabs(x)});
    }
    return make_report("fac:log", "grid=" + std::to_string(n_grid), true, worst, 0.0, 1e-12);
}

CheckReport check_visit_upperbound(const FiniteMdp& m, const Policy& pi, int s, int a,
                                   int s2, double d, std::uint64_t trials, RngStream rng) {
    const bool hyp = d > 0.0 && d < 1.0 && trials > 0;
    const int q = exact_quantile(visitation_distribution(m, pi, s, a), d / 2.0);
    const double bound = (2.0 * q + 4.0) / d * m.row(s, a)[s2];
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto [c_sa, c_sas2] = simulate_counts(m, pi, s, a, s2, rng);
        (void)c_sa;
        if (static_cast<double>(c_sas2) > bound + 1e-12) ++violations;
    }
    const double freq = static_cast<double>(violations) / static_cast<double>(trials);
    const double se = std::sqrt(d * (1.0 - d) / static_cast<double>(trials));
    return make_report("lem:upperbound_on_visits",
                       pair_tag(s, a) + "->" + std::to_string(s2) + ",d=" + std::to_string(d),
                       hyp, freq, d + 3.0 * se, 0.0);
}

CheckReport check_martingale_concentration(const FiniteMdp& m, const Policy& pi, int s,
                                           int a, int s2, double d, std::uint64_t trials,
                                           RngStream rng) {
    const bool hyp = d > 0.0 && d < 1.0 && trials > 0;
    const int q = exact_quantile(visitation_distribution(m, pi, s, a), d / 2.0);
    const double p = m.row(s, a)[s2];
    const double bound = std::sqrt((4.0 * q + 8.0) / d * p);
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto [c_sa, c_sas2] = simulate_counts(m, pi, s, a, s2, rng);
        const double dev = std::fabs(static_cast<double>(c_sas2) -
                                     p * static_cast<double>(c_sa));
        if (dev > bound + 1e-12) ++violations;
    }
    const double freq = static_cast<double>(violations) / static_cast<double>(trials);
    const double se = std::sqrt(d * (1.0 - d) / static_cast<double>(trials));
    return make_report("lemma:martingal_concent",
                       pair_tag(s, a) + "->" + std::to_string(s2) + ",d=" + std::to_string(d),
                       hyp, freq, d + 3.0 * se, 0.0);
}

CheckReport check_prob_approx_error(const FiniteMdp& m, const Policy& pi, int s, int a,
                                    int s2, double d, std::uint64_t episodes_per_trial,
                                    std::uint64_t trials, RngStream rng) {
    const double k = static_cast<double>(episodes_per_trial);
    const int q = exact_quantile(visitation_distribution(m, pi, s, a), d / 4.0);
    const bool hyp = d > 0.0 && d < 1.0 && k * d >= 64.0 * std::log(4.0 / d) && q >= 1;
    const double p = m.row(s, a)[s2];
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t c_sa = 0, c_sas2 = 0;
        for (std::uint64_t ep = 0; ep < episodes_per_trial; ++ep) {
            const auto [e_sa, e_sas2] = simulate_counts(m, pi, s, a, s2, rng);
            c_sa += e_sa;
            c_sas2 += e_sas2;
        }
        bool ok = static_cast<double>(c_sa) >= k * d * q / 8.0;
        if (ok) {  // c_sa >= 1 on this branch whenever q >= 1
            const double cnt = static_cast<double>(c_sa);
            const double p_hat = static_cast<double>(c_sas2) / cnt;
            const double err = std::fabs(p_hat - p);
            ok = err <= std::sqrt(32.0 * p / (d * cnt)) + 1e-12 &&
                 err <= std::min(std::sqrt(64.0 * p_hat / (d * d * cnt)),
                                 64.0 / (d * cnt)) +
                            1e-12;
        }
        if (!ok) ++violations;
    }
    const double freq = static_cast<double>(violations) / static_cast<double>(trials);
    const double se = std::sqrt(d * (1.0 - d) / static_cast<double>(trials));
    return make_report("lem:prob_approx_error",
                       pair_tag(s, a) + "->" + std::to_string(s2) + ",d=" + std::to_string(d) +
                           ",K=" + std::to_string(episodes_per_trial),
                       hyp, freq, d + 3.0 * se, 0.0);
}

namespace {

std::vector<int> visit_quantiles(const FiniteMdp& m, const Policy& pi, double level) {
    std::vector<int> q(m.n_pairs(), 0);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            q[m.pair_index(s, a)] =
                exact_quantile(visitation_distribution(m, pi, s, a), level);
    return q;
}

double lower_p_cap(double eps, double p, double m_bar, int S, int A) {
    const double inner = eps / (72.0 * m_bar * S * A);
    return eps / (96.0 * S * S * A) * std::max(std::sqrt(inner * p), inner);
}

double reward_cap(double eps, double r2, double m_bar, int S, int A, double lead) {
    return eps / (lead * S * A) * std::max(std::sqrt(r2 / m_bar), 1.0 / m_bar);
}

double gen_p_cap(double eps, double p, double H, int S, int A) {
    const double inner = eps / (576.0 * H * S * A);
    return eps / (192.0 * S * S * A) * std::max(std::sqrt(inner * p), inner);
}

bool same_dims(const FiniteMdp& a, const FiniteMdp& b) {
    return a.n_states == b.n_states && a.n_actions == b.n_actions && a.horizon == b.horizon;
}

}  // namespace

CheckReport check_perturbation_lower(const FiniteMdp& m, const FiniteMdp& m_hat,
                                     const Policy& pi, double eps) {
    const int S = m.n_states, A = m.n_actions;
    bool hyp = same_dims(m, m_hat) && eps > 0.0 && eps <= 0.5;
    if (hyp) {
        const auto m_bar = visit_quantiles(m, pi, eps / (12.0 * S * A));
        for (int sa = 0; sa < m.n_pairs() && hyp; ++sa) {
            if (m_bar[sa] < 1) continue;  // unconstrained pair
            const int s = sa / A, a = sa % A;
            for (int s2 = 0; s2 < S && hyp; ++s2) {
                const double cap = lower_p_cap(eps, m.row(s, a)[s2], m_bar[sa], S, A);
                if (std::fabs(m_hat.transition[sa][s2] - m.transition[sa][s2]) >
                    cap + 1e-12)
                    hyp = false;
            }
            const double rcap =
                reward_cap(eps, m.reward_dist(s, a).second_moment(), m_bar[sa], S, A, 24.0);
            if (std::fabs(m_hat.reward[sa].mean() - m.reward[sa].mean()) > rcap + 1e-12)
                hyp = false;
        }
        for (int s = 0; s < S && hyp; ++s)
            if (std::fabs(m.initial[s] - m_hat.initial[s]) > eps / (6.0 * S) + 1e-12)
                hyp = false;
    }
    const double v = finite_horizon_value(m, pi);
    const double v_hat = hyp ? finite_horizon_value(m_hat, pi) : 0.0;
    return make_report("lem:perturbation_lower_bound", "eps=" + std::to_string(eps), hyp,
                       v - eps, v_hat, 1e-9);
}

CheckReport check_perturbation_upper(const FiniteMdp& m, const FiniteMdp& m_hat,
                                     const Policy& pi, double eps) {
    const int S = m.n_states, A = m.n_actions;
    bool hyp = same_dims(m, m_hat) && eps > 0.0 && eps <= 0.5;
    if (hyp) {
        for (int sa = 0; sa < m.n_pairs() && hyp; ++sa)
            for (int s2 = 0; s2 < S; ++s2)
                if (m.transition[sa][s2] != m_hat.transition[sa][s2]) hyp = false;
        for (int s = 0; s < S && hyp; ++s)
            if (m.initial[s] != m_hat.initial[s]) hyp = false;
    }
    if (hyp) {
        const auto m_bar = visit_quantiles(m, pi, eps / (12.0 * S * A));
        for (int sa = 0; sa < m.n_pairs() && hyp; ++sa) {
            if (m_bar[sa] < 1) continue;
            const int s = sa / A, a = sa % A;
            const double rcap =
                reward_cap(eps, m.reward_dist(s, a).second_moment(), m_bar[sa], S, A, 24.0);
            if (std::fabs(m_hat.reward[sa].mean() - m.reward[sa].mean()) > rcap + 1e-12)
                hyp = false;
        }
    }
    const double v = finite_horizon_value(m, pi);
    const double v_hat = hyp ? finite_horizon_value(m_hat, pi) : 0.0;
    return make_report("lem:perturbation_upper_bound", "eps=" + std::to_string(eps), hyp,
                       v_hat, v + eps, 1e-9);
}

CheckReport check_perturbation_generative(const FiniteMdp& m, const FiniteMdp& m_hat,
                                          const Policy& pi, double eps) {
    const int S = m.n_states, A = m.n_actions;
    const double h = m.horizon;
    bool hyp = same_dims(m, m_hat) && eps > 0.0 && eps <= 0.5;
    for (int sa = 0; sa < m.n_pairs() && hyp; ++sa) {
        const int s = sa / A, a = sa % A;
        for (int s2 = 0; s2 < S && hyp; ++s2) {
            const double cap = gen_p_cap(eps, m.row(s, a)[s2], h, S, A);
            if (std::fabs(m_hat.transition[sa][s2] - m.transition[sa][s2]) > cap + 1e-12)
                hyp = false;
        }
        const double rcap =
            reward_cap(eps, m.reward_dist(s, a).second_moment(), h, S, A, 48.0);
        if (std::fabs(m_hat.reward[sa].mean() - m.reward[sa].mean()) > rcap + 1e-12)
            hyp = false;
    }
    for (int s = 0; s < S && hyp; ++s)
        if (std::fabs(m.initial[s] - m_hat.initial[s]) > eps / (12.0 * S) + 1e-12)
            hyp = false;
    const double v = finite_horizon_value(m, pi);
    const double v_hat = hyp ? finite_horizon_value(m_hat, pi) : v;
    return make_report("lem:perturbation_gen_model", "eps=" + std::to_string(eps), hyp,
                       std::fabs(v_hat - v), eps / 2.0, 1e-9);
}

CheckReport check_reward_structure(const FiniteMdp& m, int s, int a, double eps) {
    bool hyp = m.horizon >= m.n_states && eps > 0.0 &&
               validate_bounded_total_reward(m).ok;
    if (hyp && max_visit_probability(m, s, a, 2) < eps) hyp = false;
    const double lhs = m.reward_dist(s, a).max_value();
    const double rhs = 2.0 * m.n_states / static_cast<double>(m.horizon);
    return make_report("lem:reward", pair_tag(s, a) + ",eps=" + std::to_string(eps), hyp, lhs,
                       rhs, 1e-12);
}

CheckReport check_stationary_quantile(const FiniteMdp& m, double eps,
                                      std::uint64_t mc_lists, RngStream rng,
                                      std::uint64_t policy_cap) {
    const int S = m.n_states, A = m.n_actions, H = m.horizon;
    const double n_pol = nonstationary_policy_count(S, A, H);
    if (n_pol > static_cast<double>(policy_cap))
        throw BudgetError("stationary-quantile check needs " + std::to_string(n_pol) +
                              " enumerated policies",
                          n_pol);
    const bool hyp = eps > 0.0 && eps <= 1.0;
    // exact best non-stationary eps-quantile per pair
    std::vector<int> m_eps(m.n_pairs(), 0);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(n_pol); ++i) {
        const Policy pi = nonstationary_from_index(i, S, A, H);
        for (int sa = 0; sa < m.n_pairs(); ++sa) {
            const int q = exact_quantile(visitation_distribution(m, pi, sa / A, sa % A), eps);
            m_eps[sa] = std::max(m_eps[sa], q);
        }
    }
    // Monte Carlo schedule quantiles at the tiny percentile
    CollectOptions opt;
    opt.max_episodes = ~std::uint64_t{0};
    const auto counts = schedule_counts(m, mc_lists, rng, nullptr, opt);
    const double percentile =
        eps * std::pow(S + 1.0, -12.0 * (S + 1.0)) / 1024.0;
    const std::uint64_t rank = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(percentile * static_cast<double>(mc_lists))));
    double worst = -1e300;
    std::vector<std::uint64_t> vals(counts.size());
    for (int sa = 0; sa < m.n_pairs(); ++sa) {
        for (size_t i = 0; i < counts.size(); ++i) vals[i] = counts[i][sa];
        std::nth_element(vals.begin(), vals.begin() + (rank - 1), vals.end(),
                         std::greater<std::uint64_t>());
        const double q_st = static_cast<double>(vals[rank - 1]);
        const double need =
            eps * m_eps[sa] / (4096.0 * std::pow(static_cast<double>(S), 12.0 * S));
        worst = std::max(worst, need - q_st);
    }
    return make_report("lem:stationary_quantile", "eps=" + std::to_string(eps), hyp, worst,
                       0.0, 1e-12);
}

FiniteMdp sample_perturbation_lower(const FiniteMdp& m, const Policy& pi, double eps,
                                    RngStream& rng) {
    const int S = m.n_states, A = m.n_actions;
    FiniteMdp out = m;
    const auto m_bar = visit_quantiles(m, pi, eps / (12.0 * S * A));
    for (int sa = 0; sa < m.n_pairs(); ++sa) {
        const int s = sa / A, a = sa % A;
        std::vector<double> caps(S);
        for (int s2 = 0; s2 < S; ++s2)
            caps[s2] = m_bar[sa] >= 1
                           ? lower_p_cap(eps, m.row(s, a)[s2], m_bar[sa], S, A)
                           : 0.1;  // unconstrained pair: any valid row nearby
        out.transition[sa] = perturb_within(m.transition[sa], caps, rng, 4 * S);
        const double rcap = m_bar[sa] >= 1 ? reward_cap(eps, m.reward_dist(s, a).second_moment(),
                                                        m_bar[sa], S, A, 24.0)
                                           : 0.05;
        const double shift = (2.0 * rng.next_double() - 1.0) * rcap;
        out.reward[sa] = DiscreteReward::point_mass(
            std::clamp(m.reward[sa].mean() + shift, 0.0, 1.0));
    }
    std::vector<double> mu_caps(S, eps / (6.0 * S));
    out.initial = perturb_within(m.initial, mu_caps, rng, 4 * S);
    return out;
}

FiniteMdp sample_perturbation_upper(const FiniteMdp& m, const Policy& pi, double eps,
                                    RngStream& rng) {
    const int S = m.n_states, A = m.n_actions;
    FiniteMdp out = m;
    const auto m_bar = visit_quantiles(m, pi, eps / (12.0 * S * A));
    for (int sa = 0; sa < m.n_pairs(); ++sa) {
        if (m_bar[sa] < 1) continue;  // keep untouched: lemma leaves them free,
                                      // corpora stay inside bounded total reward
        const int s = sa / A, a = sa % A;
        const double rcap =
            reward_cap(eps, m.reward_dist(s, a).second_moment(), m_bar[sa], S, A, 24.0);
        const double shift = (2.0 * rng.next_double() - 1.0) * rcap;
        out.reward[sa] = DiscreteReward::point_mass(
            std::clamp(m.reward[sa].mean() + shift, 0.0, 1.0));
    }
    return out;
}

FiniteMdp sample_perturbation_generative(const FiniteMdp& m, double eps, RngStream& rng) {
    const int S = m.n_states, A = m.n_actions;
    FiniteMdp out = m;
    for (int sa = 0; sa < m.n_pairs(); ++sa) {
        const int s = sa / A, a = sa % A;
        std::vector<double> caps(S);
        for (int s2 = 0; s2 < S; ++s2)
            caps[s2] = gen_p_cap(eps, m.row(s, a)[s2], m.horizon, S, A);
        out.transition[sa] = perturb_within(m.transition[sa], caps, rng, 4 * S);
        const double rcap =
            reward_cap(eps, m.reward_dist(s, a).second_moment(), m.horizon, S, A, 48.0);
        const double shift = (2.0 * rng.next_double() - 1.0) * rcap;
        out.reward[sa] = DiscreteReward::point_mass(
            std::clamp(m.reward[sa].mean() + shift, 0.0, 1.0));
    }
    std::vector<double> mu_caps(S, eps / (12.0 * S));
    out.initial = perturb_within(m.initial, mu_caps, rng, 4 * S);
    return out;
}

}  // namespace hfmdp
