#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfmdp::testing {

namespace {

double enumerate_paths(const FiniteMdp& m, const Policy& pi, int h, int state, double prob,
                       double reward_so_far) {
    if (prob == 0.0) return 0.0;
    if (h == m.horizon) return prob * reward_so_far;
    const int a = pi.action(h, state);
    const double r = m.mean_reward(state, a);
    double total = 0.0;
    for (int s2 = 0; s2 < m.n_states; ++s2)
        total += enumerate_paths(m, pi, h + 1, s2, prob * m.row(state, a)[s2],
                                 reward_so_far + r);
    return total;
}

}  // namespace

double enumerate_policy_value(const FiniteMdp& m, const Policy& pi) {
    double total = 0.0;
    for (int s0 = 0; s0 < m.n_states; ++s0)
        total += enumerate_paths(m, pi, 0, s0, m.initial[s0], 0.0);
    return total;
}

std::uint64_t nonstationary_count(const FiniteMdp& m) {
    std::uint64_t n = 1;
    for (int i = 0; i < m.n_states * m.horizon; ++i) {
        n *= static_cast<std::uint64_t>(m.n_actions);
        if (n > (std::uint64_t{1} << 40))
            throw std::runtime_error("policy enumeration blows up");
    }
    return n;
}

Policy nonstationary_at(const FiniteMdp& m, std::uint64_t idx) {
    std::vector<std::vector<int>> maps(m.horizon, std::vector<int>(m.n_states, 0));
    for (int h = 0; h < m.horizon; ++h)
        for (int s = 0; s < m.n_states; ++s) {
            maps[h][s] = static_cast<int>(idx % m.n_actions);
            idx /= m.n_actions;
        }
    return Policy::make_nonstationary(std::move(maps));
}

namespace {

double enumerate_sequences(const MarkovChain& c, int target, int steps_left, int state,
                           double prob) {
    if (prob == 0.0) return 0.0;
    if (steps_left == 0) return state == target ? prob : 0.0;
    double total = 0.0;
    for (int s2 = 0; s2 < c.n_states; ++s2)
        total += enumerate_sequences(c, target, steps_left - 1, s2,
                                     prob * c.transition[state][s2]);
    return total;
}

}  // namespace

double enumerate_reach_probability(const MarkovChain& c, int s, int L) {
    double total = 0.0;
    for (int s0 = 0; s0 < c.n_states; ++s0)
        total += enumerate_sequences(c, s, L, s0, c.initial[s0]);
    return total;
}

double truncated_discounted_value(const FiniteMdp& m, const Policy& pi, double gamma, int T) {
    std::vector<double> d = m.initial;
    double total = 0.0;
    double g = 1.0;
    for (int h = 0; h < T; ++h) {
        double step = 0.0;
        for (int s = 0; s < m.n_states; ++s) step += d[s] * m.mean_reward(s, pi.action(0, s));
        total += g * step;
        g *= gamma;
        std::vector<double> next(m.n_states, 0.0);
        for (int s = 0; s < m.n_states; ++s) {
            const auto& row = m.row(s, pi.action(0, s));
            for (int s2 = 0; s2 < m.n_states; ++s2) next[s2] += d[s] * row[s2];
        }
        d = std::move(next);
    }
    return total;
}

double corner_lp_min(const std::vector<double>& center, const std::vector<double>& widths,
                     const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<double> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = std::max(0.0, center[i] - widths[i]);
        hi[i] = std::min(1.0, center[i] + widths[i]);
    }
    double best = std::numeric_limits<double>::infinity();
    // assignments: each coordinate at lo or hi, with at most one free index
    // absorbing the slack to reach sum 1
    const int combos = 1 << n;
    for (int mask = 0; mask < combos; ++mask) {
        for (int free = -1; free < n; ++free) {
            double sum = 0.0, obj = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == free) continue;
                const double q = (mask >> i) & 1 ? hi[i] : lo[i];
                sum += q;
                obj += q * values[i];
            }
            if (free < 0) {
                if (std::fabs(sum - 1.0) <= 1e-12) best = std::min(best, obj);
            } else {
                const double q = 1.0 - sum;
                if (q >= lo[free] - 1e-12 && q <= hi[free] + 1e-12)
                    best = std::min(best, obj + q * values[free]);
            }
        }
    }
    return best;
}

double chi2_99(int df) {
    static const double table[] = {6.635, 9.210, 11.345, 13.277, 15.086, 16.812};
    if (df < 1 || df > 6) throw std::runtime_error("chi2_99: df out of table");
    return table[df - 1];
}

}  // namespace hfmdp::testing
