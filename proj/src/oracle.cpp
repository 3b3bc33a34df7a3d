#include "hfmdp/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace hfmdp {

namespace {

int effective_horizon(const FiniteMdp& m, int horizon) {
    if (horizon == 0) return m.horizon;
    if (horizon < 0 || horizon > m.horizon)
        throw ValidationError("horizon override " + std::to_string(horizon) +
                              " outside [1, " + std::to_string(m.horizon) + "]");
    return horizon;
}

}  // namespace

double finite_horizon_value(const FiniteMdp& m, const Policy& pi, int horizon) {
    const int H = effective_horizon(m, horizon);
    const int S = m.n_states;
    std::vector<double> v(S, 0.0), next(S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            const int a = pi.action(h, s);
            double x = m.mean_reward(s, a);
            const std::vector<double>& row = m.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) x += row[s2] * next[s2];
            v[s] = x;
        }
        std::swap(v, next);
    }
    double out = 0;
    for (int s = 0; s < S; ++s) out += m.initial[s] * next[s];
    return out;
}

PlanResult optimal_nonstationary(const FiniteMdp& m, int horizon) {
    const int H = effective_horizon(m, horizon);
    const int S = m.n_states, A = m.n_actions;
    std::vector<double> v(S, 0.0), next(S, 0.0);
    std::vector<std::vector<int>> maps(H, std::vector<int>(S, 0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -1.0;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double x = m.mean_reward(s, a);
                const std::vector<double>& row = m.row(s, a);
                for (int s2 = 0; s2 < S; ++s2) x += row[s2] * next[s2];
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
    for (int s = 0; s < S; ++s) out.value += m.initial[s] * next[s];
    return out;
}

PlanResult best_stationary(const FiniteMdp& m, int horizon, std::uint64_t cap) {
    PlanResult out;
    bool first = true;
    for (const Policy& pi : enumerate_stationary_policies(m, cap)) {
        const double v = finite_horizon_value(m, pi, horizon);
        if (first || v > out.value) {
            out.policy = pi;
            out.value = v;
            first = false;
        }
    }
    return out;
}

double discounted_value(const FiniteMdp& m, const Policy& pi, double gamma) {
    if (!pi.stationary) throw ValidationError("discounted_value requires a stationary policy");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("discount factor must lie in [0, 1)");
    const int S = m.n_states;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S);
    Eigen::VectorXd r(S);
    for (int s = 0; s < S; ++s) {
        const int a = pi.action(0, s);
        r(s) = m.mean_reward(s, a);
        const std::vector<double>& row = m.row(s, a);
        for (int s2 = 0; s2 < S; ++s2) lhs(s, s2) -= gamma * row[s2];
    }
    const Eigen::VectorXd v = lhs.partialPivLu().solve(r);
    if (!v.allFinite()) throw ValidationError("discounted solve produced non-finite values");
    double out = 0;
    for (int s = 0; s < S; ++s) out += m.initial[s] * v(s);
    return out;
}

PlanResult optimal_discounted_stationary(const FiniteMdp& m, double gamma) {
    const int S = m.n_states, A = m.n_actions;
    std::vector<int> map(S, 0);
    // policy iteration; greedy step breaks ties by lowest action index
    for (int iter = 0; iter < 1000; ++iter) {
        const Policy pi = Policy::make_stationary(map);
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S);
        Eigen::VectorXd r(S);
        for (int s = 0; s < S; ++s) {
            const int a = pi.action(0, s);
            r(s) = m.mean_reward(s, a);
            for (int s2 = 0; s2 < S; ++s2) lhs(s, s2) -= gamma * m.row(s, a)[s2];
        }
        const Eigen::VectorXd v = lhs.partialPivLu().solve(r);
        std::vector<int> improved(S, 0);
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = m.mean_reward(s, a);
                for (int s2 = 0; s2 < S; ++s2) q += gamma * m.row(s, a)[s2] * v(s2);
                if (q > best + 1e-13) {
                    best = q;
                    best_a = a;
                }
            }
            improved[s] = best_a;
        }
        if (improved == map) {
            PlanResult out;
            out.policy = pi;
            double val = 0;
            for (int s = 0; s < S; ++s) val += m.initial[s] * v(s);
            out.value = val;
            return out;
        }
        map = improved;
    }
    throw ValidationError("policy iteration failed to converge");
}

std::vector<std::vector<double>> occupancy_sequence(const MarkovChain& c, int L) {
    std::vector<std::vector<double>> out;
    out.reserve(L + 1);
    out.push_back(c.initial);
    for (int t = 0; t < L; ++t) {
        const std::vector<double>& d = out.back();
        std::vector<double> next(c.n_states, 0.0);
        for (int s = 0; s < c.n_states; ++s) {
            if (d[s] == 0.0) continue;
            const std::vector<double>& row = c.transition[s];
            for (int s2 = 0; s2 < c.n_states; ++s2) next[s2] += d[s] * row[s2];
        }
        out.push_back(std::move(next));
    }
    return out;
}

double reach_probability(const MarkovChain& c, int s, int L, int max_steps) {
    if (L < 0 || L > max_steps)
        throw ValidationError("step count " + std::to_string(L) + " outside [0, " +
                              std::to_string(max_steps) + "]");
    std::vector<double> d = c.initial;
    for (int t = 0; t < L; ++t) {
        std::vector<double> next(c.n_states, 0.0);
        for (int x = 0; x < c.n_states; ++x) {
            if (d[x] == 0.0) continue;
            for (int y = 0; y < c.n_states; ++y) next[y] += d[x] * c.transition[x][y];
        }
        d = std::move(next);
    }
    return d[s];
}

double sequence_probability(const MarkovChain& c, const std::vector<int>& states) {
    if (states.empty()) throw ValidationError("empty state sequence");
    double p = c.initial[states[0]];
    for (size_t h = 0; h + 1 < states.size(); ++h)
        p *= c.transition[states[h]][states[h + 1]];
    return p;
}

double trajectory_probability(const FiniteMdp& m, const Policy& pi, const StateActionPath& t) {
    if (t.steps.size() != static_cast<size_t>(m.horizon))
        throw ValidationError("path length " + std::to_string(t.steps.size()) +
                              " != horizon " + std::to_string(m.horizon));
    for (size_t h = 0; h < t.steps.size(); ++h)
        if (t.steps[h].second != pi.action(static_cast<int>(h), t.steps[h].first))
            throw ValidationError("path incompatible with policy at step " + std::to_string(h));
    double p = m.initial[t.steps[0].first];
    for (size_t h = 0; h < t.steps.size(); ++h) {
        const int next = (h + 1 < t.steps.size()) ? t.steps[h + 1].first : t.final_state;
        p *= m.row(t.steps[h].first, t.steps[h].second)[next];
    }
    return p;
}

VisitationDistribution visitation_distribution(const FiniteMdp& m, const Policy& pi,
                                               int s, int a, int horizon) {
    const int H = effective_horizon(m, horizon);
    const int S = m.n_states;
    // f[x][c] = Pr[s_h = x, visits so far = c]
    std::vector<std::vector<double>> f(S, std::vector<double>(H + 1, 0.0));
    for (int x = 0; x < S; ++x) f[x][0] = m.initial[x];
    std::vector<std::vector<double>> g(S, std::vector<double>(H + 1, 0.0));
    for (int h = 0; h < H; ++h) {
        for (auto& col : g) std::fill(col.begin(), col.end(), 0.0);
        for (int x = 0; x < S; ++x) {
            const int ax = pi.action(h, x);
            const int inc = (x == s && ax == a) ? 1 : 0;
            const std::vector<double>& row = m.row(x, ax);
            for (int c = 0; c <= h; ++c) {
                const double mass = f[x][c];
                if (mass == 0.0) continue;
                for (int y = 0; y < S; ++y)
                    if (row[y] != 0.0) g[y][c + inc] += mass * row[y];
            }
        }
        std::swap(f, g);
    }
    VisitationDistribution out;
    out.state = s;
    out.action = a;
    out.pmf.assign(H + 1, 0.0);
    for (int x = 0; x < S; ++x)
        for (int c = 0; c <= H; ++c) out.pmf[c] += f[x][c];
    return out;
}

int pmf_quantile(const std::vector<double>& pmf, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("quantile level must be in (0, 1]");
    double tail = 0;
    for (int x = static_cast<int>(pmf.size()) - 1; x >= 0; --x) {
        tail += pmf[x];
        if (tail >= eps - 1e-12) return x;
    }
    return 0;
}

int exact_quantile(const VisitationDistribution& dist, double eps) {
    return pmf_quantile(dist.pmf, eps);
}

double max_visit_probability(const FiniteMdp& m, int s, int a, int threshold, int horizon) {
    const int H = effective_horizon(m, horizon);
    const int S = m.n_states, A = m.n_actions;
    if (threshold <= 0) return 1.0;
    if (threshold > H) return 0.0;
    const int C = threshold;  // counts capped at the threshold
    // u[x][c] = max prob of reaching count >= threshold from (x, c) at step h
    std::vector<std::vector<double>> u(S, std::vector<double>(C + 1, 0.0)), w = u;
    for (int x = 0; x < S; ++x) u[x][C] = 1.0;
    for (int h = H - 1; h >= 0; --h) {
        for (int x = 0; x < S; ++x) {
            w[x][C] = 1.0;
            for (int c = 0; c < C; ++c) {
                double best = 0.0;
                for (int ax = 0; ax < A; ++ax) {
                    const int c2 = std::min(C, c + ((x == s && ax == a) ? 1 : 0));
                    double p = 0.0;
                    const std::vector<double>& row = m.row(x, ax);
                    for (int y = 0; y < S; ++y) p += row[y] * u[y][c2];
                    best = std::max(best, p);
                }
                w[x][c] = best;
            }
        }
        std::swap(u, w);
    }
    double out = 0;
    for (int x = 0; x < S; ++x) out += m.initial[x] * u[x][0];
    return out;
}

}  // namespace hfmdp
