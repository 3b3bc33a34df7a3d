#include <doctest.h>

#include <cmath>

#include "hfmdp/generators.hpp"
#include "hfmdp/oracle.hpp"
#include "oracles.hpp"

using namespace hfmdp;
namespace oracle = hfmdp::testing;

TEST_CASE("finite_horizon_value: single state, reward 1/H totals one") {
    for (int h : {3, 7, 16}) {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = h;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(1.0 / h)};
        m.initial = {1.0};
        CHECK(finite_horizon_value(m, Policy::make_stationary({0})) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("finite_horizon_value matches trajectory enumeration") {
    RngStream rng(5, 0);
    for (int i = 0; i < 10; ++i) {
        const FiniteMdp m = random_dense(3, 2, 4, rng.next_u64());
        const Policy stat = Policy::make_stationary(
            {static_cast<int>(rng.next_u64() % 2), static_cast<int>(rng.next_u64() % 2),
             static_cast<int>(rng.next_u64() % 2)});
        CHECK(finite_horizon_value(m, stat) ==
              doctest::Approx(oracle::enumerate_policy_value(m, stat)).epsilon(1e-9));
        const Policy nonstat = oracle::nonstationary_at(m, rng.next_u64() % 4096);
        CHECK(finite_horizon_value(m, nonstat) ==
              doctest::Approx(oracle::enumerate_policy_value(m, nonstat)).epsilon(1e-9));
    }
}

TEST_CASE("optimal_nonstationary on the exit model is worth 2 - 1/H") {
    const int H = 64;
    const FiniteMdp m = twostate_exit(H);
    const PlanResult best = optimal_nonstationary(m);
    CHECK(best.value == doctest::Approx(2.0 - 1.0 / H).epsilon(1e-13));
    // stay until the final step, then exit
    for (int h = 0; h < H - 1; ++h) CHECK(best.policy.action(h, 0) == 0);
    CHECK(best.policy.action(H - 1, 0) == 1);
}

TEST_CASE("optimal_nonstationary dominates every enumerated policy") {
    const FiniteMdp m = random_dense(2, 2, 3, 99);
    const double best = optimal_nonstationary(m).value;
    for (std::uint64_t i = 0; i < oracle::nonstationary_count(m); ++i) {
        const Policy pi = oracle::nonstationary_at(m, i);
        CHECK(best >= finite_horizon_value(m, pi) - 1e-12);
    }
    // all-zero rewards: optimum is zero with the lowest-index policy
    FiniteMdp zero = m;
    for (auto& r : zero.reward) r = DiscreteReward::point_mass(0.0);
    const PlanResult z = optimal_nonstationary(zero);
    CHECK(z.value == 0.0);
    for (const auto& step : z.policy.steps)
        for (int a : step) CHECK(a == 0);
}

TEST_CASE("best_stationary") {
    SUBCASE("single action: the unique policy") {
        const FiniteMdp m = random_dense(2, 1, 4, 1);
        const PlanResult r = best_stationary(m);
        CHECK(r.policy.steps[0] == std::vector<int>{0, 0});
    }
    SUBCASE("exit model: deterministic stationary policies max out at 1") {
        const PlanResult r = best_stationary(twostate_exit(64));
        CHECK(r.value <= 1.0 + 1e-12);
        CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("matches independent re-evaluation over the enumeration") {
        const FiniteMdp m = random_dense(3, 2, 5, 17);
        double best = -1;
        for (const Policy& pi : enumerate_stationary_policies(m))
            best = std::max(best, oracle::enumerate_policy_value(m, pi));
        CHECK(best_stationary(m).value == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("discounted_value") {
    SUBCASE("gamma = 0 keeps only the first step") {
        const FiniteMdp m = random_dense(3, 2, 4, 2);
        const Policy pi = Policy::make_stationary({0, 1, 0});
        double expect = 0;
        for (int s = 0; s < 3; ++s) expect += m.initial[s] * m.mean_reward(s, pi.action(0, s));
        CHECK(discounted_value(m, pi, 0.0) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("absorbing state gives the geometric series") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 4;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(0.3)};
        m.initial = {1.0};
        CHECK(discounted_value(m, Policy::make_stationary({0}), 0.8) ==
              doctest::Approx(0.3 / 0.2).epsilon(1e-12));
    }
    SUBCASE("matches the truncated power series") {
        RngStream rng(23, 0);
        for (int i = 0; i < 5; ++i) {
            const FiniteMdp m = random_dense(3, 2, 4, rng.next_u64());
            const Policy pi = Policy::make_stationary({1, 0, 1});
            const double direct = discounted_value(m, pi, 0.9);
            const double truncated = oracle::truncated_discounted_value(m, pi, 0.9, 500);
            CHECK(std::fabs(direct - truncated) <= std::pow(0.9, 500) / 0.1 + 1e-9);
        }
    }
}

TEST_CASE("optimal_discounted_stationary agrees with enumeration") {
    SUBCASE("single action") {
        const FiniteMdp m = random_dense(2, 1, 4, 5);
        CHECK(optimal_discounted_stationary(m, 0.9).policy.steps[0] ==
              std::vector<int>{0, 0});
    }
    SUBCASE("policy iteration equals exhaustive enumeration") {
        RngStream rng(31, 0);
        for (int i = 0; i < 8; ++i) {
            const FiniteMdp m = random_dense(3, 2, 4, rng.next_u64());
            const double gamma = 0.85;
            const PlanResult pi_result = optimal_discounted_stationary(m, gamma);
            double best = -1;
            for (const Policy& pi : enumerate_stationary_policies(m))
                best = std::max(best, discounted_value(m, pi, gamma));
            CHECK(pi_result.value == doctest::Approx(best).epsilon(1e-9));
            CHECK(pi_result.value >= best - 1e-9);
        }
    }
}

TEST_CASE("reach_probability") {
    SUBCASE("single-state chain is always there") {
        MarkovChain c{1, {{1.0}}, {1.0}};
        for (int L : {0, 1, 5, 100}) CHECK(reach_probability(c, 0, L) == 1.0);
    }
    SUBCASE("two-state half-absorbing chain reaches 0.75 in two steps") {
        MarkovChain c{2, {{0.5, 0.5}, {0.0, 1.0}}, {1.0, 0.0}};
        CHECK(reach_probability(c, 1, 2) == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(oracle::enumerate_reach_probability(c, 1, 2) ==
              doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("zero steps returns the initial distribution") {
        const MarkovChain c = random_chain(3, 9);
        for (int s = 0; s < 3; ++s) CHECK(reach_probability(c, s, 0) == c.initial[s]);
    }
    SUBCASE("matches explicit path enumeration and sums to one") {
        RngStream rng(3, 0);
        for (int i = 0; i < 5; ++i) {
            const MarkovChain c = random_chain(3, rng.next_u64(), 0.3);
            for (int L : {1, 2, 4}) {
                double total = 0;
                for (int s = 0; s < 3; ++s) {
                    const double p = reach_probability(c, s, L);
                    CHECK(p == doctest::Approx(oracle::enumerate_reach_probability(c, s, L))
                                   .epsilon(1e-10));
                    total += p;
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
    }
    SUBCASE("step cap is enforced") {
        MarkovChain c{1, {{1.0}}, {1.0}};
        CHECK_THROWS_AS(reach_probability(c, 0, 20001, 20000), ValidationError);
    }
}

TEST_CASE("trajectory_probability") {
    const FiniteMdp m = twostate_exit(3);
    SUBCASE("the unique trajectory of a deterministic model has probability one") {
        StateActionPath t;
        t.steps = {{0, 0}, {0, 0}, {0, 1}};
        t.final_state = 1;
        Policy pi = Policy::make_nonstationary({{0, 0}, {0, 0}, {1, 0}});
        CHECK(trajectory_probability(m, pi, t) == 1.0);
    }
    SUBCASE("a zero-probability transition kills the product") {
        StateActionPath t;
        t.steps = {{0, 0}, {1, 0}, {1, 0}};  // stay cannot jump to the absorbing state
        t.final_state = 1;
        Policy pi = Policy::make_stationary({0, 0});
        CHECK(trajectory_probability(m, pi, t) == 0.0);
    }
    SUBCASE("incompatible actions are rejected") {
        StateActionPath t;
        t.steps = {{0, 1}, {1, 0}, {1, 0}};
        t.final_state = 1;
        Policy pi = Policy::make_stationary({0, 0});
        CHECK_THROWS_AS(trajectory_probability(m, pi, t), ValidationError);
    }
    SUBCASE("probabilities of all compatible trajectories sum to one") {
        const FiniteMdp r = random_dense(2, 2, 3, 77);
        const Policy pi = oracle::nonstationary_at(r, 41);
        double total = 0;
        for (int bits = 0; bits < (1 << 3); ++bits) {  // states s_1, s_2, s_3
            for (int s0 = 0; s0 < 2; ++s0) {
                StateActionPath t;
                int cur = s0;
                int b = bits;
                for (int h = 0; h < 3; ++h) {
                    t.steps.push_back({cur, pi.action(h, cur)});
                    cur = b & 1;
                    b >>= 1;
                }
                t.final_state = cur;
                total += trajectory_probability(r, pi, t);
            }
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("visitation_distribution") {
    SUBCASE("a pair the policy never takes is a point mass at zero") {
        const FiniteMdp m = random_dense(2, 2, 5, 8);
        const Policy pi = Policy::make_stationary({0, 0});
        const VisitationDistribution d = visitation_distribution(m, pi, 0, 1);
        CHECK(d.pmf[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("a self-loop pair is a point mass at H") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 6;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(0.1)};
        m.initial = {1.0};
        const VisitationDistribution d =
            visitation_distribution(m, Policy::make_stationary({0}), 0, 0);
        CHECK(d.pmf[6] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("masses sum to one") {
        RngStream rng(12, 0);
        for (int i = 0; i < 10; ++i) {
            const FiniteMdp m = random_dense(3, 2, 7, rng.next_u64());
            const Policy pi = Policy::make_stationary({0, 1, 0});
            const VisitationDistribution d = visitation_distribution(m, pi, 1, 1);
            double total = 0;
            for (double p : d.pmf) total += p;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    SUBCASE("matches a large Monte Carlo histogram on the coin-flip model") {
        const FiniteMdp m = coinflip(4);
        const Policy pi = Policy::make_stationary({0, 1});
        const VisitationDistribution d = visitation_distribution(m, pi, 0, 0);
        const std::uint64_t n = 1000000;
        std::vector<std::uint64_t> hist(m.horizon + 1, 0);
        RngStream rng(99, 4);
        for (std::uint64_t i = 0; i < n; ++i) {
            int cur = rng.sample_discrete(m.initial);
            int count = 0;
            for (int h = 0; h < m.horizon; ++h) {
                if (cur == 0 && pi.action(h, cur) == 0) ++count;
                cur = rng.sample_discrete(m.row(cur, pi.action(h, cur)));
            }
            ++hist[count];
        }
        for (int k = 0; k <= m.horizon; ++k) {
            const double freq = static_cast<double>(hist[k]) / static_cast<double>(n);
            const double se = std::sqrt(d.pmf[k] * (1 - d.pmf[k]) / static_cast<double>(n));
            CHECK(std::fabs(freq - d.pmf[k]) <= 3.0 * se + 1e-6);
        }
    }
}

TEST_CASE("exact_quantile follows the sup definition") {
    SUBCASE("point mass") {
        VisitationDistribution d;
        d.pmf = {0, 0, 0, 1.0};  // mass at 3
        for (double eps : {1e-6, 0.5, 1.0}) CHECK(exact_quantile(d, eps) == 3);
    }
    SUBCASE("two-point mass at 0 and 3") {
        VisitationDistribution d;
        d.pmf = {0.5, 0, 0, 0.5};
        CHECK(exact_quantile(d, 0.5) == 3);
        CHECK(exact_quantile(d, 0.6) == 0);
    }
    SUBCASE("matches the definitional linear scan on random pmfs") {
        RngStream rng(7, 0);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> pmf(9);
            double sum = 0;
            for (double& p : pmf) {
                p = rng.next_double();
                sum += p;
            }
            for (double& p : pmf) p /= sum;
            const double eps = rng.next_double();
            if (eps == 0.0) continue;
            int want = 0;
            for (int x = 8; x >= 0; --x) {
                double tail = 0;
                for (int k = x; k <= 8; ++k) tail += pmf[k];
                if (tail >= eps - 1e-12) {
                    want = x;
                    break;
                }
            }
            CHECK(pmf_quantile(pmf, eps) == want);
        }
    }
    SUBCASE("non-increasing in the level") {
        RngStream rng(8, 0);
        std::vector<double> pmf(7);
        double sum = 0;
        for (double& p : pmf) {
            p = rng.next_double();
            sum += p;
        }
        for (double& p : pmf) p /= sum;
        int prev = 1000;
        for (double eps = 0.05; eps <= 1.0; eps += 0.05) {
            const int q = pmf_quantile(pmf, eps);
            CHECK(q <= prev);
            prev = q;
        }
    }
}

TEST_CASE("max_visit_probability bounds and edge cases") {
    const FiniteMdp m = twostate_exit(6);
    CHECK(max_visit_probability(m, 0, 0, 0) == 1.0);
    CHECK(max_visit_probability(m, 0, 0, 7) == 0.0);
    // staying forever visits (start, stay) exactly H times
    CHECK(max_visit_probability(m, 0, 0, 6) == doctest::Approx(1.0).epsilon(1e-12));
    // once exited, the start pair is unreachable
    CHECK(max_visit_probability(m, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("value ordering: per-step optimum dominates the stationary optimum") {
    RngStream rng(61, 0);
    for (int i = 0; i < 10; ++i) {
        const FiniteMdp m = random_dense(2, 2, 5, rng.next_u64());
        const double nonstat = optimal_nonstationary(m).value;
        const double stat = best_stationary(m).value;
        CHECK(nonstat >= stat - 1e-12);
        for (const Policy& pi : enumerate_stationary_policies(m))
            CHECK(stat >= finite_horizon_value(m, pi) - 1e-12);
    }
}

TEST_CASE("visitation mean matches the occupancy identity") {
    // E[count(s,a)] = sum_h Pr[s_h = s] * I[pi_h(s) = a], with the state
    // marginals advanced by the policy-selected rows
    RngStream rng(62, 0);
    for (int i = 0; i < 8; ++i) {
        const FiniteMdp m = random_dense(3, 2, 6, rng.next_u64());
        const Policy pi = oracle::nonstationary_at(m, rng.next_u64() % 4096);
        std::vector<double> d = m.initial;
        std::vector<std::vector<double>> expect(3, std::vector<double>(2, 0.0));
        for (int h = 0; h < 6; ++h) {
            std::vector<double> next(3, 0.0);
            for (int s = 0; s < 3; ++s) {
                const int a = pi.action(h, s);
                expect[s][a] += d[s];
                for (int s2 = 0; s2 < 3; ++s2) next[s2] += d[s] * m.row(s, a)[s2];
            }
            d = std::move(next);
        }
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) {
                const VisitationDistribution vd = visitation_distribution(m, pi, s, a);
                double mean = 0;
                for (size_t k = 0; k < vd.pmf.size(); ++k) mean += k * vd.pmf[k];
                CHECK(mean == doctest::Approx(expect[s][a]).epsilon(1e-10));
            }
    }
}
