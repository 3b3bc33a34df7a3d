#include <doctest.h>

#include <cmath>

#include "hfmdp/generators.hpp"
#include "hfmdp/verify.hpp"
#include "oracles.hpp"

using namespace hfmdp;

TEST_CASE("check_reduction") {
    SUBCASE("an immediate repeat is excised") {
        const MarkovChain c = random_chain(3, 1);
        const CheckReport r = check_reduction(c, {1, 1, 2, 0});
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("any |S|+1 sequence pigeonholes") {
        RngStream rng(2, 0);
        for (int i = 0; i < 30; ++i) {
            const int S = 2 + static_cast<int>(rng.next_u64() % 3);
            const MarkovChain c = random_chain(S, rng.next_u64(), 0.3);
            std::vector<int> seq(S + 1);
            for (int& s : seq) s = static_cast<int>(rng.next_u64() % S);
            const CheckReport r = check_reduction(c, seq);
            CHECK(r.hypothesis_ok);
            CHECK(r.pass);
        }
    }
    SUBCASE("short sequences fail the hypothesis") {
        const MarkovChain c = random_chain(3, 4);
        CHECK_FALSE(check_reduction(c, {0, 1}).hypothesis_ok);
    }
}

TEST_CASE("check_mc_main") {
    SUBCASE("single-state chains have head sums of L") {
        MarkovChain c{1, {{1.0}}, {1.0}};
        const CheckReport r = check_mc_main(c, 0, 5);
        CHECK(r.hypothesis_ok);
        CHECK(r.lhs == doctest::Approx(11.0));  // 2L + 1 ones
        CHECK(r.rhs == doctest::Approx(4.0 * 5.0));
        CHECK(r.pass);
    }
    SUBCASE("two-state deterministic cycle sums match explicit matrix powers") {
        MarkovChain c{2, {{0.0, 1.0}, {1.0, 0.0}}, {1.0, 0.0}};
        const int L = 4;
        const CheckReport r = check_mc_main(c, 0, L);
        double lhs = 0, head = 0;
        for (int h = 0; h <= 2 * L; ++h) {
            const double p = hfmdp::testing::enumerate_reach_probability(c, 0, h);
            lhs += p;
            if (h < L) head += p;
        }
        CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
        CHECK(r.rhs == doctest::Approx(4.0 * 256.0 * head).epsilon(1e-12));
        CHECK(r.pass);
    }
    SUBCASE("L below |S| fails the hypothesis") {
        const MarkovChain c = random_chain(4, 9);
        CHECK_FALSE(check_mc_main(c, 0, 3).hypothesis_ok);
    }
}

TEST_CASE("sum lemmas specialize correctly") {
    const MarkovChain c = random_chain(2, 11, 0.2);
    const CheckReport a = check_sum_unexpanded(c, 1);
    const CheckReport b = check_sum_expanded(c, 1, 0, 1);
    CHECK(a.lhs == doctest::Approx(b.lhs).epsilon(1e-15));
    CHECK(a.rhs == doctest::Approx(b.rhs).epsilon(1e-15));
    CHECK(a.pass);
    CHECK(b.pass);
    // single-state chains trivially satisfy the factor-4 bound
    MarkovChain one{1, {{1.0}}, {1.0}};
    CHECK(check_sum_expanded(one, 0, 2, 3).pass);
    CHECK_FALSE(check_sum_expanded(c, 0, -1, 1).hypothesis_ok);
    CHECK_FALSE(check_sum_expanded(c, 0, 0, 0).hypothesis_ok);
}

TEST_CASE("check_discount_finite") {
    SUBCASE("zero rewards pass with both sides zero") {
        FiniteMdp m = random_dense(2, 2, 16, 3);
        for (auto& r : m.reward) r = DiscreteReward::point_mass(0.0);
        const CheckReport r = check_discount_finite(m, Policy::make_stationary({0, 1}));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("single state with reward 1/H has closed-form values") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 8;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(1.0 / 8.0)};
        m.initial = {1.0};
        // V_H = 1; V_gamma = (1/H) / (1 - gamma) = 1 / ln 8
        const CheckReport r = check_discount_finite(m, Policy::make_stationary({0}));
        CHECK(r.hypothesis_ok);  // H = 8 >= 2 ln 8
        CHECK(r.pass);
        const double v_gamma = 1.0 / std::log(8.0);
        // lhs is the worst violation: max(V_H/64 - V_gamma, V_gamma - 2 V_H)
        CHECK(r.lhs == doctest::Approx(std::max(1.0 / 64.0 - v_gamma, v_gamma - 2.0))
                           .epsilon(1e-9));
    }
    SUBCASE("short horizons fail the hypothesis") {
        const FiniteMdp m = random_dense(2, 2, 8, 5);
        CHECK_FALSE(check_discount_finite(m, Policy::make_stationary({0, 0})).hypothesis_ok);
    }
}

TEST_CASE("check_half_trajectory") {
    SUBCASE("zero rewards") {
        FiniteMdp m = random_dense(2, 2, 8, 6);
        for (auto& r : m.reward) r = DiscreteReward::point_mass(0.0);
        const CheckReport r = check_half_trajectory(m, Policy::make_stationary({1, 0}));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("reward only at the start state makes both halves equal") {
        FiniteMdp m;
        m.n_states = 2;
        m.n_actions = 1;
        m.horizon = 6;
        m.transition = {{0.0, 1.0}, {0.0, 1.0}};  // leave start forever
        m.reward = {DiscreteReward::point_mass(0.5), DiscreteReward::point_mass(0.0)};
        m.initial = {1.0, 0.0};
        const CheckReport r = check_half_trajectory(m, Policy::make_stationary({0, 0}));
        CHECK(r.hypothesis_ok);
        CHECK(r.rhs == doctest::Approx(0.5));  // V at floor(H/2)
        CHECK(r.pass);
    }
}

TEST_CASE("check_stationary_near_optimal") {
    SUBCASE("single action: both optima coincide") {
        const FiniteMdp m = random_dense(2, 1, 16, 7);
        const CheckReport r = check_stationary_near_optimal(m);
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
        CHECK(r.rhs == doctest::Approx(r.lhs * 128.0 * std::pow(2.0, 16.0)).epsilon(1e-9));
    }
    SUBCASE("the exit model at H = 64 reproduces the exact values") {
        const CheckReport r = check_stationary_near_optimal(twostate_exit(64));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
        CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-12));  // best stationary
        CHECK(r.lhs ==
              doctest::Approx((2.0 - 1.0 / 64.0) / (128.0 * std::pow(2.0, 16.0)))
                  .epsilon(1e-12));
    }
}

TEST_CASE("check_reaching_stationary") {
    SUBCASE("an unreachable pair gives zero on both sides") {
        FiniteMdp m = twostate_exit(32);
        // remove the exit action's reachability of (1, *): z = (1, 0) stays
        // reachable, so instead target a pair never executable: make state 1
        // unreachable by sending both actions at 0 back to 0
        m.transition[m.pair_index(0, 1)] = {1.0, 0.0};
        const CheckReport r = check_reaching_stationary(m, 1, 0);
        CHECK(r.hypothesis_ok);
        CHECK(r.lhs == doctest::Approx(0.0));
        CHECK(r.rhs == doctest::Approx(0.0));
        CHECK(r.pass);
    }
    SUBCASE("a deterministically reachable pair yields probability one") {
        const FiniteMdp m = twostate_exit(32);
        const CheckReport r = check_reaching_stationary(m, 0, 0);
        CHECK(r.hypothesis_ok);
        CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.pass);
    }
    SUBCASE("random instances pass") {
        RngStream rng(8, 0);
        for (int i = 0; i < 5; ++i) {
            const FiniteMdp m = random_dense(2, 2, 32, rng.next_u64());
            const CheckReport r = check_reaching_stationary(
                m, static_cast<int>(rng.next_u64() % 2), static_cast<int>(rng.next_u64() % 2));
            CHECK(r.hypothesis_ok);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("check_quantile_comparison") {
    SUBCASE("f = 0 passes trivially") {
        FiniteMdp m = random_dense(2, 2, 16, 9);
        m.initial = {1.0, 0.0};
        const CheckReport r = check_quantile_comparison(m, 0, 0, 0.5, 0);
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
        CHECK(r.lhs == 0.0);
    }
    SUBCASE("a deterministic self-loop achieves the half-horizon count") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 16;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(0.01)};
        m.initial = {1.0};
        const CheckReport r = check_quantile_comparison(m, 0, 0, 0.5, 16);
        CHECK(r.hypothesis_ok);
        CHECK(r.rhs == doctest::Approx(8.0));  // floor(H/2) visits guaranteed
        CHECK(r.pass);
    }
    SUBCASE("initial distribution must be pinned at the target state") {
        FiniteMdp m = random_dense(2, 2, 16, 10);
        m.initial = {0.5, 0.5};
        CHECK_FALSE(check_quantile_comparison(m, 0, 0, 0.5, 1).hypothesis_ok);
    }
}

TEST_CASE("check_mult_add") {
    SUBCASE("zero perturbation gives ratio one") {
        MultAddInstance inst;
        inst.p = {0.3, 0.4};
        inst.delta = {0.0, 0.0};
        inst.gamma = {0.5, -0.5};
        inst.m = 2.0;
        inst.m_bar = 4.0;
        inst.n_bar = 2.0;
        inst.eps = 0.05;
        const CheckReport r = check_mult_add(inst);
        CHECK(r.hypothesis_ok);
        CHECK(r.lhs == doctest::Approx(0.0));
        CHECK(r.pass);
    }
    SUBCASE("n = 1 at the boundary matches the closed form") {
        MultAddInstance inst;
        inst.m_bar = 1.0;
        inst.n_bar = 1.0;
        inst.eps = 1.0 / 8.0;
        inst.p = {1.0};
        inst.delta = {-inst.eps};  // |delta| = eps sqrt(p/m) exactly
        inst.gamma = {0.75};
        inst.m = 0.5;
        const CheckReport r = check_mult_add(inst);
        CHECK(r.hypothesis_ok);
        const double ratio = std::pow(1.0 - 0.125, 0.5 + 0.75);
        CHECK(r.lhs == doctest::Approx(std::fabs(ratio - 1.0)).epsilon(1e-12));
        CHECK(r.pass);
    }
    SUBCASE("sampled instances satisfy the hypotheses and the bound") {
        RngStream rng(12, 0);
        for (int i = 0; i < 2000; ++i) {
            const CheckReport r = check_mult_add(sample_mult_add_instance(rng));
            CHECK(r.hypothesis_ok);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("check_log_facts holds on the full grid") {
    const CheckReport r = check_log_facts(10000);
    CHECK(r.hypothesis_ok);
    CHECK(r.pass);
}

TEST_CASE("concentration checkers on small trial counts") {
    const FiniteMdp m = coinflip(6);
    const Policy pi = Policy::make_stationary({0, 1});
    SUBCASE("visit upper bound: zero-probability targets never violate") {
        FiniteMdp det = twostate_exit(6);
        const CheckReport r = check_visit_upperbound(det, Policy::make_stationary({0, 0}), 0,
                                                     0, 1, 0.2, 500, RngStream(1, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.lhs == 0.0);  // stay-loop never reaches the absorbing state
        CHECK(r.pass);
    }
    SUBCASE("deterministic counts satisfy the bound outright") {
        const FiniteMdp det = twostate_exit(6);
        const CheckReport r = check_visit_upperbound(det, Policy::make_stationary({0, 0}), 0,
                                                     0, 0, 0.2, 500, RngStream(2, 0));
        CHECK(r.lhs == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("coin-flip instance stays within delta plus slack") {
        const CheckReport r = check_visit_upperbound(m, pi, 0, 0, 1, 0.2, 20000, RngStream(3, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
        const CheckReport r2 =
            check_martingale_concentration(m, pi, 0, 0, 1, 0.2, 20000, RngStream(4, 0));
        CHECK(r2.hypothesis_ok);
        CHECK(r2.pass);
    }
    SUBCASE("martingale deviation is zero when the next state is certain") {
        FiniteMdp det = twostate_exit(6);
        const CheckReport r = check_martingale_concentration(
            det, Policy::make_stationary({0, 0}), 0, 0, 0, 0.25, 500, RngStream(5, 0));
        CHECK(r.lhs == 0.0);
        CHECK(r.pass);
    }
}

TEST_CASE("check_prob_approx_error") {
    SUBCASE("deterministic transitions estimate exactly") {
        const FiniteMdp det = twostate_exit(4);
        const CheckReport r = check_prob_approx_error(
            det, Policy::make_stationary({0, 0}), 0, 0, 0, 0.25, 1024, 200, RngStream(6, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.lhs == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("an unvisited pair fails the quantile hypothesis") {
        const FiniteMdp det = twostate_exit(4);
        // policy never exits, so (0, 1) is never visited
        const CheckReport r = check_prob_approx_error(
            det, Policy::make_stationary({0, 0}), 0, 1, 1, 0.25, 1024, 50, RngStream(7, 0));
        CHECK_FALSE(r.hypothesis_ok);
    }
    SUBCASE("stochastic instance at modest trial count") {
        const CheckReport r = check_prob_approx_error(coinflip(4), Policy::make_stationary({0, 1}),
                                                      0, 0, 1, 0.25, 1024, 500, RngStream(8, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
}

TEST_CASE("perturbation checkers") {
    RngStream rng(14, 0);
    const double eps = 0.3;
    SUBCASE("identical models pass for any epsilon") {
        const FiniteMdp m = random_dense(2, 2, 6, 21);
        const Policy pi = Policy::make_stationary({0, 1});
        CHECK(check_perturbation_lower(m, m, pi, eps).pass);
        CHECK(check_perturbation_lower(m, m, pi, eps).hypothesis_ok);
        CHECK(check_perturbation_upper(m, m, pi, eps).pass);
        CHECK(check_perturbation_generative(m, m, pi, eps).pass);
    }
    SUBCASE("zero-reward models are insensitive to transition perturbations") {
        FiniteMdp m = random_dense(2, 2, 6, 22);
        for (auto& r : m.reward) r = DiscreteReward::point_mass(0.0);
        const Policy pi = Policy::make_stationary({1, 0});
        FiniteMdp hat = sample_perturbation_lower(m, pi, eps, rng);
        for (auto& r : hat.reward) r = DiscreteReward::point_mass(0.0);
        const CheckReport r = check_perturbation_lower(m, hat, pi, eps);
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("sampled hypothesis-satisfying perturbations pass all three lemmas") {
        for (int i = 0; i < 25; ++i) {
            const FiniteMdp m = random_dense(2, 2, 6, 1000 + i);
            const Policy pi = Policy::make_stationary(
                {static_cast<int>(rng.next_u64() % 2), static_cast<int>(rng.next_u64() % 2)});
            const CheckReport lo =
                check_perturbation_lower(m, sample_perturbation_lower(m, pi, eps, rng), pi, eps);
            CHECK(lo.hypothesis_ok);
            CHECK(lo.pass);
            const CheckReport up =
                check_perturbation_upper(m, sample_perturbation_upper(m, pi, eps, rng), pi, eps);
            CHECK(up.hypothesis_ok);
            CHECK(up.pass);
            const CheckReport gen = check_perturbation_generative(
                m, sample_perturbation_generative(m, eps, rng), pi, eps);
            CHECK(gen.hypothesis_ok);
            CHECK(gen.pass);
        }
    }
    SUBCASE("violating the closeness bounds trips the hypothesis flag") {
        const FiniteMdp m = random_dense(2, 2, 6, 23);
        FiniteMdp far = m;
        far.transition[0] = {1.0, 0.0};
        far.transition[1] = {1.0, 0.0};
        const Policy pi = Policy::make_stationary({0, 0});
        CHECK_FALSE(check_perturbation_generative(m, far, pi, eps).hypothesis_ok);
    }
}

TEST_CASE("check_reward_structure") {
    SUBCASE("a 1/H self-loop satisfies the bound") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 8;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(1.0 / 8.0)};
        m.initial = {1.0};
        const CheckReport r = check_reward_structure(m, 0, 0, 0.5);
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("models violating bounded total reward are flagged, not failed") {
        FiniteMdp m;
        m.n_states = 1;
        m.n_actions = 1;
        m.horizon = 4;
        m.transition = {{1.0}};
        m.reward = {DiscreteReward::point_mass(0.9)};  // totals 3.6 > 1
        m.initial = {1.0};
        CHECK_FALSE(check_reward_structure(m, 0, 0, 0.5).hypothesis_ok);
    }
    SUBCASE("random valid instances pass on every pair") {
        RngStream rng(15, 0);
        for (int i = 0; i < 5; ++i) {
            const FiniteMdp m = random_dense(2, 2, 8, rng.next_u64());
            for (int s = 0; s < 2; ++s)
                for (int a = 0; a < 2; ++a) {
                    const CheckReport r = check_reward_structure(m, s, a, 1e-9);
                    if (r.hypothesis_ok) CHECK(r.pass);
                }
        }
    }
}

TEST_CASE("check_stationary_quantile") {
    SUBCASE("an unreachable pair contributes m_eps = 0") {
        FiniteMdp m = coinflip(6);
        for (auto& row : m.transition) row = {1.0, 0.0};
        m.initial = {1.0, 0.0};
        const CheckReport r = check_stationary_quantile(m, 0.25, 2000, RngStream(16, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("single action degenerates to repeated rollouts") {
        const FiniteMdp m = random_dense(2, 1, 6, 31);
        const CheckReport r = check_stationary_quantile(m, 0.25, 2000, RngStream(17, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("the documented 2x2 H=8 instance") {
        const FiniteMdp m = random_dense(2, 2, 8, 32);
        const CheckReport r = check_stationary_quantile(m, 0.25, 4000, RngStream(18, 0));
        CHECK(r.hypothesis_ok);
        CHECK(r.pass);
    }
    SUBCASE("oversized enumerations are refused") {
        const FiniteMdp m = random_dense(2, 2, 16, 33);
        CHECK_THROWS_AS(check_stationary_quantile(m, 0.25, 100, RngStream(19, 0)),
                        BudgetError);
    }
}
