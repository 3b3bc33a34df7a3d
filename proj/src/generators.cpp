#include "hfmdp/generators.hpp"

#include <cmath>
#include <sstream>

#include "hfmdp/mdp_io.hpp"

namespace hfmdp {

namespace {

std::vector<double> dirichlet_row(int n, RngStream& rng) {
    std::vector<double> row(n);
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        row[i] = -std::log(1.0 - rng.next_double());
        sum += row[i];
    }
    double acc = 0;
    for (int i = 0; i + 1 < n; ++i) {
        row[i] /= sum;
        acc += row[i];
    }
    row[n - 1] = 1.0 - acc;  // exact row sum
    return row;
}

}  // namespace

FiniteMdp twostate_exit(int horizon) {
    FiniteMdp m;
    m.n_states = 2;
    m.n_actions = 2;
    m.horizon = horizon;
    m.transition = {
        {1.0, 0.0},  // (s=0, a=0): stay
        {0.0, 1.0},  // (s=0, a=1): exit
        {0.0, 1.0},  // (s=1, a=0): absorbed
        {0.0, 1.0},  // (s=1, a=1): absorbed
    };
    m.reward = {
        DiscreteReward::point_mass(1.0 / horizon),
        DiscreteReward::point_mass(1.0),
        DiscreteReward::point_mass(0.0),
        DiscreteReward::point_mass(0.0),
    };
    m.initial = {1.0, 0.0};
    return m;
}

FiniteMdp random_dense(int n_states, int n_actions, int horizon, std::uint64_t seed) {
    RngStream rng(seed, 0x8e4e);
    FiniteMdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.horizon = horizon;
    m.transition.reserve(m.n_pairs());
    m.reward.reserve(m.n_pairs());
    for (int sa = 0; sa < n_states * n_actions; ++sa) {
        m.transition.push_back(dirichlet_row(n_states, rng));
        const double v = 0.9 * rng.next_double() / horizon;
        const double q = rng.next_double();
        m.reward.push_back(DiscreteReward{{0.0, v}, {1.0 - q, q}});
    }
    m.initial = dirichlet_row(n_states, rng);
    return m;
}

FiniteMdp chain_mdp(int n_states, int horizon) {
    FiniteMdp m;
    m.n_states = n_states;
    m.n_actions = 2;
    m.horizon = horizon;
    m.transition.assign(m.n_pairs(), std::vector<double>(n_states, 0.0));
    m.reward.assign(m.n_pairs(), DiscreteReward::point_mass(0.0));
    for (int s = 0; s < n_states; ++s) {
        m.transition[m.pair_index(s, 0)][std::min(s + 1, n_states - 1)] = 1.0;  // advance
        m.transition[m.pair_index(s, 1)][s] = 1.0;                              // stay
        if (s == n_states - 1) {
            m.reward[m.pair_index(s, 0)] = DiscreteReward::point_mass(0.9 / horizon);
            m.reward[m.pair_index(s, 1)] = DiscreteReward::point_mass(0.9 / horizon);
        }
    }
    m.initial.assign(n_states, 0.0);
    m.initial[0] = 1.0;
    return m;
}

FiniteMdp coinflip(int horizon) {
    FiniteMdp m;
    m.n_states = 2;
    m.n_actions = 2;
    m.horizon = horizon;
    m.transition.assign(4, {0.5, 0.5});
    const double v = 1.0 / horizon;
    m.reward.assign(4, DiscreteReward{{0.0, v}, {0.5, 0.5}});
    m.initial = {0.5, 0.5};
    return m;
}

MarkovChain random_chain(int n_states, std::uint64_t seed, double sparsity) {
    RngStream rng(seed, 0xc4a1);
    MarkovChain c;
    c.n_states = n_states;
    auto sparse_row = [&]() {
        for (;;) {
            std::vector<double> w(n_states);
            double sum = 0;
            for (int i = 0; i < n_states; ++i) {
                const bool keep = rng.next_double() >= sparsity;
                w[i] = keep ? -std::log(1.0 - rng.next_double()) : 0.0;
                sum += w[i];
            }
            if (sum <= 0) continue;  // all entries dropped; redraw
            double acc = 0;
            int last = 0;
            for (int i = 0; i < n_states; ++i)
                if (w[i] > 0) last = i;
            for (int i = 0; i < n_states; ++i) {
                if (i == last) break;
                w[i] /= sum;
                acc += w[i];
            }
            w[last] = 1.0 - acc;
            return w;
        }
    };
    for (int s = 0; s < n_states; ++s) c.transition.push_back(sparse_row());
    c.initial = sparse_row();
    return c;
}

bool is_generator_spec(const std::string& spec) {
    return spec == "twostate-exit" || spec == "coinflip" ||
           spec.rfind("random-dense(", 0) == 0 || spec.rfind("chain(", 0) == 0;
}

FiniteMdp make_mdp(const std::string& spec, int horizon, std::uint64_t seed) {
    if (horizon <= 0) throw ValidationError("horizon must be positive");
    if (spec == "twostate-exit") return twostate_exit(horizon);
    if (spec == "coinflip") return coinflip(horizon);
    auto parse_args = [&](const std::string& name) {
        const std::string body = spec.substr(name.size(), spec.size() - name.size() - 1);
        std::vector<std::uint64_t> args;
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ','))
            args.push_back(std::stoull(tok));
        return args;
    };
    if (spec.rfind("random-dense(", 0) == 0 && spec.back() == ')') {
        const auto args = parse_args("random-dense(");
        if (args.size() < 2 || args.size() > 3)
            throw ValidationError("random-dense needs (states, actions[, seed])");
        const std::uint64_t s = args.size() == 3 ? args[2] : seed;
        return random_dense(static_cast<int>(args[0]), static_cast<int>(args[1]), horizon, s);
    }
    if (spec.rfind("chain(", 0) == 0 && spec.back() == ')') {
        const auto args = parse_args("chain(");
        if (args.size() != 1) throw ValidationError("chain needs (states)");
        return chain_mdp(static_cast<int>(args[0]), horizon);
    }
    FiniteMdp m = load_mdp(spec);
    m.horizon = horizon;  // experiments sweep horizons over a fixed model
    validate_mdp(m);
    return m;
}

}  // namespace hfmdp
