#include "hfmdp/sim.hpp"

namespace hfmdp {

std::pair<double, int> generative_query(const FiniteMdp& m, int s, int a, RngStream& rng) {
    const DiscreteReward& rd = m.reward_dist(s, a);
    const double r = rd.values[rng.sample_discrete(rd.probs)];
    const int s2 = rng.sample_discrete(m.row(s, a));
    return {r, s2};
}

Trajectory rollout(const FiniteMdp& m, const Policy& pi, RngStream& rng, InteractionLog* log) {
    Trajectory t;
    t.steps.reserve(m.horizon);
    int s = rng.sample_discrete(m.initial);
    for (int h = 0; h < m.horizon; ++h) {
        const int a = pi.action(h, s);
        auto [r, s2] = generative_query(m, s, a, rng);
        t.steps.push_back(TimeStep{s, a, r});
        s = s2;
    }
    t.final_state = s;
    if (log) ++log->episodes;
    return t;
}

int EpisodicSession::reset() {
    if (started_ && h_ < mdp_->horizon)
        throw MidEpisodeError("reset called mid-episode (step " + std::to_string(h_) +
                              " of " + std::to_string(mdp_->horizon) + ")");
    state_ = rng_.sample_discrete(mdp_->initial);
    h_ = 0;
    started_ = true;
    ++episodes_;
    return state_;
}

std::pair<double, int> EpisodicSession::step(int a) {
    if (!started_) throw EpisodeOverError("step before first reset");
    if (h_ >= mdp_->horizon)
        throw EpisodeOverError("episode over: step called at h = " + std::to_string(h_));
    auto [r, s2] = generative_query(*mdp_, state_, a, rng_);
    state_ = s2;
    ++h_;
    return {r, s2};
}

}  // namespace hfmdp
