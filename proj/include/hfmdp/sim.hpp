#pragma once

#include <cstdint>

#include "hfmdp/rng.hpp"
#include "hfmdp/types.hpp"

// Seeded stochastic access to an MDP in both interaction modes: episodic
// (reset / step, an episode always costs H steps) and generative (draws from
// any (s, a), cost counted in batches of H queries).

namespace hfmdp {

struct EpisodeOverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MidEpisodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Running tally of sample cost, threaded through collectors and pipelines.
struct InteractionLog {
    std::uint64_t episodes = 0;
    std::uint64_t queries = 0;

    std::uint64_t batches(int horizon) const {
        return (queries + horizon - 1) / horizon;
    }
};

/// One draw from R(s, a) followed by one from P(s, a).
std::pair<double, int> generative_query(const FiniteMdp& m, int s, int a, RngStream& rng);

/// Full H-step episode under pi; bumps log.episodes when a log is given.
Trajectory rollout(const FiniteMdp& m, const Policy& pi, RngStream& rng,
                   InteractionLog* log = nullptr);

/// Episodic session: reset draws s0 ~ mu, step advances one of the H steps.
/// Single-owner; an episode must run to completion before the next reset.
class EpisodicSession {
  public:
    EpisodicSession(const FiniteMdp& m, RngStream rng) : mdp_(&m), rng_(rng) {}

    int reset();
    std::pair<double, int> step(int a);

    int current_state() const { return state_; }
    int current_step() const { return h_; }
    std::uint64_t episodes() const { return episodes_; }
    bool episode_done() const { return !started_ || h_ >= mdp_->horizon; }

  private:
    const FiniteMdp* mdp_;
    RngStream rng_;
    int state_ = 0;
    int h_ = 0;
    bool started_ = false;
    std::uint64_t episodes_ = 0;
};

}  // namespace hfmdp
