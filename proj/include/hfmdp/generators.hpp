#pragma once

#include <string>

#include "hfmdp/rng.hpp"
#include "hfmdp/types.hpp"

// Named MDP and Markov-chain generators used by the CLI and the verification
// corpora. All are deterministic in their (seed, horizon) arguments.

namespace hfmdp {

/// Two states, two actions: action 0 at the start state pays 1/H and stays,
/// action 1 pays 1 and moves to an absorbing zero-reward state. The best
/// per-step policy sequence is worth 2 - 1/H; every deterministic stationary
/// policy is worth at most 1.
FiniteMdp twostate_exit(int horizon);

/// Dense random MDP: Dirichlet rows, two-point rewards with support
/// {0, v(s,a)} and v <= 0.9/H, so episode totals stay below 1.
FiniteMdp random_dense(int n_states, int n_actions, int horizon, std::uint64_t seed);

/// Directed chain of n states; action 0 advances, action 1 stays. Reward
/// 0.9/H at the last state.
FiniteMdp chain_mdp(int n_states, int horizon);

/// Two states, two actions, every transition row (1/2, 1/2); rewards are
/// two-point at scale 1/H. The standard corpus for concentration checks.
FiniteMdp coinflip(int horizon);

/// Random stochastic chain; roughly `sparsity` of the entries are zeroed
/// before normalization (0 gives dense rows).
MarkovChain random_chain(int n_states, std::uint64_t seed, double sparsity = 0.0);

/// Parses generator specs: "twostate-exit", "random-dense(S,A[,seed])",
/// "chain(S)", "coinflip". Everything else is treated as a file path.
bool is_generator_spec(const std::string& spec);
FiniteMdp make_mdp(const std::string& spec, int horizon, std::uint64_t seed);

}  // namespace hfmdp
