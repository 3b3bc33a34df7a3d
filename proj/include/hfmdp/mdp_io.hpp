#pragma once

#include <iosfwd>
#include <string>

#include "hfmdp/types.hpp"

// Plain-text MDP container.
//
//   # comments run to end of line
//   [dims] states=<S> actions=<A> horizon=<H>
//   [initial]            followed by S probabilities (one per line)
//   [transition s a]     followed by S probabilities (next-state order)
//   [reward s a]         followed by one or more "value prob" lines
//
// Probabilities are decimal literals. Every [transition s a] and [reward s a]
// section must appear exactly once; section order after [dims] is free.

namespace hfmdp {

FiniteMdp load_mdp(const std::string& path);
FiniteMdp read_mdp(std::istream& in, const std::string& name = "<stream>");

void save_mdp(const FiniteMdp& m, const std::string& path);
void write_mdp(const FiniteMdp& m, std::ostream& out);

// Policy container: a "[policy]" header followed by one assignment per line,
// "h s -> a" for per-step policies and "* s -> a" for stationary ones.
void write_policy(const Policy& p, std::ostream& out);
void save_policy(const Policy& p, const std::string& path);
Policy read_policy(std::istream& in, const std::string& name = "<stream>");
Policy load_policy(const std::string& path);

}  // namespace hfmdp
