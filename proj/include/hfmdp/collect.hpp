#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfmdp/rng.hpp"
#include "hfmdp/sim.hpp"
#include "hfmdp/types.hpp"

// Sample collection over stationary-policy pairs. One list concatenates, over
// (s, a) in row-major order and (pi1, pi2) in lexicographic pair order, one
// switched episode per cell. Each cell draws from its own RNG substream keyed
// by the cell index, so parallel and sequential generation are bit-identical.

namespace hfmdp {

/// Per-(s, a) integer quantile estimates together with the parameters that
/// produced them.
struct QuantileTable {
    static constexpr std::uint64_t kUnbounded = ~std::uint64_t{0};

    int n_states = 0;
    int n_actions = 0;
    std::vector<std::uint64_t> m;  // [s*A+a]
    double epsilon_est = 0.0;
    double delta_est = 0.0;
    std::uint64_t n_lists = 0;         // actual repetition count
    double n_lists_theory = 0.0;       // unscaled formula value

    std::uint64_t at(int s, int a) const { return m[s * n_actions + a]; }

    static QuantileTable unbounded(int n_states, int n_actions);
};

struct CollectOptions {
    std::uint64_t max_episodes = 1000000;
};

/// One H-step episode targeting `target`: actions follow pi1 until the target
/// pair has occurred at some strictly earlier step, pi2 afterwards.
std::vector<SampleTuple> switched_rollout(const FiniteMdp& m, int target_s, int target_a,
                                          const Policy& pi1, const Policy& pi2,
                                          RngStream& rng);

/// Episodes needed for N lists: N * |S||A| * |A|^(2|S|), as a double (may be
/// astronomically large).
double schedule_episode_cost(const FiniteMdp& m, double n_lists);

/// Full collection schedule: N lists of |S||A| * |A|^(2|S|) * H tuples each.
/// Throws BudgetError (with the exact episode count required) past the budget.
TrajectoryDataset collect_samples(const FiniteMdp& m, std::uint64_t n_lists, RngStream rng,
                                  InteractionLog* log = nullptr,
                                  const CollectOptions& opt = {});

/// Runs the same schedule but only tallies per-(s, a) counts per list; returns
/// counts[list][s*A+a]. Shared by the quantile estimator and Monte Carlo
/// quantile oracles.
std::vector<std::vector<std::uint64_t>> schedule_counts(const FiniteMdp& m,
                                                        std::uint64_t n_lists, RngStream rng,
                                                        InteractionLog* log = nullptr,
                                                        const CollectOptions& opt = {});

/// Quantile estimation: runs the schedule with
/// N = ceil(scale * 300 log(6|S||A| / delta_est) / epsilon_est) lists and
/// returns per-(s, a) the ceil(N * epsilon_est / 2)-th largest per-list count.
QuantileTable estimate_quantiles(const FiniteMdp& m, double epsilon_est, double delta_est,
                                 double scale, RngStream rng, InteractionLog* log = nullptr,
                                 const CollectOptions& opt = {});

/// As estimate_quantiles, but reads counts from an already-collected dataset
/// instead of consuming fresh episodes (off-spec sample reuse path).
QuantileTable quantiles_from_counts(const std::vector<std::vector<std::uint64_t>>& counts,
                                    int n_states, int n_actions, double epsilon_est,
                                    double delta_est, double n_lists_theory);

/// Exact number of (s, a) tuples in a list.
std::uint64_t count_occurrences(const std::vector<SampleTuple>& list, int s, int a);

// Dataset container I/O: [dataset] header then one "[list i]" section per list
// with "s a r s2" tuples.
void write_dataset(const TrajectoryDataset& d, std::ostream& out);
void save_dataset(const TrajectoryDataset& d, const std::string& path);
TrajectoryDataset load_dataset(const std::string& path);

}  // namespace hfmdp
