#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfmdp/collect.hpp"
#include "hfmdp/rng.hpp"
#include "hfmdp/sim.hpp"
#include "hfmdp/types.hpp"

// Estimated models: the truncated per-list estimators (each list counts a
// given (s, a) at most m^st(s, a) times) and the plain generative-model
// estimators, plus the confidence-interval half-widths that define the model
// set used by pessimistic planning.

namespace hfmdp {

enum class Provenance { kTruncatedEpisodic, kGenerative };

struct EstimatedModel {
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    std::vector<std::vector<double>> p_hat;  // [s*A+a] -> vector over S
    std::vector<double> r_hat;               // [s*A+a] mean reward estimate
    std::vector<double> mu_hat;              // over S
    std::vector<std::uint64_t> visits;       // m_D per pair
    Provenance provenance = Provenance::kTruncatedEpisodic;

    int pair_index(int s, int a) const { return s * n_actions + a; }
};

/// Confidence set around an estimated model: per-(s, a, s') transition
/// half-widths and per-state initial half-widths; rewards are pinned to the
/// center's estimates. Rows flagged full_simplex admit any distribution.
struct IntervalModelSet {
    EstimatedModel center;
    std::vector<std::vector<double>> width_p;  // [s*A+a] -> vector over S
    std::vector<double> width_mu;              // over S
    std::vector<char> full_simplex;            // per pair
    double epsilon_est = 0.0;
    double delta = 0.0;
    std::uint64_t n_lists = 0;
};

/// Truncated estimators over a collected dataset: within each list, a tuple at
/// position t counts toward (s, a) iff fewer than m^st(s, a) earlier positions
/// already hit (s, a). mu_hat reads the first state of each list.
EstimatedModel build_truncated_model(const TrajectoryDataset& d, const QuantileTable& mst);

/// Plain empirical model from n_draws i.i.d. generative queries per (s, a)
/// plus n_draws initial-state draws. visits = n_draws everywhere.
EstimatedModel build_generative_model(const FiniteMdp& m, std::uint64_t n_draws,
                                      RngStream rng, InteractionLog* log = nullptr);

/// Half-widths per the planning algorithm:
///   w_P(s,a,s') = max(512 L / (mst N eps), 32 sqrt(p_hat L / (mst N eps)))
/// with L = log(18 |S|^2 |A| / delta), and w_mu = sqrt(log(18|S|/delta) / N).
/// Rows with mst = 0 (or never seen in the dataset) get the full simplex.
IntervalModelSet confidence_widths(const EstimatedModel& model, const QuantileTable& mst,
                                   std::uint64_t n_lists, double epsilon_est, double delta);

/// True iff every |p_hat - P| <= w_P and |mu_hat - mu| <= w_mu entrywise
/// (rewards ignored; the set pins them to r_hat).
bool contains(const IntervalModelSet& set, const FiniteMdp& m);

// Serialization: the MDP text format extended with [provenance], [visits s a],
// [width s a] (numbers, or the word "simplex") and [width-initial] sections.
void write_model_set(const IntervalModelSet& set, std::ostream& out);
void save_model_set(const IntervalModelSet& set, const std::string& path);
IntervalModelSet load_model_set(const std::string& path);

}  // namespace hfmdp
