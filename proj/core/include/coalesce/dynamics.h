// Discrete-time coalescence process. Each round draws a pair of groups,
// plays the stage game at their distance with independent Bernoulli(p*)
// strategy draws, applies the outcome (midpoint or state adoption on a
// merge, nothing on mutual defection) and advances time. A trial ends when
// one group holds all agents.
//
// Draw order within a round is fixed: pair selection, then the first
// group's strategy, then the second's. Rounds at distances below eps_xi
// merge deterministically and consume only the pair draw.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coalesce/game.h"
#include "coalesce/payoff.h"
#include "coalesce/rng.h"

namespace coalesce {

struct Group {
  std::int64_t id;
  std::int64_t size;
  std::vector<double> state;
};

struct Population {
  std::vector<Group> groups;
  std::int64_t time = 0;
  std::int64_t next_id = 0;

  std::int64_t total_agents() const;
  const Group* find(std::int64_t id) const;
  int dim() const;
};

enum class PairPolicy {
  Uniform,       // uniform over unordered group pairs
  SizeWeighted,  // pair weight proportional to size_i * size_j
};

struct StepEvent {
  std::int64_t time = 0;
  std::int64_t id_a = 0, id_b = 0;
  std::int64_t size_a = 0, size_b = 0;
  double xi = 0.0;
  double p_star = 0.0;
  Strategy strat_a = Strategy::Defect;
  Strategy strat_b = Strategy::Defect;
  bool merged = false;
  bool degenerate = false;  // below-eps_xi deterministic merge

  int delta() const { return merged ? 1 : 0; }
};

// Tracks per-round distances against the initial [xi_min, xi_max]. Midpoint
// merges can push pair distances below the initial minimum; the monitor
// records that instead of asserting it away.
struct XiMonitor {
  double initial_min = 0.0;
  double initial_max = 0.0;
  double observed_min = 0.0;
  double observed_max = 0.0;
  std::int64_t below_initial_min = 0;
  std::int64_t above_initial_max = 0;
  std::int64_t rounds = 0;

  void record(double xi);
};

struct TrialResult {
  std::int64_t k_star = -1;  // valid only when !cap_exceeded
  bool cap_exceeded = false;
  std::vector<StepEvent> events;
  std::vector<double> final_state;
  XiMonitor monitor;
};

// Initial-state generation: uniform in an axis-aligned box with rejection
// resampling, or an explicit list. Both enforce pairwise min_separation.
struct InitRule {
  enum class Kind { Box, Explicit };

  Kind kind = Kind::Box;
  double box_lo = 0.0;
  double box_hi = 10.0;
  std::vector<std::vector<double>> states;  // explicit kind
  double min_separation = 1e-6;

  static InitRule box(double lo, double hi, double min_separation = 1e-6);
  static InitRule explicit_states(std::vector<std::vector<double>> states,
                                  double min_separation = 1e-6);
};

// n singleton groups with pairwise-distinct states. Throws
// std::invalid_argument on bad arguments or unsatisfiable separation.
Population init_population(std::int64_t n, int m, const InitRule& rule,
                           rng::Stream& stream);

std::vector<std::vector<double>> generate_states(std::int64_t n, int m,
                                                 const InitRule& rule,
                                                 rng::Stream& stream);

// Unordered pair of distinct group ids. Throws std::logic_error when fewer
// than two groups remain.
std::pair<std::int64_t, std::int64_t> select_pair(const Population& population,
                                                  PairPolicy policy,
                                                  rng::Stream& stream);

// Plays one round between the given groups, mutating the population and
// advancing time by one.
StepEvent play_round(Population& population,
                     std::pair<std::int64_t, std::int64_t> pair_ids,
                     const PayoffSpec& spec, double eps_xi, rng::Stream& stream);

struct TrialSetup {
  PayoffSpec payoff;
  std::vector<std::vector<double>> initial_states;
  PairPolicy pair_policy = PairPolicy::Uniform;
  double eps_xi = 1e-12;
  std::int64_t step_cap = 0;  // required positive
  bool keep_events = true;
};

// Runs one trial to full coalescence (or to the step cap, which flags the
// result instead of throwing).
TrialResult run_trial(const TrialSetup& setup, rng::Stream& stream);

// `trials` independent trials from the same initial states. Trial t consumes
// rng::trial_stream(master_seed, t), so results are identical for any worker
// count and any execution order.
std::vector<TrialResult> monte_carlo(const TrialSetup& setup, std::int64_t trials,
                                     std::uint64_t master_seed, int workers = 1);

// Trials [first_trial, last_trial) keyed by their global index; lets callers
// stream large runs in batches without changing any draw.
std::vector<TrialResult> monte_carlo_range(const TrialSetup& setup,
                                           std::int64_t first_trial,
                                           std::int64_t last_trial,
                                           std::uint64_t master_seed,
                                           int workers = 1);

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace coalesce
