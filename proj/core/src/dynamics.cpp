#include "coalesce/dynamics.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "coalesce/analysis.h"

namespace coalesce {

namespace {

constexpr int kMaxRejectionsPerPoint = 100000;

std::size_t index_of(const Population& population, std::int64_t id) {
  for (std::size_t i = 0; i < population.groups.size(); ++i)
    if (population.groups[i].id == id) return i;
  throw std::invalid_argument("group id " + std::to_string(id) + " not present");
}

// Unrank r in [0, G*(G-1)/2) to the r-th unordered index pair in
// lexicographic order.
std::pair<std::size_t, std::size_t> unrank_pair(std::uint64_t r, std::size_t g) {
  for (std::size_t i = 0; i + 1 < g; ++i) {
    const std::uint64_t row = g - 1 - i;
    if (r < row) return {i, i + 1 + static_cast<std::size_t>(r)};
    r -= row;
  }
  throw std::logic_error("pair rank out of range");
}

}  // namespace

std::int64_t Population::total_agents() const {
  std::int64_t sum = 0;
  for (const Group& group : groups) sum += group.size;
  return sum;
}

const Group* Population::find(std::int64_t id) const {
  for (const Group& group : groups)
    if (group.id == id) return &group;
  return nullptr;
}

int Population::dim() const {
  return groups.empty() ? 0 : static_cast<int>(groups.front().state.size());
}

void XiMonitor::record(double xi) {
  ++rounds;
  observed_min = std::min(observed_min, xi);
  observed_max = std::max(observed_max, xi);
  if (xi < initial_min) ++below_initial_min;
  if (xi > initial_max) ++above_initial_max;
}

InitRule InitRule::box(double lo, double hi, double min_separation) {
  InitRule rule;
  rule.kind = Kind::Box;
  rule.box_lo = lo;
  rule.box_hi = hi;
  rule.min_separation = min_separation;
  return rule;
}

InitRule InitRule::explicit_states(std::vector<std::vector<double>> states,
                                   double min_separation) {
  InitRule rule;
  rule.kind = Kind::Explicit;
  rule.states = std::move(states);
  rule.min_separation = min_separation;
  return rule;
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<std::vector<double>> generate_states(std::int64_t n, int m,
                                                 const InitRule& rule,
                                                 rng::Stream& stream) {
  if (n < 2) throw std::invalid_argument("population needs n >= 2 agents");
  if (m < 1) throw std::invalid_argument("state dimension must be >= 1");
  if (!(rule.min_separation > 0.0))
    throw std::invalid_argument("min_separation must be positive");

  if (rule.kind == InitRule::Kind::Explicit) {
    if (static_cast<std::int64_t>(rule.states.size()) != n)
      throw std::invalid_argument("explicit state list has " +
                                  std::to_string(rule.states.size()) +
                                  " entries, expected " + std::to_string(n));
    for (const auto& s : rule.states)
      if (static_cast<int>(s.size()) != m)
        throw std::invalid_argument("explicit state has wrong dimension");
    for (std::size_t i = 0; i < rule.states.size(); ++i)
      for (std::size_t j = i + 1; j < rule.states.size(); ++j)
        if (euclidean_distance(rule.states[i], rule.states[j]) < rule.min_separation)
          throw std::invalid_argument(
              "initial states " + std::to_string(i) + " and " + std::to_string(j) +
              " are closer than min_separation (states must be distinct)");
    return rule.states;
  }

  if (!(rule.box_hi > rule.box_lo))
    throw std::invalid_argument("init box needs box_lo < box_hi");

  std::vector<std::vector<double>> states;
  states.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> candidate(static_cast<std::size_t>(m));
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRejectionsPerPoint; ++attempt) {
      for (double& coord : candidate)
        coord = stream.next_uniform(rule.box_lo, rule.box_hi);
      bool separated = true;
      for (const auto& other : states) {
        if (euclidean_distance(candidate, other) < rule.min_separation) {
          separated = false;
          break;
        }
      }
      if (separated) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::invalid_argument(
          "could not place " + std::to_string(n) + " states with min_separation " +
          std::to_string(rule.min_separation) + " in the given box");
    states.push_back(std::move(candidate));
  }
  return states;
}

Population init_population(std::int64_t n, int m, const InitRule& rule,
                           rng::Stream& stream) {
  Population population;
  auto states = generate_states(n, m, rule, stream);
  population.groups.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    population.groups.push_back(
        {static_cast<std::int64_t>(i), 1, std::move(states[i])});
  population.next_id = n;
  population.time = 0;
  return population;
}

std::pair<std::int64_t, std::int64_t> select_pair(const Population& population,
                                                  PairPolicy policy,
                                                  rng::Stream& stream) {
  const std::size_t g = population.groups.size();
  if (g < 2)
    throw std::logic_error("select_pair: population already fully coalesced");

  std::size_t i = 0;
  std::size_t j = 1;
  if (policy == PairPolicy::Uniform) {
    const std::uint64_t pairs =
        static_cast<std::uint64_t>(g) * (static_cast<std::uint64_t>(g) - 1) / 2;
    std::tie(i, j) = unrank_pair(stream.next_below(pairs), g);
  } else {
    double total = 0.0;
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = a + 1; b < g; ++b)
        total += static_cast<double>(population.groups[a].size) *
                 static_cast<double>(population.groups[b].size);
    const double target = stream.next_u01() * total;
    double acc = 0.0;
    bool found = false;
    for (std::size_t a = 0; a < g && !found; ++a) {
      for (std::size_t b = a + 1; b < g; ++b) {
        acc += static_cast<double>(population.groups[a].size) *
               static_cast<double>(population.groups[b].size);
        if (target < acc) {
          i = a;
          j = b;
          found = true;
          break;
        }
      }
    }
    if (!found) {  // target == total after rounding; take the last pair
      i = g - 2;
      j = g - 1;
    }
  }
  return {population.groups[i].id, population.groups[j].id};
}

StepEvent play_round(Population& population,
                     std::pair<std::int64_t, std::int64_t> pair_ids,
                     const PayoffSpec& spec, double eps_xi, rng::Stream& stream) {
  const std::size_t ia = index_of(population, pair_ids.first);
  const std::size_t ib = index_of(population, pair_ids.second);
  if (ia == ib) throw std::invalid_argument("play_round: pair ids must differ");

  Group& a = population.groups[ia];
  Group& b = population.groups[ib];

  StepEvent event;
  event.time = population.time + 1;
  event.id_a = a.id;
  event.id_b = b.id;
  event.size_a = a.size;
  event.size_b = b.size;
  event.xi = euclidean_distance(a.state, b.state);

  std::vector<double> merged_state;
  if (event.xi < eps_xi) {
    // All payoffs vanish and the equilibrium formula is 0/0; the groups
    // already share a state, so they merge where they stand.
    event.degenerate = true;
    event.p_star = 1.0;
    event.strat_a = Strategy::Cooperate;
    event.strat_b = Strategy::Cooperate;
    event.merged = true;
    merged_state = a.state;
  } else {
    event.p_star = closed_form_ne(spec, event.xi).p;
    event.strat_a = stream.next_bernoulli(event.p_star) ? Strategy::Cooperate
                                                        : Strategy::Defect;
    event.strat_b = stream.next_bernoulli(event.p_star) ? Strategy::Cooperate
                                                        : Strategy::Defect;
    const bool a_coop = event.strat_a == Strategy::Cooperate;
    const bool b_coop = event.strat_b == Strategy::Cooperate;
    event.merged = a_coop || b_coop;
    if (a_coop && b_coop) {
      merged_state.resize(a.state.size());
      for (std::size_t d = 0; d < a.state.size(); ++d)
        merged_state[d] = (a.state[d] + b.state[d]) / 2.0;
    } else if (a_coop) {
      merged_state = b.state;
    } else if (b_coop) {
      merged_state = a.state;
    }
  }

  population.time = event.time;
  if (event.merged) {
    Group merged;
    merged.id = population.next_id++;
    merged.size = event.size_a + event.size_b;
    merged.state = std::move(merged_state);
    const std::size_t hi = std::max(ia, ib);
    const std::size_t lo = std::min(ia, ib);
    population.groups.erase(population.groups.begin() + static_cast<std::ptrdiff_t>(hi));
    population.groups.erase(population.groups.begin() + static_cast<std::ptrdiff_t>(lo));
    population.groups.push_back(std::move(merged));
  }
  return event;
}

TrialResult run_trial(const TrialSetup& setup, rng::Stream& stream) {
  if (setup.step_cap <= 0)
    throw std::invalid_argument("run_trial: step_cap must be positive");

  Population population;
  population.groups.reserve(setup.initial_states.size());
  for (std::size_t i = 0; i < setup.initial_states.size(); ++i)
    population.groups.push_back(
        {static_cast<std::int64_t>(i), 1, setup.initial_states[i]});
  population.next_id = static_cast<std::int64_t>(setup.initial_states.size());
  if (population.groups.size() < 2)
    throw std::invalid_argument("run_trial: need at least two initial states");

  TrialResult result;
  const auto [xi_min, xi_max] = xi_range(setup.initial_states);
  result.monitor.initial_min = xi_min;
  result.monitor.initial_max = xi_max;
  result.monitor.observed_min = std::numeric_limits<double>::infinity();
  result.monitor.observed_max = 0.0;

  while (population.groups.size() > 1) {
    if (population.time >= setup.step_cap) {
      result.cap_exceeded = true;
      result.k_star = -1;
      return result;
    }
    const auto pair_ids = select_pair(population, setup.pair_policy, stream);
    StepEvent event = play_round(population, pair_ids, setup.payoff, setup.eps_xi, stream);
    result.monitor.record(event.xi);
    if (event.merged) result.k_star = event.time;
    if (setup.keep_events) result.events.push_back(event);
  }
  result.final_state = population.groups.front().state;
  return result;
}

std::vector<TrialResult> monte_carlo_range(const TrialSetup& setup,
                                           std::int64_t first_trial,
                                           std::int64_t last_trial,
                                           std::uint64_t master_seed, int workers) {
  if (first_trial < 0 || last_trial <= first_trial)
    throw std::invalid_argument("monte_carlo: need 0 <= first_trial < last_trial");
  if (workers < 1) workers = 1;

  const std::int64_t count = last_trial - first_trial;
  std::vector<TrialResult> results(static_cast<std::size_t>(count));
  if (workers == 1) {
    for (std::int64_t t = first_trial; t < last_trial; ++t) {
      rng::Stream stream = rng::trial_stream(master_seed, static_cast<std::uint64_t>(t));
      results[static_cast<std::size_t>(t - first_trial)] = run_trial(setup, stream);
    }
    return results;
  }

  std::atomic<std::int64_t> next{first_trial};
  auto worker = [&] {
    while (true) {
      const std::int64_t t = next.fetch_add(1);
      if (t >= last_trial) break;
      rng::Stream stream = rng::trial_stream(master_seed, static_cast<std::uint64_t>(t));
      results[static_cast<std::size_t>(t - first_trial)] = run_trial(setup, stream);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& thread : pool) thread.join();
  return results;
}

std::vector<TrialResult> monte_carlo(const TrialSetup& setup, std::int64_t trials,
                                     std::uint64_t master_seed, int workers) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  return monte_carlo_range(setup, 0, trials, master_seed, workers);
}

}  // namespace coalesce
