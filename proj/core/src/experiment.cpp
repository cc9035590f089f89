#include "coalesce/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "coalesce/analysis.h"
#include "coalesce/csv.h"
#include "coalesce/log.h"
#include "coalesce/rng.h"

namespace coalesce {

namespace {

constexpr std::int64_t kBatch = 2048;

const std::vector<std::string> kSummaryHeader = {"trial", "k_star"};
const std::vector<std::string> kEventHeader = {
    "trial", "k",      "id_a",   "id_b",    "size_a", "size_b",
    "xi",    "p_star", "strat_a", "strat_b", "merged"};
const std::vector<std::string> kDistributionHeader = {
    "T", "empirical_freq", "theory_pmf", "bound_lower", "bound_upper"};
const std::vector<std::string> kSweepHeader = {
    "c", "p_hat", "theory_mean", "empirical_mean", "empirical_se", "inverted"};

std::filesystem::path prepare_output_dir(const ExperimentConfig& config) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory \"" +
                             config.output_dir + "\": " + ec.message());
  return dir;
}

void write_config_copy(const std::filesystem::path& dir,
                       const ExperimentConfig& config) {
  const auto path = dir / "config.txt";
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << serialize(config);
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

std::vector<std::vector<double>> initial_states_for(
    const ExperimentConfig& config) {
  rng::Stream stream = rng::init_stream(*config.master_seed);
  return generate_states(config.n, config.m, build_init_rule(config), stream);
}

std::int64_t parse_cell_i64(const std::string& cell, const std::string& path) {
  std::int64_t out = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end)
    throw std::runtime_error(path + ": expected an integer cell, got \"" +
                             cell + "\"");
  return out;
}

// Runs `trials` trials in index order, folding completed coalescence times
// into `dist` and counting capped trials.
void accumulate_trials(const TrialSetup& setup, std::int64_t trials,
                       std::uint64_t seed, int workers, EmpiricalDist& dist,
                       std::int64_t& capped) {
  for (std::int64_t first = 0; first < trials; first += kBatch) {
    const std::int64_t last = std::min(trials, first + kBatch);
    for (const TrialResult& result :
         monte_carlo_range(setup, first, last, seed, workers)) {
      if (result.cap_exceeded)
        ++capped;
      else
        dist.add(result.k_star);
    }
  }
}

}  // namespace

int run_simulate(const ExperimentConfig& config) {
  validate(config);
  const auto dir = prepare_output_dir(config);
  const PayoffSpec spec = build_payoff(config);
  const auto states = initial_states_for(config);
  const auto [xi_lo, xi_hi] = xi_range(states);
  const ProbBounds bounds = kernel_bounds(spec, xi_lo, xi_hi);
  const std::int64_t cap = step_cap(config.n, config.step_cap_factor, bounds);
  const TrialSetup setup{spec,  states, build_pair_policy(config),
                         1e-12, cap,    true};

  csv::Writer summary((dir / "trial_summary.csv").string());
  summary.row(kSummaryHeader);
  csv::Writer events((dir / "events.csv").string());
  events.row(kEventHeader);

  EmpiricalDist dist;
  std::int64_t capped = 0;
  std::int64_t below_min_rounds = 0;
  std::int64_t above_max_rounds = 0;
  for (std::int64_t first = 0; first < config.trials; first += kBatch) {
    const std::int64_t last = std::min(config.trials, first + kBatch);
    const auto results = monte_carlo_range(setup, first, last,
                                           *config.master_seed, config.workers);
    for (std::int64_t t = first; t < last; ++t) {
      const TrialResult& result = results[static_cast<std::size_t>(t - first)];
      if (result.cap_exceeded) {
        ++capped;
        summary.row({std::to_string(t), "-1"});
      } else {
        dist.add(result.k_star);
        summary.row({std::to_string(t), std::to_string(result.k_star)});
      }
      below_min_rounds += result.monitor.below_initial_min;
      above_max_rounds += result.monitor.above_initial_max;
      for (const StepEvent& event : result.events)
        events.row({std::to_string(t), std::to_string(event.time),
                    std::to_string(event.id_a), std::to_string(event.id_b),
                    std::to_string(event.size_a), std::to_string(event.size_b),
                    csv::format_double(event.xi),
                    csv::format_double(event.p_star),
                    std::string(1, strategy_label(event.strat_a)),
                    std::string(1, strategy_label(event.strat_b)),
                    event.merged ? "1" : "0"});
    }
  }
  summary.flush();
  events.flush();
  write_config_copy(dir, config);

  if (below_min_rounds > 0 || above_max_rounds > 0)
    log::info("simulate: rounds outside the initial distance range: " +
              std::to_string(below_min_rounds) + " below min, " +
              std::to_string(above_max_rounds) + " above max");

  std::cout << "trials=" << config.trials << " completed=" << dist.trials;
  if (dist.trials > 0)
    std::cout << " mean=" << csv::format_double(dist.mean())
              << " var=" << csv::format_double(dist.variance())
              << " min=" << dist.min_support() << " max=" << dist.max_support();
  std::cout << " cap_exceeded=" << capped << "\n";
  std::cout << "wrote " << (dir / "trial_summary.csv").string() << " and "
            << (dir / "events.csv").string() << "\n";
  return capped > 0 ? 1 : 0;
}

int run_theory(const ExperimentConfig& config) {
  validate(config);
  const auto dir = prepare_output_dir(config);
  const PayoffSpec spec = build_payoff(config);

  ProbBounds bounds;
  const bool exact = spec.power_law_params().has_value();
  if (exact) {
    bounds = kernel_bounds(spec, 1.0, 1.0);  // constant kernel, any interval
  } else {
    const auto states = initial_states_for(config);
    const auto [xi_lo, xi_hi] = xi_range(states);
    bounds = kernel_bounds(spec, xi_lo, xi_hi);
  }
  // Row range from the slowest law covered by the envelope; for power-law
  // payoffs that is the exact law itself.
  const TheoreticalDist row_law = negbinom(config.n, bounds.p_low);
  const std::int64_t t_hi = row_law.quantile(1.0 - 1e-8);

  csv::Writer out((dir / "distribution.csv").string());
  out.row(kDistributionHeader);
  for (std::int64_t t = config.n - 1; t <= t_hi; ++t) {
    const auto [lower, upper] = pmf_bounds(config.n, t, bounds);
    out.row({std::to_string(t), "",
             exact ? csv::format_double(row_law.pmf(t)) : "",
             csv::format_double(lower), csv::format_double(upper)});
  }
  out.flush();
  write_config_copy(dir, config);

  std::cout << "wrote " << (dir / "distribution.csv").string() << ": T="
            << config.n - 1 << ".." << t_hi
            << (exact ? " (exact pmf + collapsed envelope)"
                      : " (envelope only)")
            << "\n";
  return 0;
}

int run_compare(const ExperimentConfig& config) {
  validate(config);
  const PayoffSpec spec = build_payoff(config);
  if (!spec.power_law_params())
    throw std::invalid_argument(
        "config: payoff.kind: compare needs power_law (the exact "
        "distribution has no closed form otherwise)");
  const auto dir = prepare_output_dir(config);
  const auto& power = *spec.power_law_params();
  const TheoreticalDist dist(config.n, p_hat(power.lambda, power.c));

  EmpiricalDist empirical;
  std::int64_t capped = 0;
  if (!config.compare_empirical.empty()) {
    const csv::Table table = csv::read(config.compare_empirical);
    csv::require_header(table, kSummaryHeader, config.compare_empirical);
    for (const auto& row : table.rows) {
      if (row.size() != 2)
        throw std::runtime_error(config.compare_empirical +
                                 ": expected 2 columns per row");
      const std::int64_t k = parse_cell_i64(row[1], config.compare_empirical);
      if (k < 0)
        ++capped;
      else
        empirical.add(k);
    }
  } else {
    const auto states = initial_states_for(config);
    const auto [xi_lo, xi_hi] = xi_range(states);
    const ProbBounds bounds = kernel_bounds(spec, xi_lo, xi_hi);
    const std::int64_t cap = step_cap(config.n, config.step_cap_factor, bounds);
    const TrialSetup setup{spec,  states, build_pair_policy(config),
                           1e-12, cap,    false};
    accumulate_trials(setup, config.trials, *config.master_seed, config.workers,
                      empirical, capped);
  }
  if (empirical.trials == 0)
    throw std::runtime_error("compare: no completed trials to fit");

  const FitReport fit = compare(empirical, dist);

  nlohmann::ordered_json report;
  report["tv_distance"] = fit.tv_distance;
  report["chi_square"] = fit.chi_square;
  report["dof"] = fit.dof;
  report["empirical_mean"] = fit.empirical_mean;
  report["empirical_var"] = fit.empirical_var;
  report["theory_mean"] = fit.theory_mean;
  report["theory_var"] = fit.theory_var;
  report["mean_z"] = fit.mean_z;
  {
    const auto path = dir / "fit_report.json";
    std::ofstream json_out(path);
    if (!json_out) throw std::runtime_error("cannot write " + path.string());
    json_out << report.dump(2) << "\n";
    if (!json_out) throw std::runtime_error("write failed on " + path.string());
  }

  const ProbBounds collapsed = kernel_bounds(spec, 1.0, 1.0);
  const std::int64_t t_lo = std::min(config.n - 1, empirical.min_support());
  const std::int64_t t_hi =
      std::max(dist.quantile(1.0 - 1e-8), empirical.max_support());
  csv::Writer out((dir / "combined.csv").string());
  out.row(kDistributionHeader);
  for (std::int64_t t = t_lo; t <= t_hi; ++t) {
    const auto [lower, upper] = pmf_bounds(config.n, t, collapsed);
    out.row({std::to_string(t), csv::format_double(empirical.freq(t)),
             csv::format_double(dist.pmf(t)), csv::format_double(lower),
             csv::format_double(upper)});
  }
  out.flush();
  write_config_copy(dir, config);

  const bool pass = fit.tv_distance <= config.tv_threshold && capped == 0;
  std::cout << "tv_distance=" << csv::format_double(fit.tv_distance)
            << " threshold=" << csv::format_double(config.tv_threshold)
            << " chi_square=" << csv::format_double(fit.chi_square)
            << " dof=" << fit.dof
            << " p=" << csv::format_double(fit.chi_square_p)
            << " mean_z=" << csv::format_double(fit.mean_z)
            << " cap_exceeded=" << capped << "\n";
  std::cout << "empirical_mean=" << csv::format_double(fit.empirical_mean)
            << " theory_mean=" << csv::format_double(fit.theory_mean)
            << " trials=" << empirical.trials << "\n";
  std::cout << (pass ? "fit gate: PASS" : "fit gate: FAIL") << "\n";
  return pass ? 0 : 1;
}

int run_sweep(const ExperimentConfig& config) {
  validate(config);
  if (config.sweep_c.empty())
    throw std::invalid_argument("config: sweep.c_values: required for sweep");
  if (config.payoff.kind != "power_law")
    throw std::invalid_argument(
        "config: payoff.kind: sweep varies c, so it needs power_law");
  const auto dir = prepare_output_dir(config);

  const MonotonicityReport scan =
      monotonicity_scan(config.payoff.lambda, config.sweep_c, config.n);

  std::vector<std::vector<double>> states;
  if (config.sweep_trials > 0) states = initial_states_for(config);

  csv::Writer out((dir / "sweep.csv").string());
  out.row(kSweepHeader);

  bool any_inversion = false;
  std::int64_t capped = 0;
  double prev_mean = 0.0;
  double prev_se = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < config.sweep_c.size(); ++i) {
    const double c = config.sweep_c[i];
    std::string emp_mean_s;
    std::string emp_se_s;
    std::string inverted_s;
    if (config.sweep_trials > 0) {
      const PayoffSpec spec = PayoffSpec::power_law(
          config.payoff.theta, config.payoff.lambda, c);
      const auto [xi_lo, xi_hi] = xi_range(states);
      const ProbBounds bounds = kernel_bounds(spec, xi_lo, xi_hi);
      const std::int64_t cap =
          step_cap(config.n, config.step_cap_factor, bounds);
      const TrialSetup setup{spec,  states, build_pair_policy(config),
                             1e-12, cap,    false};
      const std::uint64_t sub_seed = rng::derive_seed(
          *config.master_seed, rng::kTagSweep, static_cast<std::uint64_t>(i));
      EmpiricalDist empirical;
      accumulate_trials(setup, config.sweep_trials, sub_seed, config.workers,
                        empirical, capped);
      if (empirical.trials == 0)
        throw std::runtime_error("sweep: no completed trials at c=" +
                                 csv::format_double(c));
      const double emp_mean = empirical.mean();
      const double emp_se = std::sqrt(empirical.variance() /
                                      static_cast<double>(empirical.trials));
      bool inverted = false;
      if (have_prev) {
        const double drop = prev_mean - emp_mean;
        inverted = drop > 3.0 * std::sqrt(emp_se * emp_se + prev_se * prev_se);
      }
      any_inversion = any_inversion || inverted;
      prev_mean = emp_mean;
      prev_se = emp_se;
      have_prev = true;
      emp_mean_s = csv::format_double(emp_mean);
      emp_se_s = csv::format_double(emp_se);
      inverted_s = inverted ? "1" : "0";
    }
    out.row({csv::format_double(c), csv::format_double(scan.p_hats[i]),
             csv::format_double(scan.means[i]), emp_mean_s, emp_se_s,
             inverted_s});
    std::cout << "c=" << csv::format_double(c)
              << " p_hat=" << csv::format_double(scan.p_hats[i])
              << " theory_mean=" << csv::format_double(scan.means[i]);
    if (!emp_mean_s.empty())
      std::cout << " empirical_mean=" << emp_mean_s << " se=" << emp_se_s
                << " inverted=" << inverted_s;
    std::cout << "\n";
  }
  out.flush();
  write_config_copy(dir, config);

  const bool pass = scan.passed && !any_inversion && capped == 0;
  if (!scan.passed) std::cout << "theory monotonicity: " << scan.detail << "\n";
  std::cout << (pass ? "sweep gate: PASS" : "sweep gate: FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace coalesce
