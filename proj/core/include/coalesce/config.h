#pragma once

// Flat key=value experiment configuration: dotted keys, '#' comments,
// whitespace-insensitive. Every run directory receives a canonical
// serialization that parses back to the same configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalesce/dynamics.h"
#include "coalesce/payoff.h"

namespace coalesce {

struct PayoffConfig {
  std::string kind = "power_law";  // power_law | polynomial
  // power_law
  double theta = 1.0;
  double lambda = 1.0;
  double c = 0.75;
  // polynomial: coefficients of xi^1, xi^2, ... (no constant term)
  std::vector<double> g_coeffs;
  std::vector<double> f_coeffs;
};

struct InitConfig {
  std::string kind = "box";  // box | explicit
  double box_lo = 0.0;
  double box_hi = 10.0;
  double min_separation = 1e-6;
  std::vector<std::vector<double>> states;  // explicit kind, one per agent
};

struct ExperimentConfig {
  std::int64_t n = 0;
  int m = 2;
  PayoffConfig payoff;
  InitConfig init;
  std::string pair_policy = "uniform";  // uniform | size_weighted
  std::int64_t trials = 1;
  std::optional<std::uint64_t> master_seed;  // required; never wall-clock
  double step_cap_factor = 50.0;
  std::string output_dir = "out";
  int workers = 1;
  double tv_threshold = 0.02;
  std::string compare_empirical;  // optional trial-summary CSV to compare
  std::vector<double> sweep_c;
  std::int64_t sweep_trials = 0;  // 0 runs the sweep theory-only
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<std::string> out;
  std::optional<double> threshold;
};

// Both throw std::invalid_argument with a field-level message
// ("config: <key>: ...") on unknown keys, duplicates, or bad values.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides);

// Cross-field validation, run after overrides and before any trial.
void validate(const ExperimentConfig& config);

// Canonical form; parse_config_text(serialize(c)) reproduces c exactly.
std::string serialize(const ExperimentConfig& config);

PayoffSpec build_payoff(const ExperimentConfig& config);
InitRule build_init_rule(const ExperimentConfig& config);
PairPolicy build_pair_policy(const ExperimentConfig& config);

}  // namespace coalesce
