#pragma once

// Experiment drivers behind the CLI subcommands. Each validates the
// configuration, writes its data files plus a canonical config copy into the
// output directory, prints a one-screen summary, and returns the process
// exit code: 0 when every statistical gate passed, 1 on a gate failure.
// Usage and configuration problems surface as exceptions.

#include "coalesce/config.h"

namespace coalesce {

// Monte Carlo run: trial_summary.csv (trial,k_star; capped trials logged as
// k_star=-1) and events.csv (one row per round).
int run_simulate(const ExperimentConfig& config);

// Distribution table from n-1 up to the 1-1e-8 quantile: exact pmf for
// power-law payoffs, envelope-only for general ones.
int run_theory(const ExperimentConfig& config);

// Empirical-vs-exact fit: fit_report.json plus a combined per-T table. Uses
// compare.empirical as the trial summary when set, otherwise simulates
// internally. Gate: TV distance within compare.tv_threshold and no capped
// trials. Power-law payoffs only.
int run_compare(const ExperimentConfig& config);

// One row per c in sweep.c_values at fixed lambda, optionally backed by
// sweep.trials simulated trials per point from shared initial states. Gate:
// theory monotonicity holds and no empirical inversion beyond 3 combined
// standard errors.
int run_sweep(const ExperimentConfig& config);

}  // namespace coalesce
