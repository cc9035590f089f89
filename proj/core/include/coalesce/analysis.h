#pragma once

// Closed-form results for the coalescence time plus empirical comparison
// statistics. Each round merges with probability 1 - h(xi)^2 where h is the
// defection kernel. With power-law payoffs h is constant, so K* is negative
// binomial: the round of the (n-1)-th success in i.i.d. Bernoulli(p_hat)
// draws. For general payoffs the kernel range over the initial xi interval
// yields a sandwich on the pmf and the expectation.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coalesce/dynamics.h"
#include "coalesce/payoff.h"

namespace coalesce {

// Min and max pairwise Euclidean distance over an initial configuration.
std::pair<double, double> xi_range(const std::vector<std::vector<double>>& states);

// Range of the defection kernel h over [xi_min, xi_max] and the induced
// per-round merge probability envelope.
struct ProbBounds {
  double xi_min = 0.0;
  double xi_max = 0.0;
  double nu = 0.0;     // min of h on the interval
  double mu = 0.0;     // max of h on the interval
  double p_low = 0.0;  // 1 - mu^2
  double p_up = 0.0;   // 1 - nu^2
};

// Dense grid scan followed by golden-section refinement around the grid
// extrema to 1e-10. Power-law specs short-circuit to the constant kernel, so
// nu == mu exactly. Throws std::invalid_argument if the interval is invalid,
// the spec is not evaluable on [xi_min/2, xi_max], or the kernel leaves (0,1).
ProbBounds kernel_bounds(const PayoffSpec& spec, double xi_min, double xi_max,
                         int grid_points = 4096);

// Sandwich on P(K* = T):
//   C(T-1,n-2) (1-p_up)^{T+1-n} p_low^{n-1}  <=  P(K*=T)  <=
//   C(T-1,n-2) (1-p_low)^{T+1-n} p_up^{n-1}
// Binomial coefficients go through lgamma in log space. T < n-1 gives (0,0).
std::pair<double, double> pmf_bounds(std::int64_t n, std::int64_t t,
                                     const ProbBounds& bounds);

// Sandwich on E(K*): [(n-1) p_low^{n-1}/p_up^n, (n-1) p_up^{n-1}/p_low^n].
// Both ends equal (n-1)/p_hat when the envelope collapses.
std::pair<double, double> expectation_bounds(std::int64_t n,
                                             const ProbBounds& bounds);

// Constant per-round merge probability under power-law payoffs:
// 1 - (c / (2^lambda (1-c) + c))^2. The scale theta cancels.
double p_hat(double lambda, double c);

// Law of K* under a constant merge probability. pmf uses the forward
// recurrence from pmf(n-1) = p^{n-1}; cdf goes through the regularized
// incomplete beta, an independent route the tests cross-check.
class TheoreticalDist {
 public:
  TheoreticalDist(std::int64_t n, double p_hat);

  std::int64_t n() const { return n_; }
  double p() const { return p_; }
  double q() const { return 1.0 - p_; }

  double pmf(std::int64_t t) const;  // P(K* = t), 0 for t < n-1
  double cdf(std::int64_t t) const;  // P(K* <= t)
  double sf(std::int64_t t) const;   // P(K* > t)
  std::int64_t quantile(double prob) const;  // smallest t with cdf(t) >= prob

  double mean() const;      // (n-1)/p
  double variance() const;  // (n-1)(1-p)/p^2

 private:
  std::int64_t n_;
  double p_;
};

TheoreticalDist negbinom(std::int64_t n, double p_hat);

// Observed coalescence-time counts.
struct EmpiricalDist {
  std::map<std::int64_t, std::int64_t> counts;
  std::int64_t trials = 0;

  void add(std::int64_t k_star);
  void merge(const EmpiricalDist& other);
  double freq(std::int64_t t) const;
  double mean() const;
  double variance() const;  // sample variance, N-1 denominator
  std::int64_t min_support() const;
  std::int64_t max_support() const;
};

// Accumulates completed trials; capped trials are skipped, so the caller must
// account for them separately.
EmpiricalDist empirical_from_trials(const std::vector<TrialResult>& results);

struct MonotonicityReport {
  bool passed = true;
  int first_violation = -1;  // index of the first offending grid step
  std::vector<double> p_hats;
  std::vector<double> means;
  std::string detail;
};

// Verifies that p_hat strictly decreases and the theory mean (n-1)/p_hat
// strictly increases along a strictly increasing c grid at fixed lambda.
MonotonicityReport monotonicity_scan(double lambda,
                                     const std::vector<double>& c_grid,
                                     std::int64_t n = 2);

struct FitReport {
  double tv_distance = 0.0;
  double chi_square = 0.0;
  std::int64_t dof = 0;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double theory_mean = 0.0;
  double theory_var = 0.0;
  double mean_z = 0.0;
  double chi_square_p = 1.0;
  bool support_mismatch = false;  // empirical mass below n-1
};

// Total variation distance with the theory tail handled analytically,
// chi-square over bins merged to expected count >= 5 (tail absorbed into the
// last bin), and a z-score of the empirical mean against the theory law.
FitReport compare(const EmpiricalDist& empirical, const TheoreticalDist& theory);

// Round cap for a trial: ceil(factor * (n-1) / p_low).
std::int64_t step_cap(std::int64_t n, double factor, const ProbBounds& bounds);

}  // namespace coalesce
