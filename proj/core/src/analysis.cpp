#include "coalesce/analysis.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "coalesce/game.h"

namespace coalesce {

namespace {

constexpr double kRefineTol = 1e-10;

double golden_section_min(const std::function<double(double)>& fn, double a,
                          double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  double best = std::min(fc, fd);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
    best = std::min(best, std::min(fc, fd));
  }
  return std::min(best, fn((a + b) / 2.0));
}

void check_bounds_arg(const ProbBounds& bounds) {
  if (!(bounds.p_low > 0.0) || !(bounds.p_up < 1.0) ||
      bounds.p_low > bounds.p_up)
    throw std::invalid_argument("need 0 < p_low <= p_up < 1");
}

}  // namespace

std::pair<double, double> xi_range(
    const std::vector<std::vector<double>>& states) {
  if (states.size() < 2)
    throw std::invalid_argument("xi_range needs at least 2 states");
  const std::size_t m = states.front().size();
  for (const auto& s : states)
    if (s.size() != m)
      throw std::invalid_argument("states have mixed dimensions");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double d = euclidean_distance(states[i], states[j]);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return {lo, hi};
}

ProbBounds kernel_bounds(const PayoffSpec& spec, double xi_min, double xi_max,
                         int grid_points) {
  if (!(xi_min > 0.0) || !(xi_min <= xi_max))
    throw std::invalid_argument("kernel_bounds needs 0 < xi_min <= xi_max");
  if (grid_points < 2)
    throw std::invalid_argument("kernel_bounds needs >= 2 grid points");
  if (spec.range_restricted() &&
      (xi_min / 2.0 < spec.range_lo() || xi_max > spec.range_hi()))
    throw std::invalid_argument(
        "payoff spec is not evaluable on [xi_min/2, xi_max]");

  ProbBounds bounds;
  bounds.xi_min = xi_min;
  bounds.xi_max = xi_max;

  if (const auto& power = spec.power_law_params()) {
    // The kernel is the constant c / (2^lambda (1-c) + c); the envelope
    // collapses exactly instead of to grid precision.
    const double scale = std::exp2(power->lambda) * (1.0 - power->c);
    const double h = power->c / (scale + power->c);
    bounds.nu = h;
    bounds.mu = h;
  } else {
    auto kernel = [&spec](double xi) { return defection_kernel(spec, xi); };
    double nu = std::numeric_limits<double>::infinity();
    double mu = 0.0;
    int arg_min = 0;
    int arg_max = 0;
    const double step =
        xi_min == xi_max ? 0.0 : (xi_max - xi_min) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
      const double xi = i + 1 == grid_points ? xi_max : xi_min + step * i;
      const double h = kernel(xi);
      if (!(h > 0.0) || !(h < 1.0))
        throw std::invalid_argument(
            "defection kernel leaves (0,1) at xi=" + std::to_string(xi));
      if (h < nu) {
        nu = h;
        arg_min = i;
      }
      if (h > mu) {
        mu = h;
        arg_max = i;
      }
      if (xi_min == xi_max) break;
    }
    if (xi_min < xi_max) {
      auto bracket = [&](int i) {
        const double a = xi_min + step * std::max(i - 1, 0);
        const double b = std::min(xi_min + step * (i + 1), xi_max);
        return std::pair<double, double>{a, b};
      };
      const auto [la, lb] = bracket(arg_min);
      nu = std::min(nu, golden_section_min(kernel, la, lb, kRefineTol));
      const auto [ha, hb] = bracket(arg_max);
      auto negated = [&kernel](double xi) { return -kernel(xi); };
      mu = std::max(mu, -golden_section_min(negated, ha, hb, kRefineTol));
    }
    bounds.nu = nu;
    bounds.mu = mu;
  }

  bounds.p_low = 1.0 - bounds.mu * bounds.mu;
  bounds.p_up = 1.0 - bounds.nu * bounds.nu;
  return bounds;
}

std::pair<double, double> pmf_bounds(std::int64_t n, std::int64_t t,
                                     const ProbBounds& bounds) {
  if (n < 2) throw std::invalid_argument("pmf_bounds needs n >= 2");
  check_bounds_arg(bounds);
  if (t < n - 1) return {0.0, 0.0};

  const double log_choose = std::lgamma(static_cast<double>(t)) -
                            std::lgamma(static_cast<double>(n - 1)) -
                            std::lgamma(static_cast<double>(t - n + 2));
  const double successes = static_cast<double>(n - 1);
  const double failures = static_cast<double>(t + 1 - n);
  auto envelope = [&](double p_success, double p_failure_side) {
    double log_mass = log_choose + successes * std::log(p_success);
    if (failures > 0.0) log_mass += failures * std::log1p(-p_failure_side);
    return std::exp(log_mass);
  };
  return {envelope(bounds.p_low, bounds.p_up),
          envelope(bounds.p_up, bounds.p_low)};
}

std::pair<double, double> expectation_bounds(std::int64_t n,
                                             const ProbBounds& bounds) {
  if (n < 2) throw std::invalid_argument("expectation_bounds needs n >= 2");
  check_bounds_arg(bounds);
  const double k = static_cast<double>(n - 1);
  const double lower =
      k * std::exp(k * std::log(bounds.p_low) - (k + 1) * std::log(bounds.p_up));
  const double upper =
      k * std::exp(k * std::log(bounds.p_up) - (k + 1) * std::log(bounds.p_low));
  return {lower, upper};
}

double p_hat(double lambda, double c) {
  if (!(lambda > 0.0)) throw std::invalid_argument("p_hat needs lambda > 0");
  if (!(c > 0.0) || !(c < 1.0))
    throw std::invalid_argument("p_hat needs c in (0,1)");
  const double h = c / (std::exp2(lambda) * (1.0 - c) + c);
  return 1.0 - h * h;
}

TheoreticalDist::TheoreticalDist(std::int64_t n, double p_hat) : n_(n), p_(p_hat) {
  if (n < 2) throw std::invalid_argument("distribution needs n >= 2");
  if (!(p_hat > 0.0) || !(p_hat < 1.0))
    throw std::invalid_argument("distribution needs p_hat in (0,1)");
}

double TheoreticalDist::pmf(std::int64_t t) const {
  if (t < n_ - 1) return 0.0;
  double mass = std::pow(p_, static_cast<double>(n_ - 1));
  for (std::int64_t k = n_ - 1; k < t; ++k)
    mass *= q() * static_cast<double>(k) / static_cast<double>(k - n_ + 2);
  return mass;
}

double TheoreticalDist::cdf(std::int64_t t) const {
  if (t < n_ - 1) return 0.0;
  return boost::math::ibeta(static_cast<double>(n_ - 1),
                            static_cast<double>(t - n_ + 2), p_);
}

double TheoreticalDist::sf(std::int64_t t) const {
  if (t < n_ - 1) return 1.0;
  return boost::math::ibetac(static_cast<double>(n_ - 1),
                             static_cast<double>(t - n_ + 2), p_);
}

std::int64_t TheoreticalDist::quantile(double prob) const {
  if (!(prob >= 0.0) || !(prob < 1.0))
    throw std::invalid_argument("quantile needs prob in [0,1)");
  std::int64_t t = n_ - 1;
  double mass = std::pow(p_, static_cast<double>(n_ - 1));
  double cum = mass;
  // cum is nondecreasing toward 1, so this terminates; the hard cap guards
  // against float stagnation for probabilities within rounding of 1.
  const std::int64_t cap = t + 1000000;
  while (cum < prob && t < cap) {
    mass *= q() * static_cast<double>(t) / static_cast<double>(t - n_ + 2);
    cum += mass;
    ++t;
  }
  if (cum < prob)
    throw std::logic_error("quantile did not converge; prob too close to 1");
  return t;
}

double TheoreticalDist::mean() const {
  return static_cast<double>(n_ - 1) / p_;
}

double TheoreticalDist::variance() const {
  return static_cast<double>(n_ - 1) * q() / (p_ * p_);
}

TheoreticalDist negbinom(std::int64_t n, double p_hat) {
  return TheoreticalDist(n, p_hat);
}

void EmpiricalDist::add(std::int64_t k_star) {
  ++counts[k_star];
  ++trials;
}

void EmpiricalDist::merge(const EmpiricalDist& other) {
  for (const auto& [value, count] : other.counts) counts[value] += count;
  trials += other.trials;
}

double EmpiricalDist::freq(std::int64_t t) const {
  if (trials == 0) return 0.0;
  const auto it = counts.find(t);
  return it == counts.end()
             ? 0.0
             : static_cast<double>(it->second) / static_cast<double>(trials);
}

double EmpiricalDist::mean() const {
  if (trials == 0) throw std::logic_error("empty empirical distribution");
  double sum = 0.0;
  for (const auto& [value, count] : counts)
    sum += static_cast<double>(value) * static_cast<double>(count);
  return sum / static_cast<double>(trials);
}

double EmpiricalDist::variance() const {
  if (trials < 2) return 0.0;
  const double mu = mean();
  double sum = 0.0;
  for (const auto& [value, count] : counts) {
    const double d = static_cast<double>(value) - mu;
    sum += d * d * static_cast<double>(count);
  }
  return sum / static_cast<double>(trials - 1);
}

std::int64_t EmpiricalDist::min_support() const {
  if (counts.empty()) throw std::logic_error("empty empirical distribution");
  return counts.begin()->first;
}

std::int64_t EmpiricalDist::max_support() const {
  if (counts.empty()) throw std::logic_error("empty empirical distribution");
  return counts.rbegin()->first;
}

EmpiricalDist empirical_from_trials(const std::vector<TrialResult>& results) {
  EmpiricalDist dist;
  for (const TrialResult& result : results)
    if (!result.cap_exceeded && result.k_star >= 0) dist.add(result.k_star);
  return dist;
}

MonotonicityReport monotonicity_scan(double lambda,
                                     const std::vector<double>& c_grid,
                                     std::int64_t n) {
  if (n < 2) throw std::invalid_argument("monotonicity_scan needs n >= 2");
  if (c_grid.empty())
    throw std::invalid_argument("c grid must not be empty");
  for (std::size_t i = 1; i < c_grid.size(); ++i)
    if (!(c_grid[i] > c_grid[i - 1]))
      throw std::invalid_argument("c grid must be strictly increasing");

  MonotonicityReport report;
  report.p_hats.reserve(c_grid.size());
  report.means.reserve(c_grid.size());
  for (const double c : c_grid) {
    const double p = p_hat(lambda, c);
    report.p_hats.push_back(p);
    report.means.push_back(static_cast<double>(n - 1) / p);
  }
  for (std::size_t i = 1; i < c_grid.size(); ++i) {
    const bool p_drops = report.p_hats[i] < report.p_hats[i - 1];
    const bool mean_rises = report.means[i] > report.means[i - 1];
    if (!p_drops || !mean_rises) {
      report.passed = false;
      report.first_violation = static_cast<int>(i);
      report.detail = "monotonicity breaks between c=" +
                      std::to_string(c_grid[i - 1]) + " and c=" +
                      std::to_string(c_grid[i]);
      break;
    }
  }
  return report;
}

FitReport compare(const EmpiricalDist& empirical, const TheoreticalDist& theory) {
  if (empirical.trials < 1)
    throw std::invalid_argument("compare needs at least one trial");

  FitReport report;
  report.theory_mean = theory.mean();
  report.theory_var = theory.variance();
  report.empirical_mean = empirical.mean();
  report.empirical_var = empirical.variance();
  report.mean_z =
      (report.empirical_mean - report.theory_mean) /
      std::sqrt(report.theory_var / static_cast<double>(empirical.trials));
  report.support_mismatch = empirical.min_support() < theory.n() - 1;

  // TV distance: sum |freq - pmf| over the observed support; all remaining
  // theory mass has empirical frequency 0 and is added analytically.
  double l1 = 0.0;
  double covered = 0.0;
  for (const auto& [value, count] : empirical.counts) {
    const double mass = theory.pmf(value);
    l1 += std::abs(static_cast<double>(count) /
                       static_cast<double>(empirical.trials) -
                   mass);
    covered += mass;
  }
  report.tv_distance = 0.5 * (l1 + std::max(0.0, 1.0 - covered));

  // Chi-square: walk T upward accumulating bins of expected count >= 5; stop
  // once the remaining tail cannot fill two more bins, then fold the tail
  // (expected mass via the survival function) into a final bin.
  const double trials = static_cast<double>(empirical.trials);
  std::vector<double> expected;
  std::vector<double> observed;
  double bin_expected = 0.0;
  double bin_observed = 0.0;
  double used_mass = 0.0;
  std::int64_t t = theory.n() - 1;
  while (trials * (1.0 - used_mass) >= 10.0) {
    const double mass = theory.pmf(t);
    bin_expected += trials * mass;
    bin_observed += static_cast<double>(
        empirical.counts.count(t) ? empirical.counts.at(t) : 0);
    used_mass += mass;
    ++t;
    if (bin_expected >= 5.0) {
      expected.push_back(bin_expected);
      observed.push_back(bin_observed);
      bin_expected = 0.0;
      bin_observed = 0.0;
    }
  }
  double tail_expected = bin_expected + trials * std::max(0.0, theory.sf(t - 1));
  double tail_observed = bin_observed;
  for (auto it = empirical.counts.lower_bound(t); it != empirical.counts.end();
       ++it)
    tail_observed += static_cast<double>(it->second);
  for (auto it = empirical.counts.begin();
       it != empirical.counts.end() && it->first < theory.n() - 1; ++it)
    tail_observed += static_cast<double>(it->second);  // impossible-time mass
  if (!expected.empty() && tail_expected < 5.0) {
    expected.back() += tail_expected;
    observed.back() += tail_observed;
  } else {
    expected.push_back(tail_expected);
    observed.push_back(tail_observed);
  }

  if (expected.size() >= 2) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const double d = observed[i] - expected[i];
      chi2 += d * d / expected[i];
    }
    report.chi_square = chi2;
    report.dof = static_cast<std::int64_t>(expected.size()) - 1;
    report.chi_square_p =
        boost::math::gamma_q(static_cast<double>(report.dof) / 2.0, chi2 / 2.0);
  } else {
    report.chi_square = 0.0;
    report.dof = 0;
    report.chi_square_p = 1.0;
  }
  return report;
}

std::int64_t step_cap(std::int64_t n, double factor, const ProbBounds& bounds) {
  if (n < 2) throw std::invalid_argument("step_cap needs n >= 2");
  if (!(factor > 0.0)) throw std::invalid_argument("step_cap factor must be positive");
  check_bounds_arg(bounds);
  const double cap =
      std::ceil(factor * static_cast<double>(n - 1) / bounds.p_low);
  if (!(cap < 9.0e18)) throw std::invalid_argument("step cap overflows");
  return static_cast<std::int64_t>(cap);
}

}  // namespace coalesce
