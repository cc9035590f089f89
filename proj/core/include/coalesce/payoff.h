// Payoff functions of the coalescence stage game: the profit-of-coalescence
// function g and the cost-of-state-change function f. Both map nonnegative
// distances to nonnegative utilities, vanish at 0, and must be strictly
// increasing with f < g on the range they are used over.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coalesce {

// Power-law family g(xi) = theta * xi^lambda, f = c * g.
struct PowerLawSpec {
  double theta;
  double lambda;
  double c;

  // Throws std::invalid_argument unless theta > 0, lambda > 0, 0 < c < 1.
  PowerLawSpec(double theta, double lambda, double c);
};

class PayoffSpec {
 public:
  static PayoffSpec power_law(const PowerLawSpec& params);
  static PayoffSpec power_law(double theta, double lambda, double c);

  // g(xi) = sum_i g_coeffs[i] * xi^(i+1), same for f. Coefficients must be
  // nonnegative with at least one positive; dominance f < g is certified by
  // validate_spec, not by construction.
  static PayoffSpec polynomial(std::vector<double> g_coeffs,
                               std::vector<double> f_coeffs);

  // Arbitrary function pair certified only on [range_lo, range_hi];
  // evaluation outside that interval raises std::out_of_range.
  static PayoffSpec custom(std::function<double(double)> profit,
                           std::function<double(double)> cost,
                           double range_lo, double range_hi);

  // g(xi). Throws std::domain_error for xi < 0, std::out_of_range outside a
  // restricted operating range.
  double profit(double xi) const;
  // f(xi), same error contract.
  double cost(double xi) const;

  bool range_restricted() const { return restricted_; }
  double range_lo() const { return range_lo_; }
  double range_hi() const { return range_hi_; }

  // Set when the spec is from the power-law family (enables the closed-form
  // distribution path).
  const std::optional<PowerLawSpec>& power_law_params() const { return power_; }

 private:
  PayoffSpec() = default;

  std::function<double(double)> profit_fn_;
  std::function<double(double)> cost_fn_;
  double range_lo_ = 0.0;
  double range_hi_ = 0.0;
  bool restricted_ = false;
  std::optional<PowerLawSpec> power_;
};

struct ValidationReport {
  bool origin_checked = false;  // f(0), g(0) only reachable when 0 is in range
  bool origin_ok = true;
  bool profit_monotone_ok = true;
  bool cost_monotone_ok = true;
  bool dominance_ok = true;           // f(xi) < g(xi) for xi > 0
  double first_violation_xi = 0.0;    // meaningful only when a check failed
  std::string detail;

  bool passed() const {
    return origin_ok && profit_monotone_ok && cost_monotone_ok && dominance_ok;
  }
};

// Grid-sampled certification of the payoff invariants over [lo, hi].
// Failures are reported, never thrown. grid_points >= 2.
ValidationReport validate_spec(const PayoffSpec& spec, int grid_points,
                               double lo, double hi);

// Convenience overload for range-restricted specs (their own certified range).
ValidationReport validate_spec(const PayoffSpec& spec, int grid_points = 1024);

}  // namespace coalesce
