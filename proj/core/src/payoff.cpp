#include "coalesce/payoff.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace coalesce {

namespace {

constexpr double kOriginTol = 1e-12;

double eval_polynomial(const std::vector<double>& coeffs, double xi) {
  // Horner over degree >= 1 terms: xi * (c0 + xi * (c1 + ...)).
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * xi + *it;
  return acc * xi;
}

}  // namespace

PowerLawSpec::PowerLawSpec(double theta_in, double lambda_in, double c_in)
    : theta(theta_in), lambda(lambda_in), c(c_in) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("PowerLawSpec: theta must be positive, got " +
                                std::to_string(theta));
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("PowerLawSpec: lambda must be positive, got " +
                                std::to_string(lambda));
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("PowerLawSpec: c must lie in (0,1), got " +
                                std::to_string(c));
}

PayoffSpec PayoffSpec::power_law(const PowerLawSpec& params) {
  PayoffSpec spec;
  const double theta = params.theta;
  const double lambda = params.lambda;
  const double c = params.c;
  spec.profit_fn_ = [theta, lambda](double xi) { return theta * std::pow(xi, lambda); };
  spec.cost_fn_ = [theta, lambda, c](double xi) { return c * theta * std::pow(xi, lambda); };
  spec.range_lo_ = 0.0;
  spec.range_hi_ = std::numeric_limits<double>::infinity();
  spec.restricted_ = false;
  spec.power_ = params;
  return spec;
}

PayoffSpec PayoffSpec::power_law(double theta, double lambda, double c) {
  return power_law(PowerLawSpec(theta, lambda, c));
}

PayoffSpec PayoffSpec::polynomial(std::vector<double> g_coeffs,
                                  std::vector<double> f_coeffs) {
  auto check = [](const std::vector<double>& coeffs, const char* name) {
    bool any_positive = false;
    for (double a : coeffs) {
      if (!(a >= 0.0) || !std::isfinite(a))
        throw std::invalid_argument(std::string("PayoffSpec::polynomial: ") + name +
                                    " coefficients must be finite and nonnegative");
      if (a > 0.0) any_positive = true;
    }
    if (!any_positive)
      throw std::invalid_argument(std::string("PayoffSpec::polynomial: ") + name +
                                  " needs at least one positive coefficient");
  };
  check(g_coeffs, "profit");
  check(f_coeffs, "cost");

  PayoffSpec spec;
  spec.profit_fn_ = [coeffs = std::move(g_coeffs)](double xi) {
    return eval_polynomial(coeffs, xi);
  };
  spec.cost_fn_ = [coeffs = std::move(f_coeffs)](double xi) {
    return eval_polynomial(coeffs, xi);
  };
  spec.range_lo_ = 0.0;
  spec.range_hi_ = std::numeric_limits<double>::infinity();
  spec.restricted_ = false;
  return spec;
}

PayoffSpec PayoffSpec::custom(std::function<double(double)> profit,
                              std::function<double(double)> cost,
                              double range_lo, double range_hi) {
  if (!profit || !cost)
    throw std::invalid_argument("PayoffSpec::custom: null function");
  if (!(range_lo >= 0.0) || !(range_hi > range_lo))
    throw std::invalid_argument("PayoffSpec::custom: need 0 <= range_lo < range_hi");
  PayoffSpec spec;
  spec.profit_fn_ = std::move(profit);
  spec.cost_fn_ = std::move(cost);
  spec.range_lo_ = range_lo;
  spec.range_hi_ = range_hi;
  spec.restricted_ = true;
  return spec;
}

double PayoffSpec::profit(double xi) const {
  if (!(xi >= 0.0))
    throw std::domain_error("PayoffSpec::profit: negative distance " + std::to_string(xi));
  if (restricted_ && (xi < range_lo_ || xi > range_hi_))
    throw std::out_of_range("PayoffSpec::profit: distance " + std::to_string(xi) +
                            " outside certified range");
  return profit_fn_(xi);
}

double PayoffSpec::cost(double xi) const {
  if (!(xi >= 0.0))
    throw std::domain_error("PayoffSpec::cost: negative distance " + std::to_string(xi));
  if (restricted_ && (xi < range_lo_ || xi > range_hi_))
    throw std::out_of_range("PayoffSpec::cost: distance " + std::to_string(xi) +
                            " outside certified range");
  return cost_fn_(xi);
}

ValidationReport validate_spec(const PayoffSpec& spec, int grid_points,
                               double lo, double hi) {
  if (grid_points < 2)
    throw std::invalid_argument("validate_spec: grid_points must be >= 2");
  if (!(lo >= 0.0) || !(hi > lo))
    throw std::invalid_argument("validate_spec: need 0 <= lo < hi");
  if (spec.range_restricted() && (lo < spec.range_lo() || hi > spec.range_hi()))
    throw std::invalid_argument("validate_spec: interval exceeds certified range");

  ValidationReport report;

  const bool domain_has_origin = spec.range_restricted() ? spec.range_lo() == 0.0 : true;
  if (domain_has_origin) {
    report.origin_checked = true;
    const double g0 = spec.profit(0.0);
    const double f0 = spec.cost(0.0);
    if (std::abs(g0) > kOriginTol || std::abs(f0) > kOriginTol) {
      report.origin_ok = false;
      report.first_violation_xi = 0.0;
      report.detail = "f(0) or g(0) nonzero";
      return report;
    }
  }

  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  double prev_xi = lo;
  double prev_g = spec.profit(lo);
  double prev_f = spec.cost(lo);
  if (lo > 0.0 && !(prev_f < prev_g)) {
    report.dominance_ok = false;
    report.first_violation_xi = lo;
    report.detail = "f >= g at grid start";
    return report;
  }
  for (int i = 1; i < grid_points; ++i) {
    const double xi = (i == grid_points - 1) ? hi : lo + step * static_cast<double>(i);
    const double g = spec.profit(xi);
    const double f = spec.cost(xi);
    if (report.profit_monotone_ok && !(g > prev_g)) {
      report.profit_monotone_ok = false;
      report.first_violation_xi = xi;
      report.detail = "g not strictly increasing at grid point";
    }
    if (report.cost_monotone_ok && !(f > prev_f)) {
      report.cost_monotone_ok = false;
      if (report.detail.empty()) {
        report.first_violation_xi = xi;
        report.detail = "f not strictly increasing at grid point";
      }
    }
    if (report.dominance_ok && xi > 0.0 && !(f < g)) {
      report.dominance_ok = false;
      if (report.detail.empty()) {
        report.first_violation_xi = xi;
        report.detail = "f >= g at grid point";
      }
    }
    prev_xi = xi;
    prev_g = g;
    prev_f = f;
  }
  (void)prev_xi;
  return report;
}

ValidationReport validate_spec(const PayoffSpec& spec, int grid_points) {
  if (!spec.range_restricted())
    throw std::invalid_argument(
        "validate_spec: unrestricted spec needs an explicit interval");
  return validate_spec(spec, grid_points, spec.range_lo(), spec.range_hi());
}

}  // namespace coalesce
