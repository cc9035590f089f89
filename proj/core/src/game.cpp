#include "coalesce/game.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coalesce {

namespace {

constexpr double kStabilityEps = 1e-9;

struct PayoffTriple {
  double g;        // g(xi)
  double f;        // f(xi)
  double f_half;   // f(xi/2)
};

PayoffTriple eval_triple(const PayoffSpec& spec, double xi) {
  if (!(xi > 0.0))
    throw std::domain_error("stage game needs xi > 0, got " + std::to_string(xi));
  return {spec.profit(xi), spec.cost(xi), spec.cost(xi / 2.0)};
}

// Shared denominator g - f + f(xi/2) of the equilibrium formulas.
double ne_denominator(const PayoffTriple& t) {
  const double denom = t.g - t.f + t.f_half;
  if (!(denom > 0.0))
    throw std::invalid_argument(
        "payoff spec violates f < g at the requested distance (equilibrium "
        "denominator not positive)");
  return denom;
}

double linf_norm(const Matrix2& m) {
  double v = 0.0;
  for (const auto& row : m)
    for (double e : row) v = std::max(v, std::abs(e));
  return v;
}

}  // namespace

StageGame build_game(const PayoffSpec& spec, double xi) {
  const PayoffTriple t = eval_triple(spec, xi);
  StageGame game;
  game.xi = xi;
  game.payoff_a = {{{t.g - t.f_half, t.g - t.f}, {t.g, 0.0}}};
  game.payoff_b = {{{game.payoff_a[0][0], game.payoff_a[1][0]},
                    {game.payoff_a[0][1], game.payoff_a[1][1]}}};
  return game;
}

std::pair<double, double> utility(const StageGame& game, const MixedProfile& profile) {
  const double alpha[2] = {profile.p, 1.0 - profile.p};
  const double beta[2] = {profile.q, 1.0 - profile.q};
  double u1 = 0.0;
  double u2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      u1 += alpha[i] * game.payoff_a[i][j] * beta[j];
      u2 += alpha[i] * game.payoff_b[i][j] * beta[j];
    }
  }
  return {u1, u2};
}

MixedProfile closed_form_ne(const PayoffSpec& spec, double xi) {
  const PayoffTriple t = eval_triple(spec, xi);
  const double p = (t.g - t.f) / ne_denominator(t);
  return {p, p};
}

double defection_kernel(const PayoffSpec& spec, double xi) {
  const PayoffTriple t = eval_triple(spec, xi);
  return t.f_half / ne_denominator(t);
}

double coalescence_prob(const PayoffSpec& spec, double xi) {
  const double h = defection_kernel(spec, xi);
  return 1.0 - h * h;
}

double aggregate_payoff(const PayoffSpec& spec, double xi, std::int64_t s1,
                        std::int64_t s2) {
  if (s1 < 1 || s2 < 1)
    throw std::domain_error("aggregate_payoff: group sizes must be >= 1");
  const PayoffTriple t = eval_triple(spec, xi);
  return static_cast<double>(s1 + s2) * (t.g - t.f) * t.g / ne_denominator(t);
}

EquilibriumSet solve_ne_2x2(const Matrix2& a, const Matrix2& b) {
  for (const auto& row : a)
    for (double e : row)
      if (!std::isfinite(e)) throw std::invalid_argument("solve_ne_2x2: non-finite entry");
  for (const auto& row : b)
    for (double e : row)
      if (!std::isfinite(e)) throw std::invalid_argument("solve_ne_2x2: non-finite entry");

  const double scale = std::max({1.0, linf_norm(a), linf_norm(b)});
  const double tol = kStabilityEps * scale;

  EquilibriumSet out;

  auto row_utility = [&a](double p, double q) {
    return p * (q * a[0][0] + (1.0 - q) * a[0][1]) +
           (1.0 - p) * (q * a[1][0] + (1.0 - q) * a[1][1]);
  };
  auto col_utility = [&b](double p, double q) {
    return p * (q * b[0][0] + (1.0 - q) * b[0][1]) +
           (1.0 - p) * (q * b[1][0] + (1.0 - q) * b[1][1]);
  };

  // By linearity a profile is epsilon-stable iff neither pure deviation
  // improves on it.
  auto stable = [&](double p, double q) {
    const double u1 = row_utility(p, q);
    if (row_utility(1.0, q) > u1 + tol) return false;
    if (row_utility(0.0, q) > u1 + tol) return false;
    const double u2 = col_utility(p, q);
    if (col_utility(p, 1.0) > u2 + tol) return false;
    if (col_utility(p, 0.0) > u2 + tol) return false;
    return true;
  };

  auto push_unique = [&out](double p, double q) {
    for (const MixedProfile& e : out.equilibria)
      if (std::abs(e.p - p) <= 1e-9 && std::abs(e.q - q) <= 1e-9) return;
    out.equilibria.push_back({p, q});
  };

  // Pure supports, checked by the pure-strategy equilibrium inequalities.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (a[i][j] < a[1 - i][j] - tol) continue;
      if (b[i][j] < b[i][1 - j] - tol) continue;
      const double p = (i == 0) ? 1.0 : 0.0;
      const double q = (j == 0) ? 1.0 : 0.0;
      if (!stable(p, q)) continue;
      push_unique(p, q);
      // Exact best-response tie means the indifferent player can mix
      // against this pure strategy: an equilibrium continuum.
      if (std::abs(a[i][j] - a[1 - i][j]) <= tol || std::abs(b[i][j] - b[i][1 - j]) <= tol)
        out.degenerate = true;
    }
  }

  // Totally mixed support via the indifference conditions: the row mix p
  // equalizes the column payoffs and vice versa.
  const double denom_q = a[0][0] - a[0][1] - a[1][0] + a[1][1];
  const double denom_p = b[0][0] - b[0][1] - b[1][0] + b[1][1];
  const double tiny = 1e-14 * scale;
  if (std::abs(denom_q) > tiny && std::abs(denom_p) > tiny) {
    const double q = (a[1][1] - a[0][1]) / denom_q;
    const double p = (b[1][1] - b[1][0]) / denom_p;
    if (p > -1e-12 && p < 1.0 + 1e-12 && q > -1e-12 && q < 1.0 + 1e-12) {
      const double pc = std::clamp(p, 0.0, 1.0);
      const double qc = std::clamp(q, 0.0, 1.0);
      if (stable(pc, qc)) push_unique(pc, qc);
    }
  } else if (std::abs(a[1][1] - a[0][1]) <= tiny || std::abs(b[1][1] - b[1][0]) <= tiny) {
    // Vanishing denominator with vanishing numerator: indifference holds
    // identically, so any mix works against the right opponent play.
    out.degenerate = true;
  }

  return out;
}

}  // namespace coalesce
