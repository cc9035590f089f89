// The 2x2 bimatrix stage game played by two groups at distance xi.
//
// Strategy order is C (cooperate: change state to merge) then D (defect:
// keep the state). With profit g and cost f the row payoffs are
//
//     A = [ g(xi) - f(xi/2)   g(xi) - f(xi) ]
//         [ g(xi)             0             ]
//
// and B = A^T. For 0 < f < g this is an anti-coordination game: the pure
// profiles (C,D) and (D,C) are equilibria alongside the unique totally
// mixed one, which is what equilibrium play draws from.

#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "coalesce/payoff.h"

namespace coalesce {

using Matrix2 = std::array<std::array<double, 2>, 2>;

enum class Strategy : int { Cooperate = 0, Defect = 1 };

inline char strategy_label(Strategy s) {
  return s == Strategy::Cooperate ? 'C' : 'D';
}

// Probabilities of playing C for the row (p) and column (q) player.
struct MixedProfile {
  double p;
  double q;
};

struct StageGame {
  double xi;
  Matrix2 payoff_a;  // row player, rows/cols ordered C then D
  Matrix2 payoff_b;  // column player; equals the transpose of payoff_a
};

// Populates the matrices above. Throws std::domain_error for xi <= 0.
StageGame build_game(const PayoffSpec& spec, double xi);

// Expected utilities (row, column) under independent mixing.
std::pair<double, double> utility(const StageGame& game, const MixedProfile& profile);

// The totally mixed equilibrium p* = q* = (g - f) / (g - f + f(xi/2)).
// Throws std::domain_error for xi <= 0, std::invalid_argument when the
// denominator is not positive (spec violates f < g).
MixedProfile closed_form_ne(const PayoffSpec& spec, double xi);

// Equilibrium probability of defection h(xi) = f(xi/2) / (g - f + f(xi/2)),
// i.e. 1 - p*. The per-round merge probability is 1 - h(xi)^2.
double defection_kernel(const PayoffSpec& spec, double xi);

// Probability that the round merges the pair: 1 - (1 - p*)^2.
double coalescence_prob(const PayoffSpec& spec, double xi);

// Combined expected equilibrium payoff of both groups, sizes s1 and s2:
// (s1 + s2) * (g - f) * g / (g - f + f(xi/2)).
double aggregate_payoff(const PayoffSpec& spec, double xi, std::int64_t s1,
                        std::int64_t s2);

struct EquilibriumSet {
  std::vector<MixedProfile> equilibria;
  // Set when best-response ties or vanishing indifference denominators
  // indicate an equilibrium continuum; the returned profiles are then a
  // representative set, not an exhaustive one.
  bool degenerate = false;
};

// Support enumeration over pure profiles and the totally mixed candidate.
// Every returned profile is epsilon-stable: no unilateral deviation improves
// utility by more than 1e-9 * max(1, |A|_inf, |B|_inf).
EquilibriumSet solve_ne_2x2(const Matrix2& a, const Matrix2& b);

}  // namespace coalesce
