#pragma once

#include <vector>

#include "copulafit/copulas.hpp"

namespace copulafit {

// Paired observations (x_i, y_i), i = 1..n, n >= 2, finite values.
struct RawSample {
  std::vector<double> x;
  std::vector<double> y;
};

// Rescaled ranks (u_i, v_i) = (rank_x(i), rank_y(i)) / (n+1), mid-ranks on
// ties; all coordinates inside (0,1).
using PseudoSample = std::vector<UnitPair>;

PseudoSample pseudo_observations(const RawSample& raw);

// C_n(u,v) = (1/n) #{i : u_i <= u, v_i <= v}
double empirical_copula(const PseudoSample& ps, UnitPair p);

// Sample Kendall tau, tau-b denominator under ties, O(n log n).
double kendall_tau_sample(const RawSample& raw);

}  // namespace copulafit
