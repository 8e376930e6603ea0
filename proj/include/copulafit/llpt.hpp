#pragma once

#include <array>
#include <vector>

#include "copulafit/empirical.hpp"

namespace copulafit {

struct ProbitPoint {
  double s;
  double t;
};
using ProbitPoints = std::vector<ProbitPoint>;

struct Bandwidth {
  double b;        // diagonal entry of the probit-space kernel bandwidth matrix
  double k_frac;   // nearest-neighbor fraction used to select b
  bool per_point = false;  // reserved; estimation uses one global b
};

// Local log-quadratic coefficients a0..a5 at one evaluation point:
// P_a(z) = a0 + a1 z1 + a2 z2 + a3 z1^2 + a4 z2^2 + a5 z1 z2.
struct LocalFit {
  std::array<double, 6> a;
  bool converged;  // weighted-likelihood gradient norm <= 1e-8
  int iterations;
};

struct LlptEstimate {
  std::vector<double> values;  // chat at the query points, in [0, 1e12]
  Bandwidth bandwidth;
  std::size_t n = 0;  // source sample size
  std::vector<bool> converged;
};

// Coordinatewise standard normal quantile of the pseudo-sample.
ProbitPoints probit_transform(const PseudoSample& ps);

// b = median over points of the Euclidean distance to the ceil(k_frac*n)-th
// nearest neighbor, floored at 0.1.
Bandwidth nn_bandwidth(const ProbitPoints& pts, double k_frac);

// Maximizes sum_i K_b(at - p_i) P_a(p_i - at) - n * int K_b(at - z) exp(P_a(z - at)) dz
// over a in R^6 (damped Newton; the objective is globally concave in a).
LocalFit local_fit(const ProbitPoints& pts, ProbitPoint at, const Bandwidth& bw);

// chat(u,v) = exp(a0 at (Phi^-1 u, Phi^-1 v)) / (phi(Phi^-1 u) phi(Phi^-1 v)).
LlptEstimate llpt_density(const PseudoSample& ps, const std::vector<UnitPair>& query,
                          double k_frac = 0.5);

}  // namespace copulafit
