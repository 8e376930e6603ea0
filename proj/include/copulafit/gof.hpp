#pragma once

#include <cstdint>
#include <string>

#include "copulafit/copulas.hpp"
#include "copulafit/empirical.hpp"
#include "copulafit/estimators.hpp"

namespace copulafit {

struct GofResult {
  double s_n = 0.0;
  double p_value = 1.0;
  int bootstrap_reps = 0;  // effective replicates after drops
  int dropped = 0;
  double aic = 0.0;
  std::string method;
  FitResult fit;
};

// Cramer-von Mises distance between the empirical copula and the fitted CDF
// over the pseudo-observations.
double cvm_statistic(const CopulaSpec& spec, const PseudoSample& ps);

double aic(const CopulaSpec& spec, const PseudoSample& ps);

// Parametric bootstrap p-value: fit theta by `method`, then refit B samples
// drawn from the fitted copula by the same method. Replicates whose fit
// throws are dropped and counted; more than 10% dropped is an error.
GofResult bootstrap_pvalue(Family family, const PseudoSample& ps, Method method, int B,
                           std::uint64_t seed, double k_frac = 0.5, double nu = 4.0,
                           int jobs = 1);

}  // namespace copulafit
