#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copulafit/copulas.hpp"
#include "copulafit/empirical.hpp"
#include "copulafit/llpt.hpp"

namespace copulafit {

// Estimation method: maximum pseudo-likelihood, or a minimum pseudo
// alpha-divergence estimator matching the parametric density against a
// nonparametric local-likelihood reference density.
struct Method {
  enum Kind { mpl, mphd, mpnd, mpad } kind = mpl;
  double alpha = 0.0;  // meaningful for mpad only

  // Accepts "mpl", "mphd", "mpnd", "mpad:<alpha>". alpha 0.5 and 2 collapse
  // to the named estimators; alpha in {0, 1} is rejected.
  static Method parse(std::string_view text);
  std::string name() const;
  bool needs_reference() const { return kind != mpl; }
};

struct FitResult {
  std::string method;
  double theta_hat = 0.0;
  double tau_hat = 0.0;
  double objective_at_opt = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// alpha = 0.5 is squared Hellinger (up to scale), alpha = 2 is Neyman
// chi-square; the kl flag selects the alpha -> 1 Kullback-Leibler limit.
struct DivergenceKind {
  double alpha = 0.5;
  bool kl = false;

  static DivergenceKind hellinger() { return {0.5, false}; }
  static DivergenceKind neyman() { return {2.0, false}; }
  static DivergenceKind kl_limit() { return {1.0, true}; }
  static DivergenceKind generic(double alpha);
};

// Sum of the log parametric copula density over the pseudo-observations,
// density values floored at 1e-300.
double pseudo_loglik(const CopulaSpec& spec, const PseudoSample& ps);

FitResult mpl_fit(Family family, const PseudoSample& ps, double nu = 4.0);

// Empirical alpha-divergence between the parametric density at spec and the
// reference density values chat (aligned 1:1 with ps, floored at 1e-10).
double alpha_divergence_objective(DivergenceKind kind, const LlptEstimate& chat,
                                  const CopulaSpec& spec, const PseudoSample& ps);

FitResult mpad_fit(DivergenceKind kind, Family family, const PseudoSample& ps,
                   const LlptEstimate& chat, double nu = 4.0);

// One-stop fit: builds the reference density itself when the method needs it.
FitResult fit_with_method(Method method, Family family, const PseudoSample& ps,
                          double k_frac = 0.5, double nu = 4.0);

inline constexpr double tau_search_lo = -0.985;
inline constexpr double tau_search_hi = 0.985;

}  // namespace copulafit
