#pragma once

#include <cstdint>
#include <random>
#include <type_traits>
#include <string_view>
#include <vector>

namespace copulafit::math {

inline constexpr double pi = 3.14159265358979323846;

// Standard normal density, CDF and quantile. norm_cdf/norm_quantile are
// accurate to better than 1e-12 absolute (rational approximation plus one
// Halley refinement for the quantile).
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

// Student t with nu > 0 degrees of freedom.
double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

// Regularized incomplete beta I_x(a,b) and lower incomplete gamma P(a,x).
double inc_beta_reg(double a, double b, double x);
double lower_gamma_reg(double a, double x);

double digamma(double x);
double trigamma(double x);

// First Debye function D1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x != 0.
double debye1(double x);

// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a,b].
// Throws std::runtime_error if the subdivision budget is exhausted before
// the absolute-error target is met.
double integrate(double (*f)(double, void*), void* ctx, double a, double b,
                 double abs_tol);

template <class F>
double integrate(F&& f, double a, double b, double abs_tol) {
  auto thunk = [](double x, void* c) -> double { return (*static_cast<std::remove_reference_t<F>*>(c))(x); };
  return integrate(+thunk, &f, a, b, abs_tol);
}

// Gauss-Hermite nodes/weights for int f(x) e^{-x^2} dx with n points.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct MinResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Bounded scalar minimization, Brent's golden-section/parabolic method.
// Stops when the bracketing interval around the minimizer shrinks below
// xtol (absolute) or after max_evals function evaluations.
MinResult brent_min(double (*f)(double, void*), void* ctx, double a, double b,
                    double xtol, int max_evals);

template <class F>
MinResult brent_min(F&& f, double a, double b, double xtol, int max_evals = 200) {
  auto thunk = [](double x, void* c) -> double { return (*static_cast<std::remove_reference_t<F>*>(c))(x); };
  return brent_min(+thunk, &f, a, b, xtol, max_evals);
}

// Root of f on [a,b] with f(a), f(b) of opposite sign (Brent's method).
double brent_root(double (*f)(double, void*), void* ctx, double a, double b,
                  double xtol);

template <class F>
double brent_root(F&& f, double a, double b, double xtol) {
  auto thunk = [](double x, void* c) -> double { return (*static_cast<std::remove_reference_t<F>*>(c))(x); };
  return brent_root(+thunk, &f, a, b, xtol);
}

// Deterministic stream of variates backed by std::mt19937_64; the raw
// 64-bit output is mapped to (0,1) uniforms directly so the sequence is
// identical on every platform (distributions from <random> are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // strictly inside (0,1)
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() { return norm_quantile(uniform()); }
  double gamma(double shape);  // Marsaglia-Tsang, any shape > 0
  double chisq(double nu) { return 2.0 * gamma(0.5 * nu); }

 private:
  std::mt19937_64 gen_;
};

// Seed derivation for independent replicate streams (splitmix64 mixing).
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_combine(std::uint64_t h, double v);
std::uint64_t hash_combine(std::uint64_t h, std::string_view v);

}  // namespace copulafit::math
