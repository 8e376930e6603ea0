#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "copulafit/math.hpp"

namespace copulafit {

enum class Family { clayton, gumbel, frank, gaussian, student_t };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);  // throws std::invalid_argument

struct UnitPair {
  double u;
  double v;
};

// Family/parameter bundle. Construction rejects theta outside the family's
// parameter space: Clayton theta in (-1,inf)\{0}; Gumbel theta >= 1; Frank
// theta != 0; Gaussian |theta| <= 1; StudentT |theta| <= 1 with nu > 1.
struct CopulaSpec {
  Family family;
  double theta;
  double nu;  // StudentT only

  CopulaSpec(Family f, double theta_, double nu_ = 4.0);
};

// Density values are clamped here; heavy-tail families are unbounded at the
// corners and downstream divergence sums need finite arithmetic.
inline constexpr double density_ceiling = 1e12;

double cdf(const CopulaSpec& spec, UnitPair p);

// Density on the open unit square; evaluation on the boundary is a domain
// error. *saturated (optional) reports whether the ceiling clamp fired.
double pdf(const CopulaSpec& spec, UnitPair p, bool* saturated = nullptr);

// n i.i.d. draws, deterministic given seed.
std::vector<UnitPair> sample(const CopulaSpec& spec, std::size_t n, std::uint64_t seed);

double tau_from_theta(const CopulaSpec& spec);
double theta_from_tau(Family family, double tau);  // throws std::domain_error

using math::debye1;

// Repeated density evaluation at a fixed point set while theta varies (the
// scalar-optimization hot loop). Caches the marginal quantile transforms so
// elliptical families do not re-invert per objective evaluation.
class DensityAt {
 public:
  DensityAt(Family family, double nu, std::span<const UnitPair> pts);

  std::size_t size() const { return n_; }
  // c(p_i; theta), clamped to density_ceiling.
  double operator()(double theta, std::size_t i) const;

 private:
  Family family_;
  double nu_;
  std::size_t n_;
  std::vector<double> u_, v_;
  std::vector<double> lnu_, lnv_;  // log u, log v
  std::vector<double> qx_, qy_;    // elliptical: marginal quantiles
  std::vector<double> lpx_, lpy_;  // student t: marginal log densities
};

}  // namespace copulafit
