#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "copulafit/copulas.hpp"
#include "copulafit/empirical.hpp"
#include "copulafit/estimators.hpp"
#include "copulafit/gof.hpp"
#include "doctest.h"

using namespace copulafit;

namespace {

PseudoSample pseudo_from(const CopulaSpec& spec, std::size_t n, std::uint64_t seed) {
  auto draws = sample(spec, n, seed);
  RawSample raw;
  raw.x.reserve(n);
  raw.y.reserve(n);
  for (auto d : draws) {
    raw.x.push_back(d.u);
    raw.y.push_back(d.v);
  }
  return pseudo_observations(raw);
}

}  // namespace

TEST_CASE("cramer-von mises statistic") {
  // single pseudo-observation at the median under independence:
  // C_n = 1 there, C_theta = 1/4, so S_n = (3/4)^2
  PseudoSample one = {{0.5, 0.5}};
  CHECK(cvm_statistic(CopulaSpec(Family::gaussian, 0.0), one) ==
        doctest::Approx(0.5625).epsilon(1e-14));

  CopulaSpec spec(Family::clayton, 2.0);
  PseudoSample ps = pseudo_from(spec, 60, 3);
  double s = cvm_statistic(spec, ps);
  CHECK(s >= 0.0);
  PseudoSample rev(ps.rbegin(), ps.rend());
  CHECK(cvm_statistic(spec, rev) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("aic") {
  PseudoSample ps = pseudo_from(CopulaSpec(Family::frank, 4.0), 50, 17);
  // independence density is identically 1: log-likelihood 0, one parameter
  CHECK(aic(CopulaSpec(Family::gumbel, 1.0), ps) == 2.0);

  CopulaSpec spec(Family::clayton, 2.0);
  CHECK(aic(spec, ps) == doctest::Approx(2.0 - 2.0 * pseudo_loglik(spec, ps)).epsilon(1e-14));
}

TEST_CASE("bootstrap p-value determinism and bounds") {
  PseudoSample ps = pseudo_from(CopulaSpec(Family::gumbel, 2.0), 80, 21);
  Method mpl = Method::parse("mpl");

  GofResult a = bootstrap_pvalue(Family::gumbel, ps, mpl, 99, 5);
  GofResult b = bootstrap_pvalue(Family::gumbel, ps, mpl, 99, 5);
  CHECK(a.s_n == b.s_n);
  CHECK(a.p_value == b.p_value);
  CHECK(a.aic == b.aic);
  CHECK(a.dropped == b.dropped);
  CHECK(a.fit.theta_hat == b.fit.theta_hat);
  CHECK(a.method == "mpl");

  CHECK(a.bootstrap_reps + a.dropped == 99);
  CHECK(a.p_value >= 1.0 / (a.bootstrap_reps + 1.0));
  CHECK(a.p_value <= 1.0);
  CHECK(std::isfinite(a.aic));

  // the data fit does not depend on the bootstrap seed
  GofResult c = bootstrap_pvalue(Family::gumbel, ps, mpl, 99, 6);
  CHECK(c.s_n == a.s_n);
  CHECK(c.fit.theta_hat == a.fit.theta_hat);

  // worker count must not change the outcome, only the schedule
  GofResult d = bootstrap_pvalue(Family::gumbel, ps, mpl, 99, 5, 0.5, 4.0, 2);
  CHECK(d.p_value == a.p_value);
  CHECK(d.dropped == a.dropped);
  CHECK(d.s_n == a.s_n);
}

TEST_CASE("bootstrap p-value with a divergence estimator") {
  PseudoSample ps = pseudo_from(CopulaSpec(Family::clayton, 2.0), 60, 33);
  Method mphd = Method::parse("mphd");
  GofResult a = bootstrap_pvalue(Family::clayton, ps, mphd, 99, 9);
  GofResult b = bootstrap_pvalue(Family::clayton, ps, mphd, 99, 9, 0.5, 4.0, 3);
  CHECK(a.method == "mphd");
  CHECK(a.p_value == b.p_value);
  CHECK(a.s_n == b.s_n);
  CHECK(a.p_value > 0.0);
  CHECK(a.p_value <= 1.0);
}

TEST_CASE("bootstrap validation") {
  PseudoSample ps = pseudo_from(CopulaSpec(Family::gumbel, 2.0), 40, 2);
  CHECK_THROWS_AS(bootstrap_pvalue(Family::gumbel, ps, Method::parse("mpl"), 98, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_pvalue(Family::gumbel, ps, Method::parse("mpl"), 50, 1),
                  std::invalid_argument);
}

TEST_CASE("gof rejects a wrong family") {
  // lower-tail-dependent data fitted with an upper-tail-dependent family
  Method mpl = Method::parse("mpl");
  CopulaSpec truth(Family::clayton, theta_from_tau(Family::clayton, 0.6));
  int reject = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    PseudoSample ps = pseudo_from(truth, 150, 3100 + s);
    GofResult r = bootstrap_pvalue(Family::gumbel, ps, mpl, 199, 7);
    if (r.p_value <= 0.10) ++reject;
  }
  CHECK(reject >= 8);
}

TEST_CASE("gof keeps its size under the true family") {
  Method mpl = Method::parse("mpl");
  CopulaSpec truth(Family::gumbel, theta_from_tau(Family::gumbel, 0.4));
  int reject = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    PseudoSample ps = pseudo_from(truth, 100, 5200 + s);
    GofResult r = bootstrap_pvalue(Family::gumbel, ps, mpl, 99, 11);
    if (r.p_value <= 0.05) ++reject;
  }
  CHECK(reject <= 5);
}
