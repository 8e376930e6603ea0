#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "copulafit/copulas.hpp"
#include "copulafit/llpt.hpp"
#include "copulafit/math.hpp"
#include "doctest.h"

using namespace copulafit;
namespace m = copulafit::math;

namespace {

PseudoSample pseudo_from_spec(const CopulaSpec& spec, std::size_t n, std::uint64_t seed) {
  auto raw = sample(spec, n, seed);
  RawSample rs;
  for (const auto& p : raw) {
    rs.x.push_back(p.u);
    rs.y.push_back(p.v);
  }
  return pseudo_observations(rs);
}

PseudoSample uniform_pseudo(std::size_t n, std::uint64_t seed) {
  m::Rng rng(seed);
  RawSample rs;
  for (std::size_t i = 0; i < n; ++i) {
    rs.x.push_back(rng.uniform());
    rs.y.push_back(rng.uniform());
  }
  return pseudo_observations(rs);
}

}  // namespace

TEST_CASE("probit transform") {
  PseudoSample ps = {{0.5, 0.5}, {m::norm_cdf(1.5), m::norm_cdf(-0.3)}};
  ProbitPoints pts = probit_transform(ps);
  CHECK(pts[0].s == doctest::Approx(0.0));
  CHECK(pts[0].t == doctest::Approx(0.0));
  CHECK(pts[1].s == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(pts[1].t == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK_THROWS_AS(probit_transform({{0.0, 0.5}}), std::domain_error);
  CHECK_THROWS_AS(probit_transform({{0.5, 1.0}}), std::domain_error);
}

TEST_CASE("nearest neighbor bandwidth") {
  // four corners of the unit square: every 1st-NN distance is 1
  ProbitPoints corners = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  Bandwidth bw = nn_bandwidth(corners, 0.25);
  CHECK(bw.b == doctest::Approx(1.0));
  CHECK(!bw.per_point);

  // floor rule at near-duplicate points
  ProbitPoints dup;
  for (int i = 0; i < 1000; ++i)
    dup.push_back({1e-9 * i, -1e-9 * i});
  CHECK(nn_bandwidth(dup, 0.3).b == doctest::Approx(0.1));

  // exactly coincident points are degenerate
  ProbitPoints same(50, ProbitPoint{0.7, -0.2});
  CHECK_THROWS_AS(nn_bandwidth(same, 0.3), std::runtime_error);

  CHECK_THROWS_AS(nn_bandwidth({{0, 0}}, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(nn_bandwidth(corners, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nn_bandwidth(corners, 1.5), std::invalid_argument);

  // determinism and permutation invariance of the median
  m::Rng rng(404);
  ProbitPoints pts;
  for (int i = 0; i < 120; ++i) pts.push_back({rng.normal(), rng.normal()});
  double b1 = nn_bandwidth(pts, 0.3).b;
  std::reverse(pts.begin(), pts.end());
  CHECK(nn_bandwidth(pts, 0.3).b == doctest::Approx(b1));
  CHECK(b1 > 0.1);
}

TEST_CASE("local fit recovers a gaussian density at the origin") {
  m::Rng rng(606);
  int hit = 0;
  for (int s = 0; s < 5; ++s) {
    ProbitPoints pts;
    for (int i = 0; i < 5000; ++i) pts.push_back({rng.normal(), rng.normal()});
    Bandwidth bw = nn_bandwidth(pts, 0.3);
    LocalFit fit = local_fit(pts, {0.0, 0.0}, bw);
    CHECK(fit.converged);
    double dens = std::exp(fit.a[0]);
    if (std::fabs(dens - 1.0 / (2.0 * m::pi)) < 0.02) ++hit;
  }
  CHECK(hit >= 4);
}

TEST_CASE("local fit symmetry") {
  // points symmetric under (s,t) -> (-s,-t): odd coefficients vanish at 0
  ProbitPoints pts;
  m::Rng rng(99);
  for (int i = 0; i < 400; ++i) {
    double a = rng.normal(), b = rng.normal();
    pts.push_back({a, b});
    pts.push_back({-a, -b});
  }
  LocalFit fit = local_fit(pts, {0.0, 0.0}, nn_bandwidth(pts, 0.3));
  CHECK(fit.converged);
  CHECK(std::fabs(fit.a[1]) < 1e-3);
  CHECK(std::fabs(fit.a[2]) < 1e-3);
}

TEST_CASE("local fit degenerate smoke case") {
  // One observation sitting on the query point: the weighted likelihood is
  // unbounded (the fitted spike narrows without limit), so the iteration cap
  // fires and the coefficients must still come back finite.
  ProbitPoints one = {{0.0, 0.0}};
  LocalFit fit = local_fit(one, {0.0, 0.0}, Bandwidth{1.0, 0.3, false});
  for (double c : fit.a) CHECK(std::isfinite(c));
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations <= 100);
}

TEST_CASE("llpt density near independence") {
  int seeds_ok = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    PseudoSample ps = uniform_pseudo(500, 7000 + s);
    std::vector<UnitPair> grid;
    for (int i = 0; i <= 16; ++i)
      for (int j = 0; j <= 16; ++j)
        grid.push_back({0.1 + 0.05 * i, 0.1 + 0.05 * j});
    LlptEstimate est = llpt_density(ps, grid, 0.3);
    int in_band = 0;
    for (double v : est.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1e12);
      if (v >= 0.5 && v <= 1.6) ++in_band;
    }
    if (in_band >= static_cast<int>(0.95 * grid.size())) ++seeds_ok;
  }
  CHECK(seeds_ok >= 4);
}

TEST_CASE("llpt density definitional identity") {
  PseudoSample ps = pseudo_from_spec(CopulaSpec(Family::clayton, 2.0), 200, 11);
  m::Rng rng(12);
  std::vector<UnitPair> q;
  for (int i = 0; i < 20; ++i) q.push_back({0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()});
  LlptEstimate est = llpt_density(ps, q, 0.3);

  ProbitPoints pts = probit_transform(ps);
  Bandwidth bw = nn_bandwidth(pts, 0.3);
  CHECK(est.bandwidth.b == doctest::Approx(bw.b));
  for (std::size_t i = 0; i < q.size(); ++i) {
    ProbitPoint at{m::norm_quantile(q[i].u), m::norm_quantile(q[i].v)};
    LocalFit fit = local_fit(pts, at, bw);
    double direct = std::exp(fit.a[0]) / (m::norm_pdf(at.s) * m::norm_pdf(at.t));
    CHECK(est.values[i] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("llpt density exchange symmetry") {
  PseudoSample ps = pseudo_from_spec(CopulaSpec(Family::gumbel, 2.0), 150, 21);
  PseudoSample swapped;
  for (const auto& p : ps) swapped.push_back({p.v, p.u});
  std::vector<UnitPair> q = {{0.3, 0.6}, {0.5, 0.5}, {0.82, 0.2}, {0.1, 0.9}};
  std::vector<UnitPair> qs;
  for (const auto& p : q) qs.push_back({p.v, p.u});
  LlptEstimate a = llpt_density(ps, q, 0.3);
  LlptEstimate b = llpt_density(swapped, qs, 0.3);
  for (std::size_t i = 0; i < q.size(); ++i)
    CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-10));
}

TEST_CASE("llpt density mass check") {
  for (Family f : {Family::clayton, Family::gaussian}) {
    CopulaSpec spec(f, theta_from_tau(f, 0.4));
    PseudoSample ps = pseudo_from_spec(spec, 500, 33);
    const int g = 64;
    std::vector<UnitPair> grid;
    for (int i = 1; i <= g; ++i)
      for (int j = 1; j <= g; ++j)
        grid.push_back({i / (g + 1.0), j / (g + 1.0)});
    LlptEstimate est = llpt_density(ps, grid, 0.3);
    double mass = 0.0;
    for (double v : est.values) mass += v;
    mass /= (g + 1.0) * (g + 1.0);
    CHECK(mass >= 0.7);
    CHECK(mass <= 1.3);
  }
}

TEST_CASE("llpt density misc contracts") {
  PseudoSample ps = uniform_pseudo(60, 5);
  LlptEstimate empty = llpt_density(ps, {}, 0.3);
  CHECK(empty.values.empty());
  CHECK_THROWS_AS(llpt_density(ps, {{0.5, 1.0}}, 0.3), std::domain_error);
  LlptEstimate est = llpt_density(ps, ps, 0.3);
  CHECK(est.n == ps.size());
  CHECK(est.converged.size() == ps.size());
  for (double v : est.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}
