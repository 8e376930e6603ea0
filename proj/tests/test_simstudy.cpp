#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "copulafit/simstudy.hpp"
#include "doctest.h"

using namespace copulafit;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("study covers the whole grid") {
  StudyConfig cfg;
  cfg.families = {Family::clayton, Family::gumbel};
  cfg.taus = {0.2, 0.4};
  cfg.ns = {30};
  cfg.methods = {Method::parse("mpl"), Method::parse("mphd")};
  cfg.replications = 4;
  cfg.master_seed = 77;

  std::vector<CellReport> rows = run_study(cfg);
  REQUIRE(rows.size() == 8);
  for (Family f : cfg.families)
    for (double tau : cfg.taus)
      for (const Method& m : cfg.methods) {
        int found = 0;
        for (const auto& r : rows)
          if (r.family == f && r.tau == tau && r.n == 30 && r.method == m.name()) ++found;
        CHECK(found == 1);
      }
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.bias));
    CHECK(std::isfinite(r.mse));
    CHECK(r.mse + 1e-15 >= r.bias * r.bias);
    CHECK(r.replicate_failures == 0);
  }
}

TEST_CASE("study output is reproducible") {
  StudyConfig cfg;
  cfg.families = {Family::clayton};
  cfg.taus = {0.2, 0.4};
  cfg.ns = {30};
  cfg.methods = {Method::parse("mpl"), Method::parse("mphd")};
  cfg.replications = 8;
  cfg.master_seed = 4;

  std::ostringstream a, b;
  write_csv(a, run_study(cfg));
  write_csv(b, run_study(cfg));
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("cell seeds are honored") {
  std::vector<Method> just_mpl = {Method::parse("mpl")};
  auto a = run_cell(Family::gaussian, 0.4, 40, just_mpl, 6, 9);
  auto b = run_cell(Family::gaussian, 0.4, 40, just_mpl, 6, 9);
  auto c = run_cell(Family::gaussian, 0.4, 40, just_mpl, 6, 10);
  REQUIRE(a.size() == 1);
  CHECK(a[0].bias == b[0].bias);
  CHECK(a[0].mse == b[0].mse);
  CHECK(a[0].bias != c[0].bias);

  // worker count must not change the estimates
  auto d = run_cell(Family::gaussian, 0.4, 40, just_mpl, 6, 9, 0.5, 4.0, 3);
  CHECK(d[0].bias == a[0].bias);
  CHECK(d[0].mse == a[0].mse);
}

TEST_CASE("relative root mse convention") {
  std::vector<Method> methods = {Method::parse("mpl"), Method::parse("mphd"),
                                 Method::parse("mpnd")};
  auto rows = run_cell(Family::clayton, 0.4, 30, methods, 12, 123);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].method == "mpl");
  CHECK_FALSE(rows[0].rmse_vs_mpl.has_value());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].rmse_vs_mpl.has_value());
    CHECK(*rows[i].rmse_vs_mpl ==
          doctest::Approx(100.0 * std::sqrt(rows[i].mse / rows[0].mse)).epsilon(1e-12));
  }

  std::ostringstream os;
  write_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "family,tau,n,method,bias,mse,rmse_pct,failures");
  std::getline(is, line);
  auto mpl_fields = split(line);
  REQUIRE(mpl_fields.size() == 8);
  CHECK(mpl_fields[3] == "mpl");
  CHECK(mpl_fields[6].empty());
  std::getline(is, line);
  auto hd_fields = split(line);
  REQUIRE(hd_fields.size() == 8);
  CHECK(hd_fields[3] == "mphd");
  CHECK(!hd_fields[6].empty());
  CHECK(std::stod(hd_fields[6]) == doctest::Approx(*rows[1].rmse_vs_mpl).epsilon(1e-9));
}

TEST_CASE("cell estimates are sane at moderate n") {
  std::vector<Method> just_mpl = {Method::parse("mpl")};
  auto rows = run_cell(Family::clayton, 0.4, 75, just_mpl, 40, 31);
  // theta_true = 4/3; a correct pipeline keeps bias and mse small
  CHECK(std::fabs(rows[0].bias) < 0.4);
  CHECK(rows[0].mse < 0.4);
  CHECK(rows[0].replicate_failures == 0);
}

TEST_CASE("study validation") {
  std::vector<Method> just_mpl = {Method::parse("mpl")};
  CHECK_THROWS_AS(run_cell(Family::clayton, 0.4, 30, just_mpl, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_cell(Family::clayton, 0.4, 30, {}, 10, 1), std::invalid_argument);
  StudyConfig cfg;
  cfg.replications = 1;
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
}
