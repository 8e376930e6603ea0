#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "copulafit/copulas.hpp"
#include "copulafit/estimators.hpp"

namespace copulafit {

struct StudyConfig {
  std::vector<Family> families = {Family::clayton, Family::gumbel, Family::frank,
                                  Family::gaussian, Family::student_t};
  std::vector<double> taus = {0.1, 0.2, 0.4, 0.6, 0.8};
  std::vector<int> ns = {30, 75, 150};
  std::vector<Method> methods = {Method{Method::mpl, 0.0}, Method{Method::mphd, 0.5},
                                 Method{Method::mpnd, 2.0}};
  int replications = 300;
  double k_frac = 0.5;
  double nu = 4.0;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  bool progress = false;  // one line per finished cell on stderr
};

struct CellReport {
  Family family = Family::clayton;
  double tau = 0.0;
  int n = 0;
  std::string method;
  double bias = 0.0;
  double mse = 0.0;
  std::optional<double> rmse_vs_mpl;  // 100*sqrt(MSE/MSE_MPL); absent for MPL itself
  int replicate_failures = 0;
};

// One grid cell: M replicates, every method fit on the same sample with one
// shared nonparametric reference per replicate.
std::vector<CellReport> run_cell(Family family, double tau, int n,
                                 const std::vector<Method>& methods, int M, std::uint64_t seed,
                                 double k_frac = 0.5, double nu = 4.0, int jobs = 1);

std::vector<CellReport> run_study(const StudyConfig& cfg);

// CSV columns: family,tau,n,method,bias,mse,rmse_pct,failures
void write_csv(std::ostream& os, const std::vector<CellReport>& rows);

}  // namespace copulafit
