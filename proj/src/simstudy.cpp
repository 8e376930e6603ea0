#include "copulafit/simstudy.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "copulafit/empirical.hpp"
#include "copulafit/llpt.hpp"
#include "copulafit/math.hpp"

namespace copulafit {

namespace {

std::uint64_t replicate_seed(std::uint64_t master, Family family, double tau, int n, int r) {
  std::uint64_t h = math::hash_combine(master, family_name(family));
  h = math::hash_combine(h, tau);
  h = math::hash_combine(h, static_cast<std::uint64_t>(n));
  return math::hash_combine(h, static_cast<std::uint64_t>(r));
}

}  // namespace

std::vector<CellReport> run_cell(Family family, double tau, int n,
                                 const std::vector<Method>& methods, int M, std::uint64_t seed,
                                 double k_frac, double nu, int jobs) {
  if (M < 2) throw std::invalid_argument("run_cell: need at least 2 replications");
  if (methods.empty()) throw std::invalid_argument("run_cell: no methods");
  if (jobs < 1) jobs = 1;

  double theta_true = theta_from_tau(family, tau);
  CopulaSpec spec(family, theta_true, nu);
  bool any_ref = false;
  for (const auto& me : methods) any_ref = any_ref || me.needs_reference();

  std::size_t nm = methods.size();
  std::vector<double> theta(static_cast<std::size_t>(M) * nm, 0.0);
  std::vector<char> ok(static_cast<std::size_t>(M) * nm, 0);

  auto one = [&](int r) {
    std::uint64_t rs = replicate_seed(seed, family, tau, n, r);
    PseudoSample ps;
    try {
      std::vector<UnitPair> raw = sample(spec, static_cast<std::size_t>(n), rs);
      RawSample rsamp;
      rsamp.x.reserve(raw.size());
      rsamp.y.reserve(raw.size());
      for (const auto& p : raw) {
        rsamp.x.push_back(p.u);
        rsamp.y.push_back(p.v);
      }
      ps = pseudo_observations(rsamp);
    } catch (const std::exception&) {
      return;  // whole replicate lost; every method records a failure
    }
    LlptEstimate ref;
    bool have_ref = false;
    if (any_ref) {
      try {
        ref = llpt_density(ps, ps, k_frac);
        have_ref = true;
      } catch (const std::exception&) {
      }
    }
    for (std::size_t m = 0; m < nm; ++m) {
      std::size_t idx = static_cast<std::size_t>(r) * nm + m;
      try {
        FitResult fit;
        if (!methods[m].needs_reference()) {
          fit = mpl_fit(family, ps, nu);
        } else {
          if (!have_ref) continue;
          DivergenceKind kind = methods[m].kind == Method::mphd
                                    ? DivergenceKind::hellinger()
                                    : methods[m].kind == Method::mpnd
                                          ? DivergenceKind::neyman()
                                          : DivergenceKind::generic(methods[m].alpha);
          fit = mpad_fit(kind, family, ps, ref, nu);
        }
        theta[idx] = fit.theta_hat;
        ok[idx] = 1;
      } catch (const std::exception&) {
      }
    }
  };

  if (jobs == 1) {
    for (int r = 0; r < M; ++r) one(r);
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (;;) {
        int r = next.fetch_add(1);
        if (r >= M) return;
        one(r);
      }
    };
    std::vector<std::thread> pool;
    int nt = std::min(jobs, M);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<CellReport> reports(nm);
  double mse_mpl = -1.0;
  for (std::size_t m = 0; m < nm; ++m) {
    CellReport& rep = reports[m];
    rep.family = family;
    rep.tau = tau;
    rep.n = n;
    rep.method = methods[m].name();
    double sum = 0.0, sum2 = 0.0;
    int good = 0;
    for (int r = 0; r < M; ++r) {
      std::size_t idx = static_cast<std::size_t>(r) * nm + m;
      if (!ok[idx]) continue;
      ++good;
      double d = theta[idx] - theta_true;
      sum += d;
      sum2 += d * d;
    }
    rep.replicate_failures = M - good;
    if (rep.replicate_failures * 20 > M) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "run_cell: %s tau=%g n=%d method=%s: %d of %d fits failed",
                    family_name(family).data(), tau, n, rep.method.c_str(),
                    rep.replicate_failures, M);
      throw std::runtime_error(buf);
    }
    rep.bias = sum / good;
    rep.mse = sum2 / good;
    if (methods[m].kind == Method::mpl) mse_mpl = rep.mse;
  }
  if (mse_mpl > 0.0) {
    for (std::size_t m = 0; m < nm; ++m)
      if (methods[m].kind != Method::mpl)
        reports[m].rmse_vs_mpl = 100.0 * std::sqrt(reports[m].mse / mse_mpl);
  }
  return reports;
}

std::vector<CellReport> run_study(const StudyConfig& cfg) {
  if (cfg.replications < 2) throw std::invalid_argument("run_study: need at least 2 replications");
  std::vector<CellReport> rows;
  std::vector<std::string> aborted;
  for (Family f : cfg.families) {
    for (double tau : cfg.taus) {
      for (int n : cfg.ns) {
        try {
          std::vector<CellReport> cell =
              run_cell(f, tau, n, cfg.methods, cfg.replications, cfg.master_seed, cfg.k_frac,
                       cfg.nu, cfg.jobs);
          rows.insert(rows.end(), cell.begin(), cell.end());
        } catch (const std::exception& e) {
          aborted.emplace_back(e.what());
        }
        if (cfg.progress)
          std::fprintf(stderr, "cell %s tau=%g n=%d done\n", family_name(f).data(), tau, n);
      }
    }
  }
  if (!aborted.empty()) {
    std::string msg = "run_study: aborted cells:";
    for (const auto& a : aborted) msg += "\n  " + a;
    throw std::runtime_error(msg);
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<CellReport>& rows) {
  os << "family,tau,n,method,bias,mse,rmse_pct,failures\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%d,%s,%.10g,%.10g,", family_name(r.family).data(),
                  r.tau, r.n, r.method.c_str(), r.bias, r.mse);
    os << buf;
    if (r.rmse_vs_mpl) {
      std::snprintf(buf, sizeof buf, "%.10g", *r.rmse_vs_mpl);
      os << buf;
    }
    os << ',' << r.replicate_failures << '\n';
  }
}

}  // namespace copulafit
