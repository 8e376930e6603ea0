#include "copulafit/gof.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "copulafit/math.hpp"

namespace copulafit {

double cvm_statistic(const CopulaSpec& spec, const PseudoSample& ps) {
  double s = 0.0;
  for (const auto& p : ps) {
    double d = empirical_copula(ps, p) - cdf(spec, p);
    s += d * d;
  }
  return s;
}

double aic(const CopulaSpec& spec, const PseudoSample& ps) {
  return 2.0 - 2.0 * pseudo_loglik(spec, ps);
}

namespace {

struct RepOutcome {
  double s_b = 0.0;
  bool ok = false;
};

RepOutcome one_replicate(Family family, std::size_t n, const CopulaSpec& fitted, Method method,
                         std::uint64_t rep_seed, double k_frac, double nu) {
  RepOutcome out;
  try {
    std::vector<UnitPair> raw = sample(fitted, n, rep_seed);
    RawSample rs;
    rs.x.reserve(n);
    rs.y.reserve(n);
    for (const auto& p : raw) {
      rs.x.push_back(p.u);
      rs.y.push_back(p.v);
    }
    PseudoSample bps = pseudo_observations(rs);
    FitResult fit = fit_with_method(method, family, bps, k_frac, nu);
    CopulaSpec bspec(family, fit.theta_hat, nu);
    out.s_b = cvm_statistic(bspec, bps);
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

GofResult bootstrap_pvalue(Family family, const PseudoSample& ps, Method method, int B,
                           std::uint64_t seed, double k_frac, double nu, int jobs) {
  if (B < 99) throw std::invalid_argument("bootstrap_pvalue: B must be at least 99");
  if (jobs < 1) jobs = 1;

  GofResult res;
  res.fit = fit_with_method(method, family, ps, k_frac, nu);
  res.method = res.fit.method;
  CopulaSpec fitted(family, res.fit.theta_hat, nu);
  res.s_n = cvm_statistic(fitted, ps);
  res.aic = aic(fitted, ps);

  std::uint64_t base = math::hash_combine(seed, std::string_view("gof-bootstrap"));
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(B));
  std::size_t n = ps.size();

  if (jobs == 1) {
    for (int b = 0; b < B; ++b)
      outcomes[b] = one_replicate(family, n, fitted, method,
                                  math::hash_combine(base, static_cast<std::uint64_t>(b)),
                                  k_frac, nu);
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (;;) {
        int b = next.fetch_add(1);
        if (b >= B) return;
        outcomes[b] = one_replicate(family, n, fitted, method,
                                    math::hash_combine(base, static_cast<std::uint64_t>(b)),
                                    k_frac, nu);
      }
    };
    std::vector<std::thread> pool;
    int nt = std::min(jobs, B);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  int exceed = 0, ok = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    ++ok;
    if (o.s_b > res.s_n) ++exceed;
  }
  res.dropped = B - ok;
  if (res.dropped * 10 > B)
    throw std::runtime_error("bootstrap_pvalue: more than 10% of replicates failed to fit");
  res.bootstrap_reps = ok;
  res.p_value = (1.0 + exceed) / (ok + 1.0);
  return res;
}

}  // namespace copulafit
