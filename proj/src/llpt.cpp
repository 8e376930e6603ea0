#include "copulafit/llpt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace copulafit {

namespace m = math;

ProbitPoints probit_transform(const PseudoSample& ps) {
  ProbitPoints out;
  out.reserve(ps.size());
  for (const auto& p : ps) {
    if (!(p.u > 0.0 && p.u < 1.0 && p.v > 0.0 && p.v < 1.0))
      throw std::domain_error("probit_transform: coordinates must be inside (0,1)");
    out.push_back({m::norm_quantile(p.u), m::norm_quantile(p.v)});
  }
  return out;
}

Bandwidth nn_bandwidth(const ProbitPoints& pts, double k_frac) {
  std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("nn_bandwidth: need at least 2 points");
  if (!(k_frac > 0.0 && k_frac <= 1.0))
    throw std::invalid_argument("nn_bandwidth: k_frac must be in (0,1]");
  std::size_t k = static_cast<std::size_t>(std::ceil(k_frac * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);

  std::vector<double> kth(n);
  std::vector<double> d(n - 1);
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m_ = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double ds = pts[i].s - pts[j].s, dt = pts[i].t - pts[j].t;
      d[m_++] = ds * ds + dt * dt;
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    kth[i] = std::sqrt(d[k - 1]);
    dmax = std::max(dmax, kth[i]);
  }
  if (dmax == 0.0) throw std::runtime_error("nn_bandwidth: degenerate data, all points equal");

  std::sort(kth.begin(), kth.end());
  double med = (n % 2 == 1) ? kth[n / 2] : 0.5 * (kth[n / 2 - 1] + kth[n / 2]);
  return {std::max(med, 0.1), k_frac, false};
}

namespace {

struct Moments {
  double I;          // n * int K_b exp(P_a) dz
  double E1[6];      // E[m(Z)] under the induced Gaussian (or GH ratio)
  double E2[6][6];   // E[m(Z) m(Z)^T]
};

constexpr int basis_pow[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}};

// Gaussian raw moments E[z1^p z2^q], p+q <= 4, mean mu, covariance S.
void gauss_moments(const double mu[2], const double S[3], double mom[5][5]) {
  double m1 = mu[0], m2 = mu[1], s11 = S[0], s22 = S[1], s12 = S[2];
  mom[0][0] = 1.0;
  mom[1][0] = m1;
  mom[0][1] = m2;
  mom[2][0] = m1 * m1 + s11;
  mom[0][2] = m2 * m2 + s22;
  mom[1][1] = m1 * m2 + s12;
  mom[3][0] = m1 * m1 * m1 + 3.0 * m1 * s11;
  mom[0][3] = m2 * m2 * m2 + 3.0 * m2 * s22;
  mom[2][1] = m1 * m1 * m2 + 2.0 * m1 * s12 + m2 * s11;
  mom[1][2] = m2 * m2 * m1 + 2.0 * m2 * s12 + m1 * s22;
  mom[4][0] = m1 * m1 * m1 * m1 + 6.0 * m1 * m1 * s11 + 3.0 * s11 * s11;
  mom[0][4] = m2 * m2 * m2 * m2 + 6.0 * m2 * m2 * s22 + 3.0 * s22 * s22;
  mom[3][1] = m1 * m1 * m1 * m2 + 3.0 * m1 * m1 * s12 + 3.0 * m1 * m2 * s11 + 3.0 * s11 * s12;
  mom[1][3] = m2 * m2 * m2 * m1 + 3.0 * m2 * m2 * s12 + 3.0 * m1 * m2 * s22 + 3.0 * s22 * s12;
  mom[2][2] = m1 * m1 * m2 * m2 + m1 * m1 * s22 + m2 * m2 * s11 + 4.0 * m1 * m2 * s12 +
              s11 * s22 + 2.0 * s12 * s12;
}

void basis_eval(double z1, double z2, double out[6]) {
  out[0] = 1.0;
  out[1] = z1;
  out[2] = z2;
  out[3] = z1 * z1;
  out[4] = z2 * z2;
  out[5] = z1 * z2;
}

// The integral term and its Gaussian moments. When the quadratic form
// M = kernel precision - quadratic part of P_a is positive definite the
// integral is a closed-form Gaussian one; otherwise fall back to a 32x32
// tensor Gauss-Hermite grid (the objective is then on its concave tail
// toward -inf and only needs ordering, not high accuracy).
bool integral_moments(const std::array<double, 6>& a, double b, double n, Moments& mo) {
  double kp = 1.0 / (2.0 * b * b);
  double M11 = kp - a[3], M22 = kp - a[4], M12 = -0.5 * a[5];
  double det = M11 * M22 - M12 * M12;
  if (M11 > 0.0 && det > 0.0) {
    double inv11 = M22 / det, inv22 = M11 / det, inv12 = -M12 / det;
    double l1 = a[1], l2 = a[2];
    double mu[2] = {0.5 * (inv11 * l1 + inv12 * l2), 0.5 * (inv12 * l1 + inv22 * l2)};
    double S[3] = {0.5 * inv11, 0.5 * inv22, 0.5 * inv12};
    double expo = a[0] + 0.5 * (l1 * mu[0] + l2 * mu[1]);
    if (expo > 700.0) return false;
    mo.I = n * std::exp(expo) / (2.0 * b * b) / std::sqrt(det);
    double mom[5][5];
    gauss_moments(mu, S, mom);
    for (int i = 0; i < 6; ++i) {
      mo.E1[i] = mom[basis_pow[i][0]][basis_pow[i][1]];
      for (int j = 0; j < 6; ++j)
        mo.E2[i][j] = mom[basis_pow[i][0] + basis_pow[j][0]][basis_pow[i][1] + basis_pow[j][1]];
    }
    return true;
  }
  // Gauss-Hermite fallback on z = sqrt(2) b x
  static std::vector<double> ghx, ghw;
  if (ghx.empty()) m::gauss_hermite(32, ghx, ghw);
  double I = 0.0, S1[6] = {0}, S2[6][6] = {{0}};
  double sb = std::sqrt(2.0) * b;
  for (std::size_t i = 0; i < ghx.size(); ++i) {
    for (std::size_t j = 0; j < ghx.size(); ++j) {
      double z1 = sb * ghx[i], z2 = sb * ghx[j];
      double mm[6];
      basis_eval(z1, z2, mm);
      double P = 0.0;
      for (int k = 0; k < 6; ++k) P += a[k] * mm[k];
      double w = ghw[i] * ghw[j] * std::exp(std::min(P, 700.0));
      I += w;
      for (int k = 0; k < 6; ++k) S1[k] += w * mm[k];
      for (int k = 0; k < 6; ++k)
        for (int l = k; l < 6; ++l) S2[k][l] += w * mm[k] * mm[l];
    }
  }
  if (!(I > 0.0) || !std::isfinite(I)) return false;
  mo.I = n / m::pi * I;
  for (int k = 0; k < 6; ++k) mo.E1[k] = S1[k] / I;
  for (int k = 0; k < 6; ++k)
    for (int l = 0; l < 6; ++l) mo.E2[k][l] = S2[std::min(k, l)][std::max(k, l)] / I;
  return true;
}

// Cholesky solve of the 6x6 SPD system A z = rhs; false if not SPD.
bool spd_solve6(double A[6][6], const double rhs[6], double z[6]) {
  double L[6][6] = {{0}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  double y[6];
  for (int i = 0; i < 6; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  for (int i = 5; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < 6; ++k) s -= L[k][i] * z[k];
    z[i] = s / L[i][i];
  }
  return true;
}

}  // namespace

LocalFit local_fit(const ProbitPoints& pts, ProbitPoint at, const Bandwidth& bw) {
  if (!(bw.b > 0.0)) throw std::invalid_argument("local_fit: bandwidth must be positive");
  double b = bw.b;
  double n = static_cast<double>(pts.size());

  // data term: sum_i w_i P_a(d_i) = gdata . a, fixed across iterations
  double gdata[6] = {0};
  double kb_norm = 1.0 / (2.0 * m::pi * b * b);
  double pilot_b = std::pow(n, -1.0 / 6.0);
  double pilot = 0.0, pilot_norm = 1.0 / (2.0 * m::pi * pilot_b * pilot_b);
  for (const auto& p : pts) {
    double d1 = p.s - at.s, d2 = p.t - at.t;
    double r2 = d1 * d1 + d2 * d2;
    double w = kb_norm * std::exp(-r2 / (2.0 * b * b));
    double mm[6];
    basis_eval(d1, d2, mm);
    for (int k = 0; k < 6; ++k) gdata[k] += w * mm[k];
    pilot += pilot_norm * std::exp(-r2 / (2.0 * pilot_b * pilot_b));
  }
  pilot /= n;

  std::array<double, 6> a = {std::log(std::max(pilot, 1e-300)), 0, 0, 0, 0, 0};
  auto objective = [&](const std::array<double, 6>& av, Moments& mo) -> double {
    if (!integral_moments(av, b, n, mo)) return -std::numeric_limits<double>::infinity();
    double dot = 0.0;
    for (int k = 0; k < 6; ++k) dot += gdata[k] * av[k];
    return dot - mo.I;
  };

  Moments mo;
  double f = objective(a, mo);
  bool converged = false;
  int it = 0;
  for (; it < 100; ++it) {
    double g[6];
    double gnorm2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      g[k] = gdata[k] - mo.I * mo.E1[k];
      gnorm2 += g[k] * g[k];
    }
    if (gnorm2 <= 1e-16) {  // gradient norm <= 1e-8
      converged = true;
      break;
    }
    double A[6][6];
    double ridge = 0.0;
    for (int k = 0; k < 6; ++k) ridge = std::max(ridge, mo.I * mo.E2[k][k]);
    ridge = std::max(ridge * 1e-13, 1e-300);
    for (int k = 0; k < 6; ++k)
      for (int l = 0; l < 6; ++l) A[k][l] = mo.I * mo.E2[k][l] + (k == l ? ridge : 0.0);
    double step[6];
    if (!spd_solve6(A, g, step)) break;
    double gd = 0.0;
    for (int k = 0; k < 6; ++k) gd += g[k] * step[k];
    if (!(gd > 0.0)) break;  // not an ascent direction; numerically stuck
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      std::array<double, 6> anew = a;
      for (int k = 0; k < 6; ++k) anew[k] += t * step[k];
      Moments mo2;
      double f2 = objective(anew, mo2);
      if (f2 >= f + 1e-4 * t * gd) {
        a = anew;
        f = f2;
        mo = mo2;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return {a, converged, it};
}

LlptEstimate llpt_density(const PseudoSample& ps, const std::vector<UnitPair>& query,
                          double k_frac) {
  ProbitPoints pts = probit_transform(ps);
  Bandwidth bw = nn_bandwidth(pts, k_frac);
  LlptEstimate est;
  est.bandwidth = bw;
  est.n = ps.size();
  est.values.reserve(query.size());
  est.converged.reserve(query.size());
  for (const auto& q : query) {
    if (!(q.u > 0.0 && q.u < 1.0 && q.v > 0.0 && q.v < 1.0))
      throw std::domain_error("llpt_density: query point outside the open unit square");
    ProbitPoint at{m::norm_quantile(q.u), m::norm_quantile(q.v)};
    LocalFit fit = local_fit(pts, at, bw);
    double val = std::exp(fit.a[0]) / (m::norm_pdf(at.s) * m::norm_pdf(at.t));
    if (std::isnan(val)) val = 0.0;
    est.values.push_back(std::clamp(val, 0.0, 1e12));
    est.converged.push_back(fit.converged);
  }
  return est;
}

}  // namespace copulafit
