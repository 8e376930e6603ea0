#include "copulafit/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace copulafit {

namespace m = math;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::clayton: return "clayton";
    case Family::gumbel: return "gumbel";
    case Family::frank: return "frank";
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "t";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  if (name == "clayton") return Family::clayton;
  if (name == "gumbel") return Family::gumbel;
  if (name == "frank") return Family::frank;
  if (name == "gaussian" || name == "normal") return Family::gaussian;
  if (name == "t" || name == "student" || name == "student_t") return Family::student_t;
  throw std::invalid_argument("unknown copula family: " + std::string(name));
}

CopulaSpec::CopulaSpec(Family f, double theta_, double nu_)
    : family(f), theta(theta_), nu(nu_) {
  if (!std::isfinite(theta)) throw std::domain_error("CopulaSpec: theta must be finite");
  switch (family) {
    case Family::clayton:
      if (theta <= -1.0 || theta == 0.0)
        throw std::domain_error("CopulaSpec: Clayton requires theta in (-1,inf), theta != 0");
      break;
    case Family::gumbel:
      if (theta < 1.0) throw std::domain_error("CopulaSpec: Gumbel requires theta >= 1");
      break;
    case Family::frank:
      if (theta == 0.0) throw std::domain_error("CopulaSpec: Frank requires theta != 0");
      break;
    case Family::gaussian:
      if (std::fabs(theta) > 1.0)
        throw std::domain_error("CopulaSpec: Gaussian requires |theta| <= 1");
      break;
    case Family::student_t:
      if (std::fabs(theta) > 1.0)
        throw std::domain_error("CopulaSpec: StudentT requires |theta| <= 1");
      if (!(nu > 1.0)) throw std::domain_error("CopulaSpec: StudentT requires nu > 1");
      break;
  }
}

// ---- CDFs ----

static double clayton_cdf(double th, double u, double v) {
  if (th > 0.0) {
    // s = u^-th + v^-th - 1 > 1, in log space to survive large th
    double a1 = -th * std::log(u), a2 = -th * std::log(v);
    double mx = std::max(a1, a2);
    double ls = mx + std::log(std::exp(a1 - mx) + std::exp(a2 - mx) - std::exp(-mx));
    return std::exp(-ls / th);
  }
  double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
  if (s <= 0.0) return 0.0;
  return std::pow(s, -1.0 / th);
}

static double gumbel_cdf(double th, double u, double v) {
  double lu = -std::log(u), lv = -std::log(v);
  double S = std::pow(lu, th) + std::pow(lv, th);
  return std::exp(-std::pow(S, 1.0 / th));
}

static double frank_cdf(double th, double u, double v) {
  if (std::fabs(th) < 1e-10) return u * v;
  if (th > 30.0) {
    // C = -(1/th) * log((A + B - AB - E)/(1 - E)), terms grouped in log space
    double mn = std::min(u, v), mx = std::max(u, v);
    double ln_num = -th * mn +
                    std::log(1.0 + std::exp(-th * (mx - mn)) - std::exp(-th * mx) -
                             std::exp(-th * (1.0 - mn)));
    return -(ln_num - std::log1p(-std::exp(-th))) / th;
  }
  double g1 = std::expm1(-th), gu = std::expm1(-th * u), gv = std::expm1(-th * v);
  return -std::log1p(gu * gv / g1) / th;
}

static double gaussian_cdf(double rho, double u, double v) {
  if (rho >= 1.0 - 1e-14) return std::min(u, v);
  if (rho <= -1.0 + 1e-14) return std::max(u + v - 1.0, 0.0);
  double x = m::norm_quantile(u), y = m::norm_quantile(v);
  double denom = std::sqrt(1.0 - rho * rho);
  auto f = [&](double s) { return m::norm_pdf(s) * m::norm_cdf((y - rho * s) / denom); };
  double lo = std::min(-40.0, x - 2.0);
  return std::clamp(m::integrate(f, lo, x, 1e-13), 0.0, std::min(u, v));
}

static double student_cdf(double rho, double nu, double u, double v) {
  if (rho >= 1.0 - 1e-14) return std::min(u, v);
  if (rho <= -1.0 + 1e-14) return std::max(u + v - 1.0, 0.0);
  if (u < 1e-14 || v < 1e-14) return 0.0;
  double x = m::t_quantile(u, nu), y = m::t_quantile(v, nu);
  double r2 = 1.0 - rho * rho;
  auto f = [&](double s) {
    double k = std::sqrt((nu + 1.0) / ((nu + s * s) * r2));
    return m::t_pdf(s, nu) * m::t_cdf((y - rho * s) * k, nu + 1.0);
  };
  double lo = std::min(m::t_quantile(1e-15, nu), x - 1.0);
  return std::clamp(m::integrate(f, lo, x, 2e-13), 0.0, std::min(u, v));
}

double cdf(const CopulaSpec& spec, UnitPair p) {
  if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0))
    throw std::domain_error("cdf: point outside the unit square");
  if (p.u == 0.0 || p.v == 0.0) return 0.0;
  if (p.u == 1.0) return p.v;
  if (p.v == 1.0) return p.u;
  switch (spec.family) {
    case Family::clayton: return clayton_cdf(spec.theta, p.u, p.v);
    case Family::gumbel: return gumbel_cdf(spec.theta, p.u, p.v);
    case Family::frank: return frank_cdf(spec.theta, p.u, p.v);
    case Family::gaussian: return gaussian_cdf(spec.theta, p.u, p.v);
    case Family::student_t: return student_cdf(spec.theta, spec.nu, p.u, p.v);
  }
  return 0.0;
}

// ---- log densities ----

static double clayton_logc(double th, double lnu, double lnv) {
  if (std::fabs(th) < 1e-10) return 0.0;  // independence limit
  double ls;
  if (th > 0.0) {
    double a1 = -th * lnu, a2 = -th * lnv;
    double mx = std::max(a1, a2);
    ls = mx + std::log(std::exp(a1 - mx) + std::exp(a2 - mx) - std::exp(-mx));
  } else {
    double s = std::exp(-th * lnu) + std::exp(-th * lnv) - 1.0;
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    ls = std::log(s);
  }
  return std::log1p(th) - (th + 1.0) * (lnu + lnv) - (1.0 / th + 2.0) * ls;
}

static double gumbel_logc(double th, double lnu, double lnv) {
  if (th == 1.0) return 0.0;
  double llu = std::log(-lnu), llv = std::log(-lnv);
  double A = std::exp(th * llu), B = std::exp(th * llv);
  double lS = std::log(A + B);
  double Sr = std::exp(lS / th);  // S^(1/th)
  return -Sr + (th - 1.0) * (llu + llv) - (lnu + lnv) + (2.0 / th - 2.0) * lS +
         std::log1p((th - 1.0) / Sr);
}

static double frank_logc(double th, double u, double v) {
  if (std::fabs(th) < 1e-10) return 0.0;
  double labs_d;
  if (th >= 30.0) {
    double mn = std::min(u, v), mx = std::max(u, v);
    labs_d = -th * mn + std::log(1.0 + std::exp(-th * (mx - mn)) - std::exp(-th * mx) -
                                 std::exp(-th * (1.0 - mn)));
  } else if (th <= -30.0) {
    double q = -th;  // |D| = e^{q(u+v)} + e^q - e^{qu} - e^{qv}
    double mx = std::max(q * (u + v), q);
    labs_d = mx + std::log(std::exp(q * (u + v) - mx) + std::exp(q - mx) -
                           std::exp(q * u - mx) - std::exp(q * v - mx));
  } else {
    double D = std::exp(-th * u) + std::exp(-th * v) - std::exp(-th * (u + v)) - std::exp(-th);
    labs_d = std::log(std::fabs(D));
  }
  return std::log(std::fabs(th)) + std::log(std::fabs(std::expm1(-th))) - th * (u + v) -
         2.0 * labs_d;
}

static double gaussian_logc(double rho, double x, double y) {
  double r2 = 1.0 - rho * rho;
  if (r2 < 1e-15) {
    return x == y ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
  }
  return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

static double student_logc(double rho, double nu, double x, double y, double lpx, double lpy) {
  double r2 = 1.0 - rho * rho;
  if (r2 < 1e-15) {
    return x == y ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
  }
  double Q = (x * x - 2.0 * rho * x * y + y * y) / r2;
  double lf2 = -std::log(2.0 * m::pi) - 0.5 * std::log(r2) -
               0.5 * (nu + 2.0) * std::log1p(Q / nu);
  return lf2 - lpx - lpy;
}

static double clamp_density(double logc, bool* saturated) {
  static const double log_ceiling = std::log(density_ceiling);
  if (std::isnan(logc)) throw std::runtime_error("pdf: density evaluation produced NaN");
  if (logc > log_ceiling) {
    if (saturated) *saturated = true;
    return density_ceiling;
  }
  return std::exp(logc);
}

double pdf(const CopulaSpec& spec, UnitPair p, bool* saturated) {
  if (saturated) *saturated = false;
  if (!(p.u > 0.0 && p.u < 1.0 && p.v > 0.0 && p.v < 1.0))
    throw std::domain_error("pdf: point outside the open unit square");
  switch (spec.family) {
    case Family::clayton:
      return clamp_density(clayton_logc(spec.theta, std::log(p.u), std::log(p.v)), saturated);
    case Family::gumbel:
      return clamp_density(gumbel_logc(spec.theta, std::log(p.u), std::log(p.v)), saturated);
    case Family::frank:
      return clamp_density(frank_logc(spec.theta, p.u, p.v), saturated);
    case Family::gaussian:
      return clamp_density(
          gaussian_logc(spec.theta, m::norm_quantile(p.u), m::norm_quantile(p.v)), saturated);
    case Family::student_t: {
      double x = m::t_quantile(p.u, spec.nu), y = m::t_quantile(p.v, spec.nu);
      return clamp_density(student_logc(spec.theta, spec.nu, x, y,
                                        std::log(m::t_pdf(x, spec.nu)),
                                        std::log(m::t_pdf(y, spec.nu))),
                           saturated);
    }
  }
  return 0.0;
}

// ---- sampling by conditional inversion / elliptical construction ----

static double log_expm1(double b) {  // log(e^b - 1), b > 0
  return b > 30.0 ? b : std::log(std::expm1(b));
}

static double clayton_conditional_inverse(double th, double u, double p) {
  if (th > 0.0) {
    double a = -th * std::log(u);
    double lw = log_expm1((-th / (1.0 + th)) * std::log(p));
    double arg = a + lw;  // log(u^-th * w)
    double li = arg > 30.0 ? arg : std::log1p(std::exp(arg));
    return std::exp(-li / th);
  }
  double w = std::pow(p, -th / (1.0 + th)) - 1.0;  // in (-1,0) for th < 0
  double inner = 1.0 + std::pow(u, -th) * w;
  if (inner <= 0.0) return 1.0;  // truncated support edge
  return std::pow(inner, -1.0 / th);
}

static double frank_conditional_inverse(double th, double u, double p) {
  if (std::fabs(th) < 1e-8) return p;
  // v = -(1/th)[log(e^{-th u}(1-p) + p e^{-th}) - log(e^{-th u}(1-p) + p)]
  auto lse = [](double la, double lb) {
    double mx = std::max(la, lb);
    return mx + std::log1p(std::exp(std::min(la, lb) - mx));
  };
  double l1p = std::log1p(-p), lp = std::log(p);
  double num = lse(-th * u + l1p, -th + lp);
  double den = lse(-th * u + l1p, lp);
  return -(num - den) / th;
}

static double gumbel_conditional(double th, double u, double v) {
  double lnu = std::log(u), lnv = std::log(v);
  double llu = std::log(-lnu), llv = std::log(-lnv);
  double lS = std::log(std::exp(th * llu) + std::exp(th * llv));
  // dC/du = C * (-log u)^(th-1) * S^(1/th-1) / u
  return std::exp(-std::exp(lS / th) + (th - 1.0) * llu + (1.0 / th - 1.0) * lS - lnu);
}

static double gumbel_conditional_inverse(double th, double u, double p) {
  if (th == 1.0) return p;
  const double vlo = 1e-15, vhi = 1.0 - 1e-15;
  if (gumbel_conditional(th, u, vlo) >= p) return vlo;
  if (gumbel_conditional(th, u, vhi) <= p) return vhi;
  return m::brent_root([&](double v) { return gumbel_conditional(th, u, v) - p; }, vlo, vhi,
                       1e-10);
}

std::vector<UnitPair> sample(const CopulaSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  m::Rng rng(seed);
  std::vector<UnitPair> out;
  out.reserve(n);
  switch (spec.family) {
    case Family::clayton:
      for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform(), p = rng.uniform();
        out.push_back({u, clayton_conditional_inverse(spec.theta, u, p)});
      }
      break;
    case Family::gumbel:
      for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform(), p = rng.uniform();
        out.push_back({u, gumbel_conditional_inverse(spec.theta, u, p)});
      }
      break;
    case Family::frank:
      for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform(), p = rng.uniform();
        out.push_back({u, frank_conditional_inverse(spec.theta, u, p)});
      }
      break;
    case Family::gaussian: {
      double rho = spec.theta, c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      for (std::size_t i = 0; i < n; ++i) {
        double z1 = rng.normal(), z2 = rng.normal();
        out.push_back({m::norm_cdf(z1), m::norm_cdf(rho * z1 + c * z2)});
      }
      break;
    }
    case Family::student_t: {
      double rho = spec.theta, c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      for (std::size_t i = 0; i < n; ++i) {
        double z1 = rng.normal(), z2 = rng.normal();
        double s = std::sqrt(spec.nu / rng.chisq(spec.nu));
        out.push_back({m::t_cdf(z1 * s, spec.nu),
                       m::t_cdf((rho * z1 + c * z2) * s, spec.nu)});
      }
      break;
    }
  }
  return out;
}

// ---- Kendall tau maps ----

double tau_from_theta(const CopulaSpec& spec) {
  switch (spec.family) {
    case Family::clayton: return spec.theta / (spec.theta + 2.0);
    case Family::gumbel: return (spec.theta - 1.0) / spec.theta;
    case Family::frank: return 1.0 + 4.0 * (debye1(spec.theta) - 1.0) / spec.theta;
    case Family::gaussian:
    case Family::student_t: return 2.0 / m::pi * std::asin(spec.theta);
  }
  return 0.0;
}

double theta_from_tau(Family family, double tau) {
  if (!(tau > -1.0 && tau < 1.0)) throw std::domain_error("theta_from_tau: tau outside (-1,1)");
  switch (family) {
    case Family::clayton:
      if (tau == 0.0) throw std::domain_error("theta_from_tau: Clayton excludes tau = 0");
      return 2.0 * tau / (1.0 - tau);
    case Family::gumbel:
      if (tau < 0.0) throw std::domain_error("theta_from_tau: Gumbel requires tau >= 0");
      return 1.0 / (1.0 - tau);
    case Family::frank: {
      if (tau == 0.0) throw std::domain_error("theta_from_tau: Frank excludes tau = 0");
      double at = std::fabs(tau);
      double th = m::brent_root(
          [&](double t) { return 1.0 + 4.0 * (debye1(t) - 1.0) / t - at; }, 1e-10, 1000.0,
          1e-12);
      return tau > 0.0 ? th : -th;
    }
    case Family::gaussian:
    case Family::student_t:
      return std::sin(0.5 * m::pi * tau);
  }
  return 0.0;
}

// ---- cached repeated evaluation ----

DensityAt::DensityAt(Family family, double nu, std::span<const UnitPair> pts)
    : family_(family), nu_(nu), n_(pts.size()) {
  u_.reserve(n_);
  v_.reserve(n_);
  for (const auto& p : pts) {
    if (!(p.u > 0.0 && p.u < 1.0 && p.v > 0.0 && p.v < 1.0))
      throw std::domain_error("DensityAt: point outside the open unit square");
    u_.push_back(p.u);
    v_.push_back(p.v);
  }
  if (family_ == Family::clayton || family_ == Family::gumbel) {
    lnu_.resize(n_);
    lnv_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      lnu_[i] = std::log(u_[i]);
      lnv_[i] = std::log(v_[i]);
    }
  } else if (family_ == Family::gaussian) {
    qx_.resize(n_);
    qy_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      qx_[i] = m::norm_quantile(u_[i]);
      qy_[i] = m::norm_quantile(v_[i]);
    }
  } else if (family_ == Family::student_t) {
    qx_.resize(n_);
    qy_.resize(n_);
    lpx_.resize(n_);
    lpy_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      qx_[i] = m::t_quantile(u_[i], nu_);
      qy_[i] = m::t_quantile(v_[i], nu_);
      lpx_[i] = std::log(m::t_pdf(qx_[i], nu_));
      lpy_[i] = std::log(m::t_pdf(qy_[i], nu_));
    }
  }
}

double DensityAt::operator()(double theta, std::size_t i) const {
  switch (family_) {
    case Family::clayton: return clamp_density(clayton_logc(theta, lnu_[i], lnv_[i]), nullptr);
    case Family::gumbel: return clamp_density(gumbel_logc(theta, lnu_[i], lnv_[i]), nullptr);
    case Family::frank: return clamp_density(frank_logc(theta, u_[i], v_[i]), nullptr);
    case Family::gaussian: return clamp_density(gaussian_logc(theta, qx_[i], qy_[i]), nullptr);
    case Family::student_t:
      return clamp_density(student_logc(theta, nu_, qx_[i], qy_[i], lpx_[i], lpy_[i]), nullptr);
  }
  return 0.0;
}

}  // namespace copulafit
