#include "copulafit/math.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace copulafit::math {

double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  static const double inv_sqrt2 = 0.7071067811865475244;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

// Acklam's rational approximation (rel. error < 1.2e-9) followed by one
// Halley step, which brings the error below 1e-14 away from the extreme
// tails.
static double norm_quantile_half(double p) {  // p in (0, 0.5]
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  if (0.5 * x * x < 700.0) {
    double e = norm_cdf(x) - p;
    double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p outside (0,1)");
  if (p > 0.5) return -norm_quantile_half(1.0 - p);
  return norm_quantile_half(p);
}

double t_pdf(double x, double nu) {
  double lg = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu);
  return std::exp(lg - 0.5 * (nu + 1.0) * std::log1p(x * x / nu)) / std::sqrt(nu * pi);
}

static const double fpmin = 1e-300;

static double betacf(double a, double b, double x) {
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-16) return h;
  }
  throw std::runtime_error("inc_beta_reg: continued fraction did not converge");
}

double inc_beta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double nu) {
  if (nu <= 0.0) throw std::domain_error("t_cdf: nu must be positive");
  if (x == 0.0) return 0.5;
  double ib = inc_beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
  return x > 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

double t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("t_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, nu);
  double lo = 0.0, hi = 1.0;
  while (t_cdf(hi, nu) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("t_quantile: bracket expansion failed");
  }
  double x = brent_root([&](double s) { return t_cdf(s, nu) - p; }, lo, hi, 1e-13);
  double f = t_pdf(x, nu);
  if (f > 0.0) x -= (t_cdf(x, nu) - p) / f;
  return x;
}

double lower_gamma_reg(double a, double x) {
  if (a <= 0.0) throw std::domain_error("lower_gamma_reg: a must be positive");
  if (x <= 0.0) return 0.0;
  double lpre = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {  // series
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n <= 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16)
        return sum * std::exp(lpre);
    }
    throw std::runtime_error("lower_gamma_reg: series did not converge");
  }
  // continued fraction for Q(a,x)
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) return 1.0 - std::exp(lpre) * h;
  }
  throw std::runtime_error("lower_gamma_reg: continued fraction did not converge");
}

double digamma(double x) {
  if (x <= 0.0) throw std::domain_error("digamma: x must be positive");
  double r = 0.0;
  while (x < 10.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  double x1 = 1.0 / x, x2 = x1 * x1;
  return r + std::log(x) - 0.5 * x1 -
         x2 * (1.0 / 12.0 -
               x2 * (1.0 / 120.0 -
                     x2 * (1.0 / 252.0 -
                           x2 * (1.0 / 240.0 - x2 * (1.0 / 132.0 - x2 * (691.0 / 32760.0))))));
}

double trigamma(double x) {
  if (x <= 0.0) throw std::domain_error("trigamma: x must be positive");
  double r = 0.0;
  while (x < 10.0) {
    r += 1.0 / (x * x);
    x += 1.0;
  }
  double x1 = 1.0 / x, x2 = x1 * x1;
  return r + x1 * (1.0 +
                   x1 * (0.5 + x1 * (1.0 / 6.0 -
                                     x2 * (1.0 / 30.0 -
                                           x2 * (1.0 / 42.0 - x2 * (1.0 / 30.0 - x2 * (5.0 / 66.0)))))));
}

double debye1(double x) {
  if (x == 0.0) throw std::domain_error("debye1: x must be nonzero");
  if (x < 0.0) return debye1(-x) - 0.5 * x;  // D1(-y) = D1(y) + y/2
  auto f = [](double t) { return t < 1e-12 ? 1.0 - 0.5 * t : t / std::expm1(t); };
  return integrate(f, 0.0, x, 1e-11 * std::max(1.0, x)) / x;
}

// ---- adaptive Gauss-Kronrod (G7,K15) ----

static const double xgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                              0.741531185599394, 0.586087235467691, 0.405845151377397,
                              0.207784955007898, 0.0};
static const double wgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                              0.140653259715525, 0.169004726639267, 0.190350578064785,
                              0.204432940075298, 0.209482141084728};
static const double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                             0.417959183673469};

static void gk15(double (*f)(double, void*), void* ctx, double a, double b,
                 double& result, double& err) {
  double hl = 0.5 * (b - a), c = 0.5 * (a + b);
  double fc = f(c, ctx);
  double rk = wgk[7] * fc, rg = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double x = hl * xgk[j];
    double fsum = f(c - x, ctx) + f(c + x, ctx);
    rk += wgk[j] * fsum;
    if (j % 2 == 1) rg += wg[j / 2] * fsum;
  }
  result = rk * hl;
  err = std::fabs((rk - rg) * hl);
}

double integrate(double (*f)(double, void*), void* ctx, double a, double b,
                 double abs_tol) {
  if (a == b) return 0.0;
  struct Seg {
    double a, b, I, err;
    bool operator<(const Seg& o) const { return err < o.err; }
  };
  auto make_seg = [&](double lo, double hi) {
    Seg s{lo, hi, 0.0, 0.0};
    gk15(f, ctx, lo, hi, s.I, s.err);
    return s;
  };
  // worst-segment-first refinement until the summed error estimate meets
  // the target; segments at the width floor are accepted as-is
  std::vector<Seg> segs{make_seg(a, b)};
  double total_I = segs[0].I, total_err = segs[0].err;
  for (int used = 0; total_err > abs_tol && !segs.empty(); ++used) {
    if (used > 4000) throw std::runtime_error("integrate: subdivision budget exhausted");
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[worst] < segs[i]) worst = i;
    Seg s = segs[worst];
    segs[worst] = segs.back();
    segs.pop_back();
    if (std::fabs(s.b - s.a) < 1e-14 * (std::fabs(s.a) + std::fabs(s.b) + 1.0)) {
      total_err -= s.err;  // width floor: keep its contribution, stop refining it
      continue;
    }
    double m = 0.5 * (s.a + s.b);
    Seg l = make_seg(s.a, m), r = make_seg(m, s.b);
    total_I += l.I + r.I - s.I;
    total_err += l.err + r.err - s.err;
    segs.push_back(l);
    segs.push_back(r);
  }
  return total_I;
}

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-14) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// ---- Brent bounded minimization (Forsythe-Malcolm-Moler fmin) ----

MinResult brent_min(double (*f)(double, void*), void* ctx, double a, double b,
                    double xtol, int max_evals) {
  if (!(a < b)) throw std::invalid_argument("brent_min: requires a < b");
  const double golden = 0.3819660112501051;
  double x = a + golden * (b - a), w = x, v = x;
  double fx = f(x, ctx), fw = fx, fv = fx;
  int nfe = 1;
  double d = 0.0, e = 0.0;
  bool converged = false;
  while (true) {
    double m = 0.5 * (a + b);
    double tol = xtol, t2 = 2.0 * tol;
    if (std::fabs(x - m) <= t2 - 0.5 * (b - a)) {
      converged = true;
      break;
    }
    if (nfe >= max_evals) break;
    double p = 0.0, q = 0.0, r = 0.0;
    if (std::fabs(e) > tol) {  // parabolic interpolation attempt
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0)
        p = -p;
      else
        q = -q;
      r = e;
      e = d;
    }
    if (std::fabs(p) < std::fabs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
      d = p / q;
      double u = x + d;
      if (u - a < t2 || b - u < t2) d = (x < m) ? tol : -tol;
    } else {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    double u = (std::fabs(d) >= tol) ? x + d : x + (d > 0.0 ? tol : -tol);
    double fu = f(u, ctx);
    ++nfe;
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, nfe, converged};
}

double brent_root(double (*f)(double, void*), void* ctx, double a, double b,
                  double xtol) {
  double fa = f(a, ctx), fb = f(b, ctx);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("brent_root: interval does not bracket a root");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < 200; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa; d = b - a; e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    double tol1 = 2.0 * DBL_EPSILON * std::fabs(b) + 0.5 * xtol;
    double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        q = fa / fc;
        double r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b, ctx);
  }
  return b;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("Rng::gamma: shape must be positive");
  if (shape < 1.0)
    return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

static std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t hash_combine(std::uint64_t h, double v) {
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t hash_combine(std::uint64_t h, std::string_view v) {
  std::uint64_t fnv = 0xcbf29ce484222325ULL;
  for (unsigned char ch : v) fnv = (fnv ^ ch) * 0x100000001b3ULL;
  return hash_combine(h, fnv);
}

}  // namespace copulafit::math
