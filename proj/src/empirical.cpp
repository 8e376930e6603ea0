#include "copulafit/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace copulafit {

static void check_raw(const RawSample& raw) {
  if (raw.x.size() != raw.y.size())
    throw std::invalid_argument("RawSample: x and y must have equal length");
  if (raw.x.size() < 2) throw std::invalid_argument("RawSample: need n >= 2");
  for (std::size_t i = 0; i < raw.x.size(); ++i)
    if (!std::isfinite(raw.x[i]) || !std::isfinite(raw.y[i]))
      throw std::invalid_argument("RawSample: non-finite value at row " + std::to_string(i + 1));
}

static std::vector<double> midranks(const std::vector<double>& x) {
  std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // mid-rank, 1-based
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

PseudoSample pseudo_observations(const RawSample& raw) {
  check_raw(raw);
  std::size_t n = raw.x.size();
  std::vector<double> rx = midranks(raw.x), ry = midranks(raw.y);
  PseudoSample ps(n);
  for (std::size_t i = 0; i < n; ++i)
    ps[i] = {rx[i] / (n + 1.0), ry[i] / (n + 1.0)};
  return ps;
}

double empirical_copula(const PseudoSample& ps, UnitPair p) {
  if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0))
    throw std::domain_error("empirical_copula: point outside the unit square");
  std::size_t count = 0;
  for (const auto& q : ps)
    if (q.u <= p.u && q.v <= p.v) ++count;
  return static_cast<double>(count) / static_cast<double>(ps.size());
}

// counts inversions while merge-sorting y in place
static std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& tmp,
                                 std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(y, tmp, lo, mid) + merge_count(y, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      swaps += mid - i;
      tmp[k++] = y[j++];
    } else {
      tmp[k++] = y[i++];
    }
  }
  while (i < mid) tmp[k++] = y[i++];
  while (j < hi) tmp[k++] = y[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, y.begin() + lo);
  return swaps;
}

static std::uint64_t tie_pairs(const std::vector<double>& sorted) {
  std::uint64_t t = 0;
  std::size_t i = 0, n = sorted.size();
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    std::uint64_t g = j - i + 1;
    t += g * (g - 1) / 2;
    i = j + 1;
  }
  return t;
}

double kendall_tau_sample(const RawSample& raw) {
  check_raw(raw);
  std::size_t n = raw.x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (raw.x[a] != raw.x[b]) return raw.x[a] < raw.x[b];
    return raw.y[a] < raw.y[b];
  });

  std::uint64_t xtie = 0, xytie = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && raw.x[idx[j + 1]] == raw.x[idx[i]]) ++j;
      std::uint64_t g = j - i + 1;
      xtie += g * (g - 1) / 2;
      std::size_t a = i;
      while (a <= j) {  // (x,y) ties inside the x group (sorted by y)
        std::size_t b = a;
        while (b + 1 <= j && raw.y[idx[b + 1]] == raw.y[idx[a]]) ++b;
        std::uint64_t h = b - a + 1;
        xytie += h * (h - 1) / 2;
        a = b + 1;
      }
      i = j + 1;
    }
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = raw.y[idx[i]];
  std::vector<double> tmp(n);
  std::uint64_t dis = merge_count(ys, tmp, 0, n);  // ys now sorted
  std::uint64_t ytie = tie_pairs(ys);

  std::uint64_t tot = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (xtie == tot || ytie == tot)
    throw std::runtime_error("kendall_tau_sample: undefined for an all-tied margin");
  double con_minus_dis = static_cast<double>(tot) - static_cast<double>(xtie) -
                         static_cast<double>(ytie) + static_cast<double>(xytie) -
                         2.0 * static_cast<double>(dis);
  double tau = con_minus_dis / (std::sqrt(static_cast<double>(tot - xtie)) *
                                std::sqrt(static_cast<double>(tot - ytie)));
  return std::clamp(tau, -1.0, 1.0);
}

}  // namespace copulafit
