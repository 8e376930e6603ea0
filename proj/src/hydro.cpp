#include "copulafit/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "copulafit/math.hpp"

namespace copulafit {

namespace m = math;

namespace {

std::string month_tag(int year, int month) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

}  // namespace

void PrecipSeries::validate() const {
  if (records.empty()) throw std::invalid_argument("precipitation series: empty");
  long prev = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const MonthRecord& r = records[i];
    if (r.month < 1 || r.month > 12)
      throw std::invalid_argument("precipitation series: bad month " +
                                  month_tag(r.year, r.month));
    if (!(r.precip_mm >= 0.0) || !std::isfinite(r.precip_mm))
      throw std::invalid_argument("precipitation series: bad amount at " +
                                  month_tag(r.year, r.month));
    long key = static_cast<long>(r.year) * 12 + (r.month - 1);
    if (i > 0) {
      if (key == prev)
        throw std::invalid_argument("precipitation series: duplicate month " +
                                    month_tag(r.year, r.month));
      if (key != prev + 1) {
        long want = prev + 1;
        throw std::invalid_argument(
            "precipitation series: missing month " +
            month_tag(static_cast<int>(want / 12), static_cast<int>(want % 12) + 1));
      }
    }
    prev = key;
  }
}

MonthlyGamma fit_gamma_monthly(const PrecipSeries& ps) {
  ps.validate();
  std::array<std::vector<double>, 12> by_month;
  std::array<int, 12> zeros{};
  for (const auto& r : ps.records) {
    if (r.precip_mm > 0.0)
      by_month[r.month - 1].push_back(r.precip_mm);
    else
      ++zeros[r.month - 1];
  }
  MonthlyGamma out;
  for (int mth = 0; mth < 12; ++mth) {
    const std::vector<double>& x = by_month[mth];
    int nz = static_cast<int>(x.size());
    if (nz < 10) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "gamma fit: month %d has %d nonzero observations, need at least 10", mth + 1,
                    nz);
      throw std::invalid_argument(buf);
    }
    double mean = 0.0, mean_log = 0.0;
    for (double v : x) {
      mean += v;
      mean_log += std::log(v);
    }
    mean /= nz;
    mean_log /= nz;
    double s = std::log(mean) - mean_log;  // >= 0 by Jensen, 0 iff constant
    if (s <= 1e-12) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "gamma fit: month %d precipitation is constant, degenerate",
                    mth + 1);
      throw std::runtime_error(buf);
    }
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 60; ++it) {
      double f = std::log(k) - m::digamma(k) - s;
      double fp = 1.0 / k - m::trigamma(k);
      double step = f / fp;
      double k2 = k - step;
      if (k2 <= 0.0) k2 = k / 2.0;
      if (std::fabs(k2 - k) <= 1e-12 * k) {
        k = k2;
        break;
      }
      k = k2;
    }
    GammaMonthFit& g = out[mth];
    g.shape = k;
    g.scale = mean / k;
    g.n_pos = nz;
    g.zero_prob = static_cast<double>(zeros[mth]) / (zeros[mth] + nz);
  }
  return out;
}

SpiSeries spi(const PrecipSeries& ps, int timescale) {
  ps.validate();
  if (timescale < 1) throw std::invalid_argument("spi: timescale must be at least 1");
  if (ps.records.size() < static_cast<std::size_t>(timescale))
    throw std::invalid_argument("spi: series shorter than the timescale");

  // Window sums are computed from scratch per month: a running window would
  // leave cancellation residue, turning an exactly-zero total into a tiny
  // negative one and corrupting the dry-month mass.
  PrecipSeries rolled;
  std::size_t ts = static_cast<std::size_t>(timescale);
  rolled.records.reserve(ps.records.size() - ts + 1);
  for (std::size_t i = ts - 1; i < ps.records.size(); ++i) {
    double window = 0.0;
    for (std::size_t j = i + 1 - ts; j <= i; ++j) window += ps.records[j].precip_mm;
    MonthRecord r = ps.records[i];
    r.precip_mm = window;
    rolled.records.push_back(r);
  }

  MonthlyGamma fits = fit_gamma_monthly(rolled);
  SpiSeries out;
  out.timescale = timescale;
  out.months = rolled.records;
  out.spi.reserve(rolled.records.size());
  for (const auto& r : rolled.records) {
    const GammaMonthFit& g = fits[r.month - 1];
    double p = g.zero_prob;
    if (r.precip_mm > 0.0)
      p += (1.0 - g.zero_prob) * m::lower_gamma_reg(g.shape, r.precip_mm / g.scale);
    p = std::clamp(p, 1e-6, 1.0 - 1e-6);
    out.spi.push_back(m::norm_quantile(p));
  }
  return out;
}

DroughtRecord extract_droughts(const SpiSeries& s) {
  if (s.spi.empty()) throw std::invalid_argument("extract_droughts: empty series");
  DroughtRecord rec;
  std::size_t i = 0, n = s.spi.size();
  while (i < n) {
    if (!(s.spi[i] < 0.0)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double sev = 0.0;
    while (j < n && s.spi[j] < 0.0) sev += s.spi[j++];
    DroughtEvent ev;
    ev.start = i;
    ev.start_year = s.months[i].year;
    ev.start_month = s.months[i].month;
    ev.duration = static_cast<int>(j - i);
    ev.severity = sev;
    rec.events.push_back(ev);
    i = j;
  }
  for (std::size_t k = 0; k + 1 < rec.events.size(); ++k)
    rec.events[k].interval =
        static_cast<int>(rec.events[k + 1].start - rec.events[k].start);
  return rec;
}

namespace {

RawSample pairs_with_interval(const DroughtRecord& r, bool duration, bool abs_severity) {
  RawSample out;
  for (const auto& ev : r.events) {
    if (!ev.interval) continue;
    double x = duration ? static_cast<double>(ev.duration)
                        : (abs_severity ? std::fabs(ev.severity) : ev.severity);
    out.x.push_back(x);
    out.y.push_back(static_cast<double>(*ev.interval));
  }
  if (out.x.size() < 2)
    throw std::runtime_error("drought pairs: need at least 2 events with a successor");
  return out;
}

}  // namespace

RawSample severity_interval_pairs(const DroughtRecord& r, bool abs_severity) {
  return pairs_with_interval(r, false, abs_severity);
}

RawSample duration_interval_pairs(const DroughtRecord& r) {
  return pairs_with_interval(r, true, false);
}

// ---- CSV ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

long parse_long(const std::string& s, const char* what, int lineno) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "csv line %d: bad %s '%s'", lineno, what, s.c_str());
    throw std::invalid_argument(buf);
  }
  return v;
}

double parse_double(const std::string& s, const char* what, int lineno) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "csv line %d: bad %s '%s'", lineno, what, s.c_str());
    throw std::invalid_argument(buf);
  }
  return v;
}

}  // namespace

PrecipSeries read_precip_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("precipitation csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "year,month,precip_mm")
    throw std::invalid_argument("precipitation csv: expected header 'year,month,precip_mm'");
  PrecipSeries ps;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 3) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "csv line %d: expected 3 fields, got %zu", lineno, f.size());
      throw std::invalid_argument(buf);
    }
    MonthRecord r;
    r.year = static_cast<int>(parse_long(f[0], "year", lineno));
    r.month = static_cast<int>(parse_long(f[1], "month", lineno));
    r.precip_mm = parse_double(f[2], "precip_mm", lineno);
    ps.records.push_back(r);
  }
  ps.validate();
  return ps;
}

void write_spi_csv(std::ostream& os, const SpiSeries& s) {
  os << "year,month,spi\n";
  char buf[96];
  for (std::size_t i = 0; i < s.spi.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g\n", s.months[i].year, s.months[i].month,
                  s.spi[i]);
    os << buf;
  }
}

void write_droughts_csv(std::ostream& os, const DroughtRecord& r) {
  os << "event,start_year,start_month,duration,severity,interval\n";
  char buf[160];
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const DroughtEvent& ev = r.events[i];
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%d,%.10g,", i + 1, ev.start_year, ev.start_month,
                  ev.duration, ev.severity);
    os << buf;
    if (ev.interval) os << *ev.interval;
    os << '\n';
  }
}

DroughtRecord read_droughts_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("drought csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "event,start_year,start_month,duration,severity,interval")
    throw std::invalid_argument(
        "drought csv: expected header 'event,start_year,start_month,duration,severity,interval'");
  DroughtRecord rec;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 6) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "csv line %d: expected 6 fields, got %zu", lineno, f.size());
      throw std::invalid_argument(buf);
    }
    DroughtEvent ev;
    parse_long(f[0], "event", lineno);
    ev.start_year = static_cast<int>(parse_long(f[1], "start_year", lineno));
    ev.start_month = static_cast<int>(parse_long(f[2], "start_month", lineno));
    ev.duration = static_cast<int>(parse_long(f[3], "duration", lineno));
    ev.severity = parse_double(f[4], "severity", lineno);
    if (!f[5].empty()) ev.interval = static_cast<int>(parse_long(f[5], "interval", lineno));
    rec.events.push_back(ev);
  }
  return rec;
}

}  // namespace copulafit
