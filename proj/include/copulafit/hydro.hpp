#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "copulafit/empirical.hpp"

namespace copulafit {

struct MonthRecord {
  int year = 0;
  int month = 0;  // 1..12
  double precip_mm = 0.0;
};

// Contiguous monthly precipitation record.
struct PrecipSeries {
  std::vector<MonthRecord> records;

  // Throws invalid_argument on gaps, duplicates, out-of-range months, or
  // negative/non-finite amounts, naming the offending month.
  void validate() const;
};

struct GammaMonthFit {
  double shape = 0.0;
  double scale = 0.0;
  double zero_prob = 0.0;  // q: fraction of zero months
  int n_pos = 0;
};

using MonthlyGamma = std::array<GammaMonthFit, 12>;

MonthlyGamma fit_gamma_monthly(const PrecipSeries& ps);

struct SpiSeries {
  std::vector<MonthRecord> months;  // precip_mm carries the rolling sum
  std::vector<double> spi;
  int timescale = 1;
};

// Standardized precipitation index: rolling `timescale`-month totals mapped
// through the per-calendar-month gamma mixture CDF and the normal quantile.
SpiSeries spi(const PrecipSeries& ps, int timescale = 1);

struct DroughtEvent {
  std::size_t start = 0;  // index into the SPI series
  int start_year = 0;
  int start_month = 0;
  int duration = 0;                  // D_d, months
  double severity = 0.0;             // S_d, sum of in-event SPI (negative)
  std::optional<int> interval;       // I_d, start-to-start months; absent for last
};

struct DroughtRecord {
  std::vector<DroughtEvent> events;
};

DroughtRecord extract_droughts(const SpiSeries& s);

// Dependent pairs for copula fitting, over events that have a successor.
// x = severity (or |severity| when abs_severity) resp. duration; y = interval.
RawSample severity_interval_pairs(const DroughtRecord& r, bool abs_severity = false);
RawSample duration_interval_pairs(const DroughtRecord& r);

// CSV: input header "year,month,precip_mm"; SPI output "year,month,spi";
// drought output "event,start_year,start_month,duration,severity,interval".
PrecipSeries read_precip_csv(std::istream& is);
void write_spi_csv(std::ostream& os, const SpiSeries& s);
void write_droughts_csv(std::ostream& os, const DroughtRecord& r);
DroughtRecord read_droughts_csv(std::istream& is);

}  // namespace copulafit
