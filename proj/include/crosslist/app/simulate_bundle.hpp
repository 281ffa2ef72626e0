#pragma once

// Synthetic data bundles: a local and a US market calendar with independent
// holidays, index series, firms whose local returns follow the two-index
// market model with GARCH(1,1) errors, CAPM class series and risk-free
// yields. The output is a pure function of (settings, seed).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "crosslist/app/config.hpp"
#include "crosslist/detail/csv.hpp"
#include "crosslist/detail/random.hpp"
#include "crosslist/error.hpp"
#include "crosslist/garch.hpp"
#include "crosslist/market_data.hpp"

namespace crosslist::app {

struct SimulatedFirm {
  InstrumentRecord record;
  PriceSeries prices;
  std::array<double, 3> mean_coefficients{};  // intercept, local, US
};

struct SimulatedBundle {
  PriceSeries local_index;
  PriceSeries us_index;
  std::vector<SimulatedFirm> firms;
  PriceSeries class_a;
  PriceSeries class_n;
  RiskFreeSeries local_risk_free;
  RiskFreeSeries us_risk_free;

  std::vector<InstrumentRecord> manifest() const {
    std::vector<InstrumentRecord> m;
    for (const auto& f : firms) m.push_back(f.record);
    return m;
  }
};

// Market caps (USD) cycled over the simulated firms.
inline constexpr std::array<double, 10> kSampleMarketCaps{5.35e9,  4.31e9,   104.76e9, 18.13e9, 9.03e9,
                                                          141.79e9, 11.61e9, 8.68e9,   240.43e9, 36.119e9};

inline constexpr double kClassABeta = 0.9;
inline constexpr double kClassNBeta = 2.0;

inline SimulatedBundle simulate_bundle(const SimulationSettings& s, std::uint64_t seed) {
  using namespace std::chrono;
  if (s.firms < 1 || s.days < 10) throw Error(ErrorKind::InvalidConfig, "simulate needs firms >= 1 and days >= 10");
  if (!(s.error_sd > 0.0) || s.holiday_rate < 0.0 || s.holiday_rate >= 0.5) {
    throw Error(ErrorKind::InvalidConfig, "simulate: error_sd must be positive and holiday_rate in [0, 0.5)");
  }
  const double persist = s.garch_alpha + s.garch_gamma;
  validate_stationary(s.error_sd * s.error_sd * (1.0 - persist), std::array{s.garch_alpha},
                      std::array{s.garch_gamma});

  crosslist::detail::NormalGenerator rng(seed);
  const auto n = static_cast<std::size_t>(s.days);

  // Weekday calendar starting Monday 2007-01-01.
  std::vector<Date> weekdays;
  sys_days day = sys_days{year{2007} / January / 1};
  while (weekdays.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) weekdays.push_back(year_month_day{day});
    day += days{1};
  }
  std::vector<bool> local_open(n), us_open(n);
  for (std::size_t t = 0; t < n; ++t) {
    local_open[t] = t == 0 || rng.uniform() >= s.holiday_rate;
    us_open[t] = t == 0 || rng.uniform() >= s.holiday_rate;
  }
  std::vector<std::size_t> common;
  for (std::size_t t = 0; t < n; ++t) {
    if (local_open[t] && us_open[t]) common.push_back(t);
  }

  // Daily index log returns.
  std::vector<double> x_local(n), x_us(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double z1 = rng();
    const double z2 = rng();
    x_us[t] = 0.0002 + 0.010 * z1;
    x_local[t] = 0.0003 + 0.015 * (0.3 * z1 + std::sqrt(1.0 - 0.09) * z2);
  }

  auto build_prices = [&](const std::string& id, Currency ccy, double start, const std::vector<double>& r,
                          const std::vector<bool>& open) {
    PriceSeries p{id, {}, ccy};
    double log_level = std::log(start);
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) log_level += r[t];
      if (open[t]) p.observations.push_back({weekdays[t], std::exp(log_level)});
    }
    return p;
  };

  SimulatedBundle bundle;
  bundle.local_index = build_prices("local_index", Currency::CNY, 3000.0, x_local, local_open);
  bundle.us_index = build_prices("us_index", Currency::USD, 10000.0, x_us, us_open);

  const double alpha0 = s.error_sd * s.error_sd * (1.0 - persist);
  const std::array<double, 1> alphas{s.garch_alpha};
  const std::array<double, 1> gammas{s.garch_gamma};
  for (int i = 0; i < s.firms; ++i) {
    SimulatedFirm firm;
    char code[16];
    std::snprintf(code, sizeof code, "F%02d", i + 1);
    firm.record.name = std::string("Simulated Firm ") + (code + 1);
    firm.record.a_code = std::to_string(600001 + i);
    firm.record.n_code = code;
    firm.record.industry = "Synthetic";
    firm.record.market_cap_usd = kSampleMarketCaps[static_cast<std::size_t>(i) % kSampleMarketCaps.size()];
    firm.record.price_file = fs::path("prices") / (std::string(code) + ".csv");

    const double b_local = 0.6 + 0.6 * rng.uniform();
    const double b_us = 0.5 * rng.uniform();
    firm.mean_coefficients = {0.0002, b_local, b_us};

    // Listing dates are staggered around the middle of the common calendar.
    const std::size_t mid = common.size() / 2;
    const std::size_t pos = std::min(common.size() - 1, mid + static_cast<std::size_t>((i % 5) * 2));
    const std::size_t event_t = common[pos - std::min<std::size_t>(pos, 4)];
    firm.record.us_listing_date = weekdays[event_t];
    firm.record.local_listing_date = weekdays.front();

    const auto e = simulate_garch_errors(alpha0, alphas, gammas, n, rng);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 0.0002 + b_local * x_local[t] + b_us * x_us[t] + e[t];
    y[event_t] += s.effect;
    firm.prices = build_prices(code, Currency::CNY, 10.0 + i, y, local_open);
    bundle.firms.push_back(std::move(firm));
  }

  std::vector<double> ya(n), yn(n);
  for (std::size_t t = 0; t < n; ++t) {
    ya[t] = 0.0001 + kClassABeta * x_local[t] + 0.01 * rng();
    yn[t] = 0.0001 + kClassNBeta * x_us[t] + 0.01 * rng();
  }
  bundle.class_a = build_prices("class_a", Currency::CNY, 20.0, ya, local_open);
  bundle.class_n = build_prices("class_n", Currency::USD, 20.0, yn, us_open);

  unsigned last_month = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const unsigned month = static_cast<unsigned>(weekdays[t].month()) + 12u * static_cast<unsigned>(static_cast<int>(weekdays[t].year()));
    if (month == last_month) continue;
    last_month = month;
    bundle.local_risk_free.dates.push_back(weekdays[t]);
    bundle.local_risk_free.annual_yield_pct.push_back(3.0 + 0.2 * rng());
    bundle.us_risk_free.dates.push_back(weekdays[t]);
    bundle.us_risk_free.annual_yield_pct.push_back(2.0 + 0.2 * rng());
  }
  return bundle;
}

namespace detail {

inline void write_risk_free(const fs::path& path, const RiskFreeSeries& rf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  out << "date,annual_yield_pct\n";
  for (std::size_t i = 0; i < rf.dates.size(); ++i) {
    out << format_iso_date(rf.dates[i]) << ',' << crosslist::detail::format_number(rf.annual_yield_pct[i]) << '\n';
  }
}

}  // namespace detail

/// Writes manifest.csv, prices/, rates/, capm/ and a config.ini that points at
/// them, so `event-study --config <dir>/config.ini` runs on the bundle.
inline void write_bundle(const SimulatedBundle& bundle, const fs::path& dir, std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(dir / "prices", ec);
  fs::create_directories(dir / "rates", ec);
  fs::create_directories(dir / "capm", ec);
  if (ec || !fs::is_directory(dir / "prices")) {
    throw Error(ErrorKind::FileNotFound, "cannot create output directory " + dir.string());
  }

  {
    std::ofstream out(dir / "manifest.csv", std::ios::binary);
    if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + (dir / "manifest.csv").string());
    const auto& header = manifest_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& f : bundle.firms) {
      const auto& r = f.record;
      out << r.name << ',' << r.a_code << ',' << r.n_code << ',' << r.industry << ','
          << crosslist::detail::format_number(r.market_cap_usd) << ',' << format_iso_date(r.us_listing_date) << ','
          << format_iso_date(r.local_listing_date) << ',' << r.price_file.generic_string() << '\n';
    }
  }
  for (const auto& f : bundle.firms) write_prices(dir / f.record.price_file, f.prices, 9);
  write_prices(dir / "prices" / "local_index.csv", bundle.local_index, 9);
  write_prices(dir / "prices" / "us_index.csv", bundle.us_index, 9);
  write_prices(dir / "capm" / "class_a.csv", bundle.class_a, 9);
  write_prices(dir / "capm" / "class_n.csv", bundle.class_n, 9);
  detail::write_risk_free(dir / "rates" / "rf_local.csv", bundle.local_risk_free);
  detail::write_risk_free(dir / "rates" / "rf_us.csv", bundle.us_risk_free);

  std::ofstream cfg(dir / "config.ini", std::ios::binary);
  if (!cfg) throw Error(ErrorKind::FileNotFound, "cannot write " + (dir / "config.ini").string());
  cfg << "[data]\n"
      << "manifest = manifest.csv\n"
      << "local_index = prices/local_index.csv\n"
      << "us_index = prices/us_index.csv\n"
      << "local_risk_free = rates/rf_local.csv\n"
      << "us_risk_free = rates/rf_us.csv\n"
      << "local_currency = CNY\n\n"
      << "[capm]\n"
      << "class_a = capm/class_a.csv\n"
      << "class_n = capm/class_n.csv\n"
      << "period = daily\n\n"
      << "[run]\n"
      << "seed = " << seed << "\n";
}

}  // namespace crosslist::app
