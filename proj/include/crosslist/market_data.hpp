#pragma once

// Loading, validating and aligning the raw inputs: instrument manifest,
// close-price series, FX and risk-free files, plus the trading-day event
// frame that maps calendar dates onto signed offsets around day 0.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crosslist/detail/csv.hpp"
#include "crosslist/error.hpp"

namespace crosslist {

using Date = std::chrono::year_month_day;

inline std::optional<Date> parse_iso_date(std::string_view text) {
  std::string s = detail::trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

inline std::string format_iso_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

enum class Currency { USD, CNY, HKD, OTHER };

inline std::string_view to_string(Currency c) noexcept {
  switch (c) {
    case Currency::USD: return "USD";
    case Currency::CNY: return "CNY";
    case Currency::HKD: return "HKD";
    case Currency::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline Currency parse_currency(std::string_view text) {
  std::string s = detail::trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "USD") return Currency::USD;
  if (s == "CNY" || s == "RMB") return Currency::CNY;
  if (s == "HKD") return Currency::HKD;
  return Currency::OTHER;
}

/// One dual-listed firm as described by a manifest row.
struct InstrumentRecord {
  std::string name;
  std::string a_code;
  std::string n_code;
  std::string industry;
  double market_cap_usd = 0.0;
  Date us_listing_date{};
  Date local_listing_date{};
  std::filesystem::path price_file;
};

struct PricePoint {
  Date date{};
  double close = 0.0;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct PriceSeries {
  std::string instrument_id;
  std::vector<PricePoint> observations;
  Currency currency = Currency::OTHER;

  std::size_t size() const noexcept { return observations.size(); }
  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

/// Close vectors restricted to the dates every input series shares.
struct AlignedPanel {
  std::vector<Date> common_dates;
  std::vector<std::string> ids;  // input order
  std::map<std::string, std::vector<double>> series_by_id;
  std::map<std::string, Currency> currency_by_id;

  const std::vector<double>& closes(const std::string& id) const { return series_by_id.at(id); }

  std::vector<PriceSeries> to_series() const {
    std::vector<PriceSeries> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      PriceSeries s{id, {}, currency_by_id.at(id)};
      const auto& closes = series_by_id.at(id);
      s.observations.reserve(closes.size());
      for (std::size_t i = 0; i < closes.size(); ++i) s.observations.push_back({common_dates[i], closes[i]});
      out.push_back(std::move(s));
    }
    return out;
  }

  friend bool operator==(const AlignedPanel&, const AlignedPanel&) = default;
};

/// Trading-day offsets relative to an event. Offsets follow the position of
/// each date in `dates`; exactly one date carries offset 0.
class EventFrame {
 public:
  EventFrame(Date event_date, std::vector<Date> dates, std::size_t zero_index)
      : event_date_(event_date), dates_(std::move(dates)), zero_index_(zero_index) {}

  Date event_date() const noexcept { return event_date_; }
  Date day_zero() const { return dates_.at(zero_index_); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  std::size_t zero_index() const noexcept { return zero_index_; }

  int first_offset() const noexcept { return -static_cast<int>(zero_index_); }
  int last_offset() const noexcept {
    return static_cast<int>(dates_.size()) - 1 - static_cast<int>(zero_index_);
  }
  int offset_at(std::size_t index) const noexcept {
    return static_cast<int>(index) - static_cast<int>(zero_index_);
  }

  std::optional<int> offset(const Date& date) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
    if (it == dates_.end() || *it != date) return std::nullopt;
    return offset_at(static_cast<std::size_t>(it - dates_.begin()));
  }

  std::optional<Date> date_at(int offset) const {
    const long index = static_cast<long>(zero_index_) + offset;
    if (index < 0 || index >= static_cast<long>(dates_.size())) return std::nullopt;
    return dates_[static_cast<std::size_t>(index)];
  }

 private:
  Date event_date_;
  std::vector<Date> dates_;
  std::size_t zero_index_;
};

// ---------------------------------------------------------------------------
// Loaders

inline const std::vector<std::string>& manifest_header() {
  static const std::vector<std::string> header{"name",           "a_code",          "n_code",
                                               "industry",       "market_cap_usd",  "us_listing_date",
                                               "local_listing_date", "price_file"};
  return header;
}

inline std::vector<InstrumentRecord> load_manifest(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  detail::require_header(table, manifest_header(), path);

  std::vector<InstrumentRecord> records;
  std::set<std::string> a_codes, n_codes;
  for (const auto& row : table.rows) {
    const std::string where = path.string() + " row " + std::to_string(row.line);
    if (row.fields.size() != manifest_header().size()) {
      throw Error(ErrorKind::MissingField, where + ": expected 8 fields, found " +
                                               std::to_string(row.fields.size()));
    }
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      if (row.fields[i].empty()) {
        throw Error(ErrorKind::MissingField, where + ": empty field '" + manifest_header()[i] + "'");
      }
    }
    InstrumentRecord rec;
    rec.name = row.fields[0];
    rec.a_code = row.fields[1];
    rec.n_code = row.fields[2];
    rec.industry = row.fields[3];
    auto cap = detail::parse_amount(row.fields[4]);
    if (!cap) throw Error(ErrorKind::UnparsableNumber, where + ": market_cap_usd '" + row.fields[4] + "'");
    if (!(*cap > 0.0)) throw Error(ErrorKind::NonPositiveMarketCap, where + ": market_cap_usd " + row.fields[4]);
    rec.market_cap_usd = *cap;
    auto us = parse_iso_date(row.fields[5]);
    if (!us) throw Error(ErrorKind::UnparsableDate, where + ": us_listing_date '" + row.fields[5] + "'");
    auto local = parse_iso_date(row.fields[6]);
    if (!local) throw Error(ErrorKind::UnparsableDate, where + ": local_listing_date '" + row.fields[6] + "'");
    rec.us_listing_date = *us;
    rec.local_listing_date = *local;
    rec.price_file = row.fields[7];
    if (!a_codes.insert(rec.a_code).second) {
      throw Error(ErrorKind::DuplicateCode, where + ": a_code '" + rec.a_code + "' repeated");
    }
    if (!n_codes.insert(rec.n_code).second) {
      throw Error(ErrorKind::DuplicateCode, where + ": n_code '" + rec.n_code + "' repeated");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

struct DatedValue {
  Date date{};
  double value = 0.0;
};

// Shared by the price, FX and risk-free loaders. A file in strictly
// descending date order (newest first) is reversed; any other ordering
// problem is an error.
inline std::vector<DatedValue> load_dated_values(const std::filesystem::path& path,
                                                 const std::vector<std::string>& header,
                                                 bool require_positive) {
  const auto table = read_csv(path);
  require_header(table, header, path);
  std::vector<DatedValue> values;
  std::vector<std::size_t> lines;
  values.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const std::string where = path.string() + " row " + std::to_string(row.line);
    if (row.fields.size() != 2 || row.fields[0].empty() || row.fields[1].empty()) {
      throw Error(ErrorKind::MissingField, where + ": expected 'date,value'");
    }
    auto date = parse_iso_date(row.fields[0]);
    if (!date) throw Error(ErrorKind::UnparsableDate, where + ": '" + row.fields[0] + "'");
    auto value = parse_decimal(row.fields[1]);
    if (!value) throw Error(ErrorKind::UnparsableNumber, where + ": '" + row.fields[1] + "'");
    if (require_positive && !(*value > 0.0)) {
      throw Error(ErrorKind::NonPositivePrice, where + ": value " + row.fields[1] + " must be > 0");
    }
    values.push_back({*date, *value});
    lines.push_back(row.line);
  }

  const bool descending =
      values.size() > 1 && std::adjacent_find(values.begin(), values.end(), [](const auto& a, const auto& b) {
                             return !(a.date > b.date);
                           }) == values.end();
  if (descending) {
    std::reverse(values.begin(), values.end());
    std::reverse(lines.begin(), lines.end());
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    const std::string where = path.string() + " row " + std::to_string(lines[i]);
    if (values[i].date == values[i - 1].date) {
      throw Error(ErrorKind::DuplicateDate, where + ": " + format_iso_date(values[i].date));
    }
    if (values[i].date < values[i - 1].date) {
      throw Error(ErrorKind::UnsortedInputAfterParse, where + ": " + format_iso_date(values[i].date) +
                                                          " precedes the previous row");
    }
  }
  return values;
}

}  // namespace detail

inline PriceSeries load_prices(const std::filesystem::path& path, Currency currency,
                               std::string instrument_id = {}) {
  PriceSeries series;
  series.instrument_id = instrument_id.empty() ? path.stem().string() : std::move(instrument_id);
  series.currency = currency;
  for (const auto& dv : detail::load_dated_values(path, {"date", "close"}, true)) {
    series.observations.push_back({dv.date, dv.value});
  }
  return series;
}

/// Writes the `date,close` format read by load_prices. The default precision
/// round-trips every double exactly.
inline void write_prices(const std::filesystem::path& path, const PriceSeries& series,
                         int significant_digits = 17) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  out << "date,close\n";
  for (const auto& obs : series.observations) {
    out << format_iso_date(obs.date) << ',' << detail::format_number(obs.close, significant_digits) << '\n';
  }
}

/// USD per one unit of local currency.
struct FxSeries {
  std::vector<Date> dates;
  std::vector<double> usd_per_local;
};

inline FxSeries load_fx(const std::filesystem::path& path) {
  FxSeries fx;
  for (const auto& dv : detail::load_dated_values(path, {"date", "rate"}, true)) {
    fx.dates.push_back(dv.date);
    fx.usd_per_local.push_back(dv.value);
  }
  return fx;
}

struct RiskFreeSeries {
  std::vector<Date> dates;
  std::vector<double> annual_yield_pct;
};

inline RiskFreeSeries load_risk_free(const std::filesystem::path& path) {
  RiskFreeSeries rf;
  for (const auto& dv : detail::load_dated_values(path, {"date", "annual_yield_pct"}, false)) {
    rf.dates.push_back(dv.date);
    rf.annual_yield_pct.push_back(dv.value);
  }
  return rf;
}

/// Converts local closes into USD on the dates both series share.
inline PriceSeries apply_fx(const PriceSeries& local, const FxSeries& fx) {
  PriceSeries out{local.instrument_id, {}, Currency::USD};
  std::size_t j = 0;
  for (const auto& obs : local.observations) {
    while (j < fx.dates.size() && fx.dates[j] < obs.date) ++j;
    if (j < fx.dates.size() && fx.dates[j] == obs.date) {
      out.observations.push_back({obs.date, obs.close * fx.usd_per_local[j]});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alignment and event frame

inline AlignedPanel align(const std::vector<PriceSeries>& series) {
  if (series.empty()) throw Error(ErrorKind::EmptyIntersection, "align needs at least one series");
  std::vector<Date> common;
  common.reserve(series.front().size());
  for (const auto& obs : series.front().observations) common.push_back(obs.date);
  for (std::size_t k = 1; k < series.size(); ++k) {
    std::vector<Date> other;
    other.reserve(series[k].size());
    for (const auto& obs : series[k].observations) other.push_back(obs.date);
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) throw Error(ErrorKind::EmptyIntersection, "input series share no dates");

  AlignedPanel panel;
  panel.common_dates = common;
  for (const auto& s : series) {
    if (panel.series_by_id.count(s.instrument_id)) {
      throw Error(ErrorKind::DuplicateCode, "series id '" + s.instrument_id + "' appears twice");
    }
    std::vector<double> closes;
    closes.reserve(common.size());
    std::size_t j = 0;
    for (const auto& obs : s.observations) {
      if (j < common.size() && obs.date == common[j]) {
        closes.push_back(obs.close);
        ++j;
      }
    }
    panel.ids.push_back(s.instrument_id);
    panel.series_by_id.emplace(s.instrument_id, std::move(closes));
    panel.currency_by_id.emplace(s.instrument_id, s.currency);
  }
  return panel;
}

/// Day 0 is the event date when it is a trading date, otherwise the next
/// trading date after it.
inline EventFrame build_event_frame(std::span<const Date> dates, Date event_date) {
  if (dates.empty() || event_date > dates.back()) {
    throw Error(ErrorKind::EventAfterPanelEnd,
                "event date " + format_iso_date(event_date) + " is after the last panel date");
  }
  auto it = std::lower_bound(dates.begin(), dates.end(), event_date);
  return EventFrame(event_date, std::vector<Date>(dates.begin(), dates.end()),
                    static_cast<std::size_t>(it - dates.begin()));
}

inline EventFrame build_event_frame(const AlignedPanel& panel, Date event_date) {
  return build_event_frame(std::span<const Date>(panel.common_dates), event_date);
}

}  // namespace crosslist
