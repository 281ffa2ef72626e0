#pragma once

// Listing-date event study: per-firm market models estimated on a pre-event
// window, abnormal returns and their forecast-error standardization over the
// event window, cap-weighted cross-sectional aggregation with Z / CZ
// statistics, and pre/post variance-ratio tests.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crosslist/error.hpp"
#include "crosslist/garch.hpp"
#include "crosslist/linear_models.hpp"
#include "crosslist/market_data.hpp"
#include "crosslist/stats_core.hpp"

namespace crosslist {

inline constexpr int kMinEstimationLength = 30;
inline constexpr double kZCritical5pct = 1.96;

struct OffsetRange {
  int lo = 0;
  int hi = 0;

  int length() const noexcept { return hi - lo + 1; }
  bool contains(int offset) const noexcept { return offset >= lo && offset <= hi; }
  friend bool operator==(const OffsetRange&, const OffsetRange&) = default;
};

struct EventWindows {
  OffsetRange estimation{-105, -15};
  OffsetRange event{-15, 15};
  OffsetRange pre_var{-105, -15};
  OffsetRange post_var{15, 105};

  void validate() const {
    for (const auto* r : {&estimation, &event, &pre_var, &post_var}) {
      if (r->lo > r->hi) {
        throw Error(ErrorKind::InvalidWindows, "window [" + std::to_string(r->lo) + "," + std::to_string(r->hi) +
                                                   "] is reversed");
      }
    }
    if (estimation.hi >= 0) throw Error(ErrorKind::InvalidWindows, "estimation window must end before day 0");
    if (estimation.length() < kMinEstimationLength) {
      throw Error(ErrorKind::InvalidWindows, "estimation window shorter than " +
                                                 std::to_string(kMinEstimationLength) + " days");
    }
  }
  friend bool operator==(const EventWindows&, const EventWindows&) = default;
};

/// One firm's returns and index returns on a shared trading calendar,
/// indexed by consecutive event offsets.
struct FirmReturns {
  std::string firm_id;
  std::vector<Date> dates;
  std::vector<int> offsets;
  std::vector<double> y;
  std::vector<double> local;
  std::vector<double> us;
  bool usd_converted = false;

  std::size_t size() const noexcept { return y.size(); }

  std::optional<std::size_t> index_of(int offset) const {
    if (offsets.empty()) return std::nullopt;
    const long i = static_cast<long>(offset) - offsets.front();
    if (i < 0 || i >= static_cast<long>(offsets.size())) return std::nullopt;
    return static_cast<std::size_t>(i);
  }

  bool covers(const OffsetRange& range) const { return index_of(range.lo) && index_of(range.hi); }
};

struct WindowSlice {
  std::vector<int> offsets;
  std::vector<double> y;
  std::vector<double> local;
  std::vector<double> us;

  Regressors regressors() const { return {local, us}; }
};

inline WindowSlice slice(const FirmReturns& firm, const OffsetRange& range) {
  WindowSlice s;
  for (int o = range.lo; o <= range.hi; ++o) {
    if (auto i = firm.index_of(o)) {
      s.offsets.push_back(o);
      s.y.push_back(firm.y[*i]);
      s.local.push_back(firm.local[*i]);
      s.us.push_back(firm.us[*i]);
    }
  }
  return s;
}

/// Aligns firm, local-index and US-index closes, converts local closes to USD
/// when an FX series is given, and computes log returns on the common
/// calendar with offsets relative to `event_date`.
inline FirmReturns prepare_firm_returns(const std::string& firm_id, const PriceSeries& firm_prices,
                                        const PriceSeries& local_index, const PriceSeries& us_index,
                                        Date event_date, const FxSeries* fx = nullptr) {
  PriceSeries firm = firm_prices;
  PriceSeries local = local_index;
  firm.instrument_id = "firm";
  local.instrument_id = "local_index";
  PriceSeries us = us_index;
  us.instrument_id = "us_index";
  if (fx) {
    firm = apply_fx(firm, *fx);
    local = apply_fx(local, *fx);
  }
  const AlignedPanel panel = align({firm, local, us});
  if (panel.common_dates.size() < 2) {
    throw Error(ErrorKind::SeriesTooShort, firm_id + ": fewer than two common trading dates");
  }
  FirmReturns out;
  out.firm_id = firm_id;
  out.usd_converted = fx != nullptr;
  out.y = log_returns(std::span<const double>(panel.closes("firm")));
  out.local = log_returns(std::span<const double>(panel.closes("local_index")));
  out.us = log_returns(std::span<const double>(panel.closes("us_index")));
  out.dates.assign(panel.common_dates.begin() + 1, panel.common_dates.end());
  const EventFrame frame = build_event_frame(std::span<const Date>(out.dates), event_date);
  out.offsets.resize(out.dates.size());
  for (std::size_t i = 0; i < out.dates.size(); ++i) out.offsets[i] = frame.offset_at(i);
  return out;
}

// ---------------------------------------------------------------------------
// Per-firm estimation

struct FirmModelOptions {
  bool select = true;  // run lag selection; otherwise fit `fixed_spec`
  GarchSpec fixed_spec{1, 1};
  int max_p = 1;
  int max_q = 1;
  LagSelectionOptions selection;
};

/// Models estimated on the estimation window only. The GARCH fit supplies
/// the mean equation for abnormal returns; the OLS fit of the same window
/// supplies the forecast standard errors.
struct FirmModel {
  GarchFit garch;
  OlsFit ols;
  OffsetRange estimated_on;
  bool fell_back = false;
};

inline FirmModel estimate_firm_model(const FirmReturns& firm, const EventWindows& windows,
                                     const FirmModelOptions& options = {}) {
  windows.validate();
  if (!firm.covers(windows.estimation)) {
    throw Error(ErrorKind::WindowOutOfData, firm.firm_id + ": data do not cover the estimation window");
  }
  const WindowSlice est = slice(firm, windows.estimation);
  for (int o : est.offsets) {
    if (!windows.estimation.contains(o)) {
      throw Error(ErrorKind::WindowOutOfData, "estimation slice leaked offset " + std::to_string(o));
    }
  }
  FirmModel model;
  model.estimated_on = windows.estimation;
  const Regressors x = est.regressors();
  model.ols = ols_fit(est.y, x);
  if (options.select) {
    auto sel = select_lags(est.y, x, options.max_p, options.max_q, options.selection);
    model.garch = std::move(sel.fit);
    model.fell_back = sel.fell_back;
  } else {
    model.garch = fit_garch_regression(est.y, x, options.fixed_spec, options.selection.garch);
  }
  return model;
}

/// AR_t = y_t - x_t' b over the rows given.
inline std::vector<double> abnormal_returns(std::span<const double> y, const Regressors& x,
                                            std::span<const double> mean_coefficients) {
  std::vector<double> ar(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    double fitted = mean_coefficients[0];
    for (std::size_t j = 0; j < x.size(); ++j) fitted += mean_coefficients[j + 1] * x[j][t];
    ar[t] = y[t] - fitted;
  }
  return ar;
}

/// Abnormal returns for every event-window offset; NaN where the firm has no
/// observation that day.
inline std::vector<double> abnormal_returns(const FirmReturns& firm, const FirmModel& model,
                                            const EventWindows& windows) {
  if (model.estimated_on.hi > windows.estimation.hi || model.estimated_on.lo < windows.estimation.lo) {
    throw Error(ErrorKind::WindowOutOfData, firm.firm_id + ": model was estimated outside the estimation window");
  }
  std::vector<double> ar(static_cast<std::size_t>(windows.event.length()), std::numeric_limits<double>::quiet_NaN());
  bool any = false;
  const auto& b = model.garch.mean_coefficients;
  for (int o = windows.event.lo; o <= windows.event.hi; ++o) {
    if (auto i = firm.index_of(o)) {
      ar[static_cast<std::size_t>(o - windows.event.lo)] = firm.y[*i] - (b[0] + b[1] * firm.local[*i] + b[2] * firm.us[*i]);
      any = true;
    }
  }
  if (!any) throw Error(ErrorKind::WindowOutOfData, firm.firm_id + ": no data in the event window");
  return ar;
}

/// StAR_t = AR_t / s_t with s_t the OLS forecast standard error at the day's
/// index returns. `event_regressors[j][t]` is regressor j on event row t.
inline std::vector<double> standardize(std::span<const double> ar, const OlsFit& ols,
                                       const Regressors& event_regressors) {
  if (!(ols.s2 > 0.0)) throw Error(ErrorKind::ExactFitNoVariance, "estimation residual variance is zero");
  std::vector<double> star(ar.size());
  std::vector<double> row(event_regressors.size());
  for (std::size_t t = 0; t < ar.size(); ++t) {
    if (!std::isfinite(ar[t])) {
      star[t] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = event_regressors[j][t];
    star[t] = ar[t] / prediction_se(ols, row, ols.n_obs);
  }
  return star;
}

inline std::vector<double> standardize(std::span<const double> ar, const FirmReturns& firm, const FirmModel& model,
                                       const EventWindows& windows) {
  Regressors x(2, std::vector<double>(ar.size(), 0.0));
  for (int o = windows.event.lo; o <= windows.event.hi; ++o) {
    const auto t = static_cast<std::size_t>(o - windows.event.lo);
    if (auto i = firm.index_of(o)) {
      x[0][t] = firm.local[*i];
      x[1][t] = firm.us[*i];
    }
  }
  return standardize(ar, model.ols, x);
}

// ---------------------------------------------------------------------------
// Cross-section

/// w_i = cap_i / sum of caps over the active firms. Firms are matched on
/// n_code, then a_code.
inline std::map<std::string, double> cap_weights(const std::vector<InstrumentRecord>& manifest,
                                                 const std::vector<std::string>& active_ids) {
  std::map<std::string, double> caps;
  double total = 0.0;
  for (const auto& id : active_ids) {
    const InstrumentRecord* match = nullptr;
    for (const auto& rec : manifest) {
      if (rec.n_code == id) match = &rec;
    }
    if (!match) {
      for (const auto& rec : manifest) {
        if (rec.a_code == id) match = &rec;
      }
    }
    if (!match) throw Error(ErrorKind::UnknownFirm, "firm '" + id + "' is not in the manifest");
    if (!(match->market_cap_usd > 0.0)) {
      throw Error(ErrorKind::NonPositiveMarketCap, "firm '" + id + "' has a non-positive market cap");
    }
    caps[id] = match->market_cap_usd;
  }
  for (const auto& [id, cap] : caps) total += cap;
  for (auto& [id, cap] : caps) cap /= total;
  return caps;
}

struct FirmEventResult {
  std::string firm_id;
  std::vector<double> ar;
  std::vector<double> star;
  double weight = 1.0;
  GarchFit fit;
};

struct EventPanelResult {
  std::vector<int> offsets;
  std::vector<double> aar;
  std::vector<double> car;
  std::vector<double> z;
  double cz_full_window = 0.0;
  std::vector<int> n_firms_by_day;
  std::vector<double> weight_sum_by_day;  // weights in force after renormalization

  bool significant(std::size_t k) const { return std::abs(z[k]) > kZCritical5pct; }

  std::optional<std::size_t> index_of(int offset) const {
    if (offsets.empty()) return std::nullopt;
    const long i = static_cast<long>(offset) - offsets.front();
    if (i < 0 || i >= static_cast<long>(offsets.size())) return std::nullopt;
    return static_cast<std::size_t>(i);
  }
};

/// CZ over [a, b] = sum_t Z_t / sqrt(b - a + 1).
inline double cumulative_z(const EventPanelResult& panel, int a, int b) {
  const auto ia = panel.index_of(a);
  const auto ib = panel.index_of(b);
  if (!ia || !ib || a > b) {
    throw Error(ErrorKind::InvalidWindows, "CZ range [" + std::to_string(a) + "," + std::to_string(b) +
                                               "] outside the event window");
  }
  double s = 0.0;
  for (std::size_t k = *ia; k <= *ib; ++k) s += panel.z[k];
  return s * std::sqrt(1.0 / static_cast<double>(b - a + 1));
}

/// Cap-weighted AAR (weights renormalized over the firms with data that
/// day), running CAR from the window start, Z_t = sum StAR / sqrt(n_t), and
/// CZ over the full event window.
inline EventPanelResult aggregate(const std::vector<FirmEventResult>& results, const EventWindows& windows) {
  if (results.empty()) throw Error(ErrorKind::MisalignedOffsets, "aggregate needs at least one firm");
  const auto len = static_cast<std::size_t>(windows.event.length());
  for (const auto& r : results) {
    if (r.ar.size() != len || r.star.size() != len) {
      throw Error(ErrorKind::MisalignedOffsets, r.firm_id + ": event vectors have length " +
                                                    std::to_string(r.ar.size()) + ", expected " +
                                                    std::to_string(len));
    }
  }

  EventPanelResult panel;
  panel.offsets.resize(len);
  panel.aar.assign(len, 0.0);
  panel.car.assign(len, 0.0);
  panel.z.assign(len, 0.0);
  panel.n_firms_by_day.assign(len, 0);
  panel.weight_sum_by_day.assign(len, 0.0);
  double running = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    panel.offsets[k] = windows.event.lo + static_cast<int>(k);
    double weight_total = 0.0;
    int n = 0;
    for (const auto& r : results) {
      if (std::isfinite(r.ar[k]) && std::isfinite(r.star[k])) {
        weight_total += r.weight;
        ++n;
      }
    }
    panel.n_firms_by_day[k] = n;
    if (n > 0) {
      double aar = 0.0, star_sum = 0.0, wsum = 0.0;
      for (const auto& r : results) {
        if (std::isfinite(r.ar[k]) && std::isfinite(r.star[k])) {
          const double w = r.weight / weight_total;
          aar += w * r.ar[k];
          wsum += w;
          star_sum += r.star[k];
        }
      }
      panel.aar[k] = aar;
      panel.weight_sum_by_day[k] = wsum;
      panel.z[k] = star_sum * std::sqrt(1.0 / static_cast<double>(n));
    }
    running += panel.aar[k];
    panel.car[k] = running;
  }
  panel.cz_full_window = cumulative_z(panel, windows.event.lo, windows.event.hi);
  return panel;
}

// ---------------------------------------------------------------------------
// Variance ratios

struct VarianceRatioRow {
  std::string firm_id;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  std::optional<FTestResult> f_result;
  std::string error;  // set when the row could not be computed
};

struct VarianceRatioReport {
  std::vector<VarianceRatioRow> rows;
};

/// var(post window) / var(pre window) of raw firm returns, two-sided F test.
/// Degenerate windows are reported per row.
inline VarianceRatioReport variance_ratio_report(const std::vector<FirmReturns>& firms, const EventWindows& windows) {
  VarianceRatioReport report;
  for (const auto& firm : firms) {
    VarianceRatioRow row;
    row.firm_id = firm.firm_id;
    const auto pre = slice(firm, windows.pre_var);
    const auto post = slice(firm, windows.post_var);
    try {
      row.f_result = variance_f_test(post.y, pre.y);
      row.ratio = row.f_result->ratio;
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Full study

struct SkippedFirm {
  std::string firm_id;
  std::string reason;
};

struct EventStudyResult {
  EventWindows windows;
  std::vector<FirmEventResult> firms;
  std::vector<FirmModel> models;  // parallel to firms
  EventPanelResult panel;
  VarianceRatioReport variance;
  std::vector<SkippedFirm> skipped;
};

/// Runs every stage. `caps` maps firm_id to market cap; firms that cannot be
/// estimated are skipped with a reason. Throws WindowOutOfData when no firm
/// survives.
inline EventStudyResult run_event_study(const std::vector<FirmReturns>& firms,
                                        const std::vector<InstrumentRecord>& manifest,
                                        const EventWindows& windows, const FirmModelOptions& options = {}) {
  windows.validate();
  EventStudyResult out;
  out.windows = windows;
  std::vector<std::string> active;
  std::vector<FirmReturns> analyzed;
  for (const auto& firm : firms) {
    try {
      FirmModel model = estimate_firm_model(firm, windows, options);
      FirmEventResult r;
      r.firm_id = firm.firm_id;
      r.ar = abnormal_returns(firm, model, windows);
      r.star = standardize(r.ar, firm, model, windows);
      r.fit = model.garch;
      out.firms.push_back(std::move(r));
      out.models.push_back(std::move(model));
      active.push_back(firm.firm_id);
      analyzed.push_back(firm);
    } catch (const Error& e) {
      out.skipped.push_back({firm.firm_id, e.what()});
    }
  }
  if (out.firms.empty()) throw Error(ErrorKind::WindowOutOfData, "no firm could be analyzed");
  const auto weights = cap_weights(manifest, active);
  for (auto& r : out.firms) r.weight = weights.at(r.firm_id);
  out.panel = aggregate(out.firms, windows);
  out.variance = variance_ratio_report(analyzed, windows);
  return out;
}

}  // namespace crosslist
