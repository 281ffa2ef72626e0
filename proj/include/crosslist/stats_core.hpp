#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "crosslist/error.hpp"
#include "crosslist/market_data.hpp"

namespace crosslist {

/// Per-period log returns, each dated by the later of its two closes.
struct ReturnSeries {
  std::string instrument_id;
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

struct FTestResult {
  double ratio = 0.0;
  int df_num = 0;
  int df_den = 0;
  double p_value = 1.0;
  bool significant_5pct = false;
};

inline std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) {
    throw Error(ErrorKind::SeriesTooShort, "log returns need at least two prices");
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) out[t - 1] = std::log(prices[t]) - std::log(prices[t - 1]);
  return out;
}

inline ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) {
    throw Error(ErrorKind::SeriesTooShort,
                prices.instrument_id + ": log returns need at least two prices");
  }
  ReturnSeries r{prices.instrument_id, {}, {}};
  r.dates.reserve(prices.size() - 1);
  r.values.reserve(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    r.dates.push_back(prices.observations[t].date);
    r.values.push_back(std::log(prices.observations[t].close) - std::log(prices.observations[t - 1].close));
  }
  return r;
}

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Unbiased (n-1) sample variance, two-pass.
inline double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::DegenerateSample, "variance needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

inline double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

/// Element k holds the sample standard deviation of the `window` returns
/// ending at k; the first window-1 slots are empty.
inline std::vector<std::optional<double>> rolling_volatility(std::span<const double> returns,
                                                             std::size_t window) {
  if (window < 2) throw Error(ErrorKind::DegenerateSample, "rolling window must be at least 2");
  if (window > returns.size()) {
    throw Error(ErrorKind::WindowTooLarge, "window " + std::to_string(window) + " exceeds series length " +
                                               std::to_string(returns.size()));
  }
  std::vector<std::optional<double>> out(returns.size());
  for (std::size_t k = window - 1; k < returns.size(); ++k) {
    out[k] = sample_sd(returns.subspan(k + 1 - window, window));
  }
  return out;
}

inline std::vector<std::optional<double>> rolling_volatility(const ReturnSeries& returns,
                                                             std::size_t window) {
  return rolling_volatility(std::span<const double>(returns.values), window);
}

/// Two-sided variance-ratio F test of var(a)/var(b):
/// p = 2 min(P(F <= f), P(F >= f)) with (n_a-1, n_b-1) degrees of freedom.
inline FTestResult variance_f_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw Error(ErrorKind::DegenerateSample, "F test needs at least two observations per sample");
  }
  const double var_a = sample_variance(sample_a);
  const double var_b = sample_variance(sample_b);
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw Error(ErrorKind::DegenerateSample, "F test sample has zero variance");
  }
  FTestResult r;
  r.ratio = var_a / var_b;
  r.df_num = static_cast<int>(sample_a.size()) - 1;
  r.df_den = static_cast<int>(sample_b.size()) - 1;
  const boost::math::fisher_f dist(r.df_num, r.df_den);
  const double lower = boost::math::cdf(dist, r.ratio);
  const double upper = boost::math::cdf(boost::math::complement(dist, r.ratio));
  r.p_value = std::clamp(2.0 * std::min(lower, upper), 0.0, 1.0);
  r.significant_5pct = r.p_value < 0.05;
  return r;
}

}  // namespace crosslist
