#pragma once

// Run configuration: an INI-style file with [sections] and key = value
// pairs. Relative paths resolve against the directory holding the file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "crosslist/error.hpp"
#include "crosslist/event_study.hpp"
#include "crosslist/market_data.hpp"

namespace crosslist::app {

namespace fs = std::filesystem;

struct SimulationSettings {
  int firms = 10;
  int days = 300;
  double effect = 0.0;        // added to every firm's day-0 return
  double error_sd = 0.01;     // unconditional sd of firm market-model errors
  double garch_alpha = 0.1;
  double garch_gamma = 0.8;
  double holiday_rate = 0.02;  // share of weekdays dropped from each market's calendar
};

struct RunConfig {
  fs::path config_path;
  fs::path manifest_path;
  fs::path local_index_path;
  fs::path us_index_path;
  std::optional<fs::path> fx_path;
  std::optional<fs::path> local_risk_free_path;
  std::optional<fs::path> us_risk_free_path;
  Currency local_currency = Currency::CNY;

  std::optional<fs::path> class_a_path;
  std::optional<fs::path> class_n_path;
  std::string capm_period = "daily";

  EventWindows windows;
  int max_p = 1;
  int max_q = 1;
  bool select_lags = true;
  bool include_homoskedastic = false;
  int bg_lags = 1;

  std::uint64_t seed = 0;
  fs::path output_dir = "out";
  SimulationSettings simulation;
};

inline int periods_per_year(const std::string& period) {
  if (period == "daily") return 252;
  if (period == "weekly") return 52;
  if (period == "monthly") return 12;
  if (period == "annual") return 1;
  throw Error(ErrorKind::InvalidConfig, "unknown capm period '" + period + "'");
}

namespace detail {

inline std::vector<int> parse_int_list(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = crosslist::detail::trim(item);
    try {
      std::size_t used = 0;
      const int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, what + ": '" + text + "' is not a list of integers");
    }
  }
  if (out.size() != expected) {
    throw Error(ErrorKind::InvalidConfig, what + ": expected " + std::to_string(expected) + " integers, got '" +
                                              text + "'");
  }
  return out;
}

inline OffsetRange parse_range(const std::string& text, const std::string& what) {
  const auto v = parse_int_list(text, 2, what);
  return {v[0], v[1]};
}

}  // namespace detail

/// "a,b,c,d" sets the estimation window to [a,b] and the event window to [c,d].
inline void apply_windows_override(RunConfig& config, const std::string& text) {
  const auto v = detail::parse_int_list(text, 4, "--windows");
  config.windows.estimation = {v[0], v[1]};
  config.windows.event = {v[2], v[3]};
}

namespace detail {

inline void check_lag_ceiling(const RunConfig& config) {
  if (config.max_p < 1 || config.max_q < 1 || config.max_p > kGarchLagCeiling || config.max_q > kGarchLagCeiling) {
    throw Error(ErrorKind::InvalidConfig, "GARCH lag ceiling must lie in [1, " + std::to_string(kGarchLagCeiling) +
                                              "], got " + std::to_string(config.max_p) + "," +
                                              std::to_string(config.max_q));
  }
}

}  // namespace detail

/// "p,q" sets the lag-search ceiling.
inline void apply_max_lags_override(RunConfig& config, const std::string& text) {
  const auto v = detail::parse_int_list(text, 2, "--max-lags");
  config.max_p = v[0];
  config.max_q = v[1];
  detail::check_lag_ceiling(config);
}

inline RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::FileNotFound, "config file " + path.string() + " not found");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }

  RunConfig config;
  config.config_path = path;
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p : base / p;
  };
  auto opt_path = [&](const char* key) -> std::optional<fs::path> {
    if (auto v = tree.get_optional<std::string>(key); v && !v->empty()) return resolve(*v);
    return std::nullopt;
  };

  try {
    if (auto v = opt_path("data.manifest")) config.manifest_path = *v;
    if (auto v = opt_path("data.local_index")) config.local_index_path = *v;
    if (auto v = opt_path("data.us_index")) config.us_index_path = *v;
    config.fx_path = opt_path("data.fx");
    config.local_risk_free_path = opt_path("data.local_risk_free");
    config.us_risk_free_path = opt_path("data.us_risk_free");
    if (auto v = tree.get_optional<std::string>("data.local_currency")) config.local_currency = parse_currency(*v);

    config.class_a_path = opt_path("capm.class_a");
    config.class_n_path = opt_path("capm.class_n");
    config.capm_period = tree.get<std::string>("capm.period", config.capm_period);
    static_cast<void>(periods_per_year(config.capm_period));

    if (auto v = tree.get_optional<std::string>("windows.estimation")) config.windows.estimation = detail::parse_range(*v, "windows.estimation");
    if (auto v = tree.get_optional<std::string>("windows.event")) config.windows.event = detail::parse_range(*v, "windows.event");
    if (auto v = tree.get_optional<std::string>("windows.pre_var")) config.windows.pre_var = detail::parse_range(*v, "windows.pre_var");
    if (auto v = tree.get_optional<std::string>("windows.post_var")) config.windows.post_var = detail::parse_range(*v, "windows.post_var");

    config.max_p = tree.get<int>("garch.max_p", config.max_p);
    config.max_q = tree.get<int>("garch.max_q", config.max_q);
    detail::check_lag_ceiling(config);
    config.select_lags = tree.get<bool>("garch.select", config.select_lags);
    config.include_homoskedastic = tree.get<bool>("garch.include_homoskedastic", config.include_homoskedastic);
    config.bg_lags = tree.get<int>("diagnostics.bg_lags", config.bg_lags);

    config.seed = tree.get<std::uint64_t>("run.seed", config.seed);
    if (auto v = opt_path("run.output_dir")) config.output_dir = *v;

    auto& sim = config.simulation;
    sim.firms = tree.get<int>("simulate.firms", sim.firms);
    sim.days = tree.get<int>("simulate.days", sim.days);
    sim.effect = tree.get<double>("simulate.effect", sim.effect);
    sim.error_sd = tree.get<double>("simulate.error_sd", sim.error_sd);
    sim.garch_alpha = tree.get<double>("simulate.garch_alpha", sim.garch_alpha);
    sim.garch_gamma = tree.get<double>("simulate.garch_gamma", sim.garch_gamma);
    sim.holiday_rate = tree.get<double>("simulate.holiday_rate", sim.holiday_rate);
  } catch (const boost::property_tree::ptree_error& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  return config;
}

}  // namespace crosslist::app
