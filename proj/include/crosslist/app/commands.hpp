#pragma once

// Batch commands behind the `crosslist` executable. Each returns the process
// exit code: 0 success, 1 analysis-level failure, 2 input or config error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "crosslist/app/config.hpp"
#include "crosslist/app/simulate_bundle.hpp"
#include "crosslist/detail/csv.hpp"
#include "crosslist/error.hpp"
#include "crosslist/event_study.hpp"
#include "crosslist/linear_models.hpp"
#include "crosslist/market_data.hpp"
#include "crosslist/stats_core.hpp"

namespace crosslist::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1;
inline constexpr int kExitInput = 2;

inline bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SchemaMismatch:
    case ErrorKind::MissingField:
    case ErrorKind::NonPositiveMarketCap:
    case ErrorKind::DuplicateCode:
    case ErrorKind::UnparsableDate:
    case ErrorKind::UnparsableNumber:
    case ErrorKind::DuplicateDate:
    case ErrorKind::NonPositivePrice:
    case ErrorKind::UnsortedInputAfterParse:
    case ErrorKind::FileNotFound:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidWindows:
    case ErrorKind::InvalidSpec:
      return true;
    default:
      return false;
  }
}

inline int exit_code_for(const Error& e) { return is_input_error(e.kind()) ? kExitInput : kExitAnalysis; }

namespace detail {

using crosslist::detail::format_number;

inline fs::path resolve_relative(const fs::path& base_file, const fs::path& p) {
  if (p.is_absolute()) return p;
  return (base_file.has_parent_path() ? base_file.parent_path() : fs::path(".")) / p;
}

inline void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorKind::InvalidConfig, std::string("missing required setting ") + what);
}

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  return out;
}

inline void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::FileNotFound, "cannot create output directory " + dir.string());
  const fs::path probe = dir / ".crosslist_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error(ErrorKind::FileNotFound, "output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

inline std::string date_range(const PriceSeries& s) {
  if (s.observations.empty()) return "(empty)";
  return format_iso_date(s.observations.front().date) + ".." + format_iso_date(s.observations.back().date);
}

inline double mean_yield_in_range(const RiskFreeSeries& rf, const Date& first, const Date& last) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < rf.dates.size(); ++i) {
    if (rf.dates[i] >= first && rf.dates[i] <= last) {
      sum += rf.annual_yield_pct[i];
      ++n;
    }
  }
  if (n == 0) {
    for (double v : rf.annual_yield_pct) sum += v;
    n = static_cast<int>(rf.annual_yield_pct.size());
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// validate

inline int cmd_validate(const RunConfig& config, std::ostream& log) {
  int status = kExitOk;
  auto fail = [&](const std::string& msg) {
    log << "error: " << msg << '\n';
    status = kExitInput;
  };

  std::optional<PriceSeries> local, us;
  auto load_index = [&](const fs::path& p, Currency ccy, const char* label) -> std::optional<PriceSeries> {
    if (p.empty()) {
      fail(std::string("missing required setting data.") + label);
      return std::nullopt;
    }
    try {
      auto s = load_prices(p, ccy, label);
      log << label << ": " << p.string() << " rows=" << s.size() << " range=" << detail::date_range(s) << '\n';
      return s;
    } catch (const Error& e) {
      fail(e.what());
      return std::nullopt;
    }
  };
  local = load_index(config.local_index_path, config.local_currency, "local_index");
  us = load_index(config.us_index_path, Currency::USD, "us_index");

  std::optional<FxSeries> fx;
  if (config.fx_path) {
    try {
      fx = load_fx(*config.fx_path);
      log << "fx: " << config.fx_path->string() << " rows=" << fx->dates.size() << '\n';
    } catch (const Error& e) {
      fail(e.what());
    }
  } else {
    log << "fx: none (local-currency mode)\n";
  }
  for (const auto& [p, label] : {std::pair{config.local_risk_free_path, "local_risk_free"},
                                 std::pair{config.us_risk_free_path, "us_risk_free"}}) {
    if (!p) continue;
    try {
      const auto rf = load_risk_free(*p);
      log << label << ": " << p->string() << " rows=" << rf.dates.size() << '\n';
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  if (config.manifest_path.empty()) {
    fail("missing required setting data.manifest");
    return status;
  }
  std::vector<InstrumentRecord> manifest;
  try {
    manifest = load_manifest(config.manifest_path);
  } catch (const Error& e) {
    fail(e.what());
    return status;
  }
  if (manifest.empty()) log << "warning: no instruments in " << config.manifest_path.string() << '\n';
  log << "firms: " << manifest.size() << '\n';

  for (const auto& rec : manifest) {
    const fs::path price_path = detail::resolve_relative(config.manifest_path, rec.price_file);
    if (!fs::exists(price_path)) {
      fail(rec.n_code + ": price file " + price_path.string() + " not found");
      continue;
    }
    try {
      auto prices = load_prices(price_path, config.local_currency, rec.n_code);
      log << "  " << rec.n_code << " (" << rec.name << "): rows=" << prices.size()
          << " range=" << detail::date_range(prices);
      if (local && us) {
        std::vector<PriceSeries> inputs{prices, *local, *us};
        if (fx) {
          inputs[0] = apply_fx(inputs[0], *fx);
          inputs[1] = apply_fx(inputs[1], *fx);
        }
        inputs[1].instrument_id = "local_index";
        inputs[2].instrument_id = "us_index";
        try {
          const auto panel = align(inputs);
          log << " aligned=" << panel.common_dates.size() << " dropped=" << prices.size() - panel.common_dates.size();
        } catch (const Error& e) {
          log << " aligned=0 (" << e.what() << ")";
        }
      }
      log << '\n';
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  log << (status == kExitOk ? "validation passed\n" : "validation failed\n");
  return status;
}

// ---------------------------------------------------------------------------
// capm

struct CapmRow {
  std::string share_class;
  OlsFit fit;
  DiagnosticsReport diagnostics;
  CapmResult capm;
};

/// Market-model regression of one share class on its index plus the CAPM
/// expected return with R_market = sample mean of the index returns.
inline CapmRow analyze_share_class(const std::string& label, const PriceSeries& class_prices,
                                   const PriceSeries& index_prices, std::optional<RiskFreeSeries> rf,
                                   int periods, int bg_lags) {
  PriceSeries cls = class_prices, idx = index_prices;
  cls.instrument_id = "class";
  idx.instrument_id = "index";
  const auto panel = align({cls, idx});
  const auto y = log_returns(std::span<const double>(panel.closes("class")));
  const auto x = log_returns(std::span<const double>(panel.closes("index")));
  CapmRow row;
  row.share_class = label;
  row.fit = ols_fit(y, {x});
  try {
    row.diagnostics = breusch_godfrey(row.fit, {x}, bg_lags);
  } catch (const Error&) {
    row.diagnostics.dw_statistic = durbin_watson(row.fit.residuals);
  }
  double rf_period = 0.0;
  if (rf) {
    rf_period = detail::mean_yield_in_range(*rf, panel.common_dates.front(), panel.common_dates.back()) / 100.0 /
                periods;
  }
  row.capm = capm_expected_return(row.fit.betas[0], rf_period, mean(x));
  return row;
}

inline int cmd_capm(const RunConfig& config, std::ostream& log) {
  try {
    detail::ensure_output_dir(config.output_dir);
    const int periods = periods_per_year(config.capm_period);
    struct Job {
      std::string label;
      std::optional<fs::path> class_path;
      fs::path index_path;
      Currency ccy;
      std::optional<fs::path> rf_path;
    };
    const std::vector<Job> jobs{
        {"A", config.class_a_path, config.local_index_path, config.local_currency, config.local_risk_free_path},
        {"N", config.class_n_path, config.us_index_path, Currency::USD, config.us_risk_free_path}};

    std::vector<CapmRow> rows;
    for (const auto& job : jobs) {
      if (!job.class_path) {
        log << "class " << job.label << ": no series configured, skipped\n";
        continue;
      }
      try {
        detail::require_path(job.index_path, "index path");
        const auto cls = load_prices(*job.class_path, job.ccy, "class");
        const auto idx = load_prices(job.index_path, job.ccy, "index");
        std::optional<RiskFreeSeries> rf;
        if (job.rf_path) rf = load_risk_free(*job.rf_path);
        auto row = analyze_share_class(job.label, cls, idx, rf, periods, config.bg_lags);
        log << "class " << job.label << ": n=" << row.fit.n_obs << " beta=" << detail::format_number(row.fit.betas[0], 6)
            << " dw=" << detail::format_number(row.diagnostics.dw_statistic, 6) << " ("
            << classify_durbin_watson(row.diagnostics.dw_statistic) << ")"
            << " bg_p=" << detail::format_number(row.diagnostics.bg_p_value, 6) << '\n';
        rows.push_back(std::move(row));
      } catch (const Error& e) {
        if (is_input_error(e.kind())) throw;
        log << "class " << job.label << ": estimation failed: " << e.what() << '\n';
      }
    }
    log << "period: " << config.capm_period << " (expected_return and risk-free are per-" << config.capm_period
        << " rates; R_market is the sample mean of index returns)\n";

    auto out = detail::open_output(config.output_dir / "capm.csv");
    out << "class,alpha,alpha_se,alpha_t,beta,beta_se,beta_t,dw,expected_return\n";
    for (const auto& r : rows) {
      const auto se = r.fit.standard_errors();
      const double beta = r.fit.betas[0];
      out << r.share_class << ',' << detail::format_number(r.fit.alpha) << ',' << detail::format_number(se[0]) << ','
          << detail::format_number(r.fit.alpha / se[0]) << ',' << detail::format_number(beta) << ','
          << detail::format_number(se[1]) << ',' << detail::format_number(beta / se[1]) << ','
          << detail::format_number(r.diagnostics.dw_statistic) << ','
          << detail::format_number(r.capm.expected_return) << '\n';
    }
    return rows.empty() ? kExitAnalysis : kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

// ---------------------------------------------------------------------------
// event-study

inline FirmModelOptions firm_model_options(const RunConfig& config) {
  FirmModelOptions opt;
  opt.select = config.select_lags;
  opt.max_p = config.max_p;
  opt.max_q = config.max_q;
  opt.fixed_spec = {std::min(config.max_p, 1), std::min(config.max_q, 1)};
  opt.selection.include_homoskedastic = config.include_homoskedastic;
  return opt;
}

/// Writes coefficients.csv, event.csv, variance.csv and summary.json.
inline void write_event_study_reports(const EventStudyResult& result, const fs::path& dir, bool usd_mode,
                                      std::uint64_t seed) {
  using detail::format_number;
  {
    auto out = detail::open_output(dir / "coefficients.csv");
    out << "code,r_const,r_sse,r_nyse,arch_lags,garch_lags,weight\n";
    for (const auto& f : result.firms) {
      const auto& b = f.fit.mean_coefficients;
      out << f.firm_id << ',' << format_number(b[0]) << ',' << format_number(b[1]) << ',' << format_number(b[2]) << ','
          << f.fit.spec.q << ',' << f.fit.spec.p << ',' << format_number(f.weight) << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "event.csv");
    out << "offset,aar,car,z,significant\n";
    const auto& p = result.panel;
    for (std::size_t k = 0; k < p.offsets.size(); ++k) {
      out << p.offsets[k] << ',' << format_number(p.aar[k]) << ',' << format_number(p.car[k]) << ','
          << format_number(p.z[k]) << ',' << (p.significant(k) ? 1 : 0) << '\n';
    }
  }
  int significant_ratios = 0;
  {
    auto out = detail::open_output(dir / "variance.csv");
    out << "firm,ratio,f_stat,p_value,significant\n";
    for (const auto& row : result.variance.rows) {
      if (row.f_result) {
        const auto& f = *row.f_result;
        significant_ratios += f.significant_5pct ? 1 : 0;
        out << row.firm_id << ',' << format_number(f.ratio) << ',' << format_number(f.ratio) << ','
            << format_number(f.p_value) << ',' << (f.significant_5pct ? 1 : 0) << '\n';
      } else {
        out << row.firm_id << ",nan,nan,nan,0\n";
      }
    }
  }

  nlohmann::ordered_json summary;
  summary["mode"] = usd_mode ? "usd" : "local-currency";
  summary["seed"] = seed;
  summary["estimation_window"] = {result.windows.estimation.lo, result.windows.estimation.hi};
  summary["event_window"] = {result.windows.event.lo, result.windows.event.hi};
  summary["firms_analyzed"] = result.firms.size();
  auto skipped = nlohmann::ordered_json::array();
  for (const auto& s : result.skipped) skipped.push_back({{"firm", s.firm_id}, {"reason", s.reason}});
  summary["firms_skipped"] = skipped;
  if (auto k = result.panel.index_of(0)) {
    summary["day0_aar"] = result.panel.aar[*k];
    summary["day0_car"] = result.panel.car[*k];
    summary["day0_z"] = result.panel.z[*k];
    summary["day0_significant"] = result.panel.significant(*k);
    summary["day0_firms"] = result.panel.n_firms_by_day[*k];
  }
  summary["cz_full_window"] = result.panel.cz_full_window;
  summary["variance_ratios_significant"] = significant_ratios;
  summary["variance_ratios_total"] = result.variance.rows.size();
  auto out = detail::open_output(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

inline int cmd_event_study(const RunConfig& config, std::ostream& log) {
  try {
    config.windows.validate();
    detail::require_path(config.manifest_path, "data.manifest");
    detail::require_path(config.local_index_path, "data.local_index");
    detail::require_path(config.us_index_path, "data.us_index");
    detail::ensure_output_dir(config.output_dir);

    const auto manifest = load_manifest(config.manifest_path);
    const auto local = load_prices(config.local_index_path, config.local_currency, "local_index");
    const auto us = load_prices(config.us_index_path, Currency::USD, "us_index");
    std::optional<FxSeries> fx;
    if (config.fx_path) fx = load_fx(*config.fx_path);
    if (!fx) log << "note: no FX series, running in local-currency mode\n";

    std::vector<FirmReturns> firms;
    std::vector<SkippedFirm> skipped;
    for (const auto& rec : manifest) {
      try {
        const auto prices = load_prices(detail::resolve_relative(config.manifest_path, rec.price_file),
                                        config.local_currency, rec.n_code);
        firms.push_back(prepare_firm_returns(rec.n_code, prices, local, us, rec.us_listing_date, fx ? &*fx : nullptr));
      } catch (const Error& e) {
        if (is_input_error(e.kind())) throw;
        skipped.push_back({rec.n_code, e.what()});
      }
    }
    if (firms.empty()) {
      log << "error: no firm has usable data\n";
      return kExitAnalysis;
    }

    EventStudyResult result = run_event_study(firms, manifest, config.windows, firm_model_options(config));
    result.skipped.insert(result.skipped.begin(), skipped.begin(), skipped.end());
    for (const auto& s : result.skipped) log << "skipped " << s.firm_id << ": " << s.reason << '\n';
    write_event_study_reports(result, config.output_dir, fx.has_value(), config.seed);
    log << "analyzed " << result.firms.size() << " firm(s); reports written to " << config.output_dir.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const RunConfig& config, std::ostream& log) {
  try {
    detail::ensure_output_dir(config.output_dir);
    const auto bundle = simulate_bundle(config.simulation, config.seed);
    write_bundle(bundle, config.output_dir, config.seed);
    log << "wrote " << bundle.firms.size() << " firm(s) x " << config.simulation.days << " days to "
        << config.output_dir.string() << " (seed " << config.seed << ")\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace crosslist::app
