#include <gtest/gtest.h>

#include <limits>

#include "crosslist/event_study.hpp"
#include "support.hpp"

using namespace crosslist;
using crosslist::detail::NormalGenerator;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no crosslist::Error thrown";
  return ErrorKind::InvalidConfig;
}

// Firm returns on offsets [lo, hi] with a market model and GARCH(1,1) errors.
FirmReturns synthetic_firm(const std::string& id, std::uint64_t seed, int lo = -120, int hi = 120,
                           double day0_shock = 0.0) {
  NormalGenerator rng(seed);
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  FirmReturns f;
  f.firm_id = id;
  f.dates = testing_support::weekdays(n);
  f.local = testing_support::normals(rng, n, 0.015);
  f.us = testing_support::normals(rng, n, 0.01);
  const auto e = simulate_garch_errors(1e-5, std::vector<double>{0.1}, std::vector<double>{0.8}, n, rng);
  for (std::size_t t = 0; t < n; ++t) {
    f.offsets.push_back(lo + static_cast<int>(t));
    f.y.push_back(0.0002 + 0.9 * f.local[t] + 0.3 * f.us[t] + e[t] + (lo + static_cast<int>(t) == 0 ? day0_shock : 0.0));
  }
  return f;
}

std::vector<InstrumentRecord> manifest_for(const std::vector<std::string>& ids, const std::vector<double>& caps) {
  std::vector<InstrumentRecord> m;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    InstrumentRecord r;
    r.name = ids[i];
    r.a_code = "60000" + std::to_string(i);
    r.n_code = ids[i];
    r.market_cap_usd = caps[i];
    m.push_back(r);
  }
  return m;
}

void expect_structural_identities(const EventStudyResult& r) {
  const auto& p = r.panel;
  for (std::size_t k = 0; k < p.offsets.size(); ++k) {
    const double prev = k == 0 ? 0.0 : p.car[k - 1];
    EXPECT_LT(std::abs(p.car[k] - prev - p.aar[k]), 1e-12);
    if (p.n_firms_by_day[k] > 0) {
      EXPECT_NEAR(p.weight_sum_by_day[k], 1.0, 1e-12);
    }
    EXPECT_DOUBLE_EQ(cumulative_z(p, p.offsets[k], p.offsets[k]), p.z[k]);
  }
  double total = 0.0;
  for (const auto& f : r.firms) total += f.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace

TEST(EventWindows, DefaultsAndValidation) {
  EventWindows w;
  EXPECT_NO_THROW(w.validate());
  EXPECT_EQ(w.estimation.length(), 91);
  EXPECT_EQ(w.event.length(), 31);
  w.event = {5, -5};
  EXPECT_EQ(kind_of([&] { w.validate(); }), ErrorKind::InvalidWindows);
  w = EventWindows{};
  w.estimation = {-100, 0};
  EXPECT_EQ(kind_of([&] { w.validate(); }), ErrorKind::InvalidWindows);
  w.estimation = {-40, -15};
  EXPECT_EQ(kind_of([&] { w.validate(); }), ErrorKind::InvalidWindows);
}

TEST(PrepareFirmReturns, OffsetsFollowCommonCalendar) {
  const auto dates = testing_support::weekdays(300);
  std::vector<Date> local_dates;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (i != 10 && i != 200) local_dates.push_back(dates[i]);
  }
  const auto firm = testing_support::series_on("F", local_dates, 10.0, 0.002);
  const auto local = testing_support::series_on("L", local_dates, 3000.0, 0.001);
  const auto us = testing_support::series_on("U", dates, 10000.0, -0.001);
  const auto fr = prepare_firm_returns("F", firm, local, us, dates[150]);
  ASSERT_EQ(fr.size(), 297u);
  EXPECT_EQ(fr.dates.front(), dates[1]);
  EXPECT_EQ(fr.offsets[*fr.index_of(0)], 0);
  EXPECT_EQ(fr.dates[*fr.index_of(0)], dates[150]);
  for (std::size_t i = 1; i < fr.size(); ++i) EXPECT_EQ(fr.offsets[i], fr.offsets[i - 1] + 1);
  EXPECT_NEAR(fr.y[0], std::log(1.002), 1e-12);
  EXPECT_FALSE(fr.usd_converted);
}

TEST(PrepareFirmReturns, FxConvertsFirmAndLocalIndex) {
  const auto dates = testing_support::weekdays(50);
  const auto firm = testing_support::series_on("F", dates, 10.0, 0.0);
  const auto local = testing_support::series_on("L", dates, 3000.0, 0.0);
  const auto us = testing_support::series_on("U", dates, 10000.0, 0.0);
  FxSeries fx;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    fx.dates.push_back(dates[i]);
    fx.usd_per_local.push_back(0.14 * std::pow(1.01, static_cast<double>(i)));
  }
  const auto fr = prepare_firm_returns("F", firm, local, us, dates[25], &fx);
  EXPECT_TRUE(fr.usd_converted);
  EXPECT_NEAR(fr.y[3], std::log(1.01), 1e-12);
  EXPECT_NEAR(fr.local[3], std::log(1.01), 1e-12);
  EXPECT_NEAR(fr.us[3], 0.0, 1e-15);
}

TEST(FirmModel, EstimationUsesOnlyTheEstimationWindow) {
  auto firm = synthetic_firm("A", 1);
  const EventWindows w;
  const auto base = estimate_firm_model(firm, w);
  EXPECT_EQ(base.ols.n_obs, 91);
  EXPECT_EQ(base.garch.residuals.size(), 91u);
  // Changing returns outside [-105, -15] leaves the model untouched.
  for (std::size_t i = 0; i < firm.size(); ++i) {
    if (!w.estimation.contains(firm.offsets[i])) firm.y[i] += 0.5;
  }
  const auto moved = estimate_firm_model(firm, w);
  EXPECT_EQ(moved.garch.mean_coefficients, base.garch.mean_coefficients);
  EXPECT_EQ(moved.ols.alpha, base.ols.alpha);
}

TEST(FirmModel, InsufficientCoverageIsRejected) {
  const auto firm = synthetic_firm("A", 2, -60, 60);
  EXPECT_EQ(kind_of([&] { estimate_firm_model(firm, EventWindows{}); }), ErrorKind::WindowOutOfData);
}

TEST(AbnormalReturns, ResidualsOfTheMeanEquation) {
  const std::vector<double> y{0.01, -0.02, 0.03};
  const Regressors x{{0.01, 0.0, 0.02}, {0.0, -0.01, 0.01}};
  const std::vector<double> b{0.001, 1.0, 0.5};
  const auto ar = abnormal_returns(y, x, b);
  EXPECT_NEAR(ar[0], 0.01 - 0.011, 1e-15);
  EXPECT_NEAR(ar[1], -0.02 - (0.001 - 0.005), 1e-15);
  EXPECT_NEAR(ar[2], 0.03 - (0.001 + 0.02 + 0.005), 1e-15);
}

TEST(AbnormalReturns, PartialEventCoverageGivesNaN) {
  const auto firm = synthetic_firm("A", 3, -110, 8);
  const EventWindows w;
  const auto model = estimate_firm_model(firm, w);
  const auto ar = abnormal_returns(firm, model, w);
  ASSERT_EQ(ar.size(), 31u);
  EXPECT_TRUE(std::isfinite(ar[23]));  // offset 8
  EXPECT_TRUE(std::isnan(ar[24]));     // offset 9
  const auto star = standardize(ar, firm, model, w);
  EXPECT_TRUE(std::isnan(star[30]));
}

TEST(Standardize, DividesByForecastError) {
  const auto firm = synthetic_firm("A", 4);
  const EventWindows w;
  const auto model = estimate_firm_model(firm, w);
  const auto ar = abnormal_returns(firm, model, w);
  const auto star = standardize(ar, firm, model, w);
  for (int o = w.event.lo; o <= w.event.hi; ++o) {
    const auto k = static_cast<std::size_t>(o - w.event.lo);
    const auto i = *firm.index_of(o);
    const std::vector<double> row{firm.local[i], firm.us[i]};
    const double s = prediction_se(model.ols, row, model.ols.n_obs);
    EXPECT_NEAR(star[k], ar[k] / s, 1e-12);
    EXPECT_LE(std::abs(star[k]), std::abs(ar[k]) / std::sqrt(model.ols.s2) + 1e-12);
  }
}

TEST(CapWeights, NormalizedOverActiveFirms) {
  const auto manifest = load_manifest(testing_support::data_dir() / "companies.csv");
  std::vector<std::string> ids;
  for (const auto& r : manifest) ids.push_back(r.n_code);
  const auto w = cap_weights(manifest, ids);
  double total = 0.0;
  for (const auto& [id, v] : w) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(w.at("PTR"), 240.43 / 580.209, 1e-12);

  const auto two = cap_weights(manifest, {"PTR", "601628"});
  EXPECT_NEAR(two.at("PTR"), 240.43 / (240.43 + 141.79), 1e-12);
  EXPECT_NEAR(two.at("601628"), 141.79 / (240.43 + 141.79), 1e-12);
  EXPECT_EQ(kind_of([&] { cap_weights(manifest, {"XYZ"}); }), ErrorKind::UnknownFirm);
}

TEST(Aggregate, WeightsRenormalizeOnMissingDays) {
  EventWindows w;
  w.event = {-1, 1};
  FirmEventResult a{"A", {0.01, 0.02, 0.03}, {1.0, 2.0, 3.0}, 0.75, {}};
  FirmEventResult b{"B", {-0.01, kNaN, 0.01}, {-1.0, kNaN, 1.0}, 0.25, {}};
  const auto p = aggregate({a, b}, w);
  EXPECT_EQ(p.offsets, (std::vector<int>{-1, 0, 1}));
  EXPECT_NEAR(p.aar[0], 0.75 * 0.01 - 0.25 * 0.01, 1e-15);
  EXPECT_NEAR(p.aar[1], 0.02, 1e-15);
  EXPECT_NEAR(p.aar[2], 0.75 * 0.03 + 0.25 * 0.01, 1e-15);
  EXPECT_EQ(p.n_firms_by_day, (std::vector<int>{2, 1, 2}));
  EXPECT_NEAR(p.z[0], 0.0, 1e-15);
  EXPECT_NEAR(p.z[1], 2.0, 1e-15);
  EXPECT_NEAR(p.z[2], 4.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p.car[2], p.aar[0] + p.aar[1] + p.aar[2], 1e-15);
  EXPECT_NEAR(p.cz_full_window, (p.z[0] + p.z[1] + p.z[2]) / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(cumulative_z(p, 0, 1), (p.z[1] + p.z[2]) / std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(p.significant(1));
  EXPECT_FALSE(p.significant(0));
  EXPECT_THROW(cumulative_z(p, -2, 0), Error);
}

TEST(Aggregate, RejectsMisalignedVectors) {
  EventWindows w;
  w.event = {-1, 1};
  FirmEventResult a{"A", {0.01, 0.02}, {1.0, 2.0}, 1.0, {}};
  EXPECT_EQ(kind_of([&] { aggregate({a}, w); }), ErrorKind::MisalignedOffsets);
  EXPECT_EQ(kind_of([&] { aggregate({}, w); }), ErrorKind::MisalignedOffsets);
}

TEST(RunEventStudy, SingleFirmCollapse) {
  const auto firm = synthetic_firm("ONE", 10);
  const auto r = run_event_study({firm}, manifest_for({"ONE"}, {1e9}), EventWindows{});
  ASSERT_EQ(r.firms.size(), 1u);
  for (std::size_t k = 0; k < r.panel.z.size(); ++k) {
    EXPECT_EQ(r.panel.z[k], r.firms[0].star[k]);
    EXPECT_DOUBLE_EQ(r.panel.aar[k], r.firms[0].ar[k]);
  }
  expect_structural_identities(r);
}

TEST(RunEventStudy, InjectedShockAndIdentities) {
  std::vector<FirmReturns> firms;
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("F" + std::to_string(i));
    firms.push_back(synthetic_firm(ids.back(), 200 + static_cast<std::uint64_t>(i), -120, 120, -0.04));
  }
  const auto r = run_event_study(firms, manifest_for(ids, {5, 4, 100, 18, 9, 141, 11, 8, 240, 36}),
                                 EventWindows{});
  const auto k0 = *r.panel.index_of(0);
  EXPECT_NEAR(r.panel.aar[k0], -0.04, 0.01);
  EXPECT_LT(r.panel.z[k0], -1.96);
  EXPECT_TRUE(r.panel.significant(k0));
  EXPECT_EQ(r.panel.n_firms_by_day[k0], 10);
  expect_structural_identities(r);
  ASSERT_EQ(r.variance.rows.size(), 10u);
}

TEST(RunEventStudy, SkipsFirmsWithoutCoverage) {
  const auto good = synthetic_firm("G", 11);
  const auto short_firm = synthetic_firm("S", 12, -50, 50);
  const auto r = run_event_study({good, short_firm}, manifest_for({"G", "S"}, {1e9, 3e9}), EventWindows{});
  ASSERT_EQ(r.firms.size(), 1u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].firm_id, "S");
  EXPECT_DOUBLE_EQ(r.firms[0].weight, 1.0);
  EXPECT_EQ(kind_of([&] { run_event_study({short_firm}, manifest_for({"S"}, {1e9}), EventWindows{}); }),
            ErrorKind::WindowOutOfData);
}

TEST(VarianceRatio, RawReturnsPostOverPre) {
  auto firm = synthetic_firm("V", 13);
  const EventWindows w;
  for (std::size_t i = 0; i < firm.size(); ++i) {
    if (w.post_var.contains(firm.offsets[i])) firm.y[i] *= 2.0;
  }
  const auto report = variance_ratio_report({firm}, w);
  ASSERT_EQ(report.rows.size(), 1u);
  const auto& row = report.rows[0];
  ASSERT_TRUE(row.f_result);
  const auto pre = slice(firm, w.pre_var);
  const auto post = slice(firm, w.post_var);
  EXPECT_NEAR(row.ratio, sample_variance(post.y) / sample_variance(pre.y), 1e-12);
  EXPECT_EQ(row.f_result->df_num, 90);
  EXPECT_EQ(row.f_result->df_den, 90);
}

TEST(VarianceRatio, DegenerateWindowReportedPerRow) {
  auto firm = synthetic_firm("V", 14, -120, 15);
  const auto report = variance_ratio_report({firm}, EventWindows{});
  EXPECT_FALSE(report.rows[0].f_result.has_value());
  EXPECT_FALSE(report.rows[0].error.empty());
}
