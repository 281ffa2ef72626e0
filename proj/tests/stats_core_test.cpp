#include <gtest/gtest.h>

#include "crosslist/stats_core.hpp"
#include "support.hpp"

using namespace crosslist;
using crosslist::detail::NormalGenerator;

namespace {

// Rescales x to exactly the requested sample variance.
std::vector<double> with_variance(std::vector<double> x, double variance) {
  const double m = mean(x);
  const double sd = sample_sd(x);
  for (auto& v : x) v = (v - m) / sd * std::sqrt(variance);
  return x;
}

}  // namespace

TEST(LogReturns, ConstantPricesGiveZeros) {
  const std::vector<double> p{100, 100, 100};
  EXPECT_EQ(log_returns(p), (std::vector<double>{0.0, 0.0}));
}

TEST(LogReturns, TenPercentMove) {
  const std::vector<double> p{100, 110};
  const auto r = log_returns(p);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.09531017980432486, 1e-15);
}

TEST(LogReturns, TelescopesAndDatesByLaterObservation) {
  NormalGenerator rng(3);
  const auto dates = testing_support::weekdays(500);
  PriceSeries s{"x", {}, Currency::USD};
  double p = 20.0;
  for (const auto& d : dates) {
    p *= std::exp(0.02 * rng());
    s.observations.push_back({d, p});
  }
  const auto r = log_returns(s);
  ASSERT_EQ(r.size(), 499u);
  EXPECT_EQ(r.dates.front(), dates[1]);
  double sum = 0.0;
  for (double v : r.values) sum += v;
  const double expected = std::log(s.observations.back().close / s.observations.front().close);
  EXPECT_LE(std::abs(sum - expected), 1e-12 * std::max(1.0, std::abs(expected)));
}

TEST(LogReturns, TooShort) {
  const std::vector<double> p{100};
  EXPECT_THROW(log_returns(p), Error);
  EXPECT_THROW(log_returns(PriceSeries{"x", {}, Currency::USD}), Error);
}

TEST(RollingVolatility, ClosedForms) {
  const std::vector<double> flat(10, 0.01);
  for (const auto& v : rolling_volatility(flat, 3)) {
    if (v) {
      EXPECT_NEAR(*v, 0.0, 1e-18);
    }
  }
  const double x = 0.013;
  const std::vector<double> alt{x, -x, x, -x};
  const auto vol = rolling_volatility(alt, 4);
  EXPECT_FALSE(vol[2].has_value());
  ASSERT_TRUE(vol[3].has_value());
  EXPECT_NEAR(*vol[3], std::sqrt(4 * x * x / 3), 1e-15);
}

TEST(RollingVolatility, FullWindowAndErrors) {
  NormalGenerator rng(5);
  const auto r = testing_support::normals(rng, 40);
  const auto vol = rolling_volatility(r, 40);
  for (std::size_t i = 0; i + 1 < vol.size(); ++i) EXPECT_FALSE(vol[i].has_value());
  EXPECT_DOUBLE_EQ(*vol.back(), sample_sd(r));
  try {
    rolling_volatility(r, 41);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowTooLarge);
  }
  EXPECT_THROW(rolling_volatility(r, 1), Error);
}

TEST(FTest, IdenticalSamples) {
  NormalGenerator rng(1);
  const auto a = testing_support::normals(rng, 50);
  const auto r = variance_f_test(a, a);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_FALSE(r.significant_5pct);
  EXPECT_EQ(r.df_num, 49);
}

TEST(FTest, MatchesReferenceDistribution) {
  NormalGenerator rng(2);
  struct Case {
    double ratio;
    std::size_t na, nb;
    double p;
  };
  // two-sided p-values from an independent F-distribution implementation
  for (const Case& c : {Case{2.0, 90, 90, 0.0012435163135804395}, Case{1.5, 11, 21, 0.4218929250372252},
                        Case{0.5, 31, 16, 0.10358200500172873}}) {
    const auto a = with_variance(testing_support::normals(rng, c.na), c.ratio);
    const auto b = with_variance(testing_support::normals(rng, c.nb), 1.0);
    const auto r = variance_f_test(a, b);
    EXPECT_NEAR(r.ratio, c.ratio, 1e-12);
    EXPECT_NEAR(r.p_value, c.p, 1e-10 * std::max(1.0, c.p) + 1e-12);
    EXPECT_EQ(r.significant_5pct, c.p < 0.05);
  }
}

TEST(FTest, SwapSymmetry) {
  NormalGenerator rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto a = testing_support::normals(rng, 30 + i);
    const auto b = testing_support::normals(rng, 60, 1.3);
    const auto ab = variance_f_test(a, b);
    const auto ba = variance_f_test(b, a);
    EXPECT_NEAR(ab.ratio * ba.ratio, 1.0, 1e-12);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
  }
}

TEST(FTest, DegenerateSamples) {
  const std::vector<double> flat(10, 1.0), one{1.0};
  const std::vector<double> ok{1.0, 2.0, 4.0};
  EXPECT_THROW(variance_f_test(flat, ok), Error);
  EXPECT_THROW(variance_f_test(ok, one), Error);
}

TEST(FTest, NullSize) {
  NormalGenerator rng(2024);
  int rejections = 0;
  for (int i = 0; i < 500; ++i) {
    const auto a = testing_support::normals(rng, 90);
    const auto b = testing_support::normals(rng, 90);
    rejections += variance_f_test(a, b).significant_5pct;
  }
  EXPECT_NEAR(rejections / 500.0, 0.05, 0.03);
}

TEST(FTest, QuadrupledVariance) {
  double ratio_sum = 0.0;
  int significant = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    NormalGenerator rng(seed);
    const auto a = testing_support::normals(rng, 1000, 2.0);
    const auto b = testing_support::normals(rng, 1000, 1.0);
    const auto r = variance_f_test(a, b);
    ratio_sum += r.ratio;
    significant += r.p_value < 0.05;
  }
  EXPECT_NEAR(ratio_sum / 200.0, 4.0, 0.4);
  EXPECT_EQ(significant, 200);
}
