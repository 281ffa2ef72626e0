#include <gtest/gtest.h>

#include "crosslist/linear_models.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace crosslist;
using crosslist::detail::NormalGenerator;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no crosslist::Error thrown";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(Ols, IdentityRegression) {
  const std::vector<double> x{0.3, -1.2, 2.5, 0.7, 1.1, -0.4};
  const auto fit = ols_fit(x, {x});
  EXPECT_NEAR(fit.alpha, 0.0, 1e-12);
  EXPECT_NEAR(fit.betas[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(fit.r_squared, 1.0);
  EXPECT_EQ(fit.s2, 0.0);
  EXPECT_TRUE(fit.exact_fit);
}

TEST(Ols, ExactAffine) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{5, 7, 9, 11};
  const auto fit = ols_fit(y, {x});
  EXPECT_NEAR(fit.alpha, 3.0, 1e-12);
  EXPECT_NEAR(fit.betas[0], 2.0, 1e-12);
  EXPECT_EQ(fit.n_obs, 4);
}

TEST(Ols, SelfRegressionOnNoisySeries) {
  NormalGenerator rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto x = testing_support::normals(rng, 80, 0.02, 0.001);
    const auto fit = ols_fit(x, {x});
    EXPECT_NEAR(fit.alpha, 0.0, 1e-10);
    EXPECT_NEAR(fit.betas[0], 1.0, 1e-10);
  }
}

TEST(Ols, MatchesNormalEquations) {
  NormalGenerator rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto x1 = testing_support::normals(rng, 50, 0.015);
    const auto x2 = testing_support::normals(rng, 50, 0.01);
    std::vector<double> y(50);
    for (std::size_t t = 0; t < 50; ++t) y[t] = 0.001 + 0.8 * x1[t] + 0.3 * x2[t] + 0.01 * rng();
    const auto fit = ols_fit(y, {x1, x2});
    const auto b = oracles::normal_equations(y, {x1, x2});
    const double got[3] = {fit.alpha, fit.betas[0], fit.betas[1]};
    for (int j = 0; j < 3; ++j) {
      EXPECT_LE(std::abs(got[j] - static_cast<double>(b[j])), 1e-10 * std::abs(static_cast<double>(b[j])));
    }
  }
}

TEST(Ols, ResidualsOrthogonalAndStoredInverse) {
  NormalGenerator rng(12);
  const auto x1 = testing_support::normals(rng, 120);
  const auto x2 = testing_support::normals(rng, 120);
  std::vector<double> y(120);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = 1.0 - x1[t] + 2.0 * x2[t] + rng();
  const auto fit = ols_fit(y, {x1, x2});
  double sum = 0.0, d1 = 0.0, d2 = 0.0, ssr = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    sum += fit.residuals[t];
    d1 += fit.residuals[t] * x1[t];
    d2 += fit.residuals[t] * x2[t];
    ssr += fit.residuals[t] * fit.residuals[t];
  }
  EXPECT_NEAR(sum, 0.0, 1e-10);
  EXPECT_NEAR(d1, 0.0, 1e-10);
  EXPECT_NEAR(d2, 0.0, 1e-10);
  EXPECT_NEAR(fit.s2, ssr / 117.0, 1e-14);
  EXPECT_NEAR(fit.regressor_means[0], mean(x1), 1e-15);

  const Eigen::MatrixXd x = crosslist::detail::design_matrix({x1, x2}, y.size());
  const Eigen::MatrixXd id = fit.xtx_inverse * (x.transpose() * x);
  EXPECT_LT((id - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, Errors) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 3, 2, 5, 4};
  std::vector<double> twice(x);
  for (auto& v : twice) v *= 2;
  EXPECT_EQ(kind_of([&] { ols_fit(y, {x, twice}); }), ErrorKind::RankDeficient);
  const std::vector<double> y2{1, 2};
  const std::vector<double> x2{3, 5};
  EXPECT_EQ(kind_of([&] { ols_fit(y2, {x2}); }), ErrorKind::TooFewObservations);
}

TEST(DurbinWatson, ClosedForms) {
  for (std::size_t n : {2u, 10u, 100u, 1001u}) {
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) e[t] = t % 2 ? -1.0 : 1.0;
    EXPECT_NEAR(durbin_watson(e), 4.0 * static_cast<double>(n - 1) / static_cast<double>(n), 1e-14);
  }
  EXPECT_EQ(durbin_watson(std::vector<double>(30, 0.7)), 0.0);
  EXPECT_EQ(kind_of([] { durbin_watson(std::vector<double>(5, 0.0)); }), ErrorKind::AllZeroResiduals);
  EXPECT_EQ(classify_durbin_watson(1.2), "positive autocorrelation suspected");
  EXPECT_EQ(classify_durbin_watson(2.0), "none");
  EXPECT_EQ(classify_durbin_watson(3.1), "negative autocorrelation suspected");
}

TEST(DurbinWatson, StaysInRange) {
  NormalGenerator rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto e = testing_support::normals(rng, 2 + static_cast<std::size_t>(i % 17));
    const double dw = durbin_watson(e);
    EXPECT_GE(dw, 0.0);
    EXPECT_LE(dw, 4.0);
  }
}

TEST(BreuschGodfrey, NullSize) {
  NormalGenerator rng(77);
  int rejections = 0;
  for (int i = 0; i < 500; ++i) {
    const auto x = testing_support::normals(rng, 500);
    std::vector<double> y(500);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 0.5 + 0.7 * x[t] + rng();
    const auto fit = ols_fit(y, {x});
    rejections += breusch_godfrey(fit, {x}, 1).bg_p_value < 0.05;
  }
  EXPECT_NEAR(rejections / 500.0, 0.05, 0.03);
}

TEST(BreuschGodfrey, DetectsAutocorrelation) {
  NormalGenerator rng(78);
  int detected = 0;
  for (int i = 0; i < 200; ++i) {
    const auto x = testing_support::normals(rng, 500);
    std::vector<double> y(500);
    double e = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      e = 0.9 * e + rng();
      y[t] = 0.5 + 0.7 * x[t] + e;
    }
    const auto fit = ols_fit(y, {x});
    const auto report = breusch_godfrey(fit, {x}, 2);
    detected += report.bg_p_value < 0.01;
    EXPECT_LT(report.dw_statistic, 1.5);
  }
  EXPECT_GT(detected / 200.0, 0.95);
}

TEST(BreuschGodfrey, DegenerateInputs) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y(x);
  const auto exact = ols_fit(y, {x});
  EXPECT_EQ(kind_of([&] { breusch_godfrey(exact, {x}, 1); }), ErrorKind::AllZeroResiduals);
  y = {1, 3, 2, 5, 4, 7};
  const auto fit = ols_fit(y, {x});
  EXPECT_EQ(kind_of([&] { breusch_godfrey(fit, {x}, 4); }), ErrorKind::TooManyLags);
}

TEST(Capm, Identities) {
  EXPECT_EQ(capm_expected_return(0.0, 0.003, 0.01).expected_return, 0.003);
  EXPECT_EQ(capm_expected_return(1.0, 0.003, 0.01).expected_return, 0.01);
  const double rf = 0.0021, rm = -0.0134;
  auto er = [&](double b) { return capm_expected_return(b, rf, rm).expected_return; };
  NormalGenerator rng(6);
  for (int i = 0; i < 50; ++i) {
    const double b1 = 3 * rng(), b2 = 3 * rng();
    EXPECT_NEAR(er(b1 + b2) - er(b1) - er(b2) + er(0.0), 0.0, 1e-12);
  }
}

TEST(PredictionSe, MatchesScalarFormula) {
  NormalGenerator rng(21);
  const auto x = testing_support::normals(rng, 91, 0.015);
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = 0.0005 + 1.1 * x[t] + 0.01 * rng();
  const auto fit = ols_fit(y, {x});
  for (double xn : {-0.05, -0.01, 0.0, 0.002, 0.03}) {
    const std::vector<double> row{xn};
    const double expected = oracles::scalar_prediction_se(std::sqrt(fit.s2), x, xn);
    EXPECT_NEAR(prediction_se(fit, row, fit.n_obs), expected, 1e-10 * expected);
  }
}

TEST(PredictionSe, MinimumAtMeansAndLowerBound) {
  NormalGenerator rng(22);
  const auto x1 = testing_support::normals(rng, 2000);
  const auto x2 = testing_support::normals(rng, 2000);
  std::vector<double> y(x1.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = x1[t] - x2[t] + rng();
  const auto fit = ols_fit(y, {x1, x2});
  const double at_means = prediction_se(fit, fit.regressor_means, fit.n_obs);
  EXPECT_NEAR(at_means, std::sqrt(fit.s2 * (1.0 + 1.0 / 2000.0)), 1e-12);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> row{fit.regressor_means[0] + rng(), fit.regressor_means[1] + rng()};
    const double se = prediction_se(fit, row, fit.n_obs);
    EXPECT_GE(se, at_means);
    EXPECT_GE(se, std::sqrt(fit.s2));
  }
}

TEST(PredictionSe, Refusals) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{5, 7, 9, 11};
  const auto exact = ols_fit(y, {x});
  EXPECT_EQ(kind_of([&] { prediction_se(exact, std::vector<double>{1.0}, 4); }), ErrorKind::ExactFitNoVariance);
  const std::vector<double> y2{5, 7, 8, 11};
  const auto fit = ols_fit(y2, {x});
  EXPECT_EQ(kind_of([&] { prediction_se(fit, std::vector<double>{1.0}, 5); }), ErrorKind::MisalignedOffsets);
  EXPECT_EQ(kind_of([&] { prediction_se(fit, std::vector<double>{1.0, 2.0}, 4); }), ErrorKind::MisalignedOffsets);
}
