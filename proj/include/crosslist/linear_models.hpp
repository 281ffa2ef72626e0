#pragma once

// OLS market model, Durbin-Watson and Breusch-Godfrey diagnostics, CAPM
// expected return, and the out-of-sample forecast standard error used to
// standardize abnormal returns.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "crosslist/error.hpp"
#include "crosslist/stats_core.hpp"

namespace crosslist {

struct OlsFit {
  double alpha = 0.0;
  std::vector<double> betas;
  std::vector<double> residuals;
  double s2 = 0.0;  // SSR / (n - k), k counts the intercept
  double r_squared = 0.0;
  int n_obs = 0;
  std::vector<double> regressor_means;
  Eigen::MatrixXd xtx_inverse;  // over [1, x_1, ..., x_m]
  bool exact_fit = false;

  int n_params() const noexcept { return static_cast<int>(betas.size()) + 1; }

  /// Coefficient standard errors, intercept first.
  std::vector<double> standard_errors() const {
    std::vector<double> se(static_cast<std::size_t>(n_params()));
    for (int i = 0; i < n_params(); ++i) se[static_cast<std::size_t>(i)] = std::sqrt(s2 * xtx_inverse(i, i));
    return se;
  }

  /// alpha + betas . x
  double predict(std::span<const double> x) const {
    double v = alpha;
    for (std::size_t j = 0; j < betas.size(); ++j) v += betas[j] * x[j];
    return v;
  }
};

struct DiagnosticsReport {
  double dw_statistic = 0.0;
  double bg_lm_statistic = 0.0;
  int bg_lags = 1;
  double bg_p_value = 1.0;
  bool heteroskedastic_5pct = false;
};

struct CapmResult {
  double beta = 0.0;
  double risk_free = 0.0;
  double market_mean = 0.0;
  double expected_return = 0.0;
};

using Regressors = std::vector<std::vector<double>>;

namespace detail {

inline Eigen::MatrixXd design_matrix(const Regressors& regressors, std::size_t n) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(regressors.size() + 1));
  x.col(0).setOnes();
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    for (std::size_t t = 0; t < n; ++t) x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j + 1)) = regressors[j][t];
  }
  return x;
}

}  // namespace detail

inline OlsFit ols_fit(std::span<const double> y, const Regressors& regressors) {
  const std::size_t n = y.size();
  const std::size_t k = regressors.size() + 1;
  for (const auto& x : regressors) {
    if (x.size() != n) {
      throw Error(ErrorKind::TooFewObservations, "regressor length " + std::to_string(x.size()) +
                                                     " differs from response length " + std::to_string(n));
    }
  }
  if (n <= k) {
    throw Error(ErrorKind::TooFewObservations,
                std::to_string(n) + " observations for " + std::to_string(k) + " coefficients");
  }

  const Eigen::MatrixXd x = detail::design_matrix(regressors, n);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < static_cast<Eigen::Index>(k)) {
    throw Error(ErrorKind::RankDeficient, "design matrix rank " + std::to_string(qr.rank()) + " < " +
                                              std::to_string(k));
  }
  const Eigen::VectorXd coef = qr.solve(yv);
  const Eigen::VectorXd resid = yv - x * coef;

  // (X'X)^-1 = P R^-1 R^-T P'
  const auto ki = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(ki, ki).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(ki, ki));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();

  OlsFit fit;
  fit.alpha = coef(0);
  fit.betas.assign(coef.data() + 1, coef.data() + ki);
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  fit.n_obs = static_cast<int>(n);
  fit.xtx_inverse = 0.5 * (xtx_inv + xtx_inv.transpose());
  for (const auto& xj : regressors) fit.regressor_means.push_back(mean(xj));

  const double ssr = resid.squaredNorm();
  const double y_mean = yv.mean();
  const double sst = (yv.array() - y_mean).square().sum();
  fit.exact_fit = std::sqrt(ssr) <= 1e-12 * std::max(yv.norm(), 1e-300);
  fit.s2 = fit.exact_fit ? 0.0 : ssr / static_cast<double>(n - k);
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  if (fit.exact_fit) fit.r_squared = 1.0;

  // Residuals must be orthogonal to every design column.
  const Eigen::VectorXd xte = x.transpose() * resid;
  const double scale = (std::sqrt(ssr) + 1.0) * (x.colwise().norm().maxCoeff() + 1.0) * (yv.norm() + 1.0);
  if (xte.cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw Error(ErrorKind::RankDeficient, "OLS residuals failed the orthogonality check");
  }
  return fit;
}

inline double durbin_watson(std::span<const double> residuals) {
  if (residuals.size() < 2) throw Error(ErrorKind::SeriesTooShort, "Durbin-Watson needs two residuals");
  double num = 0.0;
  double den = residuals[0] * residuals[0];
  for (std::size_t t = 1; t < residuals.size(); ++t) {
    const double d = residuals[t] - residuals[t - 1];
    num += d * d;
    den += residuals[t] * residuals[t];
  }
  if (den == 0.0) throw Error(ErrorKind::AllZeroResiduals, "Durbin-Watson on all-zero residuals");
  return num / den;
}

/// Informal reading of the DW statistic; no critical-value tables.
inline std::string_view classify_durbin_watson(double dw) noexcept {
  if (dw < 1.5) return "positive autocorrelation suspected";
  if (dw > 2.5) return "negative autocorrelation suspected";
  return "none";
}

/// Breusch-Godfrey LM test: residuals regressed on the original regressors
/// plus `lags` lagged residuals (pre-sample lags set to zero), LM = n R^2.
/// The returned report carries the DW statistic of the same residuals.
inline DiagnosticsReport breusch_godfrey(const OlsFit& fit, const Regressors& regressors, int lags = 1) {
  const auto n = static_cast<std::size_t>(fit.n_obs);
  if (lags < 1 || lags >= fit.n_obs - static_cast<int>(regressors.size()) - 1) {
    throw Error(ErrorKind::TooManyLags, std::to_string(lags) + " lags for " + std::to_string(fit.n_obs) +
                                            " observations");
  }
  if (fit.exact_fit) throw Error(ErrorKind::AllZeroResiduals, "exact fit leaves no residual variation");
  DiagnosticsReport report;
  report.dw_statistic = durbin_watson(fit.residuals);  // throws AllZeroResiduals
  report.bg_lags = lags;

  Regressors aux = regressors;
  for (int l = 1; l <= lags; ++l) {
    std::vector<double> lagged(n, 0.0);
    for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t) lagged[t] = fit.residuals[t - static_cast<std::size_t>(l)];
    aux.push_back(std::move(lagged));
  }
  const OlsFit aux_fit = ols_fit(fit.residuals, aux);
  report.bg_lm_statistic = std::max(0.0, static_cast<double>(n) * aux_fit.r_squared);
  const boost::math::chi_squared chi2(lags);
  report.bg_p_value = boost::math::cdf(boost::math::complement(chi2, report.bg_lm_statistic));
  report.heteroskedastic_5pct = report.bg_p_value < 0.05;
  return report;
}

inline CapmResult capm_expected_return(double beta, double risk_free, double market_mean) noexcept {
  return {beta, risk_free, market_mean, risk_free + beta * (market_mean - risk_free)};
}

/// Forecast standard error at a new regressor row:
/// sqrt(s2 (1 + x' (X'X)^-1 x)) with x = [1, new_row].
/// `window_length` must equal the estimation sample size the fit used.
inline double prediction_se(const OlsFit& fit, std::span<const double> new_row, int window_length) {
  if (new_row.size() != fit.betas.size()) {
    throw Error(ErrorKind::MisalignedOffsets, "prediction row has " + std::to_string(new_row.size()) +
                                                  " entries for " + std::to_string(fit.betas.size()) +
                                                  " regressors");
  }
  if (window_length != fit.n_obs) {
    throw Error(ErrorKind::MisalignedOffsets, "window length " + std::to_string(window_length) +
                                                  " differs from the fit's " + std::to_string(fit.n_obs) +
                                                  " observations");
  }
  if (!(fit.s2 > 0.0)) throw Error(ErrorKind::ExactFitNoVariance, "residual variance is zero");
  Eigen::VectorXd x(static_cast<Eigen::Index>(new_row.size() + 1));
  x(0) = 1.0;
  for (std::size_t j = 0; j < new_row.size(); ++j) x(static_cast<Eigen::Index>(j + 1)) = new_row[j];
  const double quad = std::max(0.0, x.dot(fit.xtx_inverse * x));
  return std::sqrt(fit.s2 * (1.0 + quad));
}

}  // namespace crosslist
