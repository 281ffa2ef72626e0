#pragma once

// Gaussian maximum-likelihood estimation of a regression mean equation with
// GARCH(p, q) errors:
//
//   y_t = x_t' b + e_t,   e_t | past ~ N(0, h_t)
//   h_t = a0 + sum_{j=1..q} a_j e_{t-j}^2 + sum_{k=1..p} g_k h_{t-k}
//
// Pre-sample squared errors and variances are set to the sample variance of
// the OLS residuals. The optimizer works in transformed coordinates
// (log a0, softmax-with-slack over the a_j and g_k) so every accepted point
// has a0 > 0, a_j, g_k >= 0 and sum a_j + sum g_k < 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crosslist/detail/bfgs.hpp"
#include "crosslist/detail/random.hpp"
#include "crosslist/error.hpp"
#include "crosslist/linear_models.hpp"
#include "crosslist/stats_core.hpp"

namespace crosslist {

inline constexpr int kGarchLagCeiling = 2;
inline constexpr int kGarchMinObservations = 60;

struct GarchSpec {
  int p = 1;  // lagged conditional variances (gamma_k)
  int q = 1;  // lagged squared errors (alpha_j)

  void validate(int ceiling = kGarchLagCeiling) const {
    if (p < 0 || q < 0 || p > ceiling || q > ceiling) {
      throw Error(ErrorKind::InvalidSpec, "GARCH(" + std::to_string(p) + "," + std::to_string(q) +
                                              ") outside lag ceiling " + std::to_string(ceiling));
    }
  }
  friend bool operator==(const GarchSpec&, const GarchSpec&) = default;
};

struct GarchFit {
  GarchSpec spec;
  std::vector<double> mean_coefficients;  // intercept, then one loading per regressor
  double alpha0 = 0.0;
  std::vector<double> alphas;  // length q
  std::vector<double> gammas;  // length p
  std::vector<double> conditional_variances;
  std::vector<double> residuals;
  double log_likelihood = 0.0;
  std::vector<double> std_errors;  // mean coefficients, alpha0, alphas, gammas
  bool converged = false;
  int iterations = 0;
  double presample_variance = 0.0;

  double persistence() const {
    double s = 0.0;
    for (double a : alphas) s += a;
    for (double g : gammas) s += g;
    return s;
  }

  std::vector<double> parameters() const {
    std::vector<double> v = mean_coefficients;
    v.push_back(alpha0);
    v.insert(v.end(), alphas.begin(), alphas.end());
    v.insert(v.end(), gammas.begin(), gammas.end());
    return v;
  }

  /// Parameter / standard error, same layout as std_errors.
  std::vector<double> t_statistics() const {
    auto params = parameters();
    std::vector<double> t(params.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < params.size() && i < std_errors.size(); ++i) {
      if (std_errors[i] > 0.0) t[i] = params[i] / std_errors[i];
    }
    return t;
  }
};

struct GarchOptions {
  int max_iterations = 500;
  double tolerance = 1e-8;
  double hessian_step = 1e-4;  // relative finite-difference step for standard errors
};

inline double unconditional_variance(const GarchFit& fit) { return fit.alpha0 / (1.0 - fit.persistence()); }

namespace detail {

// Log-likelihood and its analytic gradient in natural parameters
// [b (k), a0, a_1..a_q, g_1..g_p]. Returns -inf when some h_t <= 0.
class GarchLikelihood {
 public:
  GarchLikelihood(std::span<const double> y, const Eigen::MatrixXd& design, GarchSpec spec, double presample)
      : y_(y), x_(design), spec_(spec), presample_(presample) {}

  Eigen::Index n_mean() const { return x_.cols(); }
  Eigen::Index n_params() const { return x_.cols() + 1 + spec_.q + spec_.p; }

  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, std::vector<double>* h_out = nullptr,
                  std::vector<double>* e_out = nullptr) const {
    const Eigen::Index k = n_mean();
    const Eigen::Index np = n_params();
    const auto n = static_cast<Eigen::Index>(y_.size());
    const int q = spec_.q, p = spec_.p;
    const double omega = theta(k);

    const Eigen::VectorXd e =
        Eigen::Map<const Eigen::VectorXd>(y_.data(), n) - x_ * theta.head(k);
    std::vector<double> h(static_cast<std::size_t>(n));
    Eigen::MatrixXd dh;
    if (grad) {
      dh.setZero(n, np);
      grad->setZero(np);
    }

    constexpr double log_two_pi = 1.8378770664093453;  // ln(2 pi)
    double ll = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      double ht = omega;
      for (int j = 1; j <= q; ++j) {
        const double a = theta(k + j);
        ht += a * (t - j >= 0 ? e(t - j) * e(t - j) : presample_);
      }
      for (int i = 1; i <= p; ++i) {
        const double g = theta(k + q + i);
        ht += g * (t - i >= 0 ? h[static_cast<std::size_t>(t - i)] : presample_);
      }
      if (!(ht > 0.0) || !std::isfinite(ht)) return -std::numeric_limits<double>::infinity();
      h[static_cast<std::size_t>(t)] = ht;
      const double et = e(t);
      ll -= 0.5 * (log_two_pi + std::log(ht) + et * et / ht);

      if (grad) {
        auto row = dh.row(t);
        row(k) = 1.0;
        for (int j = 1; j <= q; ++j) {
          const double a = theta(k + j);
          if (t - j >= 0) {
            const double ej = e(t - j);
            row(k + j) = ej * ej;
            row.head(k) += (-2.0 * a * ej) * x_.row(t - j);
          } else {
            row(k + j) = presample_;
          }
        }
        for (int i = 1; i <= p; ++i) {
          const double g = theta(k + q + i);
          if (t - i >= 0) {
            row(k + q + i) += h[static_cast<std::size_t>(t - i)];
            row += g * dh.row(t - i);
          } else {
            row(k + q + i) += presample_;
          }
        }
        const double w = -0.5 * (1.0 / ht - et * et / (ht * ht));
        *grad += w * row.transpose();
        grad->head(k) += (et / ht) * x_.row(t).transpose();
      }
    }
    if (h_out) *h_out = std::move(h);
    if (e_out) e_out->assign(e.data(), e.data() + n);
    return ll;
  }

 private:
  std::span<const double> y_;
  const Eigen::MatrixXd& x_;
  GarchSpec spec_;
  double presample_;
};

// Maps unconstrained z = [b, log a0, u_1..u_m] to natural parameters with
// w_i = exp(u_i) / (1 + sum exp(u)).
struct GarchTransform {
  Eigen::Index k = 0;
  int m = 0;

  Eigen::VectorXd to_natural(const Eigen::VectorXd& z) const {
    Eigen::VectorXd theta = z;
    theta(k) = std::exp(z(k));
    if (m > 0) {
      const Eigen::VectorXd u = z.tail(m);
      const double top = std::max(0.0, u.maxCoeff());
      const Eigen::VectorXd ex = (u.array() - top).exp();
      const double denom = std::exp(-top) + ex.sum();
      theta.tail(m) = ex / denom;
    }
    return theta;
  }

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd z = theta;
    z(k) = std::log(theta(k));
    if (m > 0) {
      const double slack = 1.0 - theta.tail(m).sum();
      for (int i = 0; i < m; ++i) z(k + 1 + i) = std::log(theta(k + 1 + i) / slack);
    }
    return z;
  }

  Eigen::VectorXd chain(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad_natural) const {
    Eigen::VectorXd g = grad_natural;
    g(k) = grad_natural(k) * theta(k);
    if (m > 0) {
      const Eigen::VectorXd w = theta.tail(m);
      const Eigen::VectorXd gw = grad_natural.tail(m);
      const double avg = w.dot(gw);
      g.tail(m) = w.array() * (gw.array() - avg);
    }
    return g;
  }
};

inline Eigen::MatrixXd seed_inverse_hessian(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
                                            const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd gp(n), gm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = 1e-5 * std::max(1.0, std::abs(z(i)));
    Eigen::VectorXd zp = z, zm = z;
    zp(i) += step;
    zm(i) -= step;
    const double fp = f(zp, gp);
    const double fm = f(zm, gm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) return Eigen::MatrixXd::Identity(n, n) * 1e-4;
    hess.col(i) = (gp - gm) / (2.0 * step);
  }
  hess = 0.5 * (hess + hess.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() == Eigen::Success) return llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) diag(i, i) = 1.0 / std::max(std::abs(hess(i, i)), 1e-8);
  return diag;
}

inline std::vector<double> garch_standard_errors(const GarchLikelihood& lik, const Eigen::VectorXd& theta,
                                                 double rel_step) {
  const Eigen::Index n = theta.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd gp(n), gm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = theta(i) != 0.0 ? rel_step * std::abs(theta(i)) : rel_step * 1e-4;
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += step;
    tm(i) -= step;
    const double fp = lik.evaluate(tp, &gp);
    const double fm = lik.evaluate(tm, &gm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      return std::vector<double>(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    }
    hess.col(i) = (gp - gm) / (2.0 * step);
  }
  const Eigen::MatrixXd info = -0.5 * (hess + hess.transpose());
  std::vector<double> se(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (!lu.isInvertible()) return se;
  const Eigen::MatrixXd cov = lu.inverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cov(i, i) > 0.0) se[static_cast<std::size_t>(i)] = std::sqrt(cov(i, i));
  }
  return se;
}

}  // namespace detail

/// GARCH(p, q) regression of y on an intercept plus `regressors`.
inline GarchFit fit_garch_regression(std::span<const double> y, const Regressors& regressors, GarchSpec spec,
                                     const GarchOptions& options = {}) {
  spec.validate();
  if (y.size() < static_cast<std::size_t>(kGarchMinObservations)) {
    throw Error(ErrorKind::SeriesTooShort, "GARCH estimation needs at least " +
                                               std::to_string(kGarchMinObservations) + " observations, got " +
                                               std::to_string(y.size()));
  }
  const OlsFit ols = ols_fit(y, regressors);
  if (ols.exact_fit) throw Error(ErrorKind::ExactFitNoVariance, "mean equation fits exactly");

  const Eigen::MatrixXd design = detail::design_matrix(regressors, y.size());
  const Eigen::Index k = design.cols();
  const int m = spec.p + spec.q;
  const double n = static_cast<double>(y.size());
  const double ssr = [&] {
    double s = 0.0;
    for (double e : ols.residuals) s += e * e;
    return s;
  }();
  const double presample = sample_variance(ols.residuals);
  const double sigma2_mle = ssr / n;

  detail::GarchLikelihood lik(y, design, spec, presample);

  Eigen::VectorXd ols_coef(k);
  ols_coef(0) = ols.alpha;
  for (Eigen::Index j = 1; j < k; ++j) ols_coef(j) = ols.betas[static_cast<std::size_t>(j - 1)];

  auto make_theta = [&](double alpha_total, double gamma_total) {
    Eigen::VectorXd theta(lik.n_params());
    theta.head(k) = ols_coef;
    const double persist = (spec.q > 0 ? alpha_total : 0.0) + (spec.p > 0 ? gamma_total : 0.0);
    theta(k) = presample * (1.0 - persist);
    for (int j = 0; j < spec.q; ++j) theta(k + 1 + j) = alpha_total / spec.q;
    for (int i = 0; i < spec.p; ++i) theta(k + 1 + spec.q + i) = gamma_total / spec.p;
    return theta;
  };

  Eigen::VectorXd best_theta(lik.n_params());
  bool converged = true;
  int iterations = 0;

  if (m == 0) {
    // Homoskedastic MLE in closed form.
    best_theta.head(k) = ols_coef;
    best_theta(k) = sigma2_mle;
  } else {
    const detail::GarchTransform transform{k, m};
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> objective =
        [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
          const Eigen::VectorXd theta = transform.to_natural(z);
          Eigen::VectorXd gn(theta.size());
          const double ll = lik.evaluate(theta, &gn);
          if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
          g = -transform.chain(theta, gn);
          return -ll;
        };

    // Boundary reference: homoskedastic optimum nudged into the interior.
    Eigen::VectorXd boundary(lik.n_params());
    boundary.head(k) = ols_coef;
    boundary.tail(m).setConstant(1e-6);
    boundary(k) = sigma2_mle * (1.0 - 1e-6 * m);

    const std::vector<Eigen::VectorXd> starts{make_theta(0.05, 0.90), make_theta(0.05, 0.50), boundary};
    double best_ll = -std::numeric_limits<double>::infinity();
    bool any_finite = false;
    const detail::BfgsOptions bfgs_options{options.max_iterations, options.tolerance, 50};
    for (const auto& start : starts) {
      const Eigen::VectorXd z0 = transform.to_unconstrained(start);
      Eigen::VectorXd g0(z0.size());
      if (!std::isfinite(objective(z0, g0))) continue;
      any_finite = true;
      const Eigen::MatrixXd h0 = detail::seed_inverse_hessian(objective, z0);
      const auto result = detail::bfgs_minimize(objective, z0, h0, bfgs_options);
      const double ll = -result.value;
      if (std::isfinite(ll) && ll > best_ll + 1e-10) {
        best_ll = ll;
        best_theta = transform.to_natural(result.x);
        converged = result.converged;
        iterations = result.iterations;
      }
    }
    if (!any_finite || !std::isfinite(best_ll)) {
      throw Error(ErrorKind::NonFiniteLikelihood, "log-likelihood is not finite at any starting point");
    }
  }

  GarchFit fit;
  fit.spec = spec;
  fit.presample_variance = presample;
  fit.converged = converged;
  fit.iterations = iterations;
  fit.log_likelihood = lik.evaluate(best_theta, nullptr, &fit.conditional_variances, &fit.residuals);
  if (!std::isfinite(fit.log_likelihood)) {
    throw Error(ErrorKind::NonFiniteLikelihood, "log-likelihood is not finite at the optimum");
  }
  fit.mean_coefficients.assign(best_theta.data(), best_theta.data() + k);
  fit.alpha0 = best_theta(k);
  for (int j = 0; j < spec.q; ++j) fit.alphas.push_back(best_theta(k + 1 + j));
  for (int i = 0; i < spec.p; ++i) fit.gammas.push_back(best_theta(k + 1 + spec.q + i));
  fit.std_errors = detail::garch_standard_errors(lik, best_theta, options.hessian_step);
  return fit;
}

/// Two-index market model: y on [1, local index, US index].
inline GarchFit fit_garch_market_model(const ReturnSeries& y, const ReturnSeries& local_index,
                                       const ReturnSeries& us_index, GarchSpec spec,
                                       const GarchOptions& options = {}) {
  if (y.size() != local_index.size() || y.size() != us_index.size()) {
    throw Error(ErrorKind::MisalignedOffsets, "market-model series lengths differ");
  }
  if (!y.dates.empty() && (y.dates != local_index.dates || y.dates != us_index.dates)) {
    throw Error(ErrorKind::MisalignedOffsets, "market-model series are not date-aligned");
  }
  return fit_garch_regression(y.values, {local_index.values, us_index.values}, spec, options);
}

struct LagSelection {
  GarchSpec spec;
  GarchFit fit;
  bool fell_back = false;  // no candidate had all lag coefficients significant
  std::vector<std::pair<GarchSpec, double>> candidates;  // spec, log-likelihood
};

struct LagSelectionOptions {
  bool include_homoskedastic = false;  // add (0,0) to the search set
  double t_threshold = 1.96;
  GarchOptions garch;
};

/// Searches GARCH(p, q) for 1 <= p <= max_p, 1 <= q <= max_q (plus (0,0) when
/// configured) and keeps the highest-likelihood fit whose every alpha_j and
/// gamma_k has |t| >= threshold. Falls back to (1,1).
inline LagSelection select_lags(std::span<const double> y, const Regressors& regressors, int max_p, int max_q,
                                const LagSelectionOptions& options = {}) {
  if (max_p < 1 || max_q < 1 || max_p > kGarchLagCeiling || max_q > kGarchLagCeiling) {
    throw Error(ErrorKind::InvalidSpec, "lag search bounds must lie in [1, " +
                                            std::to_string(kGarchLagCeiling) + "]");
  }
  std::vector<GarchSpec> specs;
  if (options.include_homoskedastic) specs.push_back({0, 0});
  for (int p = 1; p <= max_p; ++p) {
    for (int q = 1; q <= max_q; ++q) specs.push_back({p, q});
  }

  LagSelection selection;
  std::optional<GarchFit> best, fallback;
  for (const auto& spec : specs) {
    GarchFit fit = fit_garch_regression(y, regressors, spec, options.garch);
    selection.candidates.emplace_back(spec, fit.log_likelihood);
    const auto t = fit.t_statistics();
    bool significant = true;
    for (std::size_t i = fit.mean_coefficients.size() + 1; i < t.size(); ++i) {
      if (!(std::abs(t[i]) >= options.t_threshold)) significant = false;
    }
    if (significant && (!best || fit.log_likelihood > best->log_likelihood)) best = fit;
    if (spec == GarchSpec{1, 1}) fallback = std::move(fit);
  }
  if (best) {
    selection.spec = best->spec;
    selection.fit = std::move(*best);
  } else {
    selection.spec = {1, 1};
    selection.fit = std::move(*fallback);
    selection.fell_back = true;
  }
  return selection;
}

inline LagSelection select_lags(const ReturnSeries& y, const ReturnSeries& local_index,
                                const ReturnSeries& us_index, int max_p, int max_q,
                                const LagSelectionOptions& options = {}) {
  if (y.size() != local_index.size() || y.size() != us_index.size()) {
    throw Error(ErrorKind::MisalignedOffsets, "market-model series lengths differ");
  }
  return select_lags(y.values, {local_index.values, us_index.values}, max_p, max_q, options);
}

// ---------------------------------------------------------------------------
// Simulation

struct GarchSimConfig {
  GarchSpec spec;
  std::vector<double> true_mean_coefficients;  // intercept, local loading, US loading
  double alpha0 = 0.0;
  std::vector<double> alphas;
  std::vector<double> gammas;
  int length = 0;
  std::uint64_t seed = 0;
};

inline void validate_stationary(double alpha0, std::span<const double> alphas, std::span<const double> gammas) {
  double persist = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw Error(ErrorKind::NonStationaryParameters, "negative ARCH coefficient");
    persist += a;
  }
  for (double g : gammas) {
    if (!(g >= 0.0)) throw Error(ErrorKind::NonStationaryParameters, "negative GARCH coefficient");
    persist += g;
  }
  if (!(alpha0 > 0.0)) throw Error(ErrorKind::NonStationaryParameters, "alpha0 must be positive");
  if (!(persist < 1.0)) throw Error(ErrorKind::NonStationaryParameters, "persistence must be below 1");
}

/// GARCH errors started at the unconditional variance (pre-sample terms too).
inline std::vector<double> simulate_garch_errors(double alpha0, std::span<const double> alphas,
                                                 std::span<const double> gammas, std::size_t length,
                                                 detail::NormalGenerator& normal,
                                                 std::vector<double>* variances = nullptr) {
  validate_stationary(alpha0, alphas, gammas);
  double persist = 0.0;
  for (double a : alphas) persist += a;
  for (double g : gammas) persist += g;
  const double h_inf = alpha0 / (1.0 - persist);
  std::vector<double> e(length), h(length);
  for (std::size_t t = 0; t < length; ++t) {
    double ht = alpha0;
    for (std::size_t j = 1; j <= alphas.size(); ++j) ht += alphas[j - 1] * (t >= j ? e[t - j] * e[t - j] : h_inf);
    for (std::size_t i = 1; i <= gammas.size(); ++i) ht += gammas[i - 1] * (t >= i ? h[t - i] : h_inf);
    h[t] = ht;
    e[t] = std::sqrt(ht) * normal();
  }
  if (variances) *variances = std::move(h);
  return e;
}

/// Simulates y_t = c + b_local x_local,t + b_us x_us,t + e_t over the first
/// `length` index observations.
inline ReturnSeries simulate_garch(const GarchSimConfig& config, const ReturnSeries& local_index,
                                   const ReturnSeries& us_index) {
  config.spec.validate();
  if (static_cast<int>(config.alphas.size()) != config.spec.q ||
      static_cast<int>(config.gammas.size()) != config.spec.p) {
    throw Error(ErrorKind::InvalidSpec, "coefficient counts do not match the GARCH spec");
  }
  if (config.true_mean_coefficients.size() != 3) {
    throw Error(ErrorKind::InvalidSpec, "mean equation needs intercept, local and US loadings");
  }
  const auto len = static_cast<std::size_t>(config.length);
  if (config.length <= 0 || local_index.size() < len || us_index.size() < len) {
    throw Error(ErrorKind::SeriesTooShort, "index series shorter than the simulation length");
  }
  detail::NormalGenerator normal(config.seed);
  const auto e = simulate_garch_errors(config.alpha0, config.alphas, config.gammas, len, normal);
  ReturnSeries out;
  out.instrument_id = "simulated";
  if (local_index.dates.size() >= len) out.dates.assign(local_index.dates.begin(), local_index.dates.begin() + static_cast<long>(len));
  out.values.resize(len);
  const auto& b = config.true_mean_coefficients;
  for (std::size_t t = 0; t < len; ++t) {
    out.values[t] = b[0] + b[1] * local_index.values[t] + b[2] * us_index.values[t] + e[t];
  }
  return out;
}

}  // namespace crosslist
