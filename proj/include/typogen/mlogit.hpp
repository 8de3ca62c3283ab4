#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "typogen/errors.hpp"
#include "typogen/scoring.hpp"
#include "typogen/stats.hpp"

namespace typogen {

struct ModelSpec {
  std::string outcome;           // name of the typology assignment column
  std::string reference_class;   // empty: most populous class (ties: smallest label)
  std::vector<std::string> predictors;
};

struct FitOptions {
  double grad_tol = 1e-6;        // sup-norm of the log-likelihood gradient
  int max_iterations = 1000;
  double separation_bound = 30.0;  // on standardized coefficients
  std::string excluded_label = "EXCLUDED";
};

struct MlogitFit {
  std::vector<std::string> class_labels;  // non-reference classes, sorted
  std::string reference;
  std::vector<std::string> predictors;
  // (K-1) x (1+P); column 0 is the intercept, on the original predictor scale.
  Eigen::MatrixXd coefficients;
  double log_likelihood = 0.0;
  double aic = 0.0;
  std::size_t n_used = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> ll_history;             // after every accepted step
  Eigen::MatrixXd probabilities;              // n_used x K; column 0 = reference
  std::vector<std::size_t> used_rows;         // row indices into the source table

  std::size_t n_classes() const { return class_labels.size() + 1; }
  std::size_t n_free_parameters() const {
    return class_labels.size() * (predictors.size() + 1);
  }

  // Predicted label of used-row i (argmax probability).
  std::string predicted_class(std::size_t i) const {
    Eigen::Index jmax = 0;
    probabilities.row(static_cast<Eigen::Index>(i)).maxCoeff(&jmax);
    return jmax == 0 ? reference : class_labels[static_cast<std::size_t>(jmax - 1)];
  }
};

namespace detail {

// Log-likelihood of the reference-coded multinomial logit. design carries the
// intercept column; theta is (K-1) x design.cols(); y holds class indices with
// 0 = reference.
inline double mlogit_log_likelihood(const Eigen::MatrixXd& design, const std::vector<int>& y,
                                    const Eigen::MatrixXd& theta) {
  const Eigen::Index n = design.rows();
  const Eigen::MatrixXd eta = design * theta.transpose();  // n x (K-1)
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = 0.0;
    for (Eigen::Index c = 0; c < eta.cols(); ++c) mx = std::max(mx, eta(i, c));
    double lse = std::exp(-mx);
    for (Eigen::Index c = 0; c < eta.cols(); ++c) lse += std::exp(eta(i, c) - mx);
    const double log_denom = mx + std::log(lse);
    const int yi = y[static_cast<std::size_t>(i)];
    ll += (yi == 0 ? 0.0 : eta(i, yi - 1)) - log_denom;
  }
  return ll;
}

inline Eigen::MatrixXd mlogit_probabilities(const Eigen::MatrixXd& design,
                                            const Eigen::MatrixXd& theta) {
  const Eigen::Index n = design.rows();
  const Eigen::Index km1 = theta.rows();
  const Eigen::MatrixXd eta = design * theta.transpose();
  Eigen::MatrixXd probs(n, km1 + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = 0.0;
    for (Eigen::Index c = 0; c < km1; ++c) mx = std::max(mx, eta(i, c));
    double denom = std::exp(-mx);
    for (Eigen::Index c = 0; c < km1; ++c) denom += std::exp(eta(i, c) - mx);
    probs(i, 0) = std::exp(-mx) / denom;
    for (Eigen::Index c = 0; c < km1; ++c) probs(i, c + 1) = std::exp(eta(i, c) - mx) / denom;
  }
  return probs;
}

// Gradient of the log-likelihood with respect to theta, same shape as theta.
inline Eigen::MatrixXd mlogit_gradient(const Eigen::MatrixXd& design, const std::vector<int>& y,
                                       const Eigen::MatrixXd& theta) {
  const Eigen::Index n = design.rows();
  const Eigen::Index km1 = theta.rows();
  const Eigen::MatrixXd probs = mlogit_probabilities(design, theta);
  Eigen::MatrixXd resid(n, km1);  // indicator minus probability, non-reference classes
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < km1; ++c)
      resid(i, c) = (y[static_cast<std::size_t>(i)] == c + 1 ? 1.0 : 0.0) - probs(i, c + 1);
  return resid.transpose() * design;
}

}  // namespace detail

// Maximum-likelihood multinomial logistic regression with reference-class coding.
// Predictors are standardized internally for conditioning; reported coefficients
// are on the original scale. Quasi-Newton (BFGS) ascent with a backtracking line
// search; accepted steps never decrease the log-likelihood.
inline MlogitFit fit_mlogit(const PredictorTable& table, const std::vector<std::string>& outcome,
                            const ModelSpec& spec, const FitOptions& opts = {}) {
  if (outcome.size() != static_cast<std::size_t>(table.values.rows()))
    throw DataError("fit_mlogit: outcome length does not match table rows");

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < outcome.size(); ++i)
    if (outcome[i] != opts.excluded_label) rows.push_back(i);
  const std::size_t n = rows.size();
  if (n == 0) throw DataError("fit_mlogit: no usable rows");

  // Class bookkeeping: reference defaults to the most populous label.
  std::map<std::string, std::size_t> class_counts;
  for (auto r : rows) ++class_counts[outcome[r]];
  if (class_counts.size() < 2) throw DataError("fit_mlogit: need at least 2 outcome classes");
  std::string reference = spec.reference_class;
  if (reference.empty()) {
    std::size_t best = 0;
    for (const auto& [label, cnt] : class_counts)
      if (cnt > best) {
        best = cnt;
        reference = label;
      }
  } else if (!class_counts.count(reference)) {
    throw DataError("fit_mlogit: reference class '" + reference + "' absent from outcome");
  }
  std::vector<std::string> class_labels;
  for (const auto& [label, cnt] : class_counts)
    if (label != reference) class_labels.push_back(label);

  const std::size_t km1 = class_labels.size();
  const std::size_t p = spec.predictors.size();
  if (n <= km1 * (p + 1))
    throw DataError("fit_mlogit: n_used must exceed the number of free parameters");

  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& label = outcome[rows[i]];
    if (label == reference) {
      y[i] = 0;
    } else {
      const auto it = std::find(class_labels.begin(), class_labels.end(), label);
      y[i] = static_cast<int>(it - class_labels.begin()) + 1;
    }
  }

  // Standardized design with intercept.
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p + 1));
  design.col(0).setOnes();
  Eigen::VectorXd mu(static_cast<Eigen::Index>(p)), sigma(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    const Eigen::Index cj = table.column_index(spec.predictors[j]);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      x(static_cast<Eigen::Index>(i)) = table.values(static_cast<Eigen::Index>(rows[i]), cj);
    const double m = x.mean();
    const double sd = std::sqrt((x.array() - m).square().sum() / static_cast<double>(n - 1));
    if (sd == 0.0)
      throw DataError("fit_mlogit: predictor is constant: " + spec.predictors[j]);
    mu(static_cast<Eigen::Index>(j)) = m;
    sigma(static_cast<Eigen::Index>(j)) = sd;
    design.col(static_cast<Eigen::Index>(j + 1)) = (x.array() - m) / sd;
  }

  // Exact collinearity is unidentifiable; name the offending columns.
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
      const auto perm = qr.colsPermutation().indices();
      std::string names;
      for (Eigen::Index k = qr.rank(); k < design.cols(); ++k) {
        const Eigen::Index col = perm(k);
        if (!names.empty()) names += ", ";
        names += col == 0 ? "(intercept)" : spec.predictors[static_cast<std::size_t>(col - 1)];
      }
      throw DataError("fit_mlogit: rank-deficient design; collinear columns: " + names);
    }
  }

  // theta: (K-1) x (1+P) on the standardized scale. Intercepts start at the
  // log count ratios (the exact MLE of the intercept-only model), slopes at zero.
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(km1),
                                                static_cast<Eigen::Index>(p + 1));
  const double ref_count = static_cast<double>(class_counts.at(reference));
  for (std::size_t c = 0; c < km1; ++c)
    theta(static_cast<Eigen::Index>(c), 0) =
        std::log(static_cast<double>(class_counts.at(class_labels[c])) / ref_count);

  const Eigen::Index dim = theta.size();
  auto flatten = [&](const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()).eval();
  };
  auto unflatten = [&](const Eigen::VectorXd& v) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), theta.rows(), theta.cols()).eval();
  };

  auto check_separation = [&](const Eigen::MatrixXd& th) {
    for (Eigen::Index c = 0; c < th.rows(); ++c)
      for (Eigen::Index j = 1; j < th.cols(); ++j)
        if (std::fabs(th(c, j)) > opts.separation_bound)
          throw NumericError("fit_mlogit: separation detected on predictor '" +
                             spec.predictors[static_cast<std::size_t>(j - 1)] + "' for class '" +
                             class_labels[static_cast<std::size_t>(c)] + "'");
  };

  MlogitFit fit;
  fit.class_labels = class_labels;
  fit.reference = reference;
  fit.predictors = spec.predictors;
  fit.n_used = n;
  fit.used_rows = rows;

  Eigen::VectorXd x = flatten(theta);
  double ll = detail::mlogit_log_likelihood(design, y, theta);
  Eigen::VectorXd grad = flatten(detail::mlogit_gradient(design, y, theta));
  fit.ll_history.push_back(ll);

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
  int iter = 0;
  bool converged = grad.lpNorm<Eigen::Infinity>() < opts.grad_tol;
  while (!converged && iter < opts.max_iterations) {
    ++iter;
    Eigen::VectorXd direction = hinv * grad;  // ascent direction
    if (direction.dot(grad) <= 0.0) {
      hinv = Eigen::MatrixXd::Identity(dim, dim);
      direction = grad;
    }

    double t = 1.0;
    const double slope = grad.dot(direction);
    double new_ll = ll;
    Eigen::VectorXd x_new = x;
    bool stepped = false;
    while (t > 1e-14) {
      x_new = x + t * direction;
      new_ll = detail::mlogit_log_likelihood(design, y, unflatten(x_new));
      if (std::isfinite(new_ll) && new_ll >= ll + 1e-4 * t * slope) {
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) break;  // no ascent possible at machine precision

    const Eigen::VectorXd grad_new = flatten(detail::mlogit_gradient(design, y, unflatten(x_new)));
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = grad - grad_new;  // gradient of -ll increases
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const Eigen::VectorXd hy = hinv * yv;
      const double yhy = yv.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    x = x_new;
    ll = new_ll;
    grad = grad_new;
    fit.ll_history.push_back(ll);
    check_separation(unflatten(x));
    converged = grad.lpNorm<Eigen::Infinity>() < opts.grad_tol;
  }

  theta = unflatten(x);
  check_separation(theta);
  fit.iterations = iter;
  fit.converged = converged;
  if (!converged)
    throw NumericError("fit_mlogit: no convergence after " + std::to_string(iter) +
                       " iterations (gradient sup-norm " +
                       std::to_string(grad.lpNorm<Eigen::Infinity>()) + ")");

  fit.log_likelihood = ll;
  fit.aic = 2.0 * static_cast<double>(fit.n_free_parameters()) - 2.0 * ll;
  fit.probabilities = detail::mlogit_probabilities(design, theta);

  // Back to the original predictor scale.
  fit.coefficients = theta;
  for (Eigen::Index c = 0; c < theta.rows(); ++c) {
    double shift = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double bj = theta(c, static_cast<Eigen::Index>(j + 1)) /
                        sigma(static_cast<Eigen::Index>(j));
      fit.coefficients(c, static_cast<Eigen::Index>(j + 1)) = bj;
      shift += bj * mu(static_cast<Eigen::Index>(j));
    }
    fit.coefficients(c, 0) = theta(c, 0) - shift;
  }
  return fit;
}

// Elementwise exponential of the non-intercept coefficients:
// (K-1) classes x P predictors.
inline Eigen::MatrixXd odds_ratios(const MlogitFit& fit) {
  if (!fit.converged) throw NumericError("odds_ratios: fit did not converge");
  return fit.coefficients.rightCols(fit.coefficients.cols() - 1).array().exp();
}

struct LrtResult {
  std::string predictor;
  double deviance = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::string stars;
};

inline std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

// Likelihood-ratio test dropping one predictor's coefficients across all classes:
// deviance 2(l_full - l_reduced) against chi-square with #classes - 1 df.
inline LrtResult lrt(const PredictorTable& table, const std::vector<std::string>& outcome,
                     const ModelSpec& spec, const MlogitFit& full_fit,
                     const std::string& predictor, const FitOptions& opts = {}) {
  if (std::find(spec.predictors.begin(), spec.predictors.end(), predictor) ==
      spec.predictors.end())
    throw ConfigError("lrt: predictor '" + predictor + "' not in model spec");
  ModelSpec reduced = spec;
  reduced.reference_class = full_fit.reference;
  std::erase(reduced.predictors, predictor);
  const MlogitFit rfit = fit_mlogit(table, outcome, reduced, opts);
  LrtResult res;
  res.predictor = predictor;
  res.deviance = 2.0 * (full_fit.log_likelihood - rfit.log_likelihood);
  res.df = static_cast<int>(full_fit.n_classes()) - 1;
  res.p_value = stats::chi_squared_upper_tail(std::max(res.deviance, 0.0),
                                              static_cast<double>(res.df));
  res.stars = significance_stars(res.p_value);
  return res;
}

}  // namespace typogen
