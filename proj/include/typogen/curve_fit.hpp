#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "typogen/errors.hpp"

namespace typogen {

// Fitted parameters of y = a + b * exp(-((x + c) / d)^2): a vertical offset, b the
// bump amplitude, c a horizontal shift, d the bump width.
struct CurveFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double rss = 0.0;
  std::string family = "offset_gaussian";
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;            // flat input; b = 0 and d unidentifiable
  std::vector<double> rss_history;    // RSS after every accepted step

  double evaluate(double x) const {
    const double u = (x + c) / d;
    return a + b * std::exp(-u * u);
  }
};

struct CurveFitOptions {
  int max_iterations = 500;
  double rss_tol = 1e-10;   // relative RSS change
  double grad_tol = 1e-8;   // sup-norm of the RSS gradient
  std::optional<std::array<double, 4>> init;  // a, b, c, d
};

// Non-convergence carrying the best parameters seen so far.
class CurveFitError : public NumericError {
 public:
  CurveFitError(const std::string& msg, CurveFit best)
      : NumericError(msg), best_so_far(std::move(best)) {}
  CurveFit best_so_far;
};

namespace detail {

inline double curve_rss(const std::vector<std::pair<double, double>>& pts, double a, double b,
                        double c, double d) {
  double rss = 0.0;
  for (const auto& [x, y] : pts) {
    const double u = (x + c) / d;
    const double r = y - a - b * std::exp(-u * u);
    rss += r * r;
  }
  return rss;
}

}  // namespace detail

// Least squares by damped Gauss-Newton (Levenberg-Marquardt schedule). Accepted
// steps never increase the RSS; the damping factor grows on rejection and shrinks
// on acceptance. Default initialization: a = min(y), b = max(y) - min(y),
// c = 1 - argmax rank, d = (#points)/4.
inline CurveFit fit_rank_frequency_curve(const std::vector<std::pair<double, double>>& points,
                                         const CurveFitOptions& opts = {}) {
  constexpr int kParams = 4;
  if (points.size() < 5)
    throw DataError("fit_rank_frequency_curve: need at least 5 points");
  for (const auto& [x, y] : points)
    if (y < 0.0) throw DataError("fit_rank_frequency_curve: counts must be nonnegative");

  const std::size_t m = points.size();
  double ymin = points[0].second, ymax = points[0].second, xmax = points[0].first;
  for (const auto& [x, y] : points) {
    if (y < ymin) ymin = y;
    if (y > ymax) {
      ymax = y;
      xmax = x;
    }
  }

  CurveFit fit;
  if (opts.init) {
    fit.a = (*opts.init)[0];
    fit.b = (*opts.init)[1];
    fit.c = (*opts.init)[2];
    fit.d = (*opts.init)[3];
    if (fit.d <= 0.0) throw ConfigError("fit_rank_frequency_curve: init must have d > 0");
  } else {
    fit.a = ymin;
    fit.b = ymax - ymin;
    fit.c = 1.0 - xmax;
    fit.d = static_cast<double>(m) / 4.0;
  }

  if (ymax == ymin) {
    // Flat counts: the bump is absent and its shape parameters mean nothing.
    fit.a = ymin;
    fit.b = 0.0;
    fit.rss = 0.0;
    fit.degenerate = true;
    fit.converged = true;
    fit.rss_history = {0.0};
    return fit;
  }

  double rss = detail::curve_rss(points, fit.a, fit.b, fit.c, fit.d);
  fit.rss_history.push_back(rss);
  double lambda = 1e-3;

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), kParams);
  Eigen::VectorXd resid(static_cast<Eigen::Index>(m));

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    fit.iterations = iter;
    for (std::size_t i = 0; i < m; ++i) {
      const auto [x, y] = points[i];
      const double u = (x + fit.c) / fit.d;
      const double e = std::exp(-u * u);
      resid(static_cast<Eigen::Index>(i)) = y - fit.a - fit.b * e;
      // dr/dtheta for r = y - f(x; theta)
      jac(static_cast<Eigen::Index>(i), 0) = -1.0;
      jac(static_cast<Eigen::Index>(i), 1) = -e;
      jac(static_cast<Eigen::Index>(i), 2) = fit.b * e * 2.0 * u / fit.d;
      jac(static_cast<Eigen::Index>(i), 3) = -fit.b * e * 2.0 * u * u / fit.d;
    }
    const Eigen::VectorXd grad = 2.0 * jac.transpose() * resid;  // gradient of RSS
    // Absolute tolerance per the contract, with a scale-aware fallback so that
    // stationarity is still detected when the RSS floor is far from zero.
    const double grad_tol = std::max(opts.grad_tol, 1e-9 * (1.0 + rss));
    if (grad.lpNorm<Eigen::Infinity>() < grad_tol) {
      fit.converged = true;
      break;
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (int k = 0; k < kParams; ++k)
        damped(k, k) += lambda * (jtj(k, k) > 0.0 ? jtj(k, k) : 1.0);
      const Eigen::VectorXd step = damped.ldlt().solve(-jac.transpose() * resid);
      double na = fit.a + step(0), nb = fit.b + step(1), nc = fit.c + step(2),
             nd = fit.d + step(3);
      // The model depends on d only through d^2; keep the canonical positive root.
      nd = std::fabs(nd);
      if (nd > 0.0 && std::isfinite(na) && std::isfinite(nb) && std::isfinite(nc)) {
        const double nrss = detail::curve_rss(points, na, nb, nc, nd);
        if (std::isfinite(nrss) && nrss <= rss) {
          const double rel_change = (rss - nrss) / (rss > 0.0 ? rss : 1.0);
          fit.a = na;
          fit.b = nb;
          fit.c = nc;
          fit.d = nd;
          rss = nrss;
          fit.rss_history.push_back(rss);
          lambda = std::max(lambda * 0.3, 1e-12);
          accepted = true;
          if (rel_change < opts.rss_tol) fit.converged = true;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (fit.converged) break;
    if (!accepted) {
      // No downhill step exists at any damping: treat as a stationary point.
      fit.converged = true;
      break;
    }
  }

  fit.rss = rss;
  if (!fit.converged)
    throw CurveFitError("fit_rank_frequency_curve: no convergence after " +
                            std::to_string(opts.max_iterations) + " iterations",
                        fit);
  return fit;
}

}  // namespace typogen
