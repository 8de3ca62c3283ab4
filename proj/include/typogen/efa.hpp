#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "typogen/errors.hpp"

namespace typogen {

// Common-factor decomposition of an item correlation matrix: loadings on the
// shared factors plus per-item uniquenesses.
struct FactorModel {
  std::vector<std::string> items;
  Eigen::MatrixXd loadings;  // items x factors
  Eigen::VectorXd communalities;
  Eigen::VectorXd uniquenesses;
  std::vector<double> variance_explained;  // per factor, fraction of total item variance
  std::vector<double> cumulative_variance;
  std::vector<int> assignment;   // item -> factor, -1 when no loading clears the threshold
  std::vector<double> alphas;    // per factor; NaN when fewer than 2 items assigned
  bool heywood = false;
  int iterations = 0;
  bool converged = false;
};

class EfaError : public NumericError {
 public:
  EfaError(const std::string& msg, FactorModel last)
      : NumericError(msg), last_iterate(std::move(last)) {}
  FactorModel last_iterate;
};

struct EfaOptions {
  double tol = 1e-6;  // max communality change
  int max_iterations = 200;
};

namespace detail {

// Largest-|value| entry of each column made positive.
inline void apply_sign_convention(Eigen::MatrixXd& loadings) {
  for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
    Eigen::Index imax = 0;
    loadings.col(j).cwiseAbs().maxCoeff(&imax);
    if (loadings(imax, j) < 0.0) loadings.col(j) = -loadings.col(j);
  }
}

// Columns reordered by descending sum of squared loadings.
inline void order_columns_by_ss(Eigen::MatrixXd& loadings) {
  const Eigen::Index k = loadings.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return loadings.col(a).squaredNorm() > loadings.col(b).squaredNorm();
  });
  Eigen::MatrixXd sorted(loadings.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) sorted.col(j) = loadings.col(order[static_cast<std::size_t>(j)]);
  loadings = sorted;
}

inline void check_correlation_matrix(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols()) throw DataError("efa: correlation matrix must be square");
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw DataError("efa: correlation matrix must be symmetric");
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    if (std::fabs(r(i, i) - 1.0) > 1e-8)
      throw DataError("efa: correlation matrix must have unit diagonal");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw DataError("efa: correlation matrix is not positive semidefinite");
}

}  // namespace detail

// Pearson correlation matrix of data columns.
inline Eigen::MatrixXd correlation_from_data(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows(), p = data.cols();
  if (n < 2) throw DataError("correlation_from_data: need at least 2 rows");
  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::VectorXd sd(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    sd(j) = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (sd(j) == 0.0)
      throw DataError("correlation_from_data: column " + std::to_string(j) + " is constant");
  }
  Eigen::MatrixXd r = (centered.transpose() * centered) / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) r(i, j) /= sd(i) * sd(j);
  for (Eigen::Index i = 0; i < p; ++i) r(i, i) = 1.0;
  return r;
}

// Principal-axis factoring. Communalities start at the squared multiple
// correlations and are refined by iterated eigendecomposition of the reduced
// correlation matrix until the largest communality change falls under tol.
// Communalities above 1 (Heywood cases) are clamped to 1 - 1e-6 and flagged.
inline FactorModel efa(const Eigen::MatrixXd& corr, int n_factors, const EfaOptions& opts = {}) {
  detail::check_correlation_matrix(corr);
  const Eigen::Index p = corr.rows();
  if (n_factors < 1 || n_factors >= p)
    throw ConfigError("efa: n_factors must satisfy 1 <= n_factors < #items");

  FactorModel model;

  // Squared multiple correlations: 1 - 1/diag(R^-1). Falls back to the largest
  // absolute off-diagonal correlation when R is numerically singular.
  Eigen::VectorXd h(p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd rinv = lu.inverse();
    for (Eigen::Index i = 0; i < p; ++i) h(i) = 1.0 - 1.0 / rinv(i, i);
  } else {
    for (Eigen::Index i = 0; i < p; ++i) {
      double mx = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        if (j != i) mx = std::max(mx, std::fabs(corr(i, j)));
      h(i) = mx;
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) h(i) = std::min(std::max(h(i), 0.0), 1.0 - 1e-6);

  Eigen::MatrixXd loadings(p, n_factors);
  bool heywood = false;
  int iter = 0;
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    Eigen::MatrixXd reduced = corr;
    for (Eigen::Index i = 0; i < p; ++i) reduced(i, i) = h(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
    // eigenvalues ascending; take the top n_factors
    for (int k = 0; k < n_factors; ++k) {
      const Eigen::Index src = p - 1 - k;
      const double lam = std::max(es.eigenvalues()(src), 0.0);
      loadings.col(k) = es.eigenvectors().col(src) * std::sqrt(lam);
    }
    Eigen::VectorXd h_new = loadings.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < p; ++i) {
      if (h_new(i) > 1.0) {
        h_new(i) = 1.0 - 1e-6;
        heywood = true;
      }
    }
    const double delta = (h_new - h).cwiseAbs().maxCoeff();
    h = h_new;
    if (delta < opts.tol) {
      model.converged = true;
      break;
    }
  }

  detail::apply_sign_convention(loadings);
  model.loadings = loadings;
  model.communalities = h;
  model.uniquenesses = Eigen::VectorXd::Ones(p) - h;
  model.heywood = heywood;
  model.iterations = std::min(iter, opts.max_iterations);
  model.variance_explained.resize(static_cast<std::size_t>(n_factors));
  double cum = 0.0;
  model.cumulative_variance.resize(static_cast<std::size_t>(n_factors));
  for (int k = 0; k < n_factors; ++k) {
    model.variance_explained[static_cast<std::size_t>(k)] =
        loadings.col(k).squaredNorm() / static_cast<double>(p);
    cum += model.variance_explained[static_cast<std::size_t>(k)];
    model.cumulative_variance[static_cast<std::size_t>(k)] = cum;
  }
  if (!model.converged)
    throw EfaError("efa: no convergence after " + std::to_string(opts.max_iterations) +
                       " iterations",
                   model);
  return model;
}

// Orthogonal varimax rotation by pairwise planar rotations, iterated until the
// varimax criterion stops improving. Output columns carry the sign convention
// (largest-|value| entry positive) and are ordered by descending sum of squares.
inline Eigen::MatrixXd varimax(const Eigen::MatrixXd& loadings, double tol = 1e-8,
                               int max_sweeps = 100) {
  Eigen::MatrixXd rotated = loadings;
  const Eigen::Index p = rotated.rows(), k = rotated.cols();
  if (k < 2) {
    detail::apply_sign_convention(rotated);
    return rotated;
  }

  auto criterion = [&]() {
    double v = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      double s2 = 0.0, s4 = 0.0;
      for (Eigen::Index i = 0; i < p; ++i) {
        const double b2 = rotated(i, j) * rotated(i, j);
        s2 += b2;
        s4 += b2 * b2;
      }
      v += (static_cast<double>(p) * s4 - s2 * s2) / static_cast<double>(p * p);
    }
    return v;
  };

  double prev = criterion();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index a = 0; a < k - 1; ++a) {
      for (Eigen::Index b = a + 1; b < k; ++b) {
        double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
          const double x = rotated(i, a), y = rotated(i, b);
          const double u = x * x - y * y;
          const double v = 2.0 * x * y;
          A += u;
          B += v;
          C += u * u - v * v;
          D += 2.0 * u * v;
        }
        const double num = D - 2.0 * A * B / static_cast<double>(p);
        const double den = C - (A * A - B * B) / static_cast<double>(p);
        const double theta = 0.25 * std::atan2(num, den);
        if (std::fabs(theta) < 1e-14) continue;
        const double ct = std::cos(theta), st = std::sin(theta);
        for (Eigen::Index i = 0; i < p; ++i) {
          const double x = rotated(i, a), y = rotated(i, b);
          rotated(i, a) = ct * x + st * y;
          rotated(i, b) = -st * x + ct * y;
        }
      }
    }
    const double cur = criterion();
    if (cur - prev < tol) break;
    prev = cur;
  }

  detail::apply_sign_convention(rotated);
  detail::order_columns_by_ss(rotated);
  return rotated;
}

// Item-to-factor assignment: argmax |loading|, unassigned (-1) when even the
// largest loading stays below the threshold.
inline std::vector<int> assign_items(const Eigen::MatrixXd& loadings, double threshold) {
  std::vector<int> out(static_cast<std::size_t>(loadings.rows()), -1);
  for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
    Eigen::Index jmax = 0;
    const double best = loadings.row(i).cwiseAbs().maxCoeff(&jmax);
    if (best >= threshold) out[static_cast<std::size_t>(i)] = static_cast<int>(jmax);
  }
  return out;
}

}  // namespace typogen
