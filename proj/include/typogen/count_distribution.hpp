#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "typogen/errors.hpp"
#include "typogen/stats.hpp"

namespace typogen {

// Maximum-likelihood negative binomial fit to a sequence of nonnegative integer
// counts, offered as a distributional diagnostic alongside the parametric curve.
// Parametrization: pmf(k) = C(k+r-1, k) p^r (1-p)^k with size r > 0 and success
// probability p in (0,1); mean = r(1-p)/p.
struct CountDistributionFit {
  double size = 0.0;  // r
  double prob = 0.0;  // p
  double log_likelihood = 0.0;
  double poisson_log_likelihood = 0.0;
  bool poisson_like = false;  // NB barely improves on Poisson (variance ~ mean)
  bool has_gof = false;
  double chi_square = 0.0;
  int chi_square_df = 0;
  double p_value = 1.0;
  int gof_bins = 0;
};

namespace detail {

inline double negbin_loglik(const std::vector<int>& ks, double r, double p) {
  double ll = 0.0;
  for (int k : ks) {
    ll += std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + r * std::log(p) +
          k * std::log1p(-p);
  }
  return ll;
}

inline double negbin_pmf(int k, double r, double p) {
  return std::exp(std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) +
                  r * std::log(p) + k * std::log1p(-p));
}

}  // namespace detail

inline CountDistributionFit fit_count_distribution(const std::vector<int>& counts) {
  if (counts.size() < 2) throw DataError("fit_count_distribution: need at least 2 counts");
  for (int k : counts)
    if (k < 0) throw DataError("fit_count_distribution: counts must be nonnegative");

  const double n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (int k : counts) sum += k;
  const double m = sum / n;
  double ss = 0.0;
  for (int k : counts) ss += (k - m) * (k - m);
  if (ss == 0.0) throw NumericError("fit_count_distribution: zero variance");

  // Profile likelihood in r: for fixed r the MLE of p is r / (r + mean).
  auto profile = [&](double logr) {
    const double r = std::exp(logr);
    return detail::negbin_loglik(counts, r, r / (r + m));
  };

  // Golden-section search on log r.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -12.0, hi = 16.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = profile(x1), f2 = profile(x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-11; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = profile(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = profile(x1);
    }
  }

  CountDistributionFit fit;
  fit.size = std::exp((lo + hi) / 2.0);
  fit.prob = fit.size / (fit.size + m);
  fit.log_likelihood = detail::negbin_loglik(counts, fit.size, fit.prob);

  // Poisson at lambda = mean, the r -> infinity limit of the negative binomial.
  double pll = 0.0;
  for (int k : counts) pll += k * std::log(m) - m - std::lgamma(k + 1.0);
  fit.poisson_log_likelihood = pll;
  fit.poisson_like = 2.0 * (fit.log_likelihood - pll) <= 3.841;

  // Chi-square goodness of fit: pool cells rightward until each expected >= 5.
  int kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<int> observed(static_cast<std::size_t>(kmax) + 1, 0);
  for (int k : counts) ++observed[static_cast<std::size_t>(k)];
  std::vector<double> bin_obs, bin_exp;
  double o_acc = 0.0, e_acc = 0.0, cum_p = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const double pk = detail::negbin_pmf(k, fit.size, fit.prob);
    cum_p += pk;
    o_acc += observed[static_cast<std::size_t>(k)];
    e_acc += n * pk;
    if (e_acc >= 5.0) {
      bin_obs.push_back(o_acc);
      bin_exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  // Tail cell: everything above kmax plus any unflushed remainder.
  o_acc += 0.0;
  e_acc += n * (1.0 - cum_p);
  if (!bin_obs.empty()) {
    bin_obs.back() += o_acc;
    bin_exp.back() += e_acc;
  }
  fit.gof_bins = static_cast<int>(bin_obs.size());
  fit.chi_square_df = fit.gof_bins - 1 - 2;
  if (fit.chi_square_df >= 1) {
    double x2stat = 0.0;
    for (std::size_t i = 0; i < bin_obs.size(); ++i)
      x2stat += (bin_obs[i] - bin_exp[i]) * (bin_obs[i] - bin_exp[i]) / bin_exp[i];
    fit.chi_square = x2stat;
    fit.p_value = stats::chi_squared_upper_tail(x2stat, fit.chi_square_df);
    fit.has_gof = true;
  } else {
    fit.chi_square_df = 0;
  }
  return fit;
}

}  // namespace typogen
