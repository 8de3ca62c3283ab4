#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "typogen/count_distribution.hpp"
#include "typogen/curve_fit.hpp"

using namespace typogen;

namespace {

std::vector<std::pair<double, double>> curve_points(double a, double b, double c, double d,
                                                    int n) {
  std::vector<std::pair<double, double>> pts;
  for (int x = 1; x <= n; ++x) {
    const double u = (x + c) / d;
    pts.emplace_back(x, a + b * std::exp(-u * u));
  }
  return pts;
}

// The fifteen head counts of the non/use fixture, by rank.
const std::vector<double> kHeadCounts = {127, 99, 44, 34, 21, 21, 14, 14, 10, 10, 9, 9, 9, 7, 7};

}  // namespace

TEST_CASE("noiseless parameters are recovered to 1e-6 relative") {
  const double a = 10.635, b = 150.740, c = 0.604, d = 3.271;
  const auto fit = fit_rank_frequency_curve(curve_points(a, b, c, d, 15));
  CHECK(fit.converged);
  CHECK(std::fabs(fit.a - a) / a < 1e-6);
  CHECK(std::fabs(fit.b - b) / b < 1e-6);
  CHECK(std::fabs(fit.c - c) / c < 1e-6);
  CHECK(std::fabs(fit.d - d) / d < 1e-6);
  CHECK(fit.rss < 1e-10);
}

TEST_CASE("constant counts degenerate to offset-only") {
  std::vector<std::pair<double, double>> pts;
  for (int x = 1; x <= 8; ++x) pts.emplace_back(x, 42.0);
  const auto fit = fit_rank_frequency_curve(pts);
  CHECK(fit.degenerate);
  CHECK(fit.a == 42.0);
  CHECK(fit.b == 0.0);
  CHECK(fit.d > 0.0);
  CHECK(fit.rss == 0.0);
}

TEST_CASE("head-count fit lands near the reference parameters") {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < kHeadCounts.size(); ++i)
    pts.emplace_back(static_cast<double>(i + 1), kHeadCounts[i]);
  const auto fit = fit_rank_frequency_curve(pts);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.a - 10.635) / 10.635 < 0.15);
  CHECK(std::fabs(fit.b - 150.740) / 150.740 < 0.15);
  CHECK(std::fabs(fit.c - 0.604) / 0.604 < 0.15);
  CHECK(std::fabs(fit.d - 3.271) / 3.271 < 0.15);
}

TEST_CASE("accepted steps never increase the RSS") {
  std::vector<std::pair<double, double>> pts;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (int x = 1; x <= 20; ++x) {
    const double u = (x - 1.2) / 4.0;
    pts.emplace_back(x, 8.0 + 90.0 * std::exp(-u * u) + noise(gen));
  }
  const auto fit = fit_rank_frequency_curve(pts);
  for (std::size_t i = 1; i < fit.rss_history.size(); ++i)
    CHECK(fit.rss_history[i] <= fit.rss_history[i - 1]);
}

TEST_CASE("finite-difference gradient vanishes at convergence") {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < kHeadCounts.size(); ++i)
    pts.emplace_back(static_cast<double>(i + 1), kHeadCounts[i]);
  const auto fit = fit_rank_frequency_curve(pts);

  auto rss_at = [&](double a, double b, double c, double d) {
    double s = 0.0;
    for (const auto& [x, y] : pts) {
      const double u = (x + c) / d;
      const double r = y - a - b * std::exp(-u * u);
      s += r * r;
    }
    return s;
  };
  const double h = 1e-5;
  const double ga = (rss_at(fit.a + h, fit.b, fit.c, fit.d) - rss_at(fit.a - h, fit.b, fit.c, fit.d)) / (2 * h);
  const double gb = (rss_at(fit.a, fit.b + h, fit.c, fit.d) - rss_at(fit.a, fit.b - h, fit.c, fit.d)) / (2 * h);
  const double gc = (rss_at(fit.a, fit.b, fit.c + h, fit.d) - rss_at(fit.a, fit.b, fit.c - h, fit.d)) / (2 * h);
  const double gd = (rss_at(fit.a, fit.b, fit.c, fit.d + h) - rss_at(fit.a, fit.b, fit.c, fit.d - h)) / (2 * h);
  const double bound = 1e-6 * (1.0 + fit.rss);
  CHECK(std::fabs(ga) < bound);
  CHECK(std::fabs(gb) < bound);
  CHECK(std::fabs(gc) < bound);
  CHECK(std::fabs(gd) < bound);
}

TEST_CASE("curve fit input contracts") {
  SECTION("fewer than 5 points") {
    CHECK_THROWS_AS(fit_rank_frequency_curve({{1, 2}, {2, 1}, {3, 1}, {4, 1}}), DataError);
  }
  SECTION("negative counts") {
    CHECK_THROWS_AS(fit_rank_frequency_curve({{1, 2}, {2, 1}, {3, -1}, {4, 1}, {5, 0}}),
                    DataError);
  }
  SECTION("iteration cap carries best-so-far") {
    CurveFitOptions opts;
    opts.max_iterations = 1;
    opts.rss_tol = 0.0;
    opts.grad_tol = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < kHeadCounts.size(); ++i)
      pts.emplace_back(static_cast<double>(i + 1), kHeadCounts[i]);
    try {
      fit_rank_frequency_curve(pts, opts);
      FAIL("expected CurveFitError");
    } catch (const CurveFitError& e) {
      CHECK(e.best_so_far.iterations == 1);
      CHECK(std::isfinite(e.best_so_far.rss));
    }
  }
}

namespace {

// Independent sampling oracle: negative binomial via the gamma-Poisson mixture,
// size r and success probability p, so k counts failures before the r-th success.
std::vector<int> sample_negative_binomial(double r, double p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> gamma(r, (1.0 - p) / p);
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::poisson_distribution<int> pois(gamma(gen));
    out.push_back(pois(gen));
  }
  return out;
}

}  // namespace

TEST_CASE("negative binomial MLE recovers seeded parameters") {
  const auto counts = sample_negative_binomial(2.0, 0.3, 10000, 91);
  const auto fit = fit_count_distribution(counts);
  CHECK(std::fabs(fit.size - 2.0) / 2.0 < 0.10);
  CHECK(std::fabs(fit.prob - 0.3) / 0.3 < 0.05);
  CHECK_FALSE(fit.poisson_like);
  CHECK(fit.log_likelihood > fit.poisson_log_likelihood);
}

TEST_CASE("Poisson counts are flagged Poisson-like") {
  std::mt19937_64 gen(17);
  std::poisson_distribution<int> pois(6.0);
  std::vector<int> counts;
  for (int i = 0; i < 5000; ++i) counts.push_back(pois(gen));
  const auto fit = fit_count_distribution(counts);
  CHECK(fit.poisson_like);
  CHECK(fit.size > 100.0);  // variance ~ mean pushes the size parameter far out
}

TEST_CASE("zero-variance counts are rejected") {
  CHECK_THROWS_WITH(fit_count_distribution(std::vector<int>(20, 5)),
                    Catch::Matchers::ContainsSubstring("zero variance"));
}

TEST_CASE("goodness of fit is reported on well-populated data") {
  const auto counts = sample_negative_binomial(3.0, 0.4, 5000, 7);
  const auto fit = fit_count_distribution(counts);
  REQUIRE(fit.has_gof);
  CHECK(fit.chi_square >= 0.0);
  CHECK(fit.chi_square_df >= 1);
  CHECK(fit.p_value >= 0.0);
  CHECK(fit.p_value <= 1.0);
}
