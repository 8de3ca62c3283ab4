#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "typogen/dataset.hpp"
#include "typogen/efa.hpp"
#include "typogen/errors.hpp"

namespace typogen {

struct EfaScaleSpec {
  std::string name;
  std::vector<std::string> items;
  int n_factors = 1;
  std::vector<std::string> factor_names;  // optional; applied in column order
  double assignment_threshold = 0.3;
};

struct FixedKeyEntry {
  std::string item;
  std::string dimension;
  bool reverse = false;
};

struct FixedScaleSpec {
  std::string name;
  std::vector<FixedKeyEntry> key;
};

struct DirectItemSpec {
  std::string column;
  std::string name;  // predictor name; defaults to the column id
};

struct DemographicSpec {
  std::string column;
  std::string name;       // predictor name; defaults to the column id
  std::string reference;  // categorical only: level absorbed into the baseline
};

struct PredictorTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // respondents x predictors
  std::vector<std::string> respondent_ids;

  Eigen::Index column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<Eigen::Index>(i);
    throw DataError("unknown predictor: " + name);
  }
};

inline std::vector<double> column_as_double(const SurveyDataset& ds, const std::string& id) {
  const auto& q = ds.question(id);
  std::vector<double> out;
  out.reserve(ds.n());
  switch (q.kind) {
    case QuestionKind::Likert:
      for (int v : ds.likert(id)) out.push_back(static_cast<double>(v));
      break;
    case QuestionKind::Numeric:
      out = ds.numeric(id);
      break;
    case QuestionKind::Binary:
      for (auto v : ds.binary(id)) out.push_back(static_cast<double>(v));
      break;
    default:
      throw DataError("column is not numeric-valued: " + id);
  }
  return out;
}

// Internal-consistency coefficient: (k/(k-1)) * (1 - sum of item variances /
// variance of the item sum), with sample variances (denominator n-1).
inline double cronbach_alpha(const SurveyDataset& ds, const std::vector<std::string>& items) {
  const std::size_t k = items.size();
  if (k < 2) throw DataError("cronbach_alpha: need at least 2 items");
  const std::size_t n = ds.n();
  if (n < 2) throw DataError("cronbach_alpha: need at least 2 respondents");

  std::vector<std::vector<double>> cols;
  cols.reserve(k);
  for (const auto& it : items) cols.push_back(column_as_double(ds, it));

  auto sample_var = [n](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
  };

  double sum_item_var = 0.0;
  for (const auto& c : cols) sum_item_var += sample_var(c);
  std::vector<double> total(n, 0.0);
  for (const auto& c : cols)
    for (std::size_t i = 0; i < n; ++i) total[i] += c[i];
  const double var_total = sample_var(total);
  if (var_total == 0.0) throw NumericError("cronbach_alpha: zero total-score variance");
  const double kk = static_cast<double>(k);
  return (kk / (kk - 1.0)) * (1.0 - sum_item_var / var_total);
}

// Loading-weighted average of the items assigned to one factor. Items whose
// loading is negative are first reflected about their scale midpoint, then
// weighted by the absolute loading.
inline std::vector<double> score_factor(const SurveyDataset& ds, const FactorModel& model,
                                        int factor, double assignment_threshold) {
  std::vector<std::size_t> assigned;
  for (std::size_t i = 0; i < model.items.size(); ++i) {
    if (model.assignment[i] == factor &&
        std::fabs(model.loadings(static_cast<Eigen::Index>(i), factor)) >= assignment_threshold)
      assigned.push_back(i);
  }
  if (assigned.empty())
    throw DataError("score_factor: no item assigned to factor " + std::to_string(factor + 1));

  const std::size_t n = ds.n();
  std::vector<double> score(n, 0.0);
  double weight_sum = 0.0;
  for (auto i : assigned) {
    const auto& q = ds.question(model.items[i]);
    const double loading = model.loadings(static_cast<Eigen::Index>(i), factor);
    const double w = std::fabs(loading);
    const auto col = column_as_double(ds, model.items[i]);
    const double flip_base = static_cast<double>(q.likert_min + q.likert_max);
    for (std::size_t r = 0; r < n; ++r) {
      const double v = loading < 0.0 ? flip_base - col[r] : col[r];
      score[r] += w * v;
    }
    weight_sum += w;
  }
  for (auto& s : score) s /= weight_sum;
  return score;
}

// Fixed-key scoring: each dimension is the plain mean of its keyed items, with
// reverse-keyed items mapped through value' = (min + max) - value.
inline std::map<std::string, std::vector<double>> score_fixed_scale(const SurveyDataset& ds,
                                                                    const FixedScaleSpec& spec) {
  std::map<std::string, std::vector<double>> sums;
  std::map<std::string, int> counts;
  std::vector<std::string> dim_order;
  for (const auto& e : spec.key) {
    if (!sums.count(e.dimension)) {
      sums[e.dimension] = std::vector<double>(ds.n(), 0.0);
      counts[e.dimension] = 0;
      dim_order.push_back(e.dimension);
    }
    const auto& q = ds.question(e.item);
    if (q.kind != QuestionKind::Likert)
      throw DataError("score_fixed_scale: item is not likert: " + e.item);
    const auto& col = ds.likert(e.item);
    auto& acc = sums[e.dimension];
    for (std::size_t r = 0; r < ds.n(); ++r) {
      const int v = col[r];
      if (v < q.likert_min || v > q.likert_max)
        throw DataError("score_fixed_scale: value outside scale range for item " + e.item);
      acc[r] += e.reverse ? static_cast<double>(q.likert_min + q.likert_max - v)
                          : static_cast<double>(v);
    }
    ++counts[e.dimension];
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto& d : dim_order) {
    auto& acc = sums[d];
    for (auto& v : acc) v /= counts[d];
    out[d] = std::move(acc);
  }
  return out;
}

// Runs the full per-scale factor pipeline: item correlations, principal-axis
// extraction, varimax when more than one factor, item assignment, per-factor
// alphas over the assigned items.
inline FactorModel analyze_scale(const SurveyDataset& ds, const EfaScaleSpec& spec) {
  if (spec.items.size() < 2) throw ConfigError("scale " + spec.name + ": need at least 2 items");
  if (spec.n_factors >= static_cast<int>(spec.items.size()))
    throw ConfigError("scale " + spec.name + ": n_factors must be < #items");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(ds.n()),
                       static_cast<Eigen::Index>(spec.items.size()));
  for (std::size_t j = 0; j < spec.items.size(); ++j) {
    const auto col = column_as_double(ds, spec.items[j]);
    for (std::size_t r = 0; r < ds.n(); ++r)
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = col[r];
  }

  FactorModel model = efa(correlation_from_data(data), spec.n_factors);
  model.items = spec.items;
  if (spec.n_factors >= 2) {
    model.loadings = varimax(model.loadings);
    const auto p = static_cast<double>(model.items.size());
    double cum = 0.0;
    for (int k = 0; k < spec.n_factors; ++k) {
      model.variance_explained[static_cast<std::size_t>(k)] =
          model.loadings.col(k).squaredNorm() / p;
      cum += model.variance_explained[static_cast<std::size_t>(k)];
      model.cumulative_variance[static_cast<std::size_t>(k)] = cum;
    }
  }
  model.assignment = assign_items(model.loadings, spec.assignment_threshold);

  model.alphas.assign(static_cast<std::size_t>(spec.n_factors),
                      std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < spec.n_factors; ++k) {
    std::vector<std::string> assigned;
    for (std::size_t i = 0; i < spec.items.size(); ++i)
      if (model.assignment[i] == k) assigned.push_back(spec.items[i]);
    if (assigned.size() >= 2)
      model.alphas[static_cast<std::size_t>(k)] = cronbach_alpha(ds, assigned);
  }
  return model;
}

// Assembles the regression predictors: factor scores from each EFA scale,
// fixed-key dimension scores, direct survey items, and demographics with
// categorical columns one-hot encoded against their reference level.
// Also returns the fitted factor models keyed by scale name.
inline std::pair<PredictorTable, std::map<std::string, FactorModel>> build_predictor_table(
    const SurveyDataset& ds, const std::vector<EfaScaleSpec>& efa_scales,
    const std::vector<FixedScaleSpec>& fixed_scales, const std::vector<DirectItemSpec>& directs,
    const std::vector<DemographicSpec>& demographics) {
  PredictorTable table;
  table.respondent_ids = ds.respondent_ids;
  std::vector<std::vector<double>> cols;

  auto add_column = [&](const std::string& name, std::vector<double> values) {
    for (const auto& existing : table.names)
      if (existing == name) throw ConfigError("duplicate predictor name: " + name);
    table.names.push_back(name);
    cols.push_back(std::move(values));
  };

  std::map<std::string, FactorModel> models;
  for (const auto& spec : efa_scales) {
    FactorModel model = analyze_scale(ds, spec);
    for (int k = 0; k < spec.n_factors; ++k) {
      std::string name = spec.name + ".F" + std::to_string(k + 1);
      if (static_cast<std::size_t>(k) < spec.factor_names.size())
        name = spec.factor_names[static_cast<std::size_t>(k)];
      add_column(name, score_factor(ds, model, k, spec.assignment_threshold));
    }
    models.emplace(spec.name, std::move(model));
  }

  for (const auto& spec : fixed_scales) {
    auto scores = score_fixed_scale(ds, spec);
    std::vector<std::string> dim_order;
    for (const auto& e : spec.key)
      if (std::find(dim_order.begin(), dim_order.end(), e.dimension) == dim_order.end())
        dim_order.push_back(e.dimension);
    for (const auto& d : dim_order) add_column(d, std::move(scores[d]));
  }

  for (const auto& d : directs)
    add_column(d.name.empty() ? d.column : d.name, column_as_double(ds, d.column));

  for (const auto& d : demographics) {
    const auto& q = ds.question(d.column);
    const std::string base = d.name.empty() ? d.column : d.name;
    if (q.kind == QuestionKind::Categorical) {
      const auto& col = ds.categorical(d.column);
      std::set<std::string> levels(col.begin(), col.end());
      if (d.reference.empty())
        throw ConfigError("categorical demographic " + d.column + " needs a reference level");
      if (!levels.count(d.reference))
        throw ConfigError("reference level '" + d.reference + "' absent from " + d.column);
      for (const auto& level : levels) {
        if (level == d.reference) continue;
        std::vector<double> dummy(ds.n(), 0.0);
        for (std::size_t r = 0; r < ds.n(); ++r) dummy[r] = col[r] == level ? 1.0 : 0.0;
        add_column(base + "=" + level, std::move(dummy));
      }
    } else {
      add_column(base, column_as_double(ds, d.column));
    }
  }

  table.values.resize(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t r = 0; r < ds.n(); ++r)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cols[j][r];
  return {std::move(table), std::move(models)};
}

}  // namespace typogen
