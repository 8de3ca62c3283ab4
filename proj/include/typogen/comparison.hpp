#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "typogen/mlogit.hpp"
#include "typogen/pattern_typology.hpp"
#include "typogen/tree_typology.hpp"

namespace typogen {

struct TypologyMapping {
  std::vector<std::pair<std::string, std::string>> pairs;  // pattern class -> tree leaf
  std::vector<std::string> unmapped_leaves;                // leaves no class maps to
};

// Routes each pattern class's complete answer vector through the tree. Every
// class lands on exactly one leaf; leaves can be shared or missed.
inline TypologyMapping map_typologies(const PatternTypology& pt, const TaxonomicTree& tree) {
  std::map<std::string, std::size_t> qpos;
  for (std::size_t i = 0; i < pt.included_questions.size(); ++i)
    qpos[pt.included_questions[i]] = i;
  for (const auto& q : tree.split_questions_preorder())
    if (!qpos.count(q))
      throw DataError("map_typologies: tree splits on '" + q +
                      "', which is not a pattern question");

  TypologyMapping mapping;
  std::set<std::string> hit;
  for (const auto& cls : pt.classes) {
    const std::string leaf = route_to_leaf(
        tree, [&](const std::string& q) { return cls.pattern.answers[qpos.at(q)] != 0; });
    mapping.pairs.emplace_back(cls.label, leaf);
    hit.insert(leaf);
  }
  for (std::size_t k = 1; k <= tree.root->leaf_count; ++k) {
    const std::string label = "T" + std::to_string(k);
    if (!hit.count(label)) mapping.unmapped_leaves.push_back(label);
  }
  return mapping;
}

struct RuleLiteral {
  std::string question;
  bool value = true;
};

struct Rule {
  std::string label;
  std::vector<RuleLiteral> literals;  // conjunction; empty = catch-all
};

// Ordered rules, first match wins; the final rule must be a catch-all.
struct RuleTypology {
  std::string name;
  std::vector<Rule> rules;
};

inline void validate_rule_typology(const RuleTypology& rt) {
  if (rt.rules.empty()) throw ConfigError("rule typology '" + rt.name + "': no rules");
  std::set<std::string> labels;
  for (const auto& r : rt.rules)
    if (!labels.insert(r.label).second)
      throw ConfigError("rule typology '" + rt.name + "': duplicate label " + r.label);
  if (!rt.rules.back().literals.empty())
    throw ConfigError("rule typology '" + rt.name + "': final rule must be a catch-all");
  for (std::size_t i = 0; i + 1 < rt.rules.size(); ++i)
    if (rt.rules[i].literals.empty())
      throw ConfigError("rule typology '" + rt.name + "': catch-all must be the last rule");
}

template <class AnswerFn>
inline std::string assign_rule_class(const RuleTypology& rt, AnswerFn&& answer) {
  for (const auto& r : rt.rules) {
    bool match = true;
    for (const auto& lit : r.literals)
      if (answer(lit.question) != lit.value) {
        match = false;
        break;
      }
    if (match) return r.label;
  }
  throw DataError("rule typology '" + rt.name + "': no rule matched (missing catch-all?)");
}

inline std::string assign_rule_class(const SurveyDataset& ds, std::size_t row,
                                     const RuleTypology& rt) {
  return assign_rule_class(rt, [&](const std::string& q) { return ds.binary(q)[row] != 0; });
}

enum class PredictorStatus { BothRetained, AOnly, BOnly };
enum class OrDirection { AllAbove, AllBelow, Mixed };

inline std::string to_string(PredictorStatus s) {
  switch (s) {
    case PredictorStatus::BothRetained: return "both_retained";
    case PredictorStatus::AOnly: return "A_only";
    case PredictorStatus::BOnly: return "B_only";
  }
  return "?";
}

inline std::string to_string(OrDirection d) {
  switch (d) {
    case OrDirection::AllAbove: return "all_above_1";
    case OrDirection::AllBelow: return "all_below_1";
    case OrDirection::Mixed: return "mixed";
  }
  return "?";
}

struct PredictorAlignment {
  std::string predictor;
  PredictorStatus status = PredictorStatus::BothRetained;
  OrDirection direction_a = OrDirection::Mixed;
  OrDirection direction_b = OrDirection::Mixed;
  bool agreement = false;  // both retained, same side of 1 in both models
  int neutral_a = 0;       // odds ratios within 1e-9 of 1, counted apart
  int neutral_b = 0;
  double min_or_a = 0.0, max_or_a = 0.0;
  double min_or_b = 0.0, max_or_b = 0.0;
};

struct AlignmentReport {
  std::string model_a;
  std::string model_b;
  std::vector<PredictorAlignment> entries;
  std::string narrative;
};

namespace detail {

struct DirectionSummary {
  OrDirection direction;
  int neutral;
  double min_or;
  double max_or;
};

inline DirectionSummary summarize_direction(const Eigen::MatrixXd& ors, Eigen::Index col) {
  constexpr double kNeutralBand = 1e-9;
  bool any_above = false, any_below = false;
  int neutral = 0;
  double mn = ors(0, col), mx = ors(0, col);
  for (Eigen::Index c = 0; c < ors.rows(); ++c) {
    const double v = ors(c, col);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    if (std::fabs(v - 1.0) <= kNeutralBand) ++neutral;
    else if (v > 1.0) any_above = true;
    else any_below = true;
  }
  OrDirection dir = OrDirection::Mixed;
  if (any_above && !any_below && neutral == 0) dir = OrDirection::AllAbove;
  if (any_below && !any_above && neutral == 0) dir = OrDirection::AllBelow;
  return {dir, neutral, mn, mx};
}

}  // namespace detail

// Classifies every predictor retained by either reduced model and, for the shared
// ones, whether the odds ratios point the same way in both. The narrative lists
// alignments first, then the divergences worth skepticism.
inline AlignmentReport alignment_report(const MlogitFit& fit_a, const MlogitFit& fit_b,
                                        const std::string& name_a = "A",
                                        const std::string& name_b = "B") {
  if (!fit_a.converged || !fit_b.converged)
    throw NumericError("alignment_report: both fits must have converged");

  const Eigen::MatrixXd or_a = odds_ratios(fit_a);
  const Eigen::MatrixXd or_b = odds_ratios(fit_b);

  AlignmentReport report;
  report.model_a = name_a;
  report.model_b = name_b;

  auto index_of = [](const std::vector<std::string>& v, const std::string& s) -> std::optional<Eigen::Index> {
    const auto it = std::find(v.begin(), v.end(), s);
    if (it == v.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - v.begin());
  };

  std::vector<std::string> order = fit_a.predictors;
  for (const auto& pb : fit_b.predictors)
    if (!index_of(order, pb)) order.push_back(pb);

  for (const auto& name : order) {
    const auto ia = index_of(fit_a.predictors, name);
    const auto ib = index_of(fit_b.predictors, name);
    PredictorAlignment e;
    e.predictor = name;
    if (ia && ib) {
      e.status = PredictorStatus::BothRetained;
      const auto da = detail::summarize_direction(or_a, *ia);
      const auto db = detail::summarize_direction(or_b, *ib);
      e.direction_a = da.direction;
      e.direction_b = db.direction;
      e.neutral_a = da.neutral;
      e.neutral_b = db.neutral;
      e.min_or_a = da.min_or;
      e.max_or_a = da.max_or;
      e.min_or_b = db.min_or;
      e.max_or_b = db.max_or;
      e.agreement = e.direction_a != OrDirection::Mixed && e.direction_a == e.direction_b;
    } else if (ia) {
      e.status = PredictorStatus::AOnly;
      const auto da = detail::summarize_direction(or_a, *ia);
      e.direction_a = da.direction;
      e.neutral_a = da.neutral;
      e.min_or_a = da.min_or;
      e.max_or_a = da.max_or;
    } else {
      e.status = PredictorStatus::BOnly;
      const auto db = detail::summarize_direction(or_b, *ib);
      e.direction_b = db.direction;
      e.neutral_b = db.neutral;
      e.min_or_b = db.min_or;
      e.max_or_b = db.max_or;
    }
    report.entries.push_back(e);
  }

  std::ostringstream md;
  md << "# Model comparison: " << name_a << " vs " << name_b << "\n\n";
  md << "## Alignment\n\n";
  bool any = false;
  for (const auto& e : report.entries) {
    if (e.status != PredictorStatus::BothRetained || !e.agreement) continue;
    any = true;
    md << "- `" << e.predictor << "` is retained in both models with odds ratios "
       << (e.direction_a == OrDirection::AllAbove ? "above" : "below") << " 1 in each ("
       << name_a << ": " << e.min_or_a << ".." << e.max_or_a << ", " << name_b << ": "
       << e.min_or_b << ".." << e.max_or_b << ").\n";
  }
  if (!any) md << "- No predictor is retained with the same direction in both models.\n";
  md << "\n## Divergence\n\n";
  for (const auto& e : report.entries) {
    if (e.status == PredictorStatus::BothRetained && !e.agreement) {
      md << "- `" << e.predictor << "` is retained in both models but the odds ratios "
         << "do not share a direction (" << name_a << ": " << to_string(e.direction_a) << ", "
         << name_b << ": " << to_string(e.direction_b) << ").\n";
    }
  }
  for (const auto& e : report.entries)
    if (e.status == PredictorStatus::AOnly)
      md << "- `" << e.predictor << "` survives model selection only in " << name_a << ".\n";
  for (const auto& e : report.entries)
    if (e.status == PredictorStatus::BOnly)
      md << "- `" << e.predictor << "` survives model selection only in " << name_b << ".\n";
  report.narrative = md.str();
  return report;
}

}  // namespace typogen
