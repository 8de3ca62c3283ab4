#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "typogen/dataset.hpp"
#include "typogen/errors.hpp"

namespace typogen {

// One unique combination of Yes/No answers over the included questions.
struct ResponsePattern {
  std::vector<std::uint8_t> answers;  // aligned with the included-question order
  std::size_t count = 0;
  std::size_t rank = 0;  // 1-based on the descending-count ordering

  std::string yn_string() const {
    std::string s;
    s.reserve(answers.size());
    for (auto a : answers) s.push_back(a ? 'Y' : 'N');
    return s;
  }
};

enum class DenominatorMode { AllRespondents, TopNPool };

inline std::string to_string(DenominatorMode m) {
  return m == DenominatorMode::AllRespondents ? "all_respondents" : "top_n_pool";
}

struct PatternClass {
  std::string label;  // C1, C2, ...
  ResponsePattern pattern;
};

struct PatternTypology {
  std::vector<std::string> included_questions;
  std::vector<PatternClass> classes;  // descending count order
  std::size_t covered_count = 0;
  std::size_t denominator = 0;
  double coverage = 0.0;
  DenominatorMode mode = DenominatorMode::TopNPool;
};

// Extracts one respondent's answer vector over the included questions.
inline std::vector<std::uint8_t> pattern_answers(const SurveyDataset& ds,
                                                 const std::vector<std::string>& included,
                                                 std::size_t row) {
  std::vector<std::uint8_t> v;
  v.reserve(included.size());
  for (const auto& q : included) v.push_back(ds.binary(q)[row]);
  return v;
}

// Tallies every distinct answer vector. Sorted by descending count; ties broken by
// ascending answer vector with No before Yes per question position, which keeps the
// smaller (less engaged) pattern ahead of its supersets on equal counts.
inline std::vector<ResponsePattern> enumerate_patterns(const SurveyDataset& ds,
                                                       const std::vector<std::string>& included) {
  if (included.empty()) throw DataError("enumerate_patterns: no included questions");
  std::vector<const std::vector<std::uint8_t>*> cols;
  cols.reserve(included.size());
  for (const auto& q : included) cols.push_back(&ds.binary(q));

  std::map<std::vector<std::uint8_t>, std::size_t> tally;
  for (std::size_t r = 0; r < ds.n(); ++r) {
    std::vector<std::uint8_t> key;
    key.reserve(cols.size());
    for (const auto* c : cols) key.push_back((*c)[r]);
    ++tally[key];
  }

  std::vector<ResponsePattern> out;
  out.reserve(tally.size());
  for (auto& [answers, count] : tally) out.push_back({answers, count, 0});
  std::sort(out.begin(), out.end(), [](const ResponsePattern& a, const ResponsePattern& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.answers < b.answers;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

// Cuts the head of the rank-frequency distribution: the smallest k whose cumulative
// count reaches the threshold share of the denominator.
inline PatternTypology select_head_classes(const std::vector<ResponsePattern>& patterns,
                                           const std::vector<std::string>& included,
                                           double threshold, DenominatorMode mode,
                                           std::size_t pool_size) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ConfigError("select_head_classes: threshold must be in (0, 1]");
  if (patterns.empty()) throw DataError("select_head_classes: no patterns");

  std::size_t denominator = 0;
  if (mode == DenominatorMode::TopNPool) {
    if (pool_size > patterns.size())
      throw ConfigError("select_head_classes: pool_size exceeds number of patterns");
    for (std::size_t i = 0; i < pool_size; ++i) denominator += patterns[i].count;
  } else {
    for (const auto& p : patterns) denominator += p.count;
  }

  PatternTypology typ;
  typ.included_questions = included;
  typ.mode = mode;
  typ.denominator = denominator;

  std::size_t cum = 0;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    cum += patterns[k].count;
    typ.classes.push_back({"C" + std::to_string(k + 1), patterns[k]});
    if (static_cast<double>(cum) / static_cast<double>(denominator) >= threshold) {
      typ.covered_count = cum;
      typ.coverage = static_cast<double>(cum) / static_cast<double>(denominator);
      return typ;
    }
  }
  throw NumericError("select_head_classes: threshold unreachable");
}

// Exact-match lookup against the class patterns; nullopt means Excluded.
inline std::optional<std::string> assign_pattern_class(const std::vector<std::uint8_t>& answers,
                                                       const PatternTypology& typ) {
  for (const auto& c : typ.classes)
    if (c.pattern.answers == answers) return c.label;
  return std::nullopt;
}

inline std::optional<std::string> assign_pattern_class(const SurveyDataset& ds, std::size_t row,
                                                       const PatternTypology& typ) {
  return assign_pattern_class(pattern_answers(ds, typ.included_questions, row), typ);
}

// patterns.csv: rank, answer vector as Y/N string, count, cumulative share of all
// respondents.
inline void write_patterns_csv(std::ostream& out, const std::vector<ResponsePattern>& patterns) {
  std::size_t total = 0;
  for (const auto& p : patterns) total += p.count;
  csv::Table t;
  t.header = {"rank", "pattern", "count", "cumulative_share"};
  std::size_t cum = 0;
  for (const auto& p : patterns) {
    cum += p.count;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(cum) / static_cast<double>(total));
    t.rows.push_back({std::to_string(p.rank), p.yn_string(), std::to_string(p.count), buf});
  }
  csv::write(out, t);
}

}  // namespace typogen
