#pragma once

// Small dataset builders shared by the test suites.

#include <cstdint>
#include <string>
#include <vector>

#include "typogen/dataset.hpp"

namespace testsupport {

// Binary-only dataset over typology questions; columns[q][r] is 1 for Yes.
inline typogen::SurveyDataset binary_dataset(const std::vector<std::string>& qids,
                                             const std::vector<std::vector<std::uint8_t>>& cols) {
  typogen::SurveyDataset ds;
  for (const auto& id : qids) {
    typogen::QuestionDef q;
    q.id = id;
    q.kind = typogen::QuestionKind::Binary;
    q.role = typogen::QuestionRole::Typology;
    ds.questions.push_back(q);
  }
  const std::size_t n = cols.empty() ? 0 : cols[0].size();
  for (std::size_t r = 0; r < n; ++r) ds.respondent_ids.push_back("R" + std::to_string(r + 1));
  for (const auto& c : cols) ds.columns.emplace_back(c);
  return ds;
}

// Likert dataset with one scale range for all items.
inline typogen::SurveyDataset likert_dataset(const std::vector<std::string>& qids,
                                             const std::vector<std::vector<int>>& cols,
                                             int lmin = 1, int lmax = 7) {
  typogen::SurveyDataset ds;
  for (const auto& id : qids) {
    typogen::QuestionDef q;
    q.id = id;
    q.kind = typogen::QuestionKind::Likert;
    q.likert_min = lmin;
    q.likert_max = lmax;
    q.role = typogen::QuestionRole::ScaleItem;
    ds.questions.push_back(q);
  }
  const std::size_t n = cols.empty() ? 0 : cols[0].size();
  for (std::size_t r = 0; r < n; ++r) ds.respondent_ids.push_back("R" + std::to_string(r + 1));
  for (const auto& c : cols) ds.columns.emplace_back(c);
  return ds;
}

}  // namespace testsupport
