#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "typogen/csv.hpp"
#include "typogen/errors.hpp"

namespace typogen {

enum class QuestionKind { Binary, Likert, Numeric, Categorical };
enum class QuestionRole { Typology, ScaleItem, Demographic };

struct QuestionDef {
  std::string id;
  std::string text;
  QuestionKind kind = QuestionKind::Binary;
  int likert_min = 0;
  int likert_max = 0;
  QuestionRole role = QuestionRole::Typology;
};

inline std::string to_string(QuestionKind k) {
  switch (k) {
    case QuestionKind::Binary: return "binary";
    case QuestionKind::Likert: return "likert";
    case QuestionKind::Numeric: return "numeric";
    case QuestionKind::Categorical: return "categorical";
  }
  return "?";
}

inline std::string to_string(QuestionRole r) {
  switch (r) {
    case QuestionRole::Typology: return "typology";
    case QuestionRole::ScaleItem: return "scale-item";
    case QuestionRole::Demographic: return "demographic";
  }
  return "?";
}

// One column of answers, stored by kind. Binary answers are 1 = Yes, 0 = No.
using Column = std::variant<std::vector<std::uint8_t>,  // binary
                            std::vector<int>,           // likert
                            std::vector<double>,        // numeric
                            std::vector<std::string>>;  // categorical

// Immutable after load; all operations on it are pure reads.
struct SurveyDataset {
  std::vector<QuestionDef> questions;
  std::vector<std::string> respondent_ids;
  std::vector<Column> columns;  // aligned with questions

  std::size_t n() const { return respondent_ids.size(); }

  int column_index(const std::string& id) const {
    for (std::size_t i = 0; i < questions.size(); ++i)
      if (questions[i].id == id) return static_cast<int>(i);
    throw DataError("unknown question id: " + id);
  }

  const QuestionDef& question(const std::string& id) const {
    return questions[static_cast<std::size_t>(column_index(id))];
  }

  const std::vector<std::uint8_t>& binary(const std::string& id) const {
    const auto& col = columns[static_cast<std::size_t>(column_index(id))];
    if (!std::holds_alternative<std::vector<std::uint8_t>>(col))
      throw DataError("question is not binary: " + id);
    return std::get<std::vector<std::uint8_t>>(col);
  }

  const std::vector<int>& likert(const std::string& id) const {
    const auto& col = columns[static_cast<std::size_t>(column_index(id))];
    if (!std::holds_alternative<std::vector<int>>(col))
      throw DataError("question is not likert: " + id);
    return std::get<std::vector<int>>(col);
  }

  const std::vector<double>& numeric(const std::string& id) const {
    const auto& col = columns[static_cast<std::size_t>(column_index(id))];
    if (!std::holds_alternative<std::vector<double>>(col))
      throw DataError("question is not numeric: " + id);
    return std::get<std::vector<double>>(col);
  }

  const std::vector<std::string>& categorical(const std::string& id) const {
    const auto& col = columns[static_cast<std::size_t>(column_index(id))];
    if (!std::holds_alternative<std::vector<std::string>>(col))
      throw DataError("question is not categorical: " + id);
    return std::get<std::vector<std::string>>(col);
  }

  std::vector<std::string> typology_question_ids() const {
    std::vector<std::string> out;
    for (const auto& q : questions)
      if (q.role == QuestionRole::Typology) out.push_back(q.id);
    return out;
  }
};

struct QuestionStats {
  std::string id;
  std::size_t yes_count = 0;
  std::size_t no_count = 0;
  std::size_t n = 0;

  double yes_share() const { return static_cast<double>(yes_count) / static_cast<double>(n); }
  double no_share() const { return static_cast<double>(no_count) / static_cast<double>(n); }
  double minority_share() const {
    return static_cast<double>(std::min(yes_count, no_count)) / static_cast<double>(n);
  }
};

struct LoadOptions {
  char delimiter = ',';
  std::string id_column = "rid";  // optional in the file; row numbers used when absent
};

namespace detail {

inline std::optional<bool> parse_binary_token(std::string tok) {
  std::transform(tok.begin(), tok.end(), tok.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (tok == "y" || tok == "yes" || tok == "1") return true;
  if (tok == "n" || tok == "no" || tok == "0") return false;
  return std::nullopt;
}

inline void validate_schema(const std::vector<QuestionDef>& schema) {
  std::set<std::string> seen;
  for (const auto& q : schema) {
    if (q.id.empty()) throw ConfigError("schema: question with empty id");
    if (!seen.insert(q.id).second) throw ConfigError("schema: duplicate question id: " + q.id);
    if (q.kind == QuestionKind::Likert && !(q.likert_min < q.likert_max))
      throw ConfigError("schema: likert range must satisfy min < max for question: " + q.id);
    if (q.role == QuestionRole::Typology && q.kind != QuestionKind::Binary)
      throw ConfigError("schema: typology question must be binary: " + q.id);
  }
}

}  // namespace detail

// Loads a delimited text file against a declared schema. The header row must
// contain every schema id; Yes/No cells accept {Y,N,1,0,yes,no} case-insensitively.
// Missing answers are rejected, not imputed.
inline SurveyDataset load_dataset(std::istream& in, const std::vector<QuestionDef>& schema,
                                  const LoadOptions& opts = {}) {
  detail::validate_schema(schema);
  const csv::Table t = csv::read(in, opts.delimiter);

  std::unordered_map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < t.header.size(); ++i) header_pos[t.header[i]] = i;

  std::optional<std::size_t> id_pos;
  if (auto it = header_pos.find(opts.id_column); it != header_pos.end()) id_pos = it->second;

  std::vector<std::size_t> schema_pos(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    auto it = header_pos.find(schema[i].id);
    if (it == header_pos.end()) throw DataError("missing column: " + schema[i].id);
    schema_pos[i] = it->second;
  }
  for (const auto& h : t.header) {
    const bool known = (id_pos && h == opts.id_column) ||
                       std::any_of(schema.begin(), schema.end(),
                                   [&](const QuestionDef& q) { return q.id == h; });
    if (!known) throw DataError("unexpected column not in schema: " + h);
  }

  if (t.rows.empty()) throw DataError("no respondents: file has a header but no data rows");

  SurveyDataset ds;
  ds.questions = schema;
  ds.columns.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    switch (schema[i].kind) {
      case QuestionKind::Binary: ds.columns[i] = std::vector<std::uint8_t>(); break;
      case QuestionKind::Likert: ds.columns[i] = std::vector<int>(); break;
      case QuestionKind::Numeric: ds.columns[i] = std::vector<double>(); break;
      case QuestionKind::Categorical: ds.columns[i] = std::vector<std::string>(); break;
    }
  }

  std::set<std::string> seen_ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t data_row = r + 1;  // 1-based, excluding header
    if (row.size() != t.header.size()) {
      throw DataError("row " + std::to_string(data_row) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(row.size()));
    }
    std::string rid = id_pos ? row[*id_pos] : std::to_string(data_row);
    if (!seen_ids.insert(rid).second)
      throw DataError("duplicate respondent id: " + rid);
    ds.respondent_ids.push_back(std::move(rid));

    for (std::size_t i = 0; i < schema.size(); ++i) {
      const std::string& cell = row[schema_pos[i]];
      const std::string where =
          "row " + std::to_string(data_row) + ", column " + schema[i].id;
      if (cell.empty()) throw DataError("missing answer at " + where);
      switch (schema[i].kind) {
        case QuestionKind::Binary: {
          auto b = detail::parse_binary_token(cell);
          if (!b) throw DataError("cannot parse '" + cell + "' as Yes/No at " + where);
          std::get<std::vector<std::uint8_t>>(ds.columns[i]).push_back(*b ? 1 : 0);
          break;
        }
        case QuestionKind::Likert: {
          int v = 0;
          auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
          if (ec != std::errc{} || p != cell.data() + cell.size())
            throw DataError("cannot parse '" + cell + "' as integer at " + where);
          if (v < schema[i].likert_min || v > schema[i].likert_max)
            throw DataError("value " + cell + " outside likert range [" +
                            std::to_string(schema[i].likert_min) + "," +
                            std::to_string(schema[i].likert_max) + "] at " + where);
          std::get<std::vector<int>>(ds.columns[i]).push_back(v);
          break;
        }
        case QuestionKind::Numeric: {
          try {
            std::size_t pos = 0;
            const double v = std::stod(cell, &pos);
            if (pos != cell.size()) throw std::invalid_argument(cell);
            std::get<std::vector<double>>(ds.columns[i]).push_back(v);
          } catch (const std::exception&) {
            throw DataError("cannot parse '" + cell + "' as number at " + where);
          }
          break;
        }
        case QuestionKind::Categorical:
          std::get<std::vector<std::string>>(ds.columns[i]).push_back(cell);
          break;
      }
    }
  }
  return ds;
}

inline SurveyDataset load_dataset_file(const std::string& path,
                                       const std::vector<QuestionDef>& schema,
                                       const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  try {
    return load_dataset(in, schema, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace detail {

inline std::string format_numeric(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  // shortest form that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    std::ostringstream t;
    t.precision(prec);
    t << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return s;
}

}  // namespace detail

// Serializes in canonical form (Y/N binaries, round-tripping numerics). Applying
// save after load is idempotent on the bytes.
inline void save_dataset(std::ostream& out, const SurveyDataset& ds, const LoadOptions& opts = {}) {
  csv::Table t;
  t.header.push_back(opts.id_column);
  for (const auto& q : ds.questions) t.header.push_back(q.id);
  for (std::size_t r = 0; r < ds.n(); ++r) {
    std::vector<std::string> row;
    row.push_back(ds.respondent_ids[r]);
    for (std::size_t i = 0; i < ds.questions.size(); ++i) {
      switch (ds.questions[i].kind) {
        case QuestionKind::Binary:
          row.push_back(std::get<std::vector<std::uint8_t>>(ds.columns[i])[r] ? "Y" : "N");
          break;
        case QuestionKind::Likert:
          row.push_back(std::to_string(std::get<std::vector<int>>(ds.columns[i])[r]));
          break;
        case QuestionKind::Numeric:
          row.push_back(detail::format_numeric(std::get<std::vector<double>>(ds.columns[i])[r]));
          break;
        case QuestionKind::Categorical:
          row.push_back(std::get<std::vector<std::string>>(ds.columns[i])[r]);
          break;
      }
    }
    t.rows.push_back(std::move(row));
  }
  csv::write(out, t, opts.delimiter);
}

inline void save_dataset_file(const std::string& path, const SurveyDataset& ds,
                              const LoadOptions& opts = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  save_dataset(out, ds, opts);
}

// Yes/No tallies for one binary typology question.
inline QuestionStats question_stats(const SurveyDataset& ds, const std::string& qid) {
  const auto& q = ds.question(qid);
  if (q.kind != QuestionKind::Binary || q.role != QuestionRole::Typology)
    throw DataError("question_stats: not a binary typology question: " + qid);
  const auto& col = ds.binary(qid);
  QuestionStats st;
  st.id = qid;
  st.n = col.size();
  for (auto v : col) st.yes_count += v;
  st.no_count = st.n - st.yes_count;
  return st;
}

// Typology questions whose minority share clears the threshold, in schema order.
// Near-constant questions in either direction (almost all Yes or almost all No)
// fall below it and are dropped.
inline std::vector<std::string> drop_degenerate_questions(const SurveyDataset& ds,
                                                          double min_minority_share) {
  if (!(min_minority_share >= 0.0 && min_minority_share < 0.5))
    throw ConfigError("drop_degenerate_questions: threshold must be in [0, 0.5)");
  std::vector<std::string> kept;
  for (const auto& q : ds.questions) {
    if (q.role != QuestionRole::Typology) continue;
    if (question_stats(ds, q.id).minority_share() >= min_minority_share) kept.push_back(q.id);
  }
  return kept;
}

// Pearson correlation of the 0/1 encodings (the phi coefficient).
inline Eigen::MatrixXd binary_correlation_matrix(const SurveyDataset& ds,
                                                 const std::vector<std::string>& qids) {
  const std::size_t m = qids.size();
  const std::size_t n = ds.n();
  std::vector<const std::vector<std::uint8_t>*> cols(m);
  std::vector<std::size_t> ones(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    cols[i] = &ds.binary(qids[i]);
    for (auto v : *cols[i]) ones[i] += v;
    if (ones[i] == 0 || ones[i] == n)
      throw DataError("correlation undefined for constant question: " + qids[i]);
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t both = 0;
      for (std::size_t k = 0; k < n; ++k) both += (*cols[i])[k] & (*cols[j])[k];
      const double nn = static_cast<double>(n);
      const double pi = static_cast<double>(ones[i]);
      const double pj = static_cast<double>(ones[j]);
      const double num = nn * static_cast<double>(both) - pi * pj;
      const double den = std::sqrt(pi * (nn - pi) * pj * (nn - pj));
      const double phi = num / den;
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = phi;
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = phi;
    }
  }
  return r;
}

// Correlation matrix as CSV with question ids on both axes, 6 decimal places.
inline void write_correlation_csv(std::ostream& out, const Eigen::MatrixXd& r,
                                  const std::vector<std::string>& qids) {
  csv::Table t;
  t.header.push_back("question");
  for (const auto& q : qids) t.header.push_back(q);
  for (std::size_t i = 0; i < qids.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(qids[i]);
    for (std::size_t j = 0; j < qids.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f",
                    r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      row.emplace_back(buf);
    }
    t.rows.push_back(std::move(row));
  }
  csv::write(out, t);
}

}  // namespace typogen
