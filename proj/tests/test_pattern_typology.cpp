#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "support/builders.hpp"
#include "support/paper_fixture.hpp"
#include "typogen/pattern_typology.hpp"

using namespace typogen;

namespace {

// Expands (pattern, count) rows into a binary dataset over the given questions.
SurveyDataset expand(const std::vector<std::string>& qids,
                     const std::vector<std::pair<std::string, std::size_t>>& rows) {
  std::vector<std::vector<std::uint8_t>> cols(qids.size());
  for (const auto& [pat, count] : rows)
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t q = 0; q < qids.size(); ++q)
        cols[q].push_back(pat[q] == 'Y' ? 1 : 0);
  return testsupport::binary_dataset(qids, cols);
}

SurveyDataset head_fixture() {
  return expand(testsupport::nonuse_questions(), testsupport::head_patterns());
}

}  // namespace

TEST_CASE("enumerate_patterns tallies distinct answer vectors") {
  SECTION("hand enumeration of three respondents") {
    const auto ds = testsupport::binary_dataset(
        {"a", "b", "c"}, {{1, 1, 0}, {1, 1, 1}, {0, 0, 1}});
    const auto pats = enumerate_patterns(ds, {"a", "b", "c"});
    REQUIRE(pats.size() == 2);
    CHECK(pats[0].yn_string() == "YYN");
    CHECK(pats[0].count == 2);
    CHECK(pats[0].rank == 1);
    CHECK(pats[1].yn_string() == "NYY");
    CHECK(pats[1].count == 1);
  }
  SECTION("all respondents identical") {
    const auto ds = testsupport::binary_dataset({"a", "b"}, {{1, 1, 1}, {0, 0, 0}});
    const auto pats = enumerate_patterns(ds, {"a", "b"});
    REQUIRE(pats.size() == 1);
    CHECK(pats[0].count == 3);
  }
}

TEST_CASE("enumerate_patterns reproduces the head fixture table") {
  const auto ds = head_fixture();
  const auto pats = enumerate_patterns(ds, testsupport::nonuse_questions());
  REQUIRE(pats.size() == 15);
  CHECK(pats[0].yn_string() == "YNNNNNN");
  CHECK(pats[0].count == 127);

  // Every (pattern, count) row is present with its exact count.
  for (const auto& [pat, count] : testsupport::head_patterns()) {
    bool found = false;
    for (const auto& p : pats)
      if (p.yn_string() == pat && p.count == count) found = true;
    CHECK(found);
  }

  // Equal-count ties order the smaller answer vector (No before Yes) first, so
  // the count-21 pair keeps the three-practice pattern ahead of its superset.
  CHECK(pats[4].yn_string() == "YNYNYNN");
  CHECK(pats[5].yn_string() == "YNYYYNY");
}

TEST_CASE("pattern counts partition the respondents") {
  const auto ds = head_fixture();
  const auto pats = enumerate_patterns(ds, testsupport::nonuse_questions());
  std::size_t total = 0;
  for (const auto& p : pats) total += p.count;
  CHECK(total == ds.n());
  CHECK(pats.size() <= std::min<std::size_t>(ds.n(), std::size_t{1} << 7));
  // ranks are a permutation of 1..#patterns
  std::vector<std::size_t> ranks;
  for (const auto& p : pats) ranks.push_back(p.rank);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == i + 1);
}

TEST_CASE("select_head_classes cuts at the threshold") {
  const auto ds = head_fixture();
  const auto pats = enumerate_patterns(ds, testsupport::nonuse_questions());

  SECTION("threshold 0.79, pool 15") {
    const auto typ = select_head_classes(pats, testsupport::nonuse_questions(), 0.79,
                                         DenominatorMode::TopNPool, 15);
    REQUIRE(typ.classes.size() == 6);
    CHECK(typ.covered_count == 346);
    CHECK(typ.denominator == 435);
    CHECK(typ.classes[0].label == "C1");
    CHECK(typ.classes[5].label == "C6");
    CHECK(typ.classes[5].pattern.yn_string() == "YNYYYNY");
  }
  SECTION("threshold 1.0 over all respondents keeps every pattern") {
    const auto typ = select_head_classes(pats, testsupport::nonuse_questions(), 1.0,
                                         DenominatorMode::AllRespondents, 0);
    CHECK(typ.classes.size() == pats.size());
    CHECK(typ.covered_count == ds.n());
  }
  SECTION("threshold 0.30 stops at two classes") {
    // cumulative shares over the 15-pattern pool: 127/435 = 0.292, 226/435 = 0.520
    const auto typ = select_head_classes(pats, testsupport::nonuse_questions(), 0.30,
                                         DenominatorMode::TopNPool, 15);
    CHECK(typ.classes.size() == 2);
  }
  SECTION("monotone in the threshold") {
    std::size_t prev = 0;
    for (double t : {0.05, 0.2, 0.3, 0.5, 0.79, 0.9, 1.0}) {
      const auto typ = select_head_classes(pats, testsupport::nonuse_questions(), t,
                                           DenominatorMode::TopNPool, 15);
      CHECK(typ.classes.size() >= prev);
      prev = typ.classes.size();
    }
  }
  SECTION("pool larger than the pattern set is rejected") {
    CHECK_THROWS_AS(select_head_classes(pats, testsupport::nonuse_questions(), 0.5,
                                        DenominatorMode::TopNPool, 16),
                    ConfigError);
  }
}

TEST_CASE("assign_pattern_class is exact-match lookup") {
  const auto ds = head_fixture();
  const auto pats = enumerate_patterns(ds, testsupport::nonuse_questions());
  const auto typ = select_head_classes(pats, testsupport::nonuse_questions(), 0.79,
                                       DenominatorMode::TopNPool, 15);

  auto answers = [](const std::string& yn) {
    std::vector<std::uint8_t> v;
    for (char c : yn) v.push_back(c == 'Y' ? 1 : 0);
    return v;
  };

  CHECK(assign_pattern_class(answers("YNNNYNN"), typ) == "C2");
  CHECK(assign_pattern_class(answers("YNYYYNY"), typ) == "C6");
  CHECK_FALSE(assign_pattern_class(answers("NNNNNYN"), typ).has_value());

  SECTION("label Cj assigned iff the answer vector equals class j's pattern") {
    for (std::size_t j = 0; j < typ.classes.size(); ++j) {
      const auto got = assign_pattern_class(typ.classes[j].pattern.answers, typ);
      REQUIRE(got.has_value());
      CHECK(*got == typ.classes[j].label);
    }
    // every non-class pattern in the fixture is excluded
    for (const auto& p : pats) {
      const bool is_class =
          std::any_of(typ.classes.begin(), typ.classes.end(),
                      [&](const PatternClass& c) { return c.pattern.answers == p.answers; });
      CHECK(assign_pattern_class(p.answers, typ).has_value() == is_class);
    }
  }
}

TEST_CASE("patterns csv lists rank, pattern, count, cumulative share") {
  const auto ds = head_fixture();
  const auto pats = enumerate_patterns(ds, testsupport::nonuse_questions());
  std::ostringstream out;
  write_patterns_csv(out, pats);
  std::istringstream in(out.str());
  const auto t = csv::read(in);
  REQUIRE(t.rows.size() == 15);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "YNNNNNN", "127", "0.291954"});
  CHECK(t.rows[14][3] == "1.000000");
}
