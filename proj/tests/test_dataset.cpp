#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "support/builders.hpp"
#include "typogen/dataset.hpp"

using namespace typogen;
using testsupport::binary_dataset;

namespace {

std::vector<QuestionDef> two_binary_schema() {
  QuestionDef a{"q1", "", QuestionKind::Binary, 0, 0, QuestionRole::Typology};
  QuestionDef b{"q2", "", QuestionKind::Binary, 0, 0, QuestionRole::Typology};
  return {a, b};
}

}  // namespace

TEST_CASE("load_dataset parses and normalizes Yes/No tokens") {
  std::istringstream in("rid,q1,q2\nr1,Y,no\nr2,1,N\nr3,yes,0\n");
  const auto ds = load_dataset(in, two_binary_schema());
  REQUIRE(ds.n() == 3);
  CHECK(ds.binary("q1") == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(ds.binary("q2") == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(ds.respondent_ids == std::vector<std::string>{"r1", "r2", "r3"});
}

TEST_CASE("load_dataset rejects a header-only file") {
  std::istringstream in("rid,q1,q2\n");
  CHECK_THROWS_WITH(load_dataset(in, two_binary_schema()),
                    Catch::Matchers::ContainsSubstring("no respondents"));
}

TEST_CASE("load_dataset reports the row and column of an unparsable cell") {
  std::istringstream in("rid,q1,q2\nr1,Y,N\nr2,N,Y\nr3,maybe,N\n");
  try {
    load_dataset(in, two_binary_schema());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("maybe") != std::string::npos);
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("q1") != std::string::npos);
  }
}

TEST_CASE("load_dataset rejects duplicates, missing columns, missing answers") {
  SECTION("duplicate respondent id") {
    std::istringstream in("rid,q1,q2\nr1,Y,N\nr1,N,Y\n");
    CHECK_THROWS_WITH(load_dataset(in, two_binary_schema()),
                      Catch::Matchers::ContainsSubstring("duplicate respondent id"));
  }
  SECTION("missing schema column") {
    std::istringstream in("rid,q1\nr1,Y\n");
    CHECK_THROWS_WITH(load_dataset(in, two_binary_schema()),
                      Catch::Matchers::ContainsSubstring("missing column: q2"));
  }
  SECTION("empty cell") {
    std::istringstream in("rid,q1,q2\nr1,Y,\n");
    CHECK_THROWS_WITH(load_dataset(in, two_binary_schema()),
                      Catch::Matchers::ContainsSubstring("missing answer"));
  }
  SECTION("column not in schema") {
    std::istringstream in("rid,q1,q2,zz\nr1,Y,N,5\n");
    CHECK_THROWS_WITH(load_dataset(in, two_binary_schema()),
                      Catch::Matchers::ContainsSubstring("zz"));
  }
}

TEST_CASE("load_dataset without an id column falls back to row numbers") {
  std::istringstream in("q1,q2\nY,N\nN,Y\n");
  const auto ds = load_dataset(in, two_binary_schema());
  CHECK(ds.respondent_ids == std::vector<std::string>{"1", "2"});
}

TEST_CASE("load then save is idempotent on the bytes") {
  std::vector<QuestionDef> schema = two_binary_schema();
  schema.push_back({"lik", "", QuestionKind::Likert, 1, 5, QuestionRole::ScaleItem});
  schema.push_back({"age", "", QuestionKind::Numeric, 0, 0, QuestionRole::Demographic});
  schema.push_back({"grp", "", QuestionKind::Categorical, 0, 0, QuestionRole::Demographic});
  std::istringstream in("rid,q1,q2,lik,age,grp\nr1,yes,0,3,41.25,alpha\nr2,N,Y,5,29,beta\n");
  const auto ds = load_dataset(in, schema);

  std::ostringstream first;
  save_dataset(first, ds);
  std::istringstream again(first.str());
  const auto ds2 = load_dataset(again, schema);
  std::ostringstream second;
  save_dataset(second, ds2);
  CHECK(first.str() == second.str());
}

TEST_CASE("question_stats counts shares exactly") {
  SECTION("zero Yes") {
    const auto ds = binary_dataset({"q"}, {std::vector<std::uint8_t>(514, 0)});
    const auto st = question_stats(ds, "q");
    CHECK(st.yes_share() == 0.0);
    CHECK(st.minority_share() == 0.0);
    CHECK(st.yes_count + st.no_count == st.n);
  }
  SECTION("50 of 100") {
    std::vector<std::uint8_t> col(100, 0);
    for (int i = 0; i < 50; ++i) col[i] = 1;
    const auto ds = binary_dataset({"q"}, {col});
    CHECK(question_stats(ds, "q").minority_share() == 0.5);
  }
  SECTION("1 of 100") {
    std::vector<std::uint8_t> col(100, 0);
    col[7] = 1;
    const auto ds = binary_dataset({"q"}, {col});
    CHECK(question_stats(ds, "q").minority_share() == 0.01);
  }
  SECTION("non-binary question rejected") {
    SurveyDataset ds;
    ds.questions.push_back({"x", "", QuestionKind::Likert, 1, 5, QuestionRole::ScaleItem});
    ds.columns.emplace_back(std::vector<int>{1, 2});
    ds.respondent_ids = {"a", "b"};
    CHECK_THROWS_AS(question_stats(ds, "x"), DataError);
  }
}

TEST_CASE("drop_degenerate_questions applies the minority-share threshold") {
  // q1: 50/100 minority, q2: 1/100 minority, q3: 0/100 (constant)
  std::vector<std::uint8_t> q1(100, 0), q2(100, 0), q3(100, 0);
  for (int i = 0; i < 50; ++i) q1[i] = 1;
  q2[3] = 1;
  const auto ds = binary_dataset({"q1", "q2", "q3"}, {q1, q2, q3});

  CHECK(drop_degenerate_questions(ds, 0.02) == std::vector<std::string>{"q1"});
  CHECK(drop_degenerate_questions(ds, 0.0) == std::vector<std::string>{"q1", "q2", "q3"});

  SECTION("monotone: raising the threshold never adds a question") {
    auto prev = drop_degenerate_questions(ds, 0.0);
    for (double t : {0.005, 0.01, 0.02, 0.1, 0.3, 0.49}) {
      auto cur = drop_degenerate_questions(ds, t);
      for (const auto& q : cur)
        CHECK(std::find(prev.begin(), prev.end(), q) != prev.end());
      prev = cur;
    }
  }
  SECTION("threshold outside [0, 0.5) rejected") {
    CHECK_THROWS_AS(drop_degenerate_questions(ds, 0.5), ConfigError);
    CHECK_THROWS_AS(drop_degenerate_questions(ds, -0.1), ConfigError);
  }
}

TEST_CASE("binary_correlation_matrix is the phi coefficient") {
  SECTION("contingency fixture hits 0.55 exactly") {
    // 2x2 cells: YY=155, YN=45, NY=45, NN=155 -> phi = 0.55
    std::vector<std::uint8_t> a, b;
    auto add = [&](int k, int va, int vb) {
      for (int i = 0; i < k; ++i) {
        a.push_back(static_cast<std::uint8_t>(va));
        b.push_back(static_cast<std::uint8_t>(vb));
      }
    };
    add(155, 1, 1);
    add(45, 1, 0);
    add(45, 0, 1);
    add(155, 0, 0);
    const auto ds = binary_dataset({"deactivated", "deletedApp"}, {a, b});
    const auto r = binary_correlation_matrix(ds, {"deactivated", "deletedApp"});
    CHECK_THAT(r(0, 1), Catch::Matchers::WithinAbs(0.55, 1e-12));
    CHECK(r(0, 0) == 1.0);
    CHECK(r(1, 1) == 1.0);
  }
  SECTION("identical answer vectors give off-diagonal 1") {
    std::vector<std::uint8_t> a{1, 0, 1, 0, 1};
    const auto ds = binary_dataset({"x", "y"}, {a, a});
    const auto r = binary_correlation_matrix(ds, {"x", "y"});
    CHECK_THAT(r(0, 1), Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("constant question rejected by name") {
    const auto ds =
        binary_dataset({"x", "flat"}, {{1, 0, 1}, {1, 1, 1}});
    CHECK_THROWS_WITH(binary_correlation_matrix(ds, {"x", "flat"}),
                      Catch::Matchers::ContainsSubstring("flat"));
  }
  SECTION("symmetric within 1e-12 and PSD within -1e-8") {
    // three correlated questions
    std::vector<std::uint8_t> a, b, c;
    std::mt19937_64 gen(11);
    for (int i = 0; i < 200; ++i) {
      const int base = static_cast<int>(gen() % 2);
      a.push_back(static_cast<std::uint8_t>(base));
      b.push_back(static_cast<std::uint8_t>(gen() % 4 == 0 ? 1 - base : base));
      c.push_back(static_cast<std::uint8_t>(gen() % 3 == 0 ? 1 : 0));
    }
    const auto ds = binary_dataset({"a", "b", "c"}, {a, b, c});
    const auto r = binary_correlation_matrix(ds, {"a", "b", "c"});
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("correlation CSV uses 6 decimal places with labeled axes") {
  const auto ds = binary_dataset({"x", "y"}, {{1, 0, 1, 0}, {1, 0, 0, 1}});
  const auto r = binary_correlation_matrix(ds, {"x", "y"});
  std::ostringstream out;
  write_correlation_csv(out, r, {"x", "y"});
  std::istringstream round(out.str());
  const auto t = csv::read(round);
  REQUIRE(t.header == std::vector<std::string>{"question", "x", "y"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x");
  CHECK(t.rows[0][1] == "1.000000");
  CHECK(t.rows[1][2] == "1.000000");
  CHECK(t.rows[0][2] == t.rows[1][1]);
}
