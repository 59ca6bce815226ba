#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "hidss/feedback.hpp"

using namespace hidss;

namespace {

std::vector<Judgment> column_judgments(const std::vector<int>& first_criterion, int filler = 5) {
  const auto& catalog = test::criteria();
  std::vector<Judgment> out;
  for (std::size_t i = 0; i < first_criterion.size(); ++i) {
    auto j = test::uniform_judgment(catalog, "v", 1, "m" + std::to_string(i), filler);
    j.ratings[catalog.criteria()[0].id] = first_criterion[i];
    out.push_back(j);
  }
  return out;
}

double oracle_trimmed(std::vector<int> xs, bool trim) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size(), t = 0;
  if (trim && n >= 5) t = std::max<std::size_t>(1, n / 10);
  double sum = 0;
  for (std::size_t i = t; i < n - t; ++i) sum += xs[i];
  return sum / static_cast<double>(n - 2 * t);
}

double oracle_sd(const std::vector<int>& xs) {
  if (xs.size() < 2) return 0;
  double mean = 0;
  for (int x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (int x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST_CASE("criteria catalog is 6/5/5/5") {
  const auto& catalog = test::criteria();
  REQUIRE(catalog.criteria().size() == 21);
  std::map<AssessmentDimension, int> counts;
  for (const auto& c : catalog.criteria()) ++counts[c.dimension];
  CHECK(counts[AssessmentDimension::desirability] == 6);
  CHECK(counts[AssessmentDimension::implementability] == 5);
  CHECK(counts[AssessmentDimension::scalability] == 5);
  CHECK(counts[AssessmentDimension::profitability] == 5);
  CHECK(display_label(AssessmentDimension::implementability) == "feasibility");
}

TEST_CASE("criteria catalog rejects a wrong split") {
  auto doc = test::criteria().to_document();
  doc["criteria"].erase(doc["criteria"].begin());
  CHECK_THROWS_AS(CriteriaCatalog::from_document(doc), Error);
}

TEST_CASE("three ratings: plain mean and sample standard deviation") {
  auto js = column_judgments({4, 6, 8});
  auto a = aggregate(js, test::criteria());
  CHECK(a.judge_count == 3);
  CHECK(a.criteria[0].aggregate == doctest::Approx(6.0));
  CHECK(a.criteria[0].dispersion == doctest::Approx(2.0));
  CHECK(a.criteria[0].n == 3);
}

TEST_CASE("five ratings trim one from each end") {
  auto js = column_judgments({1, 5, 5, 5, 10});
  auto a = aggregate(js, test::criteria());
  CHECK(a.criteria[0].aggregate == doctest::Approx(5.0));
  AggregationConfig untrimmed{false, 2.5};
  CHECK(aggregate(js, test::criteria(), untrimmed).criteria[0].aggregate == doctest::Approx(26.0 / 5));
}

TEST_CASE("trim counts") {
  CHECK(trim_count(4) == 0);
  CHECK(trim_count(5) == 1);
  CHECK(trim_count(19) == 1);
  CHECK(trim_count(20) == 2);
  CHECK(trim_count(35) == 3);
}

TEST_CASE("random judgments match a sort-and-slice oracle") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> rating(1, 10);
  const auto& catalog = test::criteria();
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 7 + static_cast<std::size_t>(trial % 20);
    std::vector<Judgment> js;
    for (std::size_t i = 0; i < n; ++i) {
      auto j = test::uniform_judgment(catalog, "v", 1, "m" + std::to_string(i), 1);
      for (auto& [id, r] : j.ratings) r = rating(rng);
      js.push_back(j);
    }
    for (bool trim : {true, false}) {
      auto a = aggregate(js, catalog, {trim, 2.5});
      std::map<AssessmentDimension, std::vector<double>> by_dim;
      for (std::size_t c = 0; c < catalog.criteria().size(); ++c) {
        std::vector<int> col;
        for (const auto& j : js) col.push_back(j.ratings.at(catalog.criteria()[c].id));
        double expected = oracle_trimmed(col, trim);
        CHECK(a.criteria[c].aggregate == doctest::Approx(expected).epsilon(1e-12));
        CHECK(a.criteria[c].dispersion == doctest::Approx(oracle_sd(col)).epsilon(1e-12));
        by_dim[catalog.criteria()[c].dimension].push_back(expected);
      }
      for (auto& [d, xs] : by_dim) {
        double mean = 0;
        for (double x : xs) mean += x;
        CHECK(a.dimension_scores.at(d) == doctest::Approx(mean / static_cast<double>(xs.size())));
      }
    }
  }
}

TEST_CASE("aggregates stay within the rating bounds and ignore order") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> rating(1, 10);
  const auto& catalog = test::criteria();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Judgment> js;
    for (int i = 0; i < 1 + trial % 12; ++i) {
      auto j = test::uniform_judgment(catalog, "v", 1, "m" + std::to_string(i), 1);
      for (auto& [id, r] : j.ratings) r = rating(rng);
      js.push_back(j);
    }
    auto a = aggregate(js, catalog);
    for (std::size_t c = 0; c < a.criteria.size(); ++c) {
      int lo = 10, hi = 1;
      for (const auto& j : js) {
        lo = std::min(lo, j.ratings.at(a.criteria[c].criterion_id));
        hi = std::max(hi, j.ratings.at(a.criteria[c].criterion_id));
      }
      CHECK(a.criteria[c].aggregate >= lo);
      CHECK(a.criteria[c].aggregate <= hi);
    }
    std::shuffle(js.begin(), js.end(), rng);
    auto b = aggregate(js, catalog);
    for (std::size_t c = 0; c < a.criteria.size(); ++c) {
      CHECK(b.criteria[c].aggregate == doctest::Approx(a.criteria[c].aggregate).epsilon(1e-12));
      CHECK(b.criteria[c].dispersion == doctest::Approx(a.criteria[c].dispersion).epsilon(1e-12));
    }
  }
}

TEST_CASE("polarized ratings are contested") {
  auto js = column_judgments({1, 10, 1, 10});
  auto a = aggregate(js, test::criteria());
  CHECK(a.criteria[0].dispersion == doctest::Approx(std::sqrt(27.0)));
  CHECK(a.criteria[0].contested);
  REQUIRE(a.contested.size() == 1);
  CHECK(a.contested[0] == test::criteria().criteria()[0].id);

  AggregationConfig never{true, std::numeric_limits<double>::infinity()};
  CHECK(aggregate(js, test::criteria(), never).contested.empty());
}

TEST_CASE("contested list is ordered by dispersion") {
  const auto& catalog = test::criteria();
  std::vector<Judgment> js;
  for (int i = 0; i < 4; ++i) {
    auto j = test::uniform_judgment(catalog, "v", 1, "m" + std::to_string(i), 5);
    j.ratings[catalog.criteria()[2].id] = i % 2 ? 10 : 1;  // sd 5.196
    j.ratings[catalog.criteria()[7].id] = i % 2 ? 9 : 2;   // sd 4.04
    js.push_back(j);
  }
  auto a = aggregate(js, catalog);
  REQUIRE(a.contested.size() == 2);
  CHECK(a.contested[0] == catalog.criteria()[2].id);
  CHECK(a.contested[1] == catalog.criteria()[7].id);
}

TEST_CASE("no judgments yields an empty assessment") {
  auto a = aggregate(std::span<const Judgment>{}, test::criteria());
  CHECK(a.judge_count == 0);
  CHECK(a.criteria.empty());
  CHECK(a.dimension_scores.empty());
}

TEST_CASE("judgments for different versions cannot be mixed") {
  auto js = column_judgments({4, 6});
  js[1].version.version_number = 2;
  CHECK_THROWS_AS(aggregate(js, test::criteria()), Error);
}

TEST_CASE("validate_judgment reports range, missing and unknown criteria") {
  const auto& catalog = test::criteria();
  auto j = test::uniform_judgment(catalog, "v", 1, "m", 5);
  CHECK_NOTHROW(validate_judgment(j, catalog));

  auto high = j;
  high.ratings[catalog.criteria()[0].id] = 11;
  try {
    validate_judgment(high, catalog);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == "rating-out-of-range");
  }

  auto broken = j;
  broken.ratings[catalog.criteria()[0].id] = 0;
  broken.ratings.erase(catalog.criteria()[1].id);
  broken.ratings["charisma"] = 5;
  try {
    validate_judgment(broken, catalog);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.issues().size() == 3);
    CHECK(e.has("rating-out-of-range"));
    CHECK(e.has("missing-criterion"));
    CHECK(e.has("unknown-criterion"));
  }
}

TEST_CASE("fractional ratings are rejected at parse time") {
  auto doc = to_document(test::uniform_judgment(test::criteria(), "v", 1, "m", 5));
  doc["ratings"][test::criteria().criteria()[0].id] = 4.5;
  CHECK_THROWS_AS(judgment_from_document(doc), Error);
}

TEST_CASE("judgment document round-trip") {
  auto j = test::uniform_judgment(test::criteria(), "v", 2, "m", 7);
  j.comments[Dimension::value_capture] = "Pricing is unclear.";
  j.authority = {Dimension::value_capture};
  CHECK(judgment_from_document(to_document(j)) == j);
}
