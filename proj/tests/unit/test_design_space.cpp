#include <doctest.h>

#include <set>

#include "amix/design_space.hpp"
#include "amix/rng.hpp"
#include "amix/sampling.hpp"

using namespace amix;

TEST_CASE("enumerate level combinations") {
  SUBCASE("single factor") {
    const auto c = enumerate_level_combinations(DesignSpace(1, {3}));
    REQUIRE(c.size() == 3);
    CHECK(c[0] == LevelCombination{1});
    CHECK(c[1] == LevelCombination{2});
    CHECK(c[2] == LevelCombination{3});
  }
  SUBCASE("no factors gives one empty combination") {
    const auto c = enumerate_level_combinations(DesignSpace(2, {}));
    REQUIRE(c.size() == 1);
    CHECK(c[0].empty());
  }
  SUBCASE("lexicographic order") {
    const DesignSpace s(2, {2, 3});
    const auto c = enumerate_level_combinations(s);
    REQUIRE(c.size() == 6);
    CHECK(c.front() == LevelCombination{1, 1});
    CHECK(c[1] == LevelCombination{1, 2});
    CHECK(c.back() == LevelCombination{2, 3});
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(combination_index(s, c[i]) == i);
  }
  SUBCASE("count equals product of levels and items are distinct") {
    for (const auto& lv : {std::vector<int>{2, 2, 2}, std::vector<int>{3, 4}, std::vector<int>{5}, std::vector<int>{3, 3, 3}}) {
      const DesignSpace s(1, lv);
      const auto c = enumerate_level_combinations(s);
      CHECK(c.size() == s.combinations());
      CHECK(std::set<LevelCombination>(c.begin(), c.end()).size() == c.size());
    }
  }
}

TEST_CASE("design space rejects degenerate definitions") {
  CHECK_THROWS_AS(DesignSpace(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(DesignSpace(1, {1}), std::invalid_argument);
  CHECK(DesignSpace(0, {2}).combinations() == 2);
}

TEST_CASE("validate_point") {
  const DesignSpace s(1, {3});
  CHECK_FALSE(validate_point(s, {{0.5}, {3}}).has_value());

  const auto v1 = validate_point(s, {{1.5}, {1}});
  REQUIRE(v1.has_value());
  CHECK(v1->coordinate == "x[0]");
  CHECK(v1->message == "x[0] out of [0,1]");

  const auto v2 = validate_point(s, {{0.5}, {4}});
  REQUIRE(v2.has_value());
  CHECK(v2->coordinate == "z[0]");
  CHECK(v2->message == "z[0] exceeds 3");

  CHECK(validate_point(s, {{0.5, 0.1}, {1}}).has_value());
  CHECK(validate_point(s, {{0.5}, {0}}).has_value());
}

TEST_CASE("sampled points always validate") {
  RngStream rng(7, 0);
  for (const auto& s : {DesignSpace(1, {3}), DesignSpace(2, {3, 3}), DesignSpace(3, {3, 3, 3}), DesignSpace(2, {})}) {
    for (const auto& w : candidate_set(s, 20, rng)) CHECK_FALSE(validate_point(s, w).has_value());
    for (const auto& w : oneshot_design(s, 17, rng)) CHECK_FALSE(validate_point(s, w).has_value());
  }
}

TEST_CASE("dataset rejects duplicates and invalid points") {
  Dataset d(DesignSpace(1, {2}));
  d.add({{0.25}, {1}}, 1.0);
  d.add({{0.25}, {2}}, 2.0);
  CHECK_THROWS_AS(d.add({{0.25}, {1}}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(d.add({{0.25}, {3}}, 3.0), std::invalid_argument);
  CHECK(d.size() == 2);
  CHECK(d.prefix(1).size() == 1);
  CHECK(d.prefix(1).response(0) == 1.0);
}
