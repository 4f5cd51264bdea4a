#include <doctest.h>

#include <random>

#include "cdc/distance.hpp"
#include "cdc/error.hpp"
#include "oracles.hpp"

using namespace cdc;

TEST_CASE("default scale") {
  const DistanceScale s;
  CHECK(s.granularity() == 6);
  CHECK(s.thresholds() == std::vector<int>{0, 1, 2, 4, 8});
  CHECK(s.names() == std::vector<std::string>{"adjacent", "verynear", "near", "commensurate", "far", "veryfar"});
}

TEST_CASE("boundary distance examples") {
  CHECK(boundary_distance(Region{{0, 0}}, Region{{0, 0}}) == 0);
  CHECK(boundary_distance(Region{{0, 0}}, Region{{1, 1}}) == 0);
  CHECK(boundary_distance(Region{{0, 0}}, Region{{0, 5}}) == 4);
  CHECK(boundary_distance(Region{{0, 0}, {9, 9}}, Region{{7, 9}}) == 1);
}

TEST_CASE("distance relation examples") {
  const DistanceScale s;
  CHECK(s.name(distance_relation(Region{{0, 0}}, Region{{0, 5}}, s)) == "commensurate");
  CHECK(distance_relation(Region{{0, 0}}, Region{{0, 5}}, s).bucket == 3);
  CHECK(s.name(distance_relation(Region{{0, 0}}, Region{{0, 20}}, s)) == "veryfar");
  CHECK(s.name(s.classify(0)) == "adjacent");
}

TEST_CASE("threshold lookup on the default scale") {
  const DistanceScale s;
  const std::vector<std::pair<int, std::string>> cases = {
      {0, "adjacent"}, {1, "verynear"}, {2, "near"}, {3, "commensurate"}, {4, "commensurate"},
      {5, "far"},      {8, "far"},      {9, "veryfar"}, {100, "veryfar"}};
  for (const auto& [d, name] : cases) CHECK(s.name(s.classify(d)) == name);
}

TEST_CASE("bucket bounds") {
  const DistanceScale s;
  CHECK(s.lower_bound(DistanceRelation{0}) == 0);
  CHECK(s.upper_bound(DistanceRelation{0}) == 0);
  CHECK(s.lower_bound(DistanceRelation{3}) == 3);
  CHECK(s.upper_bound(DistanceRelation{3}) == 4);
  CHECK(s.lower_bound(DistanceRelation{5}) == 9);
  CHECK(s.upper_bound(DistanceRelation{5}) == -1);
  for (int b = 0; b < 6; ++b) {
    CHECK(s.classify(s.lower_bound(DistanceRelation{b})).bucket == b);
    if (b < 5) CHECK(s.classify(s.upper_bound(DistanceRelation{b})).bucket == b);
  }
}

TEST_CASE("custom scales") {
  const DistanceScale s(3, {2, 5});
  CHECK(s.names() == std::vector<std::string>{"dist0", "dist1", "dist2"});
  CHECK(s.classify(2).bucket == 0);
  CHECK(s.classify(3).bucket == 1);
  CHECK(s.classify(6).bucket == 2);
  CHECK(s.find("dist1")->bucket == 1);
  CHECK_FALSE(s.find("near"));
  CHECK(DistanceScale(4).thresholds() == std::vector<int>{0, 1, 2});
  CHECK(DistanceScale(6) == DistanceScale());
  CHECK_THROWS_AS(DistanceScale(1), Error);
  CHECK_THROWS_AS(DistanceScale(3, {2, 2}), Error);
  CHECK_THROWS_AS(DistanceScale(3, {3, 2}), Error);
  CHECK_THROWS_AS(DistanceScale(3, {-1, 2}), Error);
  CHECK_THROWS_AS(DistanceScale(3, {1}), Error);
  CHECK_THROWS_AS(DistanceScale(2, {1}, {"a", "a"}), Error);
}

TEST_CASE("random pairs: reference distance, symmetry, monotone buckets, translation") {
  std::mt19937 rng(5);
  const DistanceScale s;
  std::vector<std::pair<int, int>> seen;
  for (int i = 0; i < 2000; ++i) {
    const Region a = oracle::random_region(rng, 20, 4);
    const Region b = oracle::random_region(rng, 20, 4);
    const int d = boundary_distance(a, b);
    CHECK(d == oracle::boundary_distance(a, b));
    CHECK(d == boundary_distance(b, a));
    CHECK(distance_relation(a.translated(3, -2), b.translated(3, -2), s) == distance_relation(a, b, s));
    seen.emplace_back(d, distance_relation(a, b, s).bucket);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1].second <= seen[i].second);
}

TEST_CASE("every bucket has a singleton witness") {
  const DistanceScale s;
  for (int b = 0; b < s.granularity(); ++b) {
    const int d = s.lower_bound(DistanceRelation{b});
    const Region a{{0, 0}};
    const Region far{{d == 0 ? 0 : d + 1, 0}};
    CHECK(distance_relation(a, far, s).bucket == b);
  }
}
