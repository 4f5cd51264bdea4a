#include <doctest.h>

#include <set>

#include "cdc/error.hpp"
#include "cdc/oracle.hpp"
#include "oracles.hpp"

using namespace cdc;

namespace {

std::set<std::vector<Cell>> as_set(const std::vector<Region>& rs) {
  std::set<std::vector<Cell>> out;
  for (const auto& r : rs) out.emplace(r.cells().begin(), r.cells().end());
  return out;
}

}  // namespace

TEST_CASE("closed-form region counts") {
  CHECK(enumerate_regions(1, 1, false).size() == 1);
  CHECK(enumerate_regions(2, 4, false).size() == 15);
  CHECK(enumerate_regions(2, 4, true).size() == 13);
  CHECK(enumerate_regions(3, 9, false).size() == 511);
  CHECK(enumerate_regions(4, 16, false).size() == 65535);
  CHECK(enumerate_regions(4, 2, false).size() == 16 + 120);
  // dominoes on 4x4: 12 horizontal + 12 vertical
  CHECK(enumerate_regions(4, 2, true).size() == 16 + 24);
}

TEST_CASE("no duplicates and connected filter matches reference") {
  const auto all = enumerate_regions(3, 9, false);
  const auto conn = enumerate_regions(3, 9, true);
  CHECK(as_set(all).size() == all.size());
  CHECK(as_set(conn).size() == conn.size());
  std::size_t expected = 0;
  for (const auto& r : all) {
    if (oracle::connected({r.cells().begin(), r.cells().end()})) ++expected;
  }
  CHECK(conn.size() == expected);
  for (const auto& r : conn) CHECK(oracle::connected({r.cells().begin(), r.cells().end()}));
}

TEST_CASE("canonical order: by size, then lexicographic") {
  const auto rs = enumerate_regions(3, 3, false);
  CHECK(rs.front() == Region{{0, 0}});
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const auto& a = rs[i - 1];
    const auto& b = rs[i];
    const bool ordered =
        a.size() < b.size() ||
        (a.size() == b.size() && std::lexicographical_compare(a.cells().begin(), a.cells().end(),
                                                              b.cells().begin(), b.cells().end()));
    CHECK(ordered);
  }
}

TEST_CASE("parameter bounds") {
  CHECK_THROWS_AS(enumerate_regions(0, 1, false), Error);
  CHECK_THROWS_AS(enumerate_regions(2, 0, false), Error);
}

TEST_CASE("oracle solve examples") {
  auto r = oracle_solve(parse_network("var a b\nrel a S b\n"), 3, 2);
  CHECK(r.status == SolveStatus::Consistent);
  REQUIRE(r.model);
  CHECK(oracle::relation_mask((*r.model)[0], (*r.model)[1]) == BasicRelation::of({Tile::S}).mask());

  r = oracle_solve(parse_network("var a b\nrel a N b\nrel a S b\n"), 3, 2);
  CHECK(r.status == SolveStatus::Inconsistent);
  CHECK_FALSE(r.model);

  r = oracle_solve(parse_network("var a b\ndefault a S b\n"), 3, 2);
  CHECK(r.status == SolveStatus::Consistent);
  CHECK(r.defaults_applied == std::vector<int>{0});

  r = oracle_solve(parse_network("var a b\nrel a N b\ndefault a S b\n"), 3, 2);
  CHECK(r.status == SolveStatus::Consistent);
  CHECK(r.defaults_applied.empty());
}

TEST_CASE("oracle layered objective") {
  // two conflicting defaults: the lower ordinal wins
  auto r = oracle_solve(parse_network("var a b\ndefault a N b\ndefault a S b\n"), 3, 2);
  CHECK(r.defaults_applied == std::vector<int>{0});
  // a soft constraint never overrides a default
  r = oracle_solve(parse_network("var a b\ndefault a N b\nsoft a S b 9\n"), 3, 2);
  CHECK(r.defaults_applied == std::vector<int>{0});
  CHECK(r.soft_objective == 0);
  // soft weights pool across kinds
  r = oracle_solve(parse_network("var a b\nsoft a S b 2\nsoftdist a adjacent b 3\nsoft a N b 1\n"), 4, 2);
  CHECK(r.soft_objective == 5);
  // negative constraints exclude the whole relation value
  r = oracle_solve(parse_network("var a\nvar b\nnot a O b\n"), 1, 1);
  CHECK(r.status == SolveStatus::Inconsistent);
}

TEST_CASE("oracle respects connected domain") {
  // SW:SE around b is only possible with a disconnected a
  const std::string text = "var a b\nrel a SW:SE b\n";
  CHECK(oracle_solve(parse_network(text), 3, 2).status == SolveStatus::Consistent);
  CHECK(oracle_solve(parse_network("domain connected\n" + text), 3, 3).status == SolveStatus::Inconsistent);
}

TEST_CASE("oracle scale guard") {
  const Network n = parse_network("var a b c d\n");
  CHECK_THROWS_WITH_AS(oracle_solve(n, 6, 6), "oracle scale exceeded", Error);
  CHECK_NOTHROW(oracle_solve(parse_network("var a b\n"), 3, 2));
  CHECK_THROWS_WITH_AS(oracle_solve(parse_network("var a b\n"), 3, 2, 10.0), "oracle scale exceeded", Error);
}
