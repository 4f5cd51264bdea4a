#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cdc/error.hpp"
#include "cdc/network.hpp"

using namespace cdc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> files_in(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Balanced parentheses, quoted strings without nesting, ends with '.'.
bool prolog_fact(const std::string& line) {
  if (line.empty() || line.back() != '.') return false;
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) return false;
  }
  return depth == 0 && !quoted && line[line.size() - 2] == ')';
}

}  // namespace

TEST_CASE("minimal file") {
  const Network n = parse_network("var a b\nrel a S b");
  CHECK(n.variables == std::vector<std::string>{"a", "b"});
  REQUIRE(n.constraints.size() == 1);
  const Constraint& c = n.constraints[0];
  CHECK(c.kind == ConstraintKind::Direction);
  CHECK(c.mode == ConstraintMode::hard());
  CHECK(c.relations == std::vector<BasicRelation>{BasicRelation::of({Tile::S})});
  CHECK(c.ordinal == 0);
  CHECK(c.line == 2);
  CHECK_FALSE(n.grid_side);
  CHECK(n.scale == DistanceScale());
  CHECK(n.domain == DomainKind::Disconnected);
}

TEST_CASE("disjunctive constraint") {
  const Network n = parse_network("var a b\nrel a NE:E|N b\n");
  REQUIRE(n.constraints.size() == 1);
  CHECK(n.constraints[0].relations ==
        std::vector<BasicRelation>{BasicRelation::of({Tile::NE, Tile::E}), BasicRelation::of({Tile::N})});
}

TEST_CASE("parse errors carry line and token") {
  try {
    parse_network("var a b\nrel a Q b\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.token() == "Q");
    CHECK(e.detail() == "unknown tile 'Q'");
    CHECK(std::string(e.what()) == "line 2: unknown tile 'Q'");
  }
}

TEST_CASE("every directive") {
  const Network n = parse_network(
      "domain connected\ngrid 9\ngranularity 3\nthresholds 1 3\nvar a b c\n"
      "rel a N b\nnot a S b\ndefault b E c\nsoft a W c 4\n"
      "dist a dist0 b\nnotdist a dist2 c\ndefaultdist b dist1|dist2 c\nsoftdist a dist1 b 2\n");
  CHECK(n.domain == DomainKind::Connected);
  CHECK(n.grid_side == 9);
  CHECK(n.scale == DistanceScale(3, {1, 3}));
  REQUIRE(n.constraints.size() == 8);
  CHECK(n.constraints[1].mode == ConstraintMode::negative());
  CHECK(n.constraints[2].mode == ConstraintMode::default_());
  CHECK(n.constraints[3].mode == ConstraintMode::soft(4));
  CHECK(n.constraints[4].kind == ConstraintKind::Distance);
  CHECK(n.constraints[6].distance_mask() == 0b110);
  CHECK(n.constraints[7].mode.weight == 2);
  for (int i = 0; i < 8; ++i) CHECK(n.constraints[static_cast<std::size_t>(i)].ordinal == i);
}

TEST_CASE("auto grid side") {
  CHECK(auto_grid_side(parse_network("var a\n")) == 4);
  CHECK(auto_grid_side(parse_network("var a b\n")) == 5);
  CHECK(auto_grid_side(parse_network("var a b c d\n")) == 9);
  CHECK(auto_grid_side(parse_network("var a b\ndist a far b\n")) == 12);
  CHECK(auto_grid_side(parse_network("thresholds 1 20\nvar a b\ndist a dist1 b\n")) == 24);
  CHECK(resolved_grid_side(parse_network("grid 3\nvar a b\ndist a far b\n")) == 3);
}

TEST_CASE("validate") {
  CHECK(validate(parse_network("var a b\nrel a S b\n")).empty());
  auto d = validate(parse_network("var a b\nrel a S b\nrel a S b\n"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "duplicate-constraint");
  CHECK(d[0].line == 3);
  d = validate(parse_network("var a b\nrel a N:S:E:W:NE:NW:SE:SW:O b\n"));
  CHECK(d.empty());
  std::string all;
  for (const auto& r : RelationSet::all().sorted()) all += (all.empty() ? "" : "|") + r.to_string();
  d = validate(parse_network("var a b\nrel a " + all + " b\n"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "vacuous-constraint");
  d = validate(parse_network("granularity 4\nthresholds 1 2\nvar a b\ndist a dist1 b\n"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "scale-conflict");
  CHECK(validate(parse_network("granularity 4\nthresholds 1 2\nvar a b\n")).empty());
  CHECK(validate(parse_network("var a b\nrel a S b\ndefault a S b\nrel b S a\n")).empty());
}

TEST_CASE("asp export") {
  CHECK(export_asp_facts(parse_network("var a b\nrel a S b\n")) ==
        "obj(a).\nobj(b).\ngrid(5).\ngranularity(6).\nthreshold(1,0).\nthreshold(2,1).\nthreshold(3,2).\n"
        "threshold(4,4).\nthreshold(5,8).\nhard(a,\"s\",b).\n");
  const std::string facts = export_asp_facts(parse_network(
      "domain connected\nvar a b juice plate\nrel a NE:E|N b\nnot a N b\ndefault a S b\nsoft juice E plate 3\n"
      "dist a verynear b\nnotdist a far|near b\nsoftdist juice near plate 2\n"));
  CHECK(facts.find("domain(connected).\n") != std::string::npos);
  CHECK(facts.find("disj(a,\"e:ne;n\",b).\n") != std::string::npos);
  CHECK(facts.find("neg(a,\"n\",b).\n") != std::string::npos);
  CHECK(facts.find("default(a,\"s\",b).\n") != std::string::npos);
  CHECK(facts.find("soft(juice,\"e\",plate,3).\n") != std::string::npos);
  CHECK(facts.find("distc(hard,a,\"verynear\",b).\n") != std::string::npos);
  CHECK(facts.find("distc(neg,a,\"far;near\",b).\n") != std::string::npos);
  CHECK(facts.find("distc(soft,juice,\"near\",plate,2).\n") != std::string::npos);
  std::istringstream lines(facts);
  for (std::string line; std::getline(lines, line);) CHECK(prolog_fact(line));
}

TEST_CASE("formatting is canonical and round-trips") {
  const Network n = parse_network("var a b\nrel a ne:e|N b\nsoft a w b 2\n");
  CHECK(format_network(n) == "var a b\nrel a E:NE|N b\nsoft a W b 2\n");
  CHECK(parse_network(format_network(n)) == n);
}

TEST_CASE("valid corpus parses and round-trips") {
  const auto files = files_in(fs::path(CDC_TEST_DATA_DIR) / "corpus" / "valid", ".cdc");
  CHECK(files.size() >= 50);
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    const std::string text = slurp(f);
    Network n;
    REQUIRE_NOTHROW(n = parse_network(text));
    const Network again = parse_network(format_network(n));
    CHECK(again == n);
    CHECK(format_network(again) == format_network(n));
  }
}

TEST_CASE("invalid corpus is rejected as labeled") {
  const auto files = files_in(fs::path(CDC_TEST_DATA_DIR) / "corpus" / "invalid", ".cdc");
  CHECK(files.size() >= 50);
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    std::istringstream expect(slurp(fs::path(f).replace_extension(".expect")));
    int line = 0;
    std::string message;
    expect >> line;
    expect.ignore();
    std::getline(expect, message);
    try {
      parse_network(slurp(f));
      FAIL("accepted an invalid file");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.detail().find(message) != std::string::npos);
    }
  }
}

TEST_CASE("random bytes never crash the parser") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 200);
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string text;
    const int n = len(rng);
    for (int j = 0; j < n; ++j) text.push_back(static_cast<char>(byte(rng)));
    try {
      parse_network(text);
      ++accepted;
    } catch (const ParseError&) {
    }
  }
  CHECK(accepted >= 0);
}

TEST_CASE("random token streams yield a network or a parse error") {
  const std::vector<std::string> pool = {"var", "rel", "not", "default", "soft", "dist", "notdist", "defaultdist",
                                         "softdist", "grid", "granularity", "thresholds", "domain", "connected",
                                         "a", "b", "c", "N", "S", "NE:E", "N|S", "O", "near", "far", "3", "0", "-1",
                                         "|", ":", "#", "\n", "\n", "\n", "x_1", "Q", "99999999999"};
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> len(1, 40);
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string text = i % 2 ? "var a b c\n" : "";
    const int n = len(rng);
    for (int j = 0; j < n; ++j) text += pool[pick(rng)] + (rng() % 3 ? " " : "");
    try {
      const Network net = parse_network(text);
      ++accepted;
      CHECK(parse_network(format_network(net)) == net);
    } catch (const ParseError&) {
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("programmatic construction checks endpoints") {
  Network n;
  n.add_variable("a");
  n.add_variable("b");
  CHECK_THROWS_AS(n.add_variable("a"), Error);
  CHECK_THROWS_AS(n.add_variable("B"), Error);
  CHECK_THROWS_AS(n.add_direction(0, 0, ConstraintMode::hard(), {BasicRelation::of({Tile::N})}), Error);
  CHECK_THROWS_AS(n.add_direction(0, 5, ConstraintMode::hard(), {BasicRelation::of({Tile::N})}), Error);
  CHECK_THROWS_AS(n.add_direction(0, 1, ConstraintMode::hard(), {}), Error);
  CHECK_THROWS_AS(n.add_distance(0, 1, ConstraintMode::hard(), {DistanceRelation{6}}), Error);
  CHECK_THROWS_AS(ConstraintMode::soft(0), Error);
  CHECK(n.variable("b") == 1);
  CHECK_THROWS_AS(n.variable("z"), Error);
}
