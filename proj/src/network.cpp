#include "cdc/network.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <tuple>

#include "cdc/error.hpp"

namespace cdc {

namespace {

constexpr int kMaxGridSide = 256;
constexpr int kMaxGranularity = 32;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t at = text.find(sep, pos);
    if (at == std::string_view::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, at - pos));
    pos = at + 1;
  }
}

std::optional<int> parse_int(std::string_view tok) {
  int value = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

struct Directive {
  std::string_view name;
  ConstraintKind kind;
  ConstraintMode::Kind mode;
};

constexpr Directive kConstraintDirectives[] = {
    {"rel", ConstraintKind::Direction, ConstraintMode::Kind::Hard},
    {"not", ConstraintKind::Direction, ConstraintMode::Kind::Negative},
    {"default", ConstraintKind::Direction, ConstraintMode::Kind::Default},
    {"soft", ConstraintKind::Direction, ConstraintMode::Kind::Soft},
    {"dist", ConstraintKind::Distance, ConstraintMode::Kind::Hard},
    {"notdist", ConstraintKind::Distance, ConstraintMode::Kind::Negative},
    {"defaultdist", ConstraintKind::Distance, ConstraintMode::Kind::Default},
    {"softdist", ConstraintKind::Distance, ConstraintMode::Kind::Soft},
};

std::string_view directive_name(ConstraintKind kind, ConstraintMode::Kind mode) {
  for (const auto& d : kConstraintDirectives) {
    if (d.kind == kind && d.mode == mode) return d.name;
  }
  return "?";
}

// Distance names are resolved once the scale directives are known.
struct PendingDistance {
  std::size_t constraint;
  int line;
  std::vector<std::string> names;
};

std::string relation_text(const std::vector<BasicRelation>& rels, char sep, bool lower_case) {
  std::string out;
  for (const auto& r : rels) {
    if (!out.empty()) out.push_back(sep);
    out += lower_case ? r.to_lower_string() : r.to_string();
  }
  return out;
}

std::string distance_text(const Network& n, const std::vector<DistanceRelation>& ds, char sep) {
  std::string out;
  for (const auto& d : ds) {
    if (!out.empty()) out.push_back(sep);
    out += n.scale.name(d);
  }
  return out;
}

}  // namespace

std::string_view domain_name(DomainKind d) noexcept {
  return d == DomainKind::Connected ? "connected" : "disconnected";
}

std::optional<DomainKind> parse_domain(std::string_view text) noexcept {
  if (text == "connected") return DomainKind::Connected;
  if (text == "disconnected") return DomainKind::Disconnected;
  return std::nullopt;
}

ConstraintMode ConstraintMode::soft(int weight) {
  if (weight <= 0) throw Error("soft constraint weight must be positive");
  return {Kind::Soft, weight};
}

RelationSet Constraint::relation_set() const {
  RelationSet s;
  for (const auto& r : relations) s.insert(r);
  return s;
}

std::uint32_t Constraint::distance_mask() const {
  std::uint32_t m = 0;
  for (const auto& d : distances) m |= 1U << d.bucket;
  return m;
}

bool valid_variable_name(std::string_view name) noexcept {
  if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

int Network::add_variable(const std::string& name) {
  if (!valid_variable_name(name)) throw Error("invalid variable name '" + name + "'");
  if (find_variable(name)) throw Error("duplicate variable '" + name + "'");
  variables.push_back(name);
  return static_cast<int>(variables.size()) - 1;
}

std::optional<int> Network::find_variable(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int Network::variable(std::string_view name) const {
  const auto idx = find_variable(name);
  if (!idx) throw Error("undeclared variable '" + std::string(name) + "'");
  return *idx;
}

namespace {

void check_endpoints(const Network& n, int subject, int object) {
  const int count = static_cast<int>(n.variables.size());
  if (subject < 0 || subject >= count || object < 0 || object >= count)
    throw Error("constraint references an undeclared variable");
  if (subject == object) throw Error("constraint subject and object must differ");
}

template <typename T>
void dedupe_in_order(std::vector<T>& v) {
  std::vector<T> out;
  for (const auto& x : v) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  v = std::move(out);
}

}  // namespace

Constraint& Network::add_direction(int subject, int object, ConstraintMode mode,
                                   std::vector<BasicRelation> value) {
  check_endpoints(*this, subject, object);
  if (value.empty()) throw Error("empty relation set");
  dedupe_in_order(value);
  Constraint c;
  c.subject = subject;
  c.object = object;
  c.kind = ConstraintKind::Direction;
  c.mode = mode;
  c.relations = std::move(value);
  c.ordinal = static_cast<int>(constraints.size());
  constraints.push_back(std::move(c));
  return constraints.back();
}

Constraint& Network::add_distance(int subject, int object, ConstraintMode mode,
                                  std::vector<DistanceRelation> value) {
  check_endpoints(*this, subject, object);
  if (value.empty()) throw Error("empty distance set");
  for (const auto& d : value) {
    if (d.bucket < 0 || d.bucket >= scale.granularity()) throw Error("distance bucket out of range");
  }
  dedupe_in_order(value);
  Constraint c;
  c.subject = subject;
  c.object = object;
  c.kind = ConstraintKind::Distance;
  c.mode = mode;
  c.distances = std::move(value);
  c.ordinal = static_cast<int>(constraints.size());
  constraints.push_back(std::move(c));
  return constraints.back();
}

bool Network::has_distance_constraints() const {
  return std::any_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.kind == ConstraintKind::Distance; });
}

int auto_grid_side(const Network& n) {
  int side = std::max(4, 2 * static_cast<int>(n.variables.size()) + 1);
  if (n.has_distance_constraints()) side = std::max(side, n.scale.thresholds().back() + 4);
  return side;
}

int resolved_grid_side(const Network& n) { return n.grid_side ? *n.grid_side : auto_grid_side(n); }

Network parse_network(std::string_view text) {
  Network net;
  std::vector<PendingDistance> pending;
  bool seen_grid = false;
  bool seen_domain = false;
  int line_no = 0;

  for (std::string_view raw : split_on(text, '\n')) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto toks = split_ws(raw);
    if (toks.empty()) continue;
    const std::string_view head = toks[0];
    const auto fail = [&](std::string_view tok, const std::string& msg) -> ParseError {
      return ParseError(line_no, std::string(tok), msg);
    };

    if (head == "domain") {
      if (toks.size() != 2) throw fail(head, "expected 'domain connected|disconnected'");
      if (seen_domain) throw fail(head, "duplicate directive 'domain'");
      const auto d = parse_domain(toks[1]);
      if (!d) throw fail(toks[1], "unknown domain '" + std::string(toks[1]) + "'");
      net.domain = *d;
      net.domain_declared = true;
      seen_domain = true;
    } else if (head == "grid") {
      if (toks.size() != 2) throw fail(head, "expected 'grid <side>'");
      if (seen_grid) throw fail(head, "duplicate directive 'grid'");
      const auto v = parse_int(toks[1]);
      if (!v || *v < 1 || *v > kMaxGridSide) throw fail(toks[1], "malformed grid side '" + std::string(toks[1]) + "'");
      net.grid_side = *v;
      seen_grid = true;
    } else if (head == "granularity") {
      if (toks.size() != 2) throw fail(head, "expected 'granularity <int>'");
      if (net.declared_granularity) throw fail(head, "duplicate directive 'granularity'");
      const auto v = parse_int(toks[1]);
      if (!v || *v < 2 || *v > kMaxGranularity)
        throw fail(toks[1], "malformed granularity '" + std::string(toks[1]) + "'");
      net.declared_granularity = *v;
    } else if (head == "thresholds") {
      if (toks.size() < 2) throw fail(head, "expected 'thresholds <int>+'");
      if (net.declared_thresholds) throw fail(head, "duplicate directive 'thresholds'");
      if (toks.size() > kMaxGranularity) throw fail(head, "too many thresholds");
      std::vector<int> values;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto v = parse_int(toks[i]);
        if (!v || *v < 0) throw fail(toks[i], "malformed threshold '" + std::string(toks[i]) + "'");
        if (!values.empty() && *v <= values.back())
          throw fail(toks[i], "non-increasing thresholds at '" + std::string(toks[i]) + "'");
        values.push_back(*v);
      }
      net.declared_thresholds = std::move(values);
    } else if (head == "var") {
      if (toks.size() < 2) throw fail(head, "expected 'var <name>+'");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const std::string name(toks[i]);
        if (!valid_variable_name(name)) throw fail(toks[i], "invalid variable name '" + name + "'");
        if (net.find_variable(name)) throw fail(toks[i], "duplicate variable '" + name + "'");
        net.variables.push_back(name);
      }
    } else {
      const Directive* dir = nullptr;
      for (const auto& d : kConstraintDirectives) {
        if (d.name == head) dir = &d;
      }
      if (!dir) throw fail(head, "unknown directive '" + std::string(head) + "'");
      const bool soft = dir->mode == ConstraintMode::Kind::Soft;
      const std::size_t want = soft ? 5 : 4;
      if (toks.size() != want) {
        throw fail(head, "expected '" + std::string(head) + " <x> <relations> <y>" + (soft ? " <weight>'" : "'"));
      }
      const auto subject = net.find_variable(toks[1]);
      if (!subject) throw fail(toks[1], "undeclared variable '" + std::string(toks[1]) + "'");
      const auto object = net.find_variable(toks[3]);
      if (!object) throw fail(toks[3], "undeclared variable '" + std::string(toks[3]) + "'");
      if (*subject == *object) throw fail(toks[3], "subject and object are the same variable '" + std::string(toks[3]) + "'");
      ConstraintMode mode{dir->mode, 0};
      if (soft) {
        const auto w = parse_int(toks[4]);
        if (!w || *w <= 0) throw fail(toks[4], "malformed weight '" + std::string(toks[4]) + "'");
        mode.weight = *w;
      }
      const auto parts = split_on(toks[2], '|');
      if (dir->kind == ConstraintKind::Direction) {
        std::vector<BasicRelation> rels;
        for (std::string_view part : parts) {
          if (part.empty()) throw fail(toks[2], "empty relation in '" + std::string(toks[2]) + "'");
          for (std::string_view tile : split_on(part, ':')) {
            if (!parse_tile(tile)) throw fail(tile, "unknown tile '" + std::string(tile) + "'");
          }
          rels.push_back(parse_basic_relation(part));
        }
        net.add_direction(*subject, *object, mode, std::move(rels)).line = line_no;
      } else {
        std::vector<std::string> names;
        for (std::string_view part : parts) {
          if (part.empty()) throw fail(toks[2], "empty distance name in '" + std::string(toks[2]) + "'");
          names.push_back(lower(part));
        }
        // Placeholder bucket until the scale is final.
        net.add_distance(*subject, *object, mode, {DistanceRelation{0}}).line = line_no;
        pending.push_back({net.constraints.size() - 1, line_no, std::move(names)});
      }
    }
  }

  if (net.variables.empty()) throw ParseError(1, "", "no variables declared");

  const int g = net.declared_granularity
                    ? *net.declared_granularity
                    : (net.declared_thresholds ? static_cast<int>(net.declared_thresholds->size()) + 1 : 6);
  if (g > kMaxGranularity) throw ParseError(line_no, "thresholds", "granularity too large");
  if (net.declared_thresholds && net.declared_thresholds->size() == static_cast<std::size_t>(g - 1)) {
    net.scale = DistanceScale(g, *net.declared_thresholds);
  } else {
    // A threshold count that disagrees with the granularity is reported by validate().
    net.scale = DistanceScale(g);
  }

  for (const auto& p : pending) {
    std::vector<DistanceRelation> ds;
    for (const auto& name : p.names) {
      const auto d = net.scale.find(name);
      if (!d) throw ParseError(p.line, name, "unknown distance '" + name + "'");
      if (std::find(ds.begin(), ds.end(), *d) == ds.end()) ds.push_back(*d);
    }
    net.constraints[p.constraint].distances = std::move(ds);
  }
  return net;
}

std::string format_network(const Network& n) {
  std::ostringstream out;
  if (n.domain_declared || n.domain != DomainKind::Disconnected) out << "domain " << domain_name(n.domain) << '\n';
  if (n.grid_side) out << "grid " << *n.grid_side << '\n';
  if (n.declared_granularity) out << "granularity " << *n.declared_granularity << '\n';
  if (n.declared_thresholds) {
    out << "thresholds";
    for (int t : *n.declared_thresholds) out << ' ' << t;
    out << '\n';
  }
  out << "var";
  for (const auto& v : n.variables) out << ' ' << v;
  out << '\n';
  for (const auto& c : n.constraints) {
    out << directive_name(c.kind, c.mode.kind) << ' ' << n.variables[static_cast<std::size_t>(c.subject)] << ' ';
    out << (c.kind == ConstraintKind::Direction ? relation_text(c.relations, '|', false)
                                               : distance_text(n, c.distances, '|'));
    out << ' ' << n.variables[static_cast<std::size_t>(c.object)];
    if (c.mode.kind == ConstraintMode::Kind::Soft) out << ' ' << c.mode.weight;
    out << '\n';
  }
  return out.str();
}

std::vector<Diagnostic> validate(const Network& n) {
  std::vector<Diagnostic> out;
  std::map<std::tuple<int, int, ConstraintKind, ConstraintMode::Kind>, int> seen;
  for (const auto& c : n.constraints) {
    const auto key = std::make_tuple(c.subject, c.object, c.kind, c.mode.kind);
    const auto [it, fresh] = seen.emplace(key, c.line);
    if (!fresh) {
      out.push_back({"duplicate-constraint", c.line,
                     "constraint between '" + n.variables[static_cast<std::size_t>(c.subject)] + "' and '" +
                         n.variables[static_cast<std::size_t>(c.object)] + "' repeats the one on line " +
                         std::to_string(it->second)});
    }
    if (c.kind == ConstraintKind::Direction && c.mode.kind == ConstraintMode::Kind::Hard &&
        c.relation_set() == RelationSet::all()) {
      out.push_back({"vacuous-constraint", c.line, "hard constraint admits all 511 basic relations"});
    }
  }
  if (n.has_distance_constraints() && n.declared_thresholds &&
      n.declared_thresholds->size() != static_cast<std::size_t>(n.scale.granularity() - 1)) {
    out.push_back({"scale-conflict", 0,
                   "granularity " + std::to_string(n.scale.granularity()) + " needs " +
                       std::to_string(n.scale.granularity() - 1) + " thresholds but " +
                       std::to_string(n.declared_thresholds->size()) +
                       " were given; default thresholds are used"});
  }
  return out;
}

std::string export_asp_facts(const Network& n) {
  std::ostringstream out;
  for (const auto& v : n.variables) out << "obj(" << v << ").\n";
  if (n.domain_declared) out << "domain(" << domain_name(n.domain) << ").\n";
  out << "grid(" << resolved_grid_side(n) << ").\n";
  out << "granularity(" << n.scale.granularity() << ").\n";
  for (std::size_t i = 0; i < n.scale.thresholds().size(); ++i)
    out << "threshold(" << i + 1 << ',' << n.scale.thresholds()[i] << ").\n";
  for (const auto& c : n.constraints) {
    const auto& x = n.variables[static_cast<std::size_t>(c.subject)];
    const auto& y = n.variables[static_cast<std::size_t>(c.object)];
    if (c.kind == ConstraintKind::Direction) {
      const std::string rel = relation_text(c.relations, ';', true);
      switch (c.mode.kind) {
        case ConstraintMode::Kind::Hard:
          out << (c.relations.size() == 1 ? "hard(" : "disj(") << x << ",\"" << rel << "\"," << y << ").\n";
          break;
        case ConstraintMode::Kind::Negative:
          out << "neg(" << x << ",\"" << rel << "\"," << y << ").\n";
          break;
        case ConstraintMode::Kind::Default:
          out << "default(" << x << ",\"" << rel << "\"," << y << ").\n";
          break;
        case ConstraintMode::Kind::Soft:
          out << "soft(" << x << ",\"" << rel << "\"," << y << ',' << c.mode.weight << ").\n";
          break;
      }
    } else {
      static constexpr std::string_view kModes[] = {"hard", "neg", "default", "soft"};
      out << "distc(" << kModes[static_cast<int>(c.mode.kind)] << ',' << x << ",\""
          << distance_text(n, c.distances, ';') << "\"," << y;
      if (c.mode.kind == ConstraintMode::Kind::Soft) out << ',' << c.mode.weight;
      out << ").\n";
    }
  }
  return out.str();
}

}  // namespace cdc
