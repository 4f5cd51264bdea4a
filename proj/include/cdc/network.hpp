#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdc/distance.hpp"
#include "cdc/tile.hpp"

namespace cdc {

enum class DomainKind { Connected, Disconnected };

std::string_view domain_name(DomainKind d) noexcept;
std::optional<DomainKind> parse_domain(std::string_view text) noexcept;

enum class ConstraintKind { Direction, Distance };

struct ConstraintMode {
  enum class Kind { Hard, Negative, Default, Soft };

  Kind kind = Kind::Hard;
  int weight = 0;  // positive iff kind == Soft

  static ConstraintMode hard() { return {Kind::Hard, 0}; }
  static ConstraintMode negative() { return {Kind::Negative, 0}; }
  static ConstraintMode default_() { return {Kind::Default, 0}; }
  static ConstraintMode soft(int weight);

  friend bool operator==(const ConstraintMode&, const ConstraintMode&) = default;
};

struct Constraint {
  int subject = 0;
  int object = 0;
  ConstraintKind kind = ConstraintKind::Direction;
  ConstraintMode mode;
  // Disjuncts in declaration order, duplicates removed. Only the list matching `kind` is used.
  std::vector<BasicRelation> relations;
  std::vector<DistanceRelation> distances;
  int ordinal = 0;
  int line = 0;  // 0 for constraints not read from a file

  RelationSet relation_set() const;
  /// Bit i set iff bucket i is listed.
  std::uint32_t distance_mask() const;

  bool operator==(const Constraint& o) const {
    return subject == o.subject && object == o.object && kind == o.kind && mode == o.mode &&
           relations == o.relations && distances == o.distances && ordinal == o.ordinal;
  }
};

struct Network {
  std::vector<std::string> variables;
  DomainKind domain = DomainKind::Disconnected;
  bool domain_declared = false;
  std::optional<int> grid_side;  // nullopt = auto
  std::optional<int> declared_granularity;
  std::optional<std::vector<int>> declared_thresholds;
  DistanceScale scale;
  std::vector<Constraint> constraints;

  /// Throws cdc::Error on an invalid or duplicate name.
  int add_variable(const std::string& name);
  std::optional<int> find_variable(std::string_view name) const;
  int variable(std::string_view name) const;  // throws when undeclared

  Constraint& add_direction(int subject, int object, ConstraintMode mode, std::vector<BasicRelation> value);
  Constraint& add_distance(int subject, int object, ConstraintMode mode, std::vector<DistanceRelation> value);

  bool has_distance_constraints() const;
  bool operator==(const Network& o) const {
    return variables == o.variables && domain == o.domain && grid_side == o.grid_side &&
           declared_granularity == o.declared_granularity &&
           declared_thresholds == o.declared_thresholds && scale == o.scale && constraints == o.constraints;
  }
};

bool valid_variable_name(std::string_view name) noexcept;

/// max(4, 2n + 1), raised to last threshold + 4 when distance constraints exist.
int auto_grid_side(const Network& n);
int resolved_grid_side(const Network& n);

Network parse_network(std::string_view text);
/// Canonical text form; parse_network(format_network(n)) == n.
std::string format_network(const Network& n);

struct Diagnostic {
  std::string code;  // duplicate-constraint | vacuous-constraint | scale-conflict
  int line = 0;
  std::string message;
};

std::vector<Diagnostic> validate(const Network& n);

std::string export_asp_facts(const Network& n);

}  // namespace cdc
