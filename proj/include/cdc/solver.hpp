#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdc/network.hpp"
#include "cdc/region.hpp"

namespace cdc {

struct SolverConfig {
  std::optional<int> grid_side;  // overrides the network; nullopt = network value or auto
  bool deterministic = true;     // single canonical search order
  int worker_count = 1;
  std::optional<double> time_budget;  // seconds
  /// Restricts every region to at most this many cells. Used to compare against the
  /// brute-force oracle on the same bounded region space.
  std::optional<int> max_cells;
};

enum class SolveStatus { Consistent, Inconsistent, Timeout };

std::string_view status_name(SolveStatus s) noexcept;

struct SolveStats {
  std::uint64_t nodes = 0;
  double wall_seconds = 0.0;
  // Objective of the best model known when the search stopped (timeouts included).
  std::optional<int> best_defaults;
  std::optional<long long> best_soft;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Inconsistent;
  int grid_side = 0;
  std::optional<std::vector<Region>> model;  // indexed like Network::variables
  std::vector<int> defaults_applied;         // ordinals, ascending
  long long soft_objective = 0;
  SolveStats stats;
};

/// Hard constraints must hold; among those models the number of satisfied defaults is
/// maximized (ties prefer lower ordinals), then the satisfied soft weight.
/// Throws cdc::Error for an invalid configuration.
SolveResult solve(const Network& n, const SolverConfig& cfg = {});

struct RelationQuery {
  RelationSet relations;
  bool complete = true;  // false when the time budget ran out
  SolveStats stats;
};

/// Every basic relation S such that the hard part of n plus `x S y` is consistent.
RelationQuery enumerate_relations(const Network& n, int x, int y, const SolverConfig& cfg = {});

/// Re-evaluates a model with the region evaluators.
struct ModelCheck {
  bool hard_ok = true;
  bool on_grid = true;
  bool connected_ok = true;
  bool size_ok = true;
  std::vector<int> defaults_satisfied;
  long long soft_satisfied = 0;
};

ModelCheck check_model(const Network& n, const std::vector<Region>& model, int grid_side,
                       std::optional<int> max_cells = std::nullopt);

bool constraint_satisfied(const Network& n, const Constraint& c, const std::vector<Region>& model);

}  // namespace cdc
