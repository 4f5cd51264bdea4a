#pragma once

#include "cdc/network.hpp"
#include "cdc/solver.hpp"
#include "cdc/tile.hpp"

namespace cdc {

struct RelationResult {
  RelationSet relations;
  bool complete = true;  // false when the time budget ran out first
};

/// Every S such that {a r b, b S a} is consistent.
RelationResult inverse(BasicRelation r, DomainKind domain, const SolverConfig& cfg = {});

/// Every S such that {a r1 b, b r2 c, a S c} is consistent.
RelationResult compose(BasicRelation r1, BasicRelation r2, DomainKind domain, const SolverConfig& cfg = {});

/// Every S such that n plus the hard constraint x S y is consistent.
RelationResult infer_missing(const Network& n, int x, int y, const SolverConfig& cfg = {});
RelationResult infer_missing(const Network& n, std::string_view x, std::string_view y, const SolverConfig& cfg = {});

}  // namespace cdc
