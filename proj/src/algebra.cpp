#include "cdc/algebra.hpp"

#include "cdc/error.hpp"

namespace cdc {

namespace {

Network relation_network(int vars, DomainKind domain) {
  Network n;
  n.domain = domain;
  n.domain_declared = true;
  static constexpr const char* kNames[] = {"a", "b", "c"};
  for (int i = 0; i < vars; ++i) n.add_variable(kNames[i]);
  return n;
}

}  // namespace

RelationResult infer_missing(const Network& n, int x, int y, const SolverConfig& cfg) {
  const RelationQuery q = enumerate_relations(n, x, y, cfg);
  return {q.relations, q.complete};
}

RelationResult infer_missing(const Network& n, std::string_view x, std::string_view y, const SolverConfig& cfg) {
  return infer_missing(n, n.variable(x), n.variable(y), cfg);
}

RelationResult inverse(BasicRelation r, DomainKind domain, const SolverConfig& cfg) {
  Network n = relation_network(2, domain);
  n.add_direction(0, 1, ConstraintMode::hard(), {r});
  return infer_missing(n, 1, 0, cfg);
}

RelationResult compose(BasicRelation r1, BasicRelation r2, DomainKind domain, const SolverConfig& cfg) {
  Network n = relation_network(3, domain);
  n.add_direction(0, 1, ConstraintMode::hard(), {r1});
  n.add_direction(1, 2, ConstraintMode::hard(), {r2});
  return infer_missing(n, 0, 2, cfg);
}

}  // namespace cdc
