#include "cdc/oracle.hpp"

#include <chrono>
#include <cmath>

#include "cdc/error.hpp"

namespace cdc {

void for_each_region(int grid_side, int max_cells, bool connected_only,
                     const std::function<void(const Region&)>& visit) {
  if (grid_side < 1) throw Error("grid side must be at least 1");
  if (max_cells < 1) throw Error("max_cells must be at least 1");
  const int total = grid_side * grid_side;
  const int limit = std::min(max_cells, total);
  std::vector<int> idx;
  std::vector<Cell> cells;
  for (int k = 1; k <= limit; ++k) {
    idx.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      cells.clear();
      for (int i : idx) cells.push_back({i / grid_side, i % grid_side});
      Region r(cells);
      if (!connected_only || is_connected(r)) visit(r);
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

std::vector<Region> enumerate_regions(int grid_side, int max_cells, bool connected_only) {
  std::vector<Region> out;
  for_each_region(grid_side, max_cells, connected_only, [&](const Region& r) { out.push_back(r); });
  return out;
}

namespace {

bool is_hard(const Constraint& c) {
  return c.mode.kind == ConstraintMode::Kind::Hard || c.mode.kind == ConstraintMode::Kind::Negative;
}

class Oracle {
 public:
  Oracle(const Network& n, std::vector<Region> regions) : n_(n), regions_(std::move(regions)) {
    hard_at_.resize(n.variables.size());
    for (const auto& c : n.constraints) {
      if (!is_hard(c)) continue;
      hard_at_[static_cast<std::size_t>(std::max(c.subject, c.object))].push_back(&c);
    }
  }

  void run() {
    model_.assign(n_.variables.size(), nullptr);
    assign(0);
  }

  bool found() const { return found_; }
  const std::vector<Region>& best_model() const { return best_model_; }
  const std::vector<int>& best_defaults() const { return best_defaults_; }
  long long best_soft() const { return best_soft_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  std::vector<Region> current() const {
    std::vector<Region> out;
    for (const Region* r : model_) out.push_back(*r);
    return out;
  }

  void assign(std::size_t v) {
    if (v == model_.size()) {
      leaf();
      return;
    }
    for (const Region& r : regions_) {
      ++nodes_;
      model_[v] = &r;
      bool ok = true;
      for (const Constraint* c : hard_at_[v]) {
        if (!holds(*c)) {
          ok = false;
          break;
        }
      }
      if (ok) assign(v + 1);
    }
  }

  bool holds(const Constraint& c) const {
    const Region& a = *model_[static_cast<std::size_t>(c.subject)];
    const Region& b = *model_[static_cast<std::size_t>(c.object)];
    bool member = false;
    if (c.kind == ConstraintKind::Direction) {
      const BasicRelation rel = cdc_relation(a, b);
      for (const auto& r : c.relations) member = member || r == rel;
    } else {
      const DistanceRelation d = distance_relation(a, b, n_.scale);
      for (const auto& r : c.distances) member = member || r == d;
    }
    return c.mode.kind == ConstraintMode::Kind::Negative ? !member : member;
  }

  // Lexicographic: more defaults, then the earliest differing default satisfied, then soft weight.
  bool better(const std::vector<int>& defaults, long long soft) const {
    if (!found_) return true;
    if (defaults.size() != best_defaults_.size()) return defaults.size() > best_defaults_.size();
    for (std::size_t i = 0; i < defaults.size(); ++i) {
      if (defaults[i] != best_defaults_[i]) return defaults[i] < best_defaults_[i];
    }
    return soft > best_soft_;
  }

  void leaf() {
    std::vector<int> defaults;
    long long soft = 0;
    for (const auto& c : n_.constraints) {
      if (c.mode.kind == ConstraintMode::Kind::Default && holds(c)) defaults.push_back(c.ordinal);
      if (c.mode.kind == ConstraintMode::Kind::Soft && holds(c)) soft += c.mode.weight;
    }
    if (!better(defaults, soft)) return;
    found_ = true;
    best_defaults_ = std::move(defaults);
    best_soft_ = soft;
    best_model_ = current();
  }

  const Network& n_;
  std::vector<Region> regions_;
  std::vector<std::vector<const Constraint*>> hard_at_;
  std::vector<const Region*> model_;
  bool found_ = false;
  std::vector<Region> best_model_;
  std::vector<int> best_defaults_;
  long long best_soft_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace

SolveResult oracle_solve(const Network& n, int grid_side, int max_cells, double cap) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Region> regions = enumerate_regions(grid_side, max_cells, n.domain == DomainKind::Connected);
  const double assignments = std::pow(static_cast<double>(regions.size()), static_cast<double>(n.variables.size()));
  if (assignments > cap) throw Error("oracle scale exceeded");

  Oracle oracle(n, std::move(regions));
  oracle.run();

  SolveResult out;
  out.grid_side = grid_side;
  out.status = oracle.found() ? SolveStatus::Consistent : SolveStatus::Inconsistent;
  if (oracle.found()) {
    out.model = oracle.best_model();
    out.defaults_applied = oracle.best_defaults();
    out.soft_objective = oracle.best_soft();
    out.stats.best_defaults = static_cast<int>(out.defaults_applied.size());
    out.stats.best_soft = out.soft_objective;
  }
  out.stats.nodes = oracle.nodes();
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace cdc
