#pragma once

// Internal representation shared by the box-level search and the two leaf engines.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

#include "cdc/distance.hpp"
#include "cdc/region.hpp"
#include "cdc/tile.hpp"

namespace cdc::detail {

using Clock = std::chrono::steady_clock;

enum class Role : std::uint8_t { Hard, Default, Soft };

struct DirCon {
  int a = 0;  // subject
  int b = 0;  // reference object
  RelationSet allowed;
  Role role = Role::Hard;
  int weight = 0;
  int slot = -1;  // default slot, ascending with ordinal
  bool query = false;
};

struct DistCon {
  int a = 0;
  int b = 0;
  std::uint32_t buckets = 0;
  Role role = Role::Hard;
  int weight = 0;
  int slot = -1;
};

struct Box {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;

  int area() const noexcept { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

/// Non-hard constraints on one pair; each signature is a set of members that can hold together.
struct PairGroup {
  bool distance = false;
  std::vector<int> members;
  std::vector<std::uint64_t> signatures;
};

struct Problem {
  int n = 0;
  int side = 0;
  bool connected = false;
  std::optional<int> max_cells;
  DistanceScale scale;
  std::vector<DirCon> dirs;
  std::vector<DistCon> dists;
  int num_defaults = 0;
  long long total_soft = 0;
  bool compress = false;  // no distance constraints: box layouts may be order-compressed
  bool coupled = false;   // leaf needs joint cell-level search
  int query = -1;         // index into dirs, enumeration mode only
  std::vector<PairGroup> groups;
};

/// Lexicographic objective: default count, then defaults by ordinal, then soft weight.
struct Score {
  int count = 0;
  std::vector<char> defaults;  // indexed by slot
  long long soft = 0;
};

int compare(const Score& a, const Score& b) noexcept;
Score max_score(const Problem& p);
/// Upper bound on the objective given the constraints already lost.
Score bound(const Problem& p, const std::vector<char>& lost_dir, const std::vector<char>& lost_dist);

struct Shared {
  std::mutex mu;
  bool have_best = false;
  Score best;
  std::vector<std::vector<Cell>> witness;
  RelationSet found;
  std::atomic<bool> stop{false};
  std::atomic<bool> timed_out{false};
  std::optional<Clock::time_point> deadline;
  std::atomic<std::uint64_t> nodes{0};
};

/// Relations realizable by a region whose bounding box is `a`, w.r.t. reference box `ref`.
const RelationSet& box_compat(const Box& a, const Box& ref);
/// box_compat factored through the 81 band patterns of a against ref.
int box_compat_key(const Box& a, const Box& ref) noexcept;
const RelationSet& compat_for_key(int key);

/// Bounds on the boundary distance between two regions with tight boxes a and b.
int box_distance_lower(const Box& a, const Box& b) noexcept;
int box_distance_upper(const Box& a, const Box& b, bool connected) noexcept;
/// Largest distance some allowed bucket admits; -1 unbounded, -2 none.
int max_admissible_distance(const DistanceScale& scale, std::uint32_t buckets) noexcept;

/// True when some allowed bucket covers a distance in [lo, hi]; hi < 0 means unbounded.
bool buckets_admit(const DistanceScale& scale, std::uint32_t buckets, int lo, int hi) noexcept;

/// True when some member R of s satisfies inner ⊆ R ⊆ outer.
inline bool any_between(const RelationSet& s, std::uint16_t inner, std::uint16_t outer) noexcept {
  if (inner & ~outer) return false;
  const std::uint16_t free = outer & static_cast<std::uint16_t>(~inner);
  const auto& bits = s.bits();
  for (std::uint16_t sub = free;; sub = static_cast<std::uint16_t>((sub - 1) & free)) {
    if (bits[inner | sub]) return true;
    if (sub == 0) break;
  }
  return false;
}

inline std::uint8_t tile_index(int x, int y, const Box& ref) noexcept {
  const Band xb = x < ref.x0 ? Band::Below : (x > ref.x1 ? Band::Above : Band::Inside);
  const Band yb = y < ref.y0 ? Band::Below : (y > ref.y1 ? Band::Above : Band::Inside);
  return static_cast<std::uint8_t>(tile_from_bands(xb, yb));
}

/// Reports whether the search should stop; polls the deadline every so often.
bool should_stop(Shared& sh, std::uint64_t& local_nodes);

/// Per-variable region synthesis over signature classes. Valid when no distance
/// constraint and no cell cap apply, so a variable's cells only matter for its own
/// direction constraints.
struct VarLeaf {
  bool feasible = false;
  Score score;
  std::vector<Cell> cells;
};

enum class LeafGoal { Feasible, Optimize, Enumerate };

VarLeaf solve_variable(const Problem& p, int var, const std::vector<Box>& boxes, LeafGoal goal,
                       RelationSet* found, Shared& sh, std::uint64_t& local_nodes);

/// Joint cell-level search over every variable for fixed boxes. Reports improvements
/// to the objective (or new query relations) through the callbacks.
struct CoupledCallbacks {
  // Called at each complete model; returns false to stop the leaf search.
  virtual bool on_model(const Score& score, const std::vector<std::vector<Cell>>& cells) = 0;
  virtual bool pruned_by(const Score& upper_bound) const = 0;
  virtual ~CoupledCallbacks() = default;
};

void solve_coupled(const Problem& p, const std::vector<int>& order, const std::vector<Box>& boxes,
                   const std::vector<char>& box_lost_dir, const std::vector<char>& box_lost_dist,
                   RelationSet* found, CoupledCallbacks& cb, Shared& sh, std::uint64_t& local_nodes);

}  // namespace cdc::detail
