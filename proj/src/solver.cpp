#include "cdc/solver.hpp"

#include <algorithm>
#include <array>
#include <thread>

#include "cdc/error.hpp"
#include "solver_detail.hpp"

namespace cdc {

namespace detail {

int compare(const Score& a, const Score& b) noexcept {
  if (a.count != b.count) return a.count < b.count ? -1 : 1;
  for (std::size_t i = 0; i < a.defaults.size() && i < b.defaults.size(); ++i) {
    if (a.defaults[i] != b.defaults[i]) return a.defaults[i] ? 1 : -1;
  }
  if (a.soft != b.soft) return a.soft < b.soft ? -1 : 1;
  return 0;
}

Score max_score(const Problem& p) {
  Score s;
  s.count = p.num_defaults;
  s.defaults.assign(static_cast<std::size_t>(p.num_defaults), 1);
  s.soft = p.total_soft;
  return s;
}

Score bound(const Problem& p, const std::vector<char>& lost_dir, const std::vector<char>& lost_dist) {
  Score s = max_score(p);
  const auto drop = [](Score& sc, Role role, int slot, int weight) {
    if (role == Role::Default) {
      --sc.count;
      sc.defaults[static_cast<std::size_t>(slot)] = 0;
    } else if (role == Role::Soft) {
      sc.soft -= weight;
    }
  };
  const auto lost = [&](bool distance, std::size_t i) {
    const auto& v = distance ? lost_dist : lost_dir;
    return i < v.size() && v[i];
  };
  for (std::size_t i = 0; i < p.dirs.size(); ++i) {
    if (lost(false, i)) drop(s, p.dirs[i].role, p.dirs[i].slot, p.dirs[i].weight);
  }
  for (std::size_t i = 0; i < p.dists.size(); ++i) {
    if (lost(true, i)) drop(s, p.dists[i].role, p.dists[i].slot, p.dists[i].weight);
  }
  for (const auto& g : p.groups) {
    std::optional<Score> best;
    for (const std::uint64_t sig : g.signatures) {
      Score cand = s;
      for (std::size_t k = 0; k < g.members.size(); ++k) {
        const auto i = static_cast<std::size_t>(g.members[k]);
        if ((sig >> k) & 1ULL || lost(g.distance, i)) continue;
        if (g.distance) {
          drop(cand, p.dists[i].role, p.dists[i].slot, p.dists[i].weight);
        } else {
          drop(cand, p.dirs[i].role, p.dirs[i].slot, p.dirs[i].weight);
        }
      }
      if (!best || compare(cand, *best) > 0) best = std::move(cand);
    }
    s = std::move(*best);
  }
  return s;
}

namespace {

Band band_of(int v, int lo, int hi) noexcept {
  return v < lo ? Band::Below : (v > hi ? Band::Above : Band::Inside);
}

using CompatTable = std::array<RelationSet, 81>;

int compat_key(Band xlo, Band xhi, Band ylo, Band yhi) noexcept {
  return ((static_cast<int>(xlo) * 3 + static_cast<int>(xhi)) * 3 + static_cast<int>(ylo)) * 3 + static_cast<int>(yhi);
}

const CompatTable& compat_table() {
  static const CompatTable table = [] {
    CompatTable t;
    for (std::uint16_t m = 1; m <= BasicRelation::kFullMask; ++m) {
      int xlo = 2, xhi = 0, ylo = 2, yhi = 0;
      for (int i = 0; i < kTileCount; ++i) {
        if (!(m & (1U << i))) continue;
        const int xb = static_cast<int>(x_band(static_cast<Tile>(i)));
        const int yb = static_cast<int>(y_band(static_cast<Tile>(i)));
        xlo = std::min(xlo, xb);
        xhi = std::max(xhi, xb);
        ylo = std::min(ylo, yb);
        yhi = std::max(yhi, yb);
      }
      t[static_cast<std::size_t>(compat_key(static_cast<Band>(xlo), static_cast<Band>(xhi), static_cast<Band>(ylo),
                                            static_cast<Band>(yhi)))]
          .insert(BasicRelation(m));
    }
    return t;
  }();
  return table;
}

}  // namespace

int box_compat_key(const Box& a, const Box& ref) noexcept {
  return compat_key(band_of(a.x0, ref.x0, ref.x1), band_of(a.x1, ref.x0, ref.x1), band_of(a.y0, ref.y0, ref.y1),
                    band_of(a.y1, ref.y0, ref.y1));
}

const RelationSet& compat_for_key(int key) { return compat_table()[static_cast<std::size_t>(key)]; }

const RelationSet& box_compat(const Box& a, const Box& ref) { return compat_for_key(box_compat_key(a, ref)); }

int box_distance_lower(const Box& a, const Box& b) noexcept {
  const int gx = std::max({0, b.x0 - a.x1, a.x0 - b.x1});
  const int gy = std::max({0, b.y0 - a.y1, a.y0 - b.y1});
  return std::max(0, std::max(gx, gy) - 1);
}

namespace {

// Rows (or columns) of a box that the region must meet: all of them when it is
// connected, otherwise the two outer ones.
int line_gap(int lo1, int hi1, int lo2, int hi2, bool all) noexcept {
  if (all) return std::max({0, lo2 - hi1, lo1 - hi2});
  return std::min({std::abs(lo1 - lo2), std::abs(lo1 - hi2), std::abs(hi1 - lo2), std::abs(hi1 - hi2)});
}

// Least over lines t of [lo, hi] of the farthest point of [span_lo, span_hi] from t.
int line_reach(int span_lo, int span_hi, int lo, int hi, bool all) noexcept {
  const auto reach = [&](int t) { return std::max(t - span_lo, span_hi - t); };
  int best = std::min(reach(lo), reach(hi));
  if (all) {
    const int mid = (span_lo + span_hi) / 2;
    best = std::min({best, reach(std::clamp(mid, lo, hi)), reach(std::clamp(mid + 1, lo, hi))});
  }
  return best;
}

}  // namespace

int box_distance_upper(const Box& a, const Box& b, bool connected) noexcept {
  const int dx = std::max(a.x1 - b.x0, b.x1 - a.x0);
  const int dy = std::max(a.y1 - b.y0, b.y1 - a.y0);
  const int row_row = std::max(dx, line_gap(a.y0, a.y1, b.y0, b.y1, connected));
  const int col_col = std::max(dy, line_gap(a.x0, a.x1, b.x0, b.x1, connected));
  const int row_col = std::max(line_reach(a.x0, a.x1, b.x0, b.x1, connected), line_reach(b.y0, b.y1, a.y0, a.y1, connected));
  const int col_row = std::max(line_reach(b.x0, b.x1, a.x0, a.x1, connected), line_reach(a.y0, a.y1, b.y0, b.y1, connected));
  return std::max(0, std::min({row_row, col_col, row_col, col_row}) - 1);
}

int max_admissible_distance(const DistanceScale& scale, std::uint32_t buckets) noexcept {
  for (int i = scale.granularity() - 1; i >= 0; --i) {
    if (buckets & (1U << i)) return scale.upper_bound(DistanceRelation{i});
  }
  return -2;
}

bool buckets_admit(const DistanceScale& scale, std::uint32_t buckets, int lo, int hi) noexcept {
  const int blo = scale.classify(lo).bucket;
  const int bhi = hi < 0 ? scale.granularity() - 1 : scale.classify(hi).bucket;
  if (bhi < blo) return false;
  const std::uint32_t range = ((bhi >= 31 ? 0xFFFFFFFFU : ((1U << (bhi + 1)) - 1U))) & ~((1U << blo) - 1U);
  return (range & buckets) != 0;
}

bool should_stop(Shared& sh, std::uint64_t& local_nodes) {
  if (sh.stop.load(std::memory_order_relaxed)) return true;
  if ((++local_nodes & 1023U) == 0) {
    sh.nodes.fetch_add(1024, std::memory_order_relaxed);
    if (sh.deadline && Clock::now() > *sh.deadline) {
      sh.timed_out = true;
      sh.stop = true;
      return true;
    }
  }
  return false;
}

}  // namespace detail

using namespace detail;

namespace {

Role role_of(ConstraintMode::Kind k) {
  switch (k) {
    case ConstraintMode::Kind::Default:
      return Role::Default;
    case ConstraintMode::Kind::Soft:
      return Role::Soft;
    default:
      return Role::Hard;
  }
}

struct CompileOptions {
  bool harden = false;  // defaults and soft constraints become hard
  int query_x = -1;     // enumeration: drop defaults and soft constraints, add the query pair
  int query_y = -1;
};

// Constraints on one pair that can hold together: one relation and one distance per pair.
void add_pair_groups(Problem& p) {
  const auto add = [&](bool distance, const std::vector<int>& members, const std::vector<std::uint64_t>& sigs) {
    const std::uint64_t full = members.size() == 64 ? ~0ULL : (1ULL << members.size()) - 1ULL;
    if (members.empty() || members.size() > 64 || sigs.empty()) return;
    if (std::find(sigs.begin(), sigs.end(), full) != sigs.end()) return;
    p.groups.push_back({distance, members, sigs});
  };
  std::vector<char> seen(p.dirs.size(), 0);
  for (std::size_t i = 0; i < p.dirs.size(); ++i) {
    if (seen[i] || p.dirs[i].query) continue;
    std::vector<int> members;
    RelationSet hard = RelationSet::all();
    for (std::size_t j = i; j < p.dirs.size(); ++j) {
      const auto& c = p.dirs[j];
      if (c.query || c.a != p.dirs[i].a || c.b != p.dirs[i].b) continue;
      seen[j] = 1;
      if (c.role == Role::Hard) {
        hard = hard & c.allowed;
      } else {
        members.push_back(static_cast<int>(j));
      }
    }
    std::vector<std::uint64_t> sigs;
    for (std::uint16_t m = 1; m <= BasicRelation::kFullMask && members.size() <= 64; ++m) {
      if (!hard.contains_mask(m)) continue;
      std::uint64_t sig = 0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (p.dirs[static_cast<std::size_t>(members[k])].allowed.contains_mask(m)) sig |= 1ULL << k;
      }
      if (std::find(sigs.begin(), sigs.end(), sig) == sigs.end()) sigs.push_back(sig);
    }
    add(false, members, sigs);
  }
  seen.assign(p.dists.size(), 0);
  const std::uint32_t all_buckets = (1U << p.scale.granularity()) - 1U;
  for (std::size_t i = 0; i < p.dists.size(); ++i) {
    if (seen[i]) continue;
    std::vector<int> members;
    std::uint32_t hard = all_buckets;
    const auto key = std::minmax(p.dists[i].a, p.dists[i].b);
    for (std::size_t j = i; j < p.dists.size(); ++j) {
      const auto& c = p.dists[j];
      if (std::minmax(c.a, c.b) != key) continue;
      seen[j] = 1;
      if (c.role == Role::Hard) {
        hard &= c.buckets;
      } else {
        members.push_back(static_cast<int>(j));
      }
    }
    std::vector<std::uint64_t> sigs;
    for (int b = 0; b < p.scale.granularity() && members.size() <= 64; ++b) {
      if (!((hard >> b) & 1U)) continue;
      std::uint64_t sig = 0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        if ((p.dists[static_cast<std::size_t>(members[k])].buckets >> b) & 1U) sig |= 1ULL << k;
      }
      if (std::find(sigs.begin(), sigs.end(), sig) == sigs.end()) sigs.push_back(sig);
    }
    add(true, members, sigs);
  }
}

Problem compile(const Network& n, const SolverConfig& cfg, const CompileOptions& opt) {
  Problem p;
  p.n = static_cast<int>(n.variables.size());
  p.side = cfg.grid_side ? *cfg.grid_side : resolved_grid_side(n);
  p.connected = n.domain == DomainKind::Connected;
  p.max_cells = cfg.max_cells;
  p.scale = n.scale;
  const bool enumerate = opt.query_x >= 0;
  const RelationSet domain_rels = p.connected ? RelationSet::connected_realizable() : RelationSet::all();
  const std::uint32_t all_buckets = (1U << n.scale.granularity()) - 1U;

  for (const auto& c : n.constraints) {
    Role role = role_of(c.mode.kind);
    if (role != Role::Hard && enumerate) continue;
    if (opt.harden) role = Role::Hard;
    const bool negative = c.mode.kind == ConstraintMode::Kind::Negative;
    int slot = -1;
    if (role == Role::Default) slot = p.num_defaults++;
    if (role == Role::Soft) p.total_soft += c.mode.weight;
    if (c.kind == ConstraintKind::Direction) {
      DirCon d;
      d.a = c.subject;
      d.b = c.object;
      d.allowed = (negative ? c.relation_set().complement() : c.relation_set()) & domain_rels;
      d.role = role;
      d.weight = role == Role::Soft ? c.mode.weight : 0;
      d.slot = slot;
      p.dirs.push_back(d);
    } else {
      DistCon d;
      d.a = c.subject;
      d.b = c.object;
      d.buckets = negative ? (~c.distance_mask() & all_buckets) : c.distance_mask();
      d.role = role;
      d.weight = role == Role::Soft ? c.mode.weight : 0;
      d.slot = slot;
      p.dists.push_back(d);
    }
  }
  // Hard constraints on one pair intersect; distance is symmetric.
  {
    std::vector<DirCon> dirs;
    for (const auto& d : p.dirs) {
      auto same = std::find_if(dirs.begin(), dirs.end(), [&](const DirCon& e) {
        return d.role == Role::Hard && e.role == Role::Hard && e.a == d.a && e.b == d.b;
      });
      if (same == dirs.end()) {
        dirs.push_back(d);
      } else {
        same->allowed = same->allowed & d.allowed;
      }
    }
    p.dirs = std::move(dirs);
    std::vector<DistCon> dists;
    for (const auto& d : p.dists) {
      auto same = std::find_if(dists.begin(), dists.end(), [&](const DistCon& e) {
        return d.role == Role::Hard && e.role == Role::Hard &&
               std::minmax(e.a, e.b) == std::minmax(d.a, d.b);
      });
      if (same == dists.end()) {
        dists.push_back(d);
      } else {
        same->buckets &= d.buckets;
      }
    }
    p.dists = std::move(dists);
  }
  if (enumerate) {
    DirCon q;
    q.a = opt.query_x;
    q.b = opt.query_y;
    q.allowed = domain_rels;
    q.query = true;
    p.query = static_cast<int>(p.dirs.size());
    p.dirs.push_back(q);
  }
  add_pair_groups(p);
  p.compress = p.dists.empty();
  p.coupled = !p.dists.empty() || p.max_cells.has_value();
  return p;
}

// Most constrained variable first, then repeatedly the one most tied to those placed.
std::vector<int> search_order(const Problem& p) {
  const auto nn = static_cast<std::size_t>(p.n);
  std::vector<std::vector<int>> weight(nn, std::vector<int>(nn, 0));
  std::vector<int> degree(nn, 0);
  const auto link = [&](int a, int b, bool hard) {
    const int w = hard ? 2 : 1;
    weight[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += w;
    weight[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] += w;
    degree[static_cast<std::size_t>(a)] += w;
    degree[static_cast<std::size_t>(b)] += w;
  };
  for (const auto& c : p.dirs) link(c.a, c.b, c.role == Role::Hard);
  for (const auto& c : p.dists) link(c.a, c.b, c.role == Role::Hard);

  std::vector<int> order;
  std::vector<char> placed(nn, 0);
  for (std::size_t step = 0; step < nn; ++step) {
    int best = -1;
    int best_tie = -1;
    int best_deg = -1;
    for (std::size_t v = 0; v < nn; ++v) {
      if (placed[v]) continue;
      int tie = 0;
      for (int u : order) tie += weight[v][static_cast<std::size_t>(u)];
      if (tie > best_tie || (tie == best_tie && degree[v] > best_deg)) {
        best = static_cast<int>(v);
        best_tie = tie;
        best_deg = degree[v];
      }
    }
    placed[static_cast<std::size_t>(best)] = 1;
    order.push_back(best);
  }
  return order;
}

class BoxSearch final : public CoupledCallbacks {
 public:
  BoxSearch(const Problem& p, Shared& sh, const std::vector<int>& order)
      : p_(p), sh_(sh), order_(order), max_(bound(p, {}, {})) {
    const auto nn = static_cast<std::size_t>(p.n);
    boxes_.resize(nn);
    std::vector<std::size_t> pos(nn);
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = i;
    dir_at_.resize(nn);
    dist_at_.resize(nn);
    for (std::size_t i = 0; i < p.dirs.size(); ++i) {
      const int d = std::max(pos[static_cast<std::size_t>(p.dirs[i].a)], pos[static_cast<std::size_t>(p.dirs[i].b)]);
      dir_at_[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < p.dists.size(); ++i) {
      const int d = std::max(pos[static_cast<std::size_t>(p.dists[i].a)], pos[static_cast<std::size_t>(p.dists[i].b)]);
      dist_at_[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));
    }
    lost_dir_.assign(p.dirs.size(), 0);
    lost_dist_.assign(p.dists.size(), 0);
    assigned_.assign(nn, 0);
    pos_ = pos;
    for (const auto& c : p.dists) max_dist_.push_back(max_admissible_distance(p.scale, c.buckets));
    hard_dirs_of_.resize(nn);
    hard_dists_of_.resize(nn);
    neighbors_.resize(nn);
    for (std::size_t i = 0; i < p.dirs.size(); ++i) {
      if (p.dirs[i].role != Role::Hard) continue;
      hard_dirs_of_[static_cast<std::size_t>(p.dirs[i].a)].push_back(static_cast<int>(i));
      hard_dirs_of_[static_cast<std::size_t>(p.dirs[i].b)].push_back(static_cast<int>(i));
      neighbors_[static_cast<std::size_t>(p.dirs[i].a)].push_back(p.dirs[i].b);
      neighbors_[static_cast<std::size_t>(p.dirs[i].b)].push_back(p.dirs[i].a);
    }
    for (std::size_t i = 0; i < p.dists.size(); ++i) {
      if (p.dists[i].role != Role::Hard) continue;
      hard_dists_of_[static_cast<std::size_t>(p.dists[i].a)].push_back(static_cast<int>(i));
      hard_dists_of_[static_cast<std::size_t>(p.dists[i].b)].push_back(static_cast<int>(i));
      neighbors_[static_cast<std::size_t>(p.dists[i].a)].push_back(p.dists[i].b);
      neighbors_[static_cast<std::size_t>(p.dists[i].b)].push_back(p.dists[i].a);
    }
    for (auto& nb : neighbors_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    act_x_.assign(static_cast<std::size_t>(p.side) + 1, 0);
    act_y_.assign(static_cast<std::size_t>(p.side) + 1, 0);
    dir_ok_.resize(p.dirs.size());
    x_any_.resize(p.dirs.size());
    xkeys_.resize(nn);
    for (std::size_t d = 0; d < nn; ++d) xkeys_[d].resize(dir_at_[d].size());
    for (int lo = 0; lo < p.side; ++lo) {
      for (int hi = lo; hi < p.side; ++hi) intervals_.emplace_back(lo, hi);
    }
    std::stable_sort(intervals_.begin(), intervals_.end(),
                     [](const auto& a, const auto& b) { return a.second - a.first < b.second - b.first; });
    for (std::size_t i = 0; i < p.dirs.size(); ++i) fill_ok(i, p.dirs[i].allowed);
    const auto intervals = static_cast<std::size_t>(p.side) * static_cast<std::size_t>(p.side);
    x_ok_.assign(nn, std::vector<char>(intervals, 1));
    y_ok_.assign(nn, std::vector<char>(intervals, 1));
    optimizing_ = p.num_defaults > 0 || p.total_soft > 0;
  }

  void run(int worker, int workers) {
    worker_ = worker;
    workers_ = workers;
    if (p_.query >= 0) refresh_query();
    {
      std::lock_guard lock(sh_.mu);
      if (sh_.have_best) {
        have_best_ = true;
        best_ = sh_.best;
      }
    }
    if (p_.query < 0 || !query_allowed_.empty()) dfs(0);
    std::lock_guard lock(sh_.mu);
    sh_.found |= found_;
    sh_.nodes.fetch_add(nodes_ & 1023U, std::memory_order_relaxed);
  }

  bool on_model(const Score& score, const std::vector<std::vector<Cell>>& cells) override {
    if (!have_best_ || compare(score, best_) > 0) {
      std::lock_guard lock(sh_.mu);
      if (!sh_.have_best || compare(score, sh_.best) > 0) {
        sh_.have_best = true;
        sh_.best = score;
        sh_.witness = cells;
      }
      have_best_ = true;
      best_ = sh_.best;
    }
    if (compare(best_, max_) >= 0) {
      sh_.stop = true;
      return false;
    }
    return true;
  }

  bool pruned_by(const Score& ub) const override { return have_best_ && compare(ub, best_) <= 0; }

 private:
  static int band_key(int lo, int hi, int rlo, int rhi) noexcept {
    const auto band = [&](int t) { return t < rlo ? 0 : (t > rhi ? 2 : 1); };
    return band(lo) * 3 + band(hi);
  }

  void fill_ok(std::size_t i, const RelationSet& allowed) {
    x_any_[i].fill(0);
    for (int k = 0; k < 81; ++k) {
      const bool ok = compat_for_key(k).intersects(allowed);
      dir_ok_[i][static_cast<std::size_t>(k)] = ok;
      if (ok) x_any_[i][static_cast<std::size_t>(k / 9)] = 1;
    }
  }

  void refresh_query() {
    query_allowed_ = p_.dirs[static_cast<std::size_t>(p_.query)].allowed & found_.complement();
    fill_ok(static_cast<std::size_t>(p_.query), query_allowed_);
  }

  Score box_bound() const { return bound(p_, lost_dir_, lost_dist_); }

  // Every boundary between adjacent columns up to the first column right of all
  // boxes must separate two column types; unplaced variables can still add two
  // boundaries per axis each.
  void axis_canonical(const std::vector<int>& act, int max_hi, int remaining, std::vector<char>& ok) const {
    const int side = p_.side;
    for (int lo = 0; lo < side; ++lo) {
      for (int hi = lo; hi < side; ++hi) {
        const int limit = std::min(std::max(max_hi, hi) + 1, side - 1);
        int inactive = 0;
        for (int q = 1; q <= limit; ++q) {
          if (act[static_cast<std::size_t>(q)] == 0 && q != lo && q != hi + 1) ++inactive;
        }
        ok[static_cast<std::size_t>(lo * side + hi)] = inactive <= 2 * remaining;
      }
    }
  }

  // Some box for u meets every hard constraint towards placed variables.
  bool has_support(int u) {
    const auto uu = static_cast<std::size_t>(u);
    std::vector<int>& dirs = fc_dirs_;
    std::vector<int>& keys = fc_keys_;
    std::vector<int>& dists = fc_dists_;
    dirs.clear();
    dists.clear();
    for (int i : hard_dirs_of_[uu]) {
      const auto& c = p_.dirs[static_cast<std::size_t>(i)];
      if (assigned_[static_cast<std::size_t>(c.a == u ? c.b : c.a)]) dirs.push_back(i);
    }
    for (int i : hard_dists_of_[uu]) {
      const auto& c = p_.dists[static_cast<std::size_t>(i)];
      if (assigned_[static_cast<std::size_t>(c.a == u ? c.b : c.a)]) dists.push_back(i);
    }
    keys.resize(dirs.size());
    for (const auto& [x0, x1] : intervals_) {
      if (!box_fits(x1 - x0 + 1, 1)) continue;
      bool x_feasible = true;
      for (std::size_t k = 0; k < dirs.size() && x_feasible; ++k) {
        const auto& c = p_.dirs[static_cast<std::size_t>(dirs[k])];
        const Box& other = boxes_[static_cast<std::size_t>(c.a == u ? c.b : c.a)];
        keys[k] = c.a == u ? band_key(x0, x1, other.x0, other.x1) : band_key(other.x0, other.x1, x0, x1);
        x_feasible = x_any_[static_cast<std::size_t>(dirs[k])][static_cast<std::size_t>(keys[k])];
      }
      for (std::size_t k = 0; k < dists.size() && x_feasible; ++k) {
        const int reach = max_dist_[static_cast<std::size_t>(dists[k])];
        if (reach < 0) continue;
        const auto& c = p_.dists[static_cast<std::size_t>(dists[k])];
        const Box& other = boxes_[static_cast<std::size_t>(c.a == u ? c.b : c.a)];
        x_feasible = std::max({0, other.x0 - x1, x0 - other.x1}) - 1 <= reach;
      }
      if (!x_feasible) continue;
      for (const auto& [y0, y1] : intervals_) {
        if (!box_fits(x1 - x0 + 1, y1 - y0 + 1)) continue;
        const Box b{x0, x1, y0, y1};
        bool ok = true;
        for (std::size_t k = 0; k < dirs.size() && ok; ++k) {
          const auto& c = p_.dirs[static_cast<std::size_t>(dirs[k])];
          const Box& other = boxes_[static_cast<std::size_t>(c.a == u ? c.b : c.a)];
          const int yk = c.a == u ? band_key(y0, y1, other.y0, other.y1) : band_key(other.y0, other.y1, y0, y1);
          ok = dir_ok_[static_cast<std::size_t>(dirs[k])][static_cast<std::size_t>(keys[k] * 9 + yk)];
        }
        for (std::size_t k = 0; k < dists.size() && ok; ++k) {
          const auto& c = p_.dists[static_cast<std::size_t>(dists[k])];
          const Box& other = boxes_[static_cast<std::size_t>(c.a == u ? c.b : c.a)];
          ok = buckets_admit(p_.scale, c.buckets, box_distance_lower(b, other), box_distance_upper(b, other, p_.connected));
        }
        if (ok) return true;
      }
    }
    return false;
  }

  // A region within the cell cap can have a w x h tight box.
  bool box_fits(int w, int h) const noexcept {
    if (!p_.max_cells) return true;
    const int m = *p_.max_cells;
    if (p_.connected) return w + h - 1 <= m;
    return m >= 2 || (w == 1 && h == 1);
  }

  // Variables placed right after v are checked by the next level anyway.
  bool forward_check(int v, std::size_t depth) {
    for (int u : neighbors_[static_cast<std::size_t>(v)]) {
      if (pos_[static_cast<std::size_t>(u)] > depth + 1 && !has_support(u)) return false;
    }
    return true;
  }

  void activate(const Box& b, int delta) {
    act_x_[static_cast<std::size_t>(b.x0)] += delta;
    act_x_[static_cast<std::size_t>(b.x1 + 1)] += delta;
    act_y_[static_cast<std::size_t>(b.y0)] += delta;
    act_y_[static_cast<std::size_t>(b.y1 + 1)] += delta;
  }

  void dfs(std::size_t depth) {
    if (should_stop(sh_, nodes_)) return;
    if (depth == order_.size()) {
      leaf();
      return;
    }
    if (workers_ > 1 && !have_best_) {
      std::lock_guard lock(sh_.mu);
      if (sh_.have_best) {
        have_best_ = true;
        best_ = sh_.best;
      }
    }
    const int v = order_[depth];
    const int remaining = static_cast<int>(order_.size() - depth - 1);
    int max_hi_x = -1;
    int max_hi_y = -1;
    for (std::size_t i = 0; i < depth; ++i) {
      max_hi_x = std::max(max_hi_x, boxes_[static_cast<std::size_t>(order_[i])].x1);
      max_hi_y = std::max(max_hi_y, boxes_[static_cast<std::size_t>(order_[i])].y1);
    }
    auto& x_ok = x_ok_[depth];
    auto& y_ok = y_ok_[depth];
    if (p_.compress) {
      axis_canonical(act_x_, max_hi_x, remaining, x_ok);
      axis_canonical(act_y_, max_hi_y, remaining, y_ok);
    }
    const auto& dirs_here = dir_at_[depth];
    auto& xkeys = xkeys_[depth];
    std::vector<std::pair<bool, int>> newly;
    std::size_t x_index = 0;
    for (const auto& [x0, x1] : intervals_) {
      if (!x_ok[static_cast<std::size_t>(x0 * p_.side + x1)] || !box_fits(x1 - x0 + 1, 1)) continue;
      if (depth == 0 && (x_index++ % static_cast<std::size_t>(workers_)) != static_cast<std::size_t>(worker_)) continue;
      bool x_feasible = true;
      for (std::size_t k = 0; k < dirs_here.size(); ++k) {
        const auto& c = p_.dirs[static_cast<std::size_t>(dirs_here[k])];
        const Box& ref = boxes_[static_cast<std::size_t>(c.b)];
        const Box& sub = boxes_[static_cast<std::size_t>(c.a)];
        xkeys[k] = c.a == v ? band_key(x0, x1, ref.x0, ref.x1) : band_key(sub.x0, sub.x1, x0, x1);
        if (c.role == Role::Hard && !x_any_[static_cast<std::size_t>(dirs_here[k])][static_cast<std::size_t>(xkeys[k])]) {
          x_feasible = false;
          break;
        }
      }
      if (!x_feasible) continue;
      for (const auto& [y0, y1] : intervals_) {
        if (!y_ok[static_cast<std::size_t>(y0 * p_.side + y1)] || !box_fits(x1 - x0 + 1, y1 - y0 + 1)) continue;
        const Box b{x0, x1, y0, y1};
        boxes_[static_cast<std::size_t>(v)] = b;
        newly.clear();
        bool ok = true;
        for (std::size_t k = 0; k < dirs_here.size(); ++k) {
          const int ci2 = dirs_here[k];
          const auto& c = p_.dirs[static_cast<std::size_t>(ci2)];
          const Box& ref = boxes_[static_cast<std::size_t>(c.b)];
          const Box& sub = boxes_[static_cast<std::size_t>(c.a)];
          const int key = xkeys[k] * 9 + band_key(sub.y0, sub.y1, ref.y0, ref.y1);
          if (dir_ok_[static_cast<std::size_t>(ci2)][static_cast<std::size_t>(key)]) continue;
          if (c.role == Role::Hard) {
            ok = false;
            break;
          }
          lost_dir_[static_cast<std::size_t>(ci2)] = 1;
          newly.emplace_back(true, ci2);
        }
        if (ok) {
          for (int ci2 : dist_at_[depth]) {
            const auto& c = p_.dists[static_cast<std::size_t>(ci2)];
            const Box& ba = boxes_[static_cast<std::size_t>(c.a)];
            const Box& bb = boxes_[static_cast<std::size_t>(c.b)];
            if (buckets_admit(p_.scale, c.buckets, box_distance_lower(ba, bb), box_distance_upper(ba, bb, p_.connected))) continue;
            if (c.role == Role::Hard) {
              ok = false;
              break;
            }
            lost_dist_[static_cast<std::size_t>(ci2)] = 1;
            newly.emplace_back(false, ci2);
          }
        }
        if (ok && !(optimizing_ && pruned_by(box_bound()))) {
          assigned_[static_cast<std::size_t>(v)] = 1;
          if (forward_check(v, depth)) {
            activate(b, 1);
            dfs(depth + 1);
            activate(b, -1);
          }
          assigned_[static_cast<std::size_t>(v)] = 0;
        }
        for (const auto& [is_dir, idx] : newly) (is_dir ? lost_dir_ : lost_dist_)[static_cast<std::size_t>(idx)] = 0;
        if (sh_.stop.load(std::memory_order_relaxed) || (p_.query >= 0 && query_allowed_.empty())) return;
      }
    }
  }

  void leaf() {
    if (p_.query >= 0) {
      leaf_enumerate();
      return;
    }
    if (p_.coupled) {
      solve_coupled(p_, order_, boxes_, lost_dir_, lost_dist_, nullptr, *this, sh_, nodes_);
      return;
    }
    Score total = box_bound();
    total.count = 0;
    std::fill(total.defaults.begin(), total.defaults.end(), 0);
    total.soft = 0;
    std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(p_.n));
    for (int v : order_) {
      VarLeaf r = solve_variable(p_, v, boxes_, LeafGoal::Optimize, nullptr, sh_, nodes_);
      if (!r.feasible) return;
      total.count += r.score.count;
      for (std::size_t i = 0; i < total.defaults.size(); ++i) total.defaults[i] |= r.score.defaults[i];
      total.soft += r.score.soft;
      cells[static_cast<std::size_t>(v)] = std::move(r.cells);
    }
    on_model(total, cells);
  }

  void leaf_enumerate() {
    const auto& q = p_.dirs[static_cast<std::size_t>(p_.query)];
    if (p_.coupled) {
      solve_coupled(p_, order_, boxes_, lost_dir_, lost_dist_, &found_, *this, sh_, nodes_);
    } else {
      for (int v : order_) {
        if (v == q.a) continue;
        if (!solve_variable(p_, v, boxes_, LeafGoal::Feasible, &found_, sh_, nodes_).feasible) return;
      }
      solve_variable(p_, q.a, boxes_, LeafGoal::Enumerate, &found_, sh_, nodes_);
    }
    refresh_query();
  }

  const Problem& p_;
  Shared& sh_;
  const std::vector<int>& order_;
  Score max_;  // ceiling: reaching it ends the search
  bool optimizing_ = false;
  int worker_ = 0;
  int workers_ = 1;
  std::vector<Box> boxes_;
  std::vector<std::vector<int>> dir_at_;
  std::vector<std::vector<int>> dist_at_;
  std::vector<char> lost_dir_;
  std::vector<char> lost_dist_;
  std::vector<int> act_x_;
  std::vector<int> act_y_;
  std::vector<std::array<char, 81>> dir_ok_;
  std::vector<std::array<char, 9>> x_any_;  // some y pattern completes the x pattern
  std::vector<std::vector<int>> xkeys_;     // per depth, per constraint checked there
  std::vector<std::pair<int, int>> intervals_;  // narrow first
  std::vector<char> assigned_;
  std::vector<std::size_t> pos_;
  std::vector<int> max_dist_;
  std::vector<std::vector<int>> hard_dirs_of_;
  std::vector<std::vector<int>> hard_dists_of_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> fc_dirs_;
  std::vector<int> fc_keys_;
  std::vector<int> fc_dists_;
  std::vector<std::vector<char>> x_ok_;  // per depth, indexed lo * side + hi
  std::vector<std::vector<char>> y_ok_;
  bool have_best_ = false;
  Score best_;
  RelationSet found_;
  RelationSet query_allowed_;
  std::uint64_t nodes_ = 0;
};

void check_config(const SolverConfig& cfg) {
  if (cfg.worker_count < 1) throw Error("worker_count must be positive");
  if (cfg.grid_side && *cfg.grid_side < 1) throw Error("grid side must be positive");
  if (cfg.max_cells && *cfg.max_cells < 1) throw Error("max_cells must be positive");
  if (cfg.time_budget && *cfg.time_budget <= 0) throw Error("time budget must be positive");
}

// Runs the box search over workers; the shared state collects the outcome.
void run_search(const Problem& p, Shared& sh, const SolverConfig& cfg) {
  const std::vector<int> order = search_order(p);
  const int workers = cfg.deterministic ? 1 : cfg.worker_count;
  if (workers == 1) {
    BoxSearch(p, sh, order).run(0, 1);
    return;
  }
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] { BoxSearch(p, sh, order).run(w, workers); });
  }
  for (auto& t : threads) t.join();
}

std::vector<Region> to_regions(const std::vector<std::vector<Cell>>& cells) {
  std::vector<Region> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.emplace_back(c);
  return out;
}

}  // namespace

std::string_view status_name(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Consistent:
      return "consistent";
    case SolveStatus::Inconsistent:
      return "inconsistent";
    case SolveStatus::Timeout:
      return "timeout";
  }
  return "?";
}

bool constraint_satisfied(const Network& n, const Constraint& c, const std::vector<Region>& model) {
  const Region& a = model.at(static_cast<std::size_t>(c.subject));
  const Region& b = model.at(static_cast<std::size_t>(c.object));
  bool member = false;
  if (c.kind == ConstraintKind::Direction) {
    member = c.relation_set().contains(cdc_relation(a, b));
  } else {
    const DistanceRelation d = distance_relation(a, b, n.scale);
    member = std::find(c.distances.begin(), c.distances.end(), d) != c.distances.end();
  }
  return c.mode.kind == ConstraintMode::Kind::Negative ? !member : member;
}

ModelCheck check_model(const Network& n, const std::vector<Region>& model, int grid_side,
                       std::optional<int> max_cells) {
  if (model.size() != n.variables.size()) throw Error("model does not cover every variable");
  ModelCheck out;
  for (const Region& r : model) {
    for (const Cell& c : r.cells()) {
      if (c.x < 0 || c.y < 0 || c.x >= grid_side || c.y >= grid_side) out.on_grid = false;
    }
    if (n.domain == DomainKind::Connected && !is_connected(r)) out.connected_ok = false;
    if (max_cells && static_cast<int>(r.size()) > *max_cells) out.size_ok = false;
  }
  for (const auto& c : n.constraints) {
    const bool sat = constraint_satisfied(n, c, model);
    switch (c.mode.kind) {
      case ConstraintMode::Kind::Hard:
      case ConstraintMode::Kind::Negative:
        if (!sat) out.hard_ok = false;
        break;
      case ConstraintMode::Kind::Default:
        if (sat) out.defaults_satisfied.push_back(c.ordinal);
        break;
      case ConstraintMode::Kind::Soft:
        if (sat) out.soft_satisfied += c.mode.weight;
        break;
    }
  }
  return out;
}

namespace {

SolveResult solve_connected(const Network& n, const SolverConfig& cfg) {
  const auto start = Clock::now();
  SolveResult result;

  Shared sh;
  if (cfg.time_budget)
    sh.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*cfg.time_budget));

  const Problem p = compile(n, cfg, {});
  result.grid_side = p.side;
  const bool optimizing = p.num_defaults > 0 || p.total_soft > 0;

  bool solved = false;
  if (optimizing) {
    // A model meeting every default and preference is optimal; try that first.
    const Problem hard = compile(n, cfg, {.harden = true});
    run_search(hard, sh, cfg);
    solved = sh.have_best;
  }
  if (!solved && !sh.timed_out) {
    sh.have_best = false;
    run_search(p, sh, cfg);
  }

  result.stats.nodes = sh.nodes.load();
  result.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  if (sh.have_best) {
    result.model = to_regions(sh.witness);
    const ModelCheck check = check_model(n, *result.model, p.side, cfg.max_cells);
    if (!check.hard_ok || !check.on_grid || !check.connected_ok || !check.size_ok)
      throw Error("internal solver error: witness violates the network");
    result.defaults_applied = check.defaults_satisfied;
    result.soft_objective = check.soft_satisfied;
    result.stats.best_defaults = static_cast<int>(check.defaults_satisfied.size());
    result.stats.best_soft = check.soft_satisfied;
  }
  if (sh.timed_out) {
    result.status = SolveStatus::Timeout;
  } else {
    result.status = sh.have_best ? SolveStatus::Consistent : SolveStatus::Inconsistent;
  }
  return result;
}

// Variables linked by a constraint, or by the extra pair when given, share a group.
std::vector<std::vector<int>> groups(const Network& n, bool hard_only, int x = -1, int y = -1) {
  std::vector<int> parent(n.variables.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  const auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    return v;
  };
  const auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };
  for (const auto& c : n.constraints) {
    const bool hard = c.mode.kind == ConstraintMode::Kind::Hard || c.mode.kind == ConstraintMode::Kind::Negative;
    if (hard || !hard_only) unite(c.subject, c.object);
  }
  if (x >= 0) unite(x, y);
  std::vector<std::vector<int>> out;
  std::vector<int> index(parent.size(), -1);
  for (std::size_t v = 0; v < parent.size(); ++v) {
    const auto r = static_cast<std::size_t>(find(static_cast<int>(v)));
    if (index[r] < 0) {
      index[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(index[r])].push_back(static_cast<int>(v));
  }
  return out;
}

// The part of n over vars; constraints keep their ordinals.
Network restrict_to(const Network& n, const std::vector<int>& vars, bool hard_only) {
  Network out;
  out.domain = n.domain;
  out.domain_declared = n.domain_declared;
  out.scale = n.scale;
  std::vector<int> local(n.variables.size(), -1);
  for (int v : vars) {
    local[static_cast<std::size_t>(v)] = static_cast<int>(out.variables.size());
    out.variables.push_back(n.variables[static_cast<std::size_t>(v)]);
  }
  for (const auto& c : n.constraints) {
    if (local[static_cast<std::size_t>(c.subject)] < 0) continue;
    const bool hard = c.mode.kind == ConstraintMode::Kind::Hard || c.mode.kind == ConstraintMode::Kind::Negative;
    if (hard_only && !hard) continue;
    Constraint copy = c;
    copy.subject = local[static_cast<std::size_t>(c.subject)];
    copy.object = local[static_cast<std::size_t>(c.object)];
    out.constraints.push_back(std::move(copy));
  }
  return out;
}

std::optional<double> remaining(const SolverConfig& cfg, Clock::time_point start) {
  if (!cfg.time_budget) return std::nullopt;
  const double left = *cfg.time_budget - std::chrono::duration<double>(Clock::now() - start).count();
  return std::max(left, 1e-6);
}

}  // namespace

SolveResult solve(const Network& n, const SolverConfig& cfg) {
  check_config(cfg);
  const auto parts = groups(n, false);
  if (parts.size() <= 1) return solve_connected(n, cfg);

  // Parts share no constraint, so their optima combine.
  const auto start = Clock::now();
  SolveResult result;
  result.grid_side = cfg.grid_side ? *cfg.grid_side : resolved_grid_side(n);
  std::vector<Region> model(n.variables.size(), Region{Cell{0, 0}});
  bool complete = true;
  bool timed_out = false;
  for (const auto& vars : parts) {
    SolverConfig sub = cfg;
    sub.grid_side = result.grid_side;
    sub.time_budget = remaining(cfg, start);
    const SolveResult r = solve_connected(restrict_to(n, vars, false), sub);
    result.stats.nodes += r.stats.nodes;
    if (r.status == SolveStatus::Timeout) timed_out = true;
    if (!r.model) {
      complete = false;
      if (r.status == SolveStatus::Inconsistent) {
        timed_out = false;
        break;
      }
      continue;
    }
    for (std::size_t i = 0; i < vars.size(); ++i) model[static_cast<std::size_t>(vars[i])] = (*r.model)[i];
  }
  result.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (complete) {
    const ModelCheck check = check_model(n, model, result.grid_side, cfg.max_cells);
    result.model = std::move(model);
    result.defaults_applied = check.defaults_satisfied;
    result.soft_objective = check.soft_satisfied;
    result.stats.best_defaults = static_cast<int>(check.defaults_satisfied.size());
    result.stats.best_soft = check.soft_satisfied;
  }
  if (timed_out) {
    result.status = SolveStatus::Timeout;
  } else {
    result.status = complete ? SolveStatus::Consistent : SolveStatus::Inconsistent;
    if (!complete) result.model.reset();
  }
  return result;
}

namespace {
// Time the joint enumeration gets before falling back to one check per candidate.
constexpr std::chrono::duration<double> kJointSlice{0.5};
}  // namespace

RelationQuery enumerate_relations(const Network& n, int x, int y, const SolverConfig& cfg) {
  check_config(cfg);
  const int count = static_cast<int>(n.variables.size());
  if (x < 0 || x >= count || y < 0 || y >= count) throw Error("query references an undeclared variable");
  if (x == y) throw Error("query variables must differ");
  const auto start = Clock::now();
  Shared sh;
  if (cfg.time_budget)
    sh.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*cfg.time_budget));
  RelationQuery out;
  SolverConfig cfg_scope = cfg;
  const auto parts = groups(n, true, x, y);
  Network scope = n;
  int qx = x;
  int qy = y;
  if (parts.size() > 1) {
    SolverConfig sub = cfg;
    sub.grid_side = cfg.grid_side ? *cfg.grid_side : resolved_grid_side(n);
    for (const auto& vars : parts) {
      if (std::find(vars.begin(), vars.end(), x) != vars.end()) {
        scope = restrict_to(n, vars, true);
        qx = static_cast<int>(std::find(vars.begin(), vars.end(), x) - vars.begin());
        qy = static_cast<int>(std::find(vars.begin(), vars.end(), y) - vars.begin());
        continue;
      }
      sub.time_budget = remaining(cfg, start);
      const SolveResult r = solve_connected(restrict_to(n, vars, true), sub);
      out.stats.nodes += r.stats.nodes;
      if (r.status != SolveStatus::Consistent) {
        out.complete = r.status != SolveStatus::Timeout;
        out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        return out;
      }
    }
    cfg_scope = sub;
  }
  const SolverConfig& scope_cfg = parts.size() > 1 ? cfg_scope : cfg;
  Problem p = compile(scope, scope_cfg, {.query_x = qx, .query_y = qy});
  if (!p.dists.empty()) {
    // Without distances the layout search compresses; its answer bounds the candidates.
    Network relaxed = scope;
    std::erase_if(relaxed.constraints, [](const Constraint& c) { return c.kind == ConstraintKind::Distance; });
    SolverConfig relaxed_cfg = scope_cfg;
    relaxed_cfg.grid_side = p.side;
    const Problem r = compile(relaxed, relaxed_cfg, {.query_x = qx, .query_y = qy});
    run_search(r, sh, cfg);
    if (!sh.timed_out) {
      auto& q = p.dirs[static_cast<std::size_t>(p.query)];
      q.allowed = q.allowed & sh.found;
      sh.found = RelationSet();
      sh.stop = false;
      const auto full_deadline = sh.deadline;
      const auto slice = Clock::now() + std::chrono::duration_cast<Clock::duration>(kJointSlice);
      sh.deadline = full_deadline ? std::min(*full_deadline, slice) : slice;
      if (!q.allowed.empty()) run_search(p, sh, cfg);
      sh.deadline = full_deadline;
      const bool finished = !sh.timed_out;
      sh.timed_out = false;
      sh.stop = false;
      const RelationSet candidates = finished ? RelationSet() : q.allowed & sh.found.complement();
      Network probe = scope;
      std::erase_if(probe.constraints, [](const Constraint& c) {
        return c.mode.kind != ConstraintMode::Kind::Hard && c.mode.kind != ConstraintMode::Kind::Negative;
      });
      Constraint pin;
      pin.subject = qx;
      pin.object = qy;
      pin.ordinal = static_cast<int>(probe.constraints.size());
      probe.constraints.push_back(pin);
      SolverConfig probe_cfg = scope_cfg;
      probe_cfg.grid_side = p.side;
      // One consistency check per candidate stops at the first witness.
      for (const auto& rel : candidates.sorted()) {
        probe.constraints.back().relations = {rel};
        probe_cfg.time_budget = remaining(cfg, start);
        const SolveResult r = solve_connected(probe, probe_cfg);
        out.stats.nodes += r.stats.nodes;
        if (r.status == SolveStatus::Timeout) {
          sh.timed_out = true;
          break;
        }
        if (r.status == SolveStatus::Consistent) sh.found.insert(rel);
      }
    }
  } else {
    run_search(p, sh, cfg);
  }

  out.relations = sh.found;
  out.complete = !sh.timed_out;
  out.stats.nodes += sh.nodes.load();
  out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace cdc
