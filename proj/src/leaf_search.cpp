#include <algorithm>
#include <array>
#include <bit>
#include <limits>

#include "solver_detail.hpp"

namespace cdc::detail {

namespace {

constexpr std::uint8_t kLeft = 1;
constexpr std::uint8_t kRight = 2;
constexpr std::uint8_t kBottom = 4;
constexpr std::uint8_t kTop = 8;

std::uint8_t edge_flags(int x, int y, const Box& b) noexcept {
  std::uint8_t e = 0;
  if (x == b.x0) e |= kLeft;
  if (x == b.x1) e |= kRight;
  if (y == b.y0) e |= kBottom;
  if (y == b.y1) e |= kTop;
  return e;
}

std::uint16_t mask_from_counts(const std::array<int, kTileCount>& cnt) noexcept {
  std::uint16_t m = 0;
  for (int t = 0; t < kTileCount; ++t) {
    if (cnt[static_cast<std::size_t>(t)] > 0) m |= static_cast<std::uint16_t>(1U << t);
  }
  return m;
}

// Components of a cell subset of a box, 4-neighborhood. `member` is box-local row-major.
std::vector<std::vector<int>> components(const Box& box, const std::vector<char>& member) {
  const int w = box.x1 - box.x0 + 1;
  const int h = box.y1 - box.y0 + 1;
  std::vector<char> seen(member.size(), 0);
  std::vector<std::vector<int>> out;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (!member[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    out.emplace_back();
    seen[static_cast<std::size_t>(start)] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      out.back().push_back(c);
      const int cx = c % w;
      const int cy = c / w;
      const int nbs[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
      for (const auto& nb : nbs) {
        if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
        const int idx = nb[1] * w + nb[0];
        if (member[static_cast<std::size_t>(idx)] && !seen[static_cast<std::size_t>(idx)]) {
          seen[static_cast<std::size_t>(idx)] = 1;
          stack.push_back(idx);
        }
      }
    }
  }
  return out;
}

Score empty_score(const Problem& p) {
  Score s;
  s.defaults.assign(static_cast<std::size_t>(p.num_defaults), 0);
  return s;
}

// ---------------------------------------------------------------------------
// Signature-class search for one variable.
//
// Cells of the variable's box are grouped by their tile vector w.r.t. every
// reference box. Only the set of classes touched matters for the direction
// relations, and a class whose tiles already all occur can always be added, so
// the search enumerates closed class sets only.

class ClassDfs {
 public:
  ClassDfs(const Problem& p, int var, const std::vector<Box>& boxes, LeafGoal goal, RelationSet* found,
           Shared& sh, std::uint64_t& nodes)
      : p_(p), var_(var), box_(boxes[static_cast<std::size_t>(var)]), goal_(goal), found_(found), sh_(sh),
        nodes_(nodes), best_(empty_score(p)), target_(empty_score(p)) {
    for (const auto& dc : p.dirs) {
      if (dc.a != var) continue;
      if (dc.query && goal != LeafGoal::Enumerate) continue;
      const int r = ref_index(dc.b, boxes);
      if (dc.query) {
        query_ = &dc;
        query_ref_ = r;
      } else if (dc.role == Role::Hard) {
        hard_.push_back({r, &dc});
      } else {
        soft_.push_back({r, &dc});
        if (dc.role == Role::Default) {
          ++target_.count;
          target_.defaults[static_cast<std::size_t>(dc.slot)] = 1;
        } else {
          target_.soft += dc.weight;
        }
      }
    }
    if (query_) refresh_query();
    build_classes();
  }

  VarLeaf run() {
    VarLeaf out;
    if (query_ && query_allowed_.empty()) return out;
    P_.assign(refs_.size(), 0);
    state_.assign(classes_.size(), 0);
    dfs(0);
    out.feasible = feasible_;
    out.score = best_;
    out.cells = best_cells_;
    return out;
  }

 private:
  struct Con {
    int ref;
    const DirCon* dc;
  };
  struct ClassInfo {
    std::vector<std::uint8_t> tiles;
    std::vector<int> cells;  // box-local indices
    std::uint8_t edges = 0;
  };

  int ref_index(int obj, const std::vector<Box>& boxes) {
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      if (refs_[i] == obj) return static_cast<int>(i);
    }
    refs_.push_back(obj);
    ref_boxes_.push_back(boxes[static_cast<std::size_t>(obj)]);
    return static_cast<int>(refs_.size()) - 1;
  }

  void refresh_query() { query_allowed_ = query_->allowed & found_->complement(); }

  void build_classes() {
    const int w = box_.x1 - box_.x0 + 1;
    const int h = box_.y1 - box_.y0 + 1;
    std::vector<std::uint8_t> sig(refs_.size());
    for (int ly = 0; ly < h; ++ly) {
      for (int lx = 0; lx < w; ++lx) {
        const int x = box_.x0 + lx;
        const int y = box_.y0 + ly;
        for (std::size_t r = 0; r < refs_.size(); ++r) sig[r] = tile_index(x, y, ref_boxes_[r]);
        auto it = std::find_if(classes_.begin(), classes_.end(), [&](const ClassInfo& c) { return c.tiles == sig; });
        if (it == classes_.end()) {
          classes_.push_back({sig, {}, 0});
          it = classes_.end() - 1;
        }
        it->cells.push_back(ly * w + lx);
        it->edges |= edge_flags(x, y, box_);
      }
    }
    poss_cnt_.assign(refs_.size(), {});
    for (const auto& c : classes_) {
      for (std::size_t r = 0; r < refs_.size(); ++r) ++poss_cnt_[r][c.tiles[r]];
      for (int e = 0; e < 4; ++e) {
        if (c.edges & (1U << e)) ++edge_cnt_[static_cast<std::size_t>(e)];
      }
    }
  }

  bool covered(std::size_t cls) const noexcept {
    for (std::size_t r = 0; r < refs_.size(); ++r) {
      if (!(P_[r] & (1U << classes_[cls].tiles[r]))) return false;
    }
    return true;
  }

  std::uint16_t poss(std::size_t r) const noexcept { return mask_from_counts(poss_cnt_[r]); }

  Score upper_bound() const {
    Score ub = empty_score(p_);
    for (const auto& c : soft_) {
      if (!any_between(c.dc->allowed, P_[static_cast<std::size_t>(c.ref)], poss(static_cast<std::size_t>(c.ref))))
        continue;
      if (c.dc->role == Role::Default) {
        ++ub.count;
        ub.defaults[static_cast<std::size_t>(c.dc->slot)] = 1;
      } else {
        ub.soft += c.dc->weight;
      }
    }
    return ub;
  }

  bool consistent() const {
    for (int e : edge_cnt_) {
      if (e == 0) return false;
    }
    for (const auto& c : hard_) {
      const auto r = static_cast<std::size_t>(c.ref);
      if (!any_between(c.dc->allowed, P_[r], poss(r))) return false;
    }
    if (query_) {
      const auto r = static_cast<std::size_t>(query_ref_);
      if (!any_between(query_allowed_, P_[r], poss(r))) return false;
    }
    if (goal_ == LeafGoal::Optimize && feasible_ && !soft_.empty()) {
      if (compare(upper_bound(), best_) <= 0) return false;
    }
    return true;
  }

  void dfs(std::size_t k) {
    if (done_ || should_stop(sh_, nodes_)) return;
    if (k == classes_.size()) {
      leaf();
      return;
    }
    // Include.
    {
      const std::vector<std::uint16_t> saved = P_;
      state_[k] = 1;
      for (std::size_t r = 0; r < refs_.size(); ++r) P_[r] |= static_cast<std::uint16_t>(1U << classes_[k].tiles[r]);
      bool closed = true;
      for (std::size_t e : excluded_) {
        if (covered(e)) {
          closed = false;
          break;
        }
      }
      if (closed && consistent()) dfs(k + 1);
      P_ = saved;
      state_[k] = 0;
    }
    if (done_ || covered(k)) return;
    // Exclude.
    state_[k] = 2;
    excluded_.push_back(k);
    for (std::size_t r = 0; r < refs_.size(); ++r) --poss_cnt_[r][classes_[k].tiles[r]];
    for (int e = 0; e < 4; ++e) {
      if (classes_[k].edges & (1U << e)) --edge_cnt_[static_cast<std::size_t>(e)];
    }
    if (consistent()) dfs(k + 1);
    for (std::size_t r = 0; r < refs_.size(); ++r) ++poss_cnt_[r][classes_[k].tiles[r]];
    for (int e = 0; e < 4; ++e) {
      if (classes_[k].edges & (1U << e)) ++edge_cnt_[static_cast<std::size_t>(e)];
    }
    excluded_.pop_back();
    state_[k] = 0;
  }

  void leaf() {
    const int w = box_.x1 - box_.x0 + 1;
    std::vector<char> member(static_cast<std::size_t>(box_.area()), 0);
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      if (state_[k] != 1) continue;
      for (int c : classes_[k].cells) member[static_cast<std::size_t>(c)] = 1;
    }
    std::vector<int> chosen;
    if (p_.connected) {
      bool ok = false;
      for (auto& comp : components(box_, member)) {
        std::uint8_t edges = 0;
        std::vector<std::uint16_t> proj(refs_.size(), 0);
        for (int c : comp) {
          const int x = box_.x0 + c % w;
          const int y = box_.y0 + c / w;
          edges |= edge_flags(x, y, box_);
          for (std::size_t r = 0; r < refs_.size(); ++r)
            proj[r] |= static_cast<std::uint16_t>(1U << tile_index(x, y, ref_boxes_[r]));
        }
        if (edges == 0xF && proj == P_) {
          chosen = std::move(comp);
          ok = true;
          break;
        }
      }
      if (!ok) return;
    } else {
      for (int c = 0; c < box_.area(); ++c) {
        if (member[static_cast<std::size_t>(c)]) chosen.push_back(c);
      }
    }

    Score s = empty_score(p_);
    for (const auto& c : soft_) {
      if (!c.dc->allowed.contains_mask(P_[static_cast<std::size_t>(c.ref)])) continue;
      if (c.dc->role == Role::Default) {
        ++s.count;
        s.defaults[static_cast<std::size_t>(c.dc->slot)] = 1;
      } else {
        s.soft += c.dc->weight;
      }
    }

    const bool improves = !feasible_ || compare(s, best_) > 0;
    feasible_ = true;
    if (improves) {
      best_ = s;
      best_cells_.clear();
      for (int c : chosen) best_cells_.push_back({box_.x0 + c % w, box_.y0 + c / w});
    }

    switch (goal_) {
      case LeafGoal::Feasible:
        done_ = true;
        break;
      case LeafGoal::Optimize:
        if (compare(best_, target_) >= 0) done_ = true;
        break;
      case LeafGoal::Enumerate:
        if (query_) {
          found_->insert(BasicRelation(P_[static_cast<std::size_t>(query_ref_)]));
          refresh_query();
          if (query_allowed_.empty()) done_ = true;
        } else {
          done_ = true;
        }
        break;
    }
  }

  const Problem& p_;
  int var_;
  Box box_;
  LeafGoal goal_;
  RelationSet* found_;
  Shared& sh_;
  std::uint64_t& nodes_;

  std::vector<int> refs_;
  std::vector<Box> ref_boxes_;
  std::vector<ClassInfo> classes_;
  std::vector<Con> hard_;
  std::vector<Con> soft_;
  const DirCon* query_ = nullptr;
  int query_ref_ = -1;
  RelationSet query_allowed_;

  std::vector<std::uint16_t> P_;
  std::vector<std::array<int, kTileCount>> poss_cnt_;
  std::array<int, 4> edge_cnt_{};
  std::vector<char> state_;
  std::vector<std::size_t> excluded_;

  bool feasible_ = false;
  bool done_ = false;
  Score best_;
  Score target_;
  std::vector<Cell> best_cells_;
};

// ---------------------------------------------------------------------------
// Joint cell-level search, variables in search order, cells in row-major order.

class CoupledDfs {
 public:
  CoupledDfs(const Problem& p, const std::vector<int>& order, const std::vector<Box>& boxes,
             const std::vector<char>& lost_dir, const std::vector<char>& lost_dist, RelationSet* found,
             CoupledCallbacks& cb, Shared& sh, std::uint64_t& nodes)
      : p_(p), order_(order), boxes_(boxes), lost_dir_(lost_dir), lost_dist_(lost_dist), found_(found), cb_(cb),
        sh_(sh), nodes_(nodes) {
    std::vector<int> pos(static_cast<std::size_t>(p.n));
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    vars_.resize(static_cast<std::size_t>(p.n));
    for (int v = 0; v < p.n; ++v) {
      auto& d = vars_[static_cast<std::size_t>(v)];
      d.box = boxes[static_cast<std::size_t>(v)];
      for (int y = d.box.y0; y <= d.box.y1; ++y) {
        for (int x = d.box.x0; x <= d.box.x1; ++x) {
          d.cells.push_back({x, y});
          d.edges.push_back(edge_flags(x, y, d.box));
          for (int u = 0; u < p.n; ++u) d.tiles.push_back(tile_index(x, y, boxes[static_cast<std::size_t>(u)]));
        }
      }
      d.state.assign(d.cells.size(), 0);
      d.P.assign(static_cast<std::size_t>(p.n), 0);
      d.poss_cnt.assign(static_cast<std::size_t>(p.n), {});
      for (std::size_t c = 0; c < d.cells.size(); ++c) {
        for (int u = 0; u < p.n; ++u) ++d.poss_cnt[static_cast<std::size_t>(u)][tile_of(d, c, u)];
        for (int e = 0; e < 4; ++e) {
          if (d.edges[c] & (1U << e)) ++d.edge_cnt[static_cast<std::size_t>(e)];
        }
      }
    }
    for (std::size_t i = 0; i < p.dirs.size(); ++i) {
      const auto& c = p.dirs[i];
      if (c.query && !found_) continue;
      vars_[static_cast<std::size_t>(c.a)].dir_idx.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < p.dists.size(); ++i) {
      const auto& c = p.dists[i];
      const int later = pos[static_cast<std::size_t>(c.a)] > pos[static_cast<std::size_t>(c.b)] ? c.a : c.b;
      vars_[static_cast<std::size_t>(later)].dist_idx.push_back(static_cast<int>(i));
    }
    if (found_ && p.query >= 0) refresh_query();
  }

  void run() {
    if (found_ && p_.query >= 0 && query_allowed_.empty()) return;
    dfs(0, 0);
  }

 private:
  struct VarData {
    Box box;
    std::vector<Cell> cells;
    std::vector<std::uint8_t> edges;
    std::vector<std::uint8_t> tiles;  // cells x n
    std::vector<int> dir_idx;
    std::vector<int> dist_idx;
    std::vector<char> state;  // 0 undecided, 1 in, 2 out
    std::vector<std::uint16_t> P;
    std::vector<std::array<int, kTileCount>> poss_cnt;
    std::array<int, 4> edge_cnt{};
    int in_count = 0;
    std::vector<int> dm;  // boundary distance map, filled once complete
  };

  static constexpr int kInf = std::numeric_limits<int>::max();

  std::uint8_t tile_of(const VarData& d, std::size_t cell, int u) const noexcept {
    return d.tiles[cell * static_cast<std::size_t>(p_.n) + static_cast<std::size_t>(u)];
  }

  void refresh_query() {
    query_allowed_ = p_.dirs[static_cast<std::size_t>(p_.query)].allowed & found_->complement();
  }

  const RelationSet& allowed_of(const DirCon& c) const { return c.query ? query_allowed_ : c.allowed; }

  std::pair<int, int> distance_range(const VarData& d, const VarData& other) const {
    int inc = kInf;
    int lb = kInf;
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      if (d.state[c] == 2) continue;
      const int v = other.dm[static_cast<std::size_t>(d.cells[c].y * p_.side + d.cells[c].x)];
      lb = std::min(lb, v);
      if (d.state[c] == 1) inc = std::min(inc, v);
    }
    return {lb, inc};
  }

  Score base_bound() const { return bound(p_, lost_dir_, lost_dist_); }

  bool node_ok(int v) {
    const auto& d = vars_[static_cast<std::size_t>(v)];
    for (int e : d.edge_cnt) {
      if (e == 0) return false;
    }
    const bool optimizing = p_.num_defaults > 0 || p_.total_soft > 0;
    std::vector<std::pair<bool, int>>& newly = scratch_lost_;
    newly.clear();
    for (int ci : d.dir_idx) {
      const auto& c = p_.dirs[static_cast<std::size_t>(ci)];
      if (c.role != Role::Hard && lost_dir_[static_cast<std::size_t>(ci)]) continue;
      const auto b = static_cast<std::size_t>(c.b);
      const bool ok = any_between(allowed_of(c), d.P[b], mask_from_counts(d.poss_cnt[b]));
      if (ok) continue;
      if (c.role == Role::Hard) return false;
      newly.emplace_back(true, ci);
    }
    for (int ci : d.dist_idx) {
      const auto& c = p_.dists[static_cast<std::size_t>(ci)];
      if (c.role != Role::Hard && lost_dist_[static_cast<std::size_t>(ci)]) continue;
      const int other = c.a == v ? c.b : c.a;
      const auto [lb, inc] = distance_range(d, vars_[static_cast<std::size_t>(other)]);
      const bool ok = buckets_admit(p_.scale, c.buckets, lb, inc == kInf ? -1 : inc);
      if (ok) continue;
      if (c.role == Role::Hard) return false;
      newly.emplace_back(false, ci);
    }
    if (!optimizing) return true;
    for (const auto& [is_dir, ci] : newly) (is_dir ? lost_dir_ : lost_dist_)[static_cast<std::size_t>(ci)] = 1;
    const bool pruned = cb_.pruned_by(base_bound());
    for (const auto& [is_dir, ci] : newly) (is_dir ? lost_dir_ : lost_dist_)[static_cast<std::size_t>(ci)] = 0;
    return !pruned;
  }

  bool region_connected(const VarData& d) const {
    std::vector<char> member(d.cells.size());
    for (std::size_t c = 0; c < d.cells.size(); ++c) member[c] = d.state[c] == 1;
    return components(d.box, member).size() == 1;
  }

  void fill_distance_map(VarData& d) const {
    d.dm.assign(static_cast<std::size_t>(p_.side * p_.side), kInf);
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      if (d.state[c] != 1) continue;
      const Cell q = d.cells[c];
      for (int y = 0; y < p_.side; ++y) {
        for (int x = 0; x < p_.side; ++x) {
          const int v = std::max(0, std::max(std::abs(x - q.x), std::abs(y - q.y)) - 1);
          int& slot = d.dm[static_cast<std::size_t>(y * p_.side + x)];
          slot = std::min(slot, v);
        }
      }
    }
  }

  void dfs(std::size_t i, std::size_t k) {
    if (stopped_ || should_stop(sh_, nodes_)) return;
    if (i == order_.size()) {
      at_model();
      return;
    }
    const int v = order_[i];
    auto& d = vars_[static_cast<std::size_t>(v)];
    if (k == d.cells.size()) {
      if (p_.connected && !region_connected(d)) return;
      // Soft roles are now decided for this variable.
      std::vector<std::pair<bool, int>> newly;
      for (int ci : d.dir_idx) {
        const auto& c = p_.dirs[static_cast<std::size_t>(ci)];
        if (c.role == Role::Hard || lost_dir_[static_cast<std::size_t>(ci)]) continue;
        if (!c.allowed.contains_mask(d.P[static_cast<std::size_t>(c.b)])) {
          lost_dir_[static_cast<std::size_t>(ci)] = 1;
          newly.emplace_back(true, ci);
        }
      }
      fill_distance_map(d);
      for (int ci : d.dist_idx) {
        const auto& c = p_.dists[static_cast<std::size_t>(ci)];
        if (c.role == Role::Hard || lost_dist_[static_cast<std::size_t>(ci)]) continue;
        const int other = c.a == v ? c.b : c.a;
        const auto [lb, inc] = distance_range(d, vars_[static_cast<std::size_t>(other)]);
        (void)lb;
        if (!((c.buckets >> p_.scale.classify(inc).bucket) & 1U)) {
          lost_dist_[static_cast<std::size_t>(ci)] = 1;
          newly.emplace_back(false, ci);
        }
      }
      const bool optimizing = p_.num_defaults > 0 || p_.total_soft > 0;
      if (!optimizing || !cb_.pruned_by(base_bound())) dfs(i + 1, 0);
      for (const auto& [is_dir, ci] : newly) (is_dir ? lost_dir_ : lost_dist_)[static_cast<std::size_t>(ci)] = 0;
      return;
    }

    if (!p_.max_cells || d.in_count < *p_.max_cells) {
      const std::vector<std::uint16_t> saved = d.P;
      d.state[k] = 1;
      ++d.in_count;
      for (int u = 0; u < p_.n; ++u) d.P[static_cast<std::size_t>(u)] |= static_cast<std::uint16_t>(1U << tile_of(d, k, u));
      if (node_ok(v)) dfs(i, k + 1);
      d.P = saved;
      --d.in_count;
      d.state[k] = 0;
    }
    if (stopped_) return;
    d.state[k] = 2;
    for (int u = 0; u < p_.n; ++u) --d.poss_cnt[static_cast<std::size_t>(u)][tile_of(d, k, u)];
    for (int e = 0; e < 4; ++e) {
      if (d.edges[k] & (1U << e)) --d.edge_cnt[static_cast<std::size_t>(e)];
    }
    if (node_ok(v)) dfs(i, k + 1);
    for (int u = 0; u < p_.n; ++u) ++d.poss_cnt[static_cast<std::size_t>(u)][tile_of(d, k, u)];
    for (int e = 0; e < 4; ++e) {
      if (d.edges[k] & (1U << e)) ++d.edge_cnt[static_cast<std::size_t>(e)];
    }
    d.state[k] = 0;
  }

  void at_model() {
    if (found_ && p_.query >= 0) {
      const auto& q = p_.dirs[static_cast<std::size_t>(p_.query)];
      found_->insert(BasicRelation(vars_[static_cast<std::size_t>(q.a)].P[static_cast<std::size_t>(q.b)]));
      refresh_query();
      if (query_allowed_.empty()) stopped_ = true;
      return;
    }
    Score s = base_bound();
    std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(p_.n));
    for (int v = 0; v < p_.n; ++v) {
      const auto& d = vars_[static_cast<std::size_t>(v)];
      for (std::size_t c = 0; c < d.cells.size(); ++c) {
        if (d.state[c] == 1) cells[static_cast<std::size_t>(v)].push_back(d.cells[c]);
      }
    }
    if (!cb_.on_model(s, cells)) stopped_ = true;
  }

  const Problem& p_;
  const std::vector<int>& order_;
  const std::vector<Box>& boxes_;
  std::vector<char> lost_dir_;
  std::vector<char> lost_dist_;
  RelationSet* found_;
  CoupledCallbacks& cb_;
  Shared& sh_;
  std::uint64_t& nodes_;
  std::vector<VarData> vars_;
  RelationSet query_allowed_;
  std::vector<std::pair<bool, int>> scratch_lost_;
  bool stopped_ = false;
};

}  // namespace

VarLeaf solve_variable(const Problem& p, int var, const std::vector<Box>& boxes, LeafGoal goal,
                       RelationSet* found, Shared& sh, std::uint64_t& local_nodes) {
  return ClassDfs(p, var, boxes, goal, found, sh, local_nodes).run();
}

void solve_coupled(const Problem& p, const std::vector<int>& order, const std::vector<Box>& boxes,
                   const std::vector<char>& box_lost_dir, const std::vector<char>& box_lost_dist,
                   RelationSet* found, CoupledCallbacks& cb, Shared& sh, std::uint64_t& local_nodes) {
  CoupledDfs(p, order, boxes, box_lost_dir, box_lost_dist, found, cb, sh, local_nodes).run();
}

}  // namespace cdc::detail
