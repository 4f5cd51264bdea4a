#include "cdc/region.hpp"

#include <algorithm>

#include "cdc/error.hpp"

namespace cdc {

Region::Region(std::vector<Cell> cells) : cells_(std::move(cells)) {
  if (cells_.empty()) throw Error("empty region");
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

bool Region::contains(Cell c) const { return std::binary_search(cells_.begin(), cells_.end(), c); }

Region Region::translated(int dx, int dy) const {
  std::vector<Cell> out;
  out.reserve(cells_.size());
  for (const Cell& c : cells_) out.push_back({c.x + dx, c.y + dy});
  return Region(std::move(out));
}

Region Region::scaled(int k) const {
  if (k < 1) throw Error("scale factor must be positive");
  std::vector<Cell> out;
  out.reserve(cells_.size() * static_cast<std::size_t>(k * k));
  for (const Cell& c : cells_) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) out.push_back({c.x * k + i, c.y * k + j});
    }
  }
  return Region(std::move(out));
}

BoundingBox bounding_box(const Region& r) {
  const auto cells = r.cells();
  // cells are sorted by x, so the x extent is at the ends.
  BoundingBox bb{cells.front().x, cells.back().x, cells.front().y, cells.front().y};
  for (const Cell& c : cells) {
    bb.y_min = std::min(bb.y_min, c.y);
    bb.y_max = std::max(bb.y_max, c.y);
  }
  return bb;
}

Tile tile_of_cell(Cell c, const BoundingBox& bb) noexcept {
  const Band xb = c.x < bb.x_min ? Band::Below : (c.x > bb.x_max ? Band::Above : Band::Inside);
  const Band yb = c.y < bb.y_min ? Band::Below : (c.y > bb.y_max ? Band::Above : Band::Inside);
  return tile_from_bands(xb, yb);
}

BasicRelation cdc_relation(const Region& a, const Region& b) {
  const BoundingBox bb = bounding_box(b);
  std::uint16_t mask = 0;
  for (const Cell& c : a.cells()) mask |= static_cast<std::uint16_t>(1U << static_cast<int>(tile_of_cell(c, bb)));
  return BasicRelation(mask);
}

bool is_connected(const Region& r, Neighborhood n) {
  const auto cells = r.cells();
  std::vector<char> seen(cells.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Cell c = cells[stack.back()];
    stack.pop_back();
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        if (n == Neighborhood::Four && dx != 0 && dy != 0) continue;
        const Cell nb{c.x + dx, c.y + dy};
        const auto it = std::lower_bound(cells.begin(), cells.end(), nb);
        if (it == cells.end() || *it != nb) continue;
        const auto idx = static_cast<std::size_t>(it - cells.begin());
        if (seen[idx]) continue;
        seen[idx] = 1;
        ++reached;
        stack.push_back(idx);
      }
    }
  }
  return reached == cells.size();
}

}  // namespace cdc
