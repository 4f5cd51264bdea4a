#pragma once

#include <compare>
#include <initializer_list>
#include <span>
#include <vector>

#include "cdc/tile.hpp"

namespace cdc {

struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

struct BoundingBox {
  int x_min = 0;
  int x_max = 0;
  int y_min = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  bool contains(Cell c) const noexcept {
    return x_min <= c.x && c.x <= x_max && y_min <= c.y && c.y <= y_max;
  }

  friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A nonempty finite set of unit grid cells, kept sorted by (x, y).
class Region {
 public:
  /// Throws cdc::Error("empty region") for an empty cell list. Duplicates collapse.
  explicit Region(std::vector<Cell> cells);
  Region(std::initializer_list<Cell> cells) : Region(std::vector<Cell>(cells)) {}

  std::span<const Cell> cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool contains(Cell c) const;

  Region translated(int dx, int dy) const;
  /// Replaces every cell by the k x k block it covers at scale k.
  Region scaled(int k) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  std::vector<Cell> cells_;
};

enum class Neighborhood { Four, Eight };

BoundingBox bounding_box(const Region& r);
Tile tile_of_cell(Cell c, const BoundingBox& bb) noexcept;
/// Tiles of b's bounding box met by a's cells.
BasicRelation cdc_relation(const Region& a, const Region& b);
bool is_connected(const Region& r, Neighborhood n = Neighborhood::Four);

}  // namespace cdc
