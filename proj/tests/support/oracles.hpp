#pragma once

// Reference implementations written directly from the definitions, sharing no
// code with the library beyond its value types.

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cdc/region.hpp"
#include "cdc/tile.hpp"

namespace oracle {

inline std::string tile_label(int x, int y, int x0, int x1, int y0, int y1) {
  std::string row = y > y1 ? "N" : (y < y0 ? "S" : "");
  std::string col = x > x1 ? "E" : (x < x0 ? "W" : "");
  if (row.empty() && col.empty()) return "O";
  return row + col;
}

inline std::set<std::string> relation_labels(const std::vector<cdc::Cell>& a, const std::vector<cdc::Cell>& b) {
  int x0 = std::numeric_limits<int>::max(), x1 = std::numeric_limits<int>::min();
  int y0 = x0, y1 = x1;
  for (const auto& c : b) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  std::set<std::string> out;
  for (const auto& c : a) out.insert(tile_label(c.x, c.y, x0, x1, y0, y1));
  return out;
}

/// Tile set as a mask, through the library's name table only.
inline std::uint16_t mask_of(const std::set<std::string>& labels) {
  std::uint16_t m = 0;
  for (const auto& l : labels) m |= static_cast<std::uint16_t>(1U << static_cast<int>(*cdc::parse_tile(l)));
  return m;
}

inline std::uint16_t relation_mask(const cdc::Region& a, const cdc::Region& b) {
  return mask_of(relation_labels({a.cells().begin(), a.cells().end()}, {b.cells().begin(), b.cells().end()}));
}

inline int boundary_distance(const cdc::Region& a, const cdc::Region& b) {
  int best = std::numeric_limits<int>::max();
  for (const auto& p : a.cells()) {
    for (const auto& q : b.cells()) {
      const int cheb = std::max(std::abs(p.x - q.x), std::abs(p.y - q.y));
      best = std::min(best, cheb <= 1 ? 0 : cheb - 1);
    }
  }
  return best;
}

/// Path existence between every pair of cells by repeated relaxation.
inline bool connected(const std::vector<cdc::Cell>& cells, bool eight = false) {
  const std::size_t n = cells.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int dx = std::abs(cells[i].x - cells[j].x), dy = std::abs(cells[i].y - cells[j].y);
      reach[i][j] = i == j || (eight ? std::max(dx, dy) == 1 : dx + dy == 1);
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

/// Tiles laid out on the 3x3 grid: (column, row) with row 2 = north.
inline std::pair<int, int> tile_position(const std::string& label) {
  int col = 1, row = 1;
  for (char c : label) {
    if (c == 'N') row = 2;
    if (c == 'S') row = 0;
    if (c == 'E') col = 2;
    if (c == 'W') col = 0;
  }
  return {col, row};
}

/// Masks whose tiles form an edge-connected part of the 3x3 tile grid.
inline std::set<std::uint16_t> connected_tile_sets() {
  static const char* kLabels[] = {"N", "S", "E", "W", "NE", "NW", "SE", "SW", "O"};
  std::set<std::uint16_t> out;
  for (int m = 1; m < 512; ++m) {
    std::vector<cdc::Cell> cells;
    std::set<std::string> labels;
    for (int i = 0; i < 9; ++i) {
      if (m & (1 << i)) {
        const auto [c, r] = tile_position(kLabels[i]);
        cells.push_back({c, r});
        labels.insert(kLabels[i]);
      }
    }
    if (connected(cells)) out.insert(mask_of(labels));
  }
  return out;
}

inline cdc::Region random_region(std::mt19937& rng, int side, int max_cells) {
  std::uniform_int_distribution<int> coord(0, side - 1);
  std::uniform_int_distribution<int> count(1, max_cells);
  std::vector<cdc::Cell> cells;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) cells.push_back({coord(rng), coord(rng)});
  return cdc::Region(cells);
}

}  // namespace oracle
