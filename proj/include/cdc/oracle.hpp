#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cdc/network.hpp"
#include "cdc/region.hpp"
#include "cdc/solver.hpp"

namespace cdc {

/// Calls visit for every nonempty cell subset of the side x side grid with at most
/// max_cells cells, each once: by size, then lexicographically by sorted cells.
/// Throws cdc::Error when grid_side < 1 or max_cells < 1.
void for_each_region(int grid_side, int max_cells, bool connected_only,
                     const std::function<void(const Region&)>& visit);
std::vector<Region> enumerate_regions(int grid_side, int max_cells, bool connected_only);

inline constexpr double kDefaultOracleCap = 1e9;

/// Exhaustive solve over regions of at most max_cells cells. Throws
/// cdc::Error("oracle scale exceeded") when regions^variables exceeds cap.
SolveResult oracle_solve(const Network& n, int grid_side, int max_cells, double cap = kDefaultOracleCap);

}  // namespace cdc
