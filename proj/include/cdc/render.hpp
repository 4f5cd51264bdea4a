#pragma once

#include <string>

#include "cdc/network.hpp"
#include "cdc/solver.hpp"

namespace cdc {

inline constexpr int kCellPixels = 20;

/// Standalone SVG of the model. Throws cdc::Error("no model to render") without one.
std::string render_svg(const SolveResult& result, const Network& n);

/// {"grid", "domain", "regions": {name: [[x,y],...]}, "defaults_applied", "soft_objective"}.
std::string model_json(const SolveResult& result, const Network& n, int indent = -1);

}  // namespace cdc
