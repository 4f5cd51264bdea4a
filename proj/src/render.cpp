#include "cdc/render.hpp"

#include <array>
#include <sstream>

#include <json.hpp>

#include "cdc/error.hpp"

namespace cdc {

namespace {

constexpr std::array<const char*, 12> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const std::vector<Region>& model_of(const SolveResult& result) {
  if (result.status != SolveStatus::Consistent || !result.model) throw Error("no model to render");
  if (result.model->empty()) throw Error("no model to render");
  return *result.model;
}

}  // namespace

std::string render_svg(const SolveResult& result, const Network& n) {
  const auto& model = model_of(result);
  if (model.size() != n.variables.size()) throw Error("model does not match the network");
  const int side = result.grid_side;
  const int grid_px = side * kCellPixels;
  const int legend_x = grid_px + 2 * kCellPixels;
  const int legend_w = 160;
  const int rows = static_cast<int>(n.variables.size());
  const int width = legend_x + legend_w;
  const int height = std::max(grid_px, rows * kCellPixels + kCellPixels) + 2 * kCellPixels;
  const int ox = kCellPixels;
  const int oy = kCellPixels;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  out << "<g class=\"regions\" fill-opacity=\"0.75\">\n";
  for (std::size_t v = 0; v < model.size(); ++v) {
    const char* color = kPalette[v % kPalette.size()];
    for (const Cell& c : model[v].cells()) {
      // North is up: row y is drawn from the bottom.
      out << "<rect class=\"cell\" data-var=\"" << escape_xml(n.variables[v]) << "\" x=\"" << ox + c.x * kCellPixels
          << "\" y=\"" << oy + (side - 1 - c.y) * kCellPixels << "\" width=\"" << kCellPixels << "\" height=\""
          << kCellPixels << "\" fill=\"" << color << "\"/>\n";
    }
  }
  out << "</g>\n<g class=\"grid\" stroke=\"#999999\" stroke-width=\"1\">\n";
  for (int i = 0; i <= side; ++i) {
    const int t = i * kCellPixels;
    out << "<line x1=\"" << ox + t << "\" y1=\"" << oy << "\" x2=\"" << ox + t << "\" y2=\"" << oy + grid_px << "\"/>\n";
    out << "<line x1=\"" << ox << "\" y1=\"" << oy + t << "\" x2=\"" << ox + grid_px << "\" y2=\"" << oy + t << "\"/>\n";
  }
  out << "</g>\n<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int v = 0; v < rows; ++v) {
    const int y = oy + v * kCellPixels;
    out << "<rect class=\"swatch\" x=\"" << legend_x << "\" y=\"" << y + 3 << "\" width=\"14\" height=\"14\" fill=\""
        << kPalette[static_cast<std::size_t>(v) % kPalette.size()] << "\"/>\n";
    out << "<text x=\"" << legend_x + 20 << "\" y=\"" << y + 15 << "\">" << escape_xml(n.variables[static_cast<std::size_t>(v)])
        << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string model_json(const SolveResult& result, const Network& n, int indent) {
  const auto& model = model_of(result);
  nlohmann::ordered_json j;
  j["grid"] = result.grid_side;
  j["domain"] = std::string(domain_name(n.domain));
  nlohmann::ordered_json regions = nlohmann::ordered_json::object();
  for (std::size_t v = 0; v < model.size(); ++v) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const Cell& c : model[v].cells()) cells.push_back({c.x, c.y});
    regions[n.variables.at(v)] = std::move(cells);
  }
  j["regions"] = std::move(regions);
  j["defaults_applied"] = result.defaults_applied;
  j["soft_objective"] = result.soft_objective;
  return j.dump(indent) + "\n";
}

}  // namespace cdc
