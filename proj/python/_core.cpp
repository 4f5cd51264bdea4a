#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cdc/algebra.hpp"
#include "cdc/error.hpp"
#include "cdc/network.hpp"
#include "cdc/oracle.hpp"
#include "cdc/render.hpp"
#include "cdc/solver.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace {

using CellList = std::vector<std::pair<int, int>>;

cdc::Region to_region(const CellList& cells) {
  std::vector<cdc::Cell> out;
  out.reserve(cells.size());
  for (const auto& [x, y] : cells) out.push_back({x, y});
  return cdc::Region(std::move(out));
}

CellList to_cells(const cdc::Region& r) {
  CellList out;
  for (const auto& c : r.cells()) out.emplace_back(c.x, c.y);
  return out;
}

std::vector<std::string> relation_strings(const cdc::RelationSet& s) {
  std::vector<std::string> out;
  for (const auto& r : s.sorted()) out.push_back(r.to_string());
  return out;
}

cdc::DomainKind domain_of(const std::string& text) {
  auto d = cdc::parse_domain(text);
  if (!d) throw cdc::Error("unknown domain '" + text + "'");
  return *d;
}

cdc::SolverConfig make_config(std::optional<int> grid_side, bool deterministic, int workers,
                              std::optional<double> timeout, std::optional<int> max_cells) {
  cdc::SolverConfig cfg;
  cfg.grid_side = grid_side;
  cfg.deterministic = deterministic;
  cfg.worker_count = workers;
  cfg.time_budget = timeout;
  cfg.max_cells = max_cells;
  return cfg;
}

py::dict relation_result(const cdc::RelationResult& r) {
  return py::dict("relations"_a = relation_strings(r.relations), "complete"_a = r.complete);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cardinal direction and qualitative distance reasoning over grid regions";

  // Owned by the module for the lifetime of the interpreter.
  static PyObject* error = PyErr_NewException("cdc._core.CdcError", PyExc_ValueError, nullptr);
  static PyObject* parse_error = PyErr_NewException("cdc._core.ParseError", error, nullptr);
  m.attr("CdcError") = py::handle(error);
  m.attr("ParseError") = py::handle(parse_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const cdc::ParseError& e) {
      py::object exc = py::handle(parse_error)(e.what());
      exc.attr("line") = e.line();
      exc.attr("token") = e.token();
      PyErr_SetObject(parse_error, exc.ptr());
    } catch (const cdc::Error& e) {
      PyErr_SetString(error, e.what());
    }
  });

  py::class_<cdc::Network>(m, "Network")
      .def_static("parse", [](const std::string& text) { return cdc::parse_network(text); }, "text"_a)
      .def_property_readonly("variables", [](const cdc::Network& n) { return n.variables; })
      .def_property_readonly("domain", [](const cdc::Network& n) { return std::string(cdc::domain_name(n.domain)); })
      .def_property_readonly("grid_side", [](const cdc::Network& n) { return cdc::resolved_grid_side(n); })
      .def_property_readonly("constraint_count", [](const cdc::Network& n) { return n.constraints.size(); })
      .def("format", &cdc::format_network)
      .def("export_asp", &cdc::export_asp_facts)
      .def("validate",
           [](const cdc::Network& n) {
             std::vector<std::tuple<std::string, int, std::string>> out;
             for (const auto& d : cdc::validate(n)) out.emplace_back(d.code, d.line, d.message);
             return out;
           })
      .def(py::self == py::self)
      .def("__repr__", [](const cdc::Network& n) {
        return "<Network " + std::to_string(n.variables.size()) + " variables, " + std::to_string(n.constraints.size()) +
               " constraints>";
      });

  py::class_<cdc::SolveResult>(m, "SolveResult")
      .def_property_readonly("status", [](const cdc::SolveResult& r) { return std::string(cdc::status_name(r.status)); })
      .def_readonly("grid_side", &cdc::SolveResult::grid_side)
      .def_readonly("defaults_applied", &cdc::SolveResult::defaults_applied)
      .def_readonly("soft_objective", &cdc::SolveResult::soft_objective)
      .def_property_readonly("nodes", [](const cdc::SolveResult& r) { return r.stats.nodes; })
      .def_property_readonly("wall_seconds", [](const cdc::SolveResult& r) { return r.stats.wall_seconds; })
      .def_property_readonly("model",
                             [](const cdc::SolveResult& r) -> std::optional<std::vector<CellList>> {
                               if (!r.model) return std::nullopt;
                               std::vector<CellList> out;
                               for (const auto& reg : *r.model) out.push_back(to_cells(reg));
                               return out;
                             })
      .def("to_json", [](const cdc::SolveResult& r, const cdc::Network& n) { return cdc::model_json(r, n); }, "network"_a)
      .def("to_svg", [](const cdc::SolveResult& r, const cdc::Network& n) { return cdc::render_svg(r, n); }, "network"_a);

  m.def("parse_network", &cdc::parse_network, "text"_a);

  m.def(
      "solve",
      [](const cdc::Network& n, std::optional<int> grid_side, bool deterministic, int workers,
         std::optional<double> timeout, std::optional<int> max_cells) {
        const auto cfg = make_config(grid_side, deterministic, workers, timeout, max_cells);
        py::gil_scoped_release release;
        return cdc::solve(n, cfg);
      },
      "network"_a, "grid_side"_a = py::none(), "deterministic"_a = true, "workers"_a = 1, "timeout"_a = py::none(),
      "max_cells"_a = py::none());

  m.def(
      "oracle_solve",
      [](const cdc::Network& n, int grid_side, int max_cells, double cap) {
        py::gil_scoped_release release;
        return cdc::oracle_solve(n, grid_side, max_cells, cap);
      },
      "network"_a, "grid_side"_a, "max_cells"_a, "cap"_a = cdc::kDefaultOracleCap);

  m.def(
      "infer_missing",
      [](const cdc::Network& n, const std::string& x, const std::string& y, std::optional<int> grid_side,
         std::optional<double> timeout) {
        const auto cfg = make_config(grid_side, true, 1, timeout, std::nullopt);
        return relation_result(cdc::infer_missing(n, x, y, cfg));
      },
      "network"_a, "x"_a, "y"_a, "grid_side"_a = py::none(), "timeout"_a = py::none());

  m.def(
      "inverse",
      [](const std::string& r, const std::string& domain) {
        return relation_result(cdc::inverse(cdc::parse_basic_relation(r), domain_of(domain)));
      },
      "relation"_a, "domain"_a = "disconnected");

  m.def(
      "compose",
      [](const std::string& r1, const std::string& r2, const std::string& domain) {
        return relation_result(
            cdc::compose(cdc::parse_basic_relation(r1), cdc::parse_basic_relation(r2), domain_of(domain)));
      },
      "r1"_a, "r2"_a, "domain"_a = "disconnected");

  m.def(
      "cdc_relation",
      [](const CellList& a, const CellList& b) { return cdc::cdc_relation(to_region(a), to_region(b)).to_string(); },
      "a"_a, "b"_a);

  m.def(
      "boundary_distance", [](const CellList& a, const CellList& b) { return cdc::boundary_distance(to_region(a), to_region(b)); },
      "a"_a, "b"_a);

  m.def(
      "distance_name",
      [](const CellList& a, const CellList& b) {
        const cdc::DistanceScale scale;
        return scale.name(cdc::distance_relation(to_region(a), to_region(b), scale));
      },
      "a"_a, "b"_a);

  m.def(
      "enumerate_regions",
      [](int grid_side, int max_cells, bool connected_only) {
        std::vector<CellList> out;
        cdc::for_each_region(grid_side, max_cells, connected_only,
                             [&](const cdc::Region& r) { out.push_back(to_cells(r)); });
        return out;
      },
      "grid_side"_a, "max_cells"_a, "connected_only"_a = false);
}
