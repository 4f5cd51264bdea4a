#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cdc/algebra.hpp"
#include "cdc/error.hpp"
#include "cdc/network.hpp"
#include "cdc/oracle.hpp"
#include "cdc/render.hpp"
#include "cdc/solver.hpp"

namespace {

constexpr int kExitConsistent = 0;
constexpr int kExitInconsistent = 1;
constexpr int kExitError = 2;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string file;
  std::string x, y;
  std::string r1, r2;
  std::string domain = "disconnected";
  std::string json_out, svg_out;
  int grid = 0;
  bool deterministic = false;
  int workers = 1;
  double timeout = 0;
  int max_cells = 2;
};

cdc::Network load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cdc::Error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return cdc::parse_network(buf.str());
  } catch (const cdc::ParseError& e) {
    throw cdc::Error(path + ":" + std::to_string(e.line()) + ": " + e.detail());
  }
}

cdc::SolverConfig config(const Options& o) {
  cdc::SolverConfig cfg;
  if (o.grid != 0) cfg.grid_side = o.grid;
  cfg.deterministic = o.deterministic;
  cfg.worker_count = o.workers;
  if (o.timeout > 0) cfg.time_budget = o.timeout;
  return cfg;
}

cdc::DomainKind domain_of(const std::string& text) {
  auto d = cdc::parse_domain(text);
  if (!d) throw Usage("unknown domain '" + text + "'");
  return *d;
}

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cdc::Error("cannot write " + path);
  out << text;
}

int print_relations(const cdc::RelationResult& r) {
  for (const auto& rel : r.relations.sorted()) std::cout << rel.to_string() << '\n';
  if (!r.complete) {
    std::cerr << "warning: time budget exhausted, relation list is incomplete\n";
    return kExitError;
  }
  return kExitConsistent;
}

int exit_for(cdc::SolveStatus s) {
  switch (s) {
    case cdc::SolveStatus::Consistent:
      return kExitConsistent;
    case cdc::SolveStatus::Inconsistent:
      return kExitInconsistent;
    default:
      return kExitError;
  }
}

int cmd_check(const Options& o) {
  const cdc::Network n = load(o.file);
  for (const auto& d : cdc::validate(n)) std::cerr << o.file << ':' << d.line << ": warning: " << d.message << '\n';
  const cdc::SolveResult r = cdc::solve(n, config(o));
  std::cout << cdc::status_name(r.status) << '\n';
  return exit_for(r.status);
}

int cmd_solve(const Options& o) {
  const cdc::Network n = load(o.file);
  const cdc::SolveResult r = cdc::solve(n, config(o));
  if (o.json_out != "-") std::cout << cdc::status_name(r.status) << '\n';
  if (r.status == cdc::SolveStatus::Consistent) {
    if (!o.json_out.empty()) write_file(o.json_out, cdc::model_json(r, n));
    if (!o.svg_out.empty()) write_file(o.svg_out, cdc::render_svg(r, n));
  } else if (r.status == cdc::SolveStatus::Timeout && r.stats.best_defaults) {
    std::cerr << "timeout; best known: " << *r.stats.best_defaults << " defaults, soft " << r.stats.best_soft.value_or(0)
              << '\n';
  }
  return exit_for(r.status);
}

int cmd_infer(const Options& o) {
  const cdc::Network n = load(o.file);
  const auto x = n.find_variable(o.x);
  const auto y = n.find_variable(o.y);
  if (!x) throw cdc::Error("undeclared variable '" + o.x + "'");
  if (!y) throw cdc::Error("undeclared variable '" + o.y + "'");
  return print_relations(cdc::infer_missing(n, *x, *y, config(o)));
}

int cmd_compose(const Options& o) {
  return print_relations(cdc::compose(cdc::parse_basic_relation(o.r1), cdc::parse_basic_relation(o.r2),
                                      domain_of(o.domain), config(o)));
}

int cmd_invert(const Options& o) {
  return print_relations(cdc::inverse(cdc::parse_basic_relation(o.r1), domain_of(o.domain), config(o)));
}

int cmd_oracle(const Options& o) {
  const cdc::Network n = load(o.file);
  const int side = o.grid != 0 ? o.grid : cdc::resolved_grid_side(n);
  const cdc::SolveResult r = cdc::oracle_solve(n, side, o.max_cells);
  std::cout << cdc::status_name(r.status) << '\n';
  if (r.status == cdc::SolveStatus::Consistent) std::cout << cdc::model_json(r, n);
  return exit_for(r.status);
}

int cmd_export(const Options& o) {
  std::cout << cdc::export_asp_facts(load(o.file));
  return kExitConsistent;
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--grid", o.grid, "grid side (default: from file or automatic)")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "parallel workers")->check(CLI::PositiveNumber);
  cmd->add_option("--timeout", o.timeout, "time budget in seconds")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", o.deterministic, "single canonical search order");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qualitative direction and distance reasoning over grid regions"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "decide consistency");
  check->add_option("file", o.file)->required();
  add_solver_flags(check, o);

  auto* solve = app.add_subcommand("solve", "find an optimal model");
  solve->add_option("file", o.file)->required();
  solve->add_option("--json", o.json_out, "write the model as JSON ('-' for stdout)");
  solve->add_option("--svg", o.svg_out, "write the model as SVG ('-' for stdout)");
  add_solver_flags(solve, o);

  auto* infer = app.add_subcommand("infer", "possible relations between two variables");
  infer->add_option("file", o.file)->required();
  infer->add_option("x", o.x)->required();
  infer->add_option("y", o.y)->required();
  add_solver_flags(infer, o);

  auto* compose = app.add_subcommand("compose", "composition of two basic relations");
  compose->add_option("r1", o.r1)->required();
  compose->add_option("r2", o.r2)->required();
  compose->add_option("--domain", o.domain, "connected or disconnected");
  add_solver_flags(compose, o);

  auto* invert = app.add_subcommand("invert", "inverse of a basic relation");
  invert->add_option("r", o.r1)->required();
  invert->add_option("--domain", o.domain, "connected or disconnected");
  add_solver_flags(invert, o);

  auto* oracle = app.add_subcommand("oracle", "brute-force solve over small regions");
  oracle->add_option("file", o.file)->required();
  oracle->add_option("--max-cells", o.max_cells, "largest region size")->check(CLI::PositiveNumber);
  oracle->add_option("--grid", o.grid, "grid side")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "print the network as ASP facts");
  exp->add_option("file", o.file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitError;
  }

  try {
    if (*check) return cmd_check(o);
    if (*solve) return cmd_solve(o);
    if (*infer) return cmd_infer(o);
    if (*compose) return cmd_compose(o);
    if (*invert) return cmd_invert(o);
    if (*oracle) return cmd_oracle(o);
    if (*exp) return cmd_export(o);
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitError;
}
