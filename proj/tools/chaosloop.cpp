// chaosloop command-line front end.
//
// Exit codes: 0 ok, 1 usage or input error, 2 numeric failure, 3 some
// requested benchmark was skipped.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chaosloop/bench.hpp"
#include "chaosloop/engine.hpp"
#include "chaosloop/error.hpp"
#include "chaosloop/io.hpp"
#include "chaosloop/lang.hpp"
#include "chaosloop/orthopoly.hpp"
#include "chaosloop/pce.hpp"

namespace cl = chaosloop;

namespace {

struct Common {
  std::string out;
  std::string format = "json";
  bool timings = false;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_format) {
  c.format = default_format;
  sub->add_option("--out", c.out, "Write output to this path instead of stdout");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw cl::Error("cannot write " + c.out);
  f << text;
}

void emit_report(const Common& c, const cl::RunReport& r) {
  if (c.format == "csv") {
    emit(c, r.table.to_csv());
  } else {
    emit(c, r.to_json().dump(2) + "\n");
  }
}

std::vector<int> parse_degrees(const std::string& s, std::size_t arity) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.size() == 1 && arity > 1) out.assign(arity, out[0]);
  if (out.size() != arity)
    throw cl::ArityError("--degrees has " + std::to_string(out.size()) + " entries for " + std::to_string(arity) +
                         " germs");
  return out;
}

std::vector<cl::Monomial> parse_targets(const std::vector<std::string>& targets, const std::vector<std::string>& vars) {
  std::vector<cl::Monomial> out;
  for (const auto& t : targets) out.push_back(cl::parse_monomial(t, vars));
  return out;
}

int run_expand(const std::string& fn, const std::string& germs_arg, const std::string& degrees, int quad_nodes,
               const Common& c) {
  const auto germs = cl::germs_from_json(cl::load_json_arg(germs_arg));
  const cl::ExprPtr e = cl::parse_expression(fn);
  std::set<std::string> used;
  cl::collect_variables(*e, used);
  std::vector<std::string> names;
  std::vector<cl::Density> comps;
  for (const auto& g : germs) {
    names.push_back(g.name);
    comps.push_back(g.density);
  }
  for (const auto& v : used)
    if (std::find(names.begin(), names.end(), v) == names.end())
      throw cl::DomainError("function uses '" + v + "' which is not a declared germ");
  const std::vector<int> dbar = parse_degrees(degrees, names.size());
  cl::ExpandOptions opts;
  opts.quad_nodes = quad_nodes;
  opts.convergence_check = true;
  const cl::ScalarFn g = [e, names](std::span<const double> x) {
    std::map<std::string, double> env;
    for (std::size_t i = 0; i < names.size(); ++i) env[names[i]] = x[i];
    return cl::eval_expr(*e, env);
  };
  const cl::PceExpansion pe = cl::expand(g, cl::RandomVector{comps}, dbar, opts);
  cl::Json j = cl::expansion_to_json(pe, names);
  j = cl::Json{{"command", "expand"},
               {"inputs_digest", cl::digest({fn, germs_arg, degrees, std::to_string(quad_nodes)})},
               {"config", {{"fn", fn}, {"degrees", dbar}, {"quad_nodes", quad_nodes}}},
               {"results", j}};
  if (c.format == "csv") {
    cl::Table t;
    t.columns = {"index", "degrees", "coeff"};
    for (std::size_t r = 0; r < pe.degrees().rows(); ++r) {
      std::string ds;
      for (std::size_t k = 0; k < pe.degrees().arity(); ++k) ds += (k ? ";" : "") + std::to_string(pe.degrees()(r, k));
      t.rows.push_back({std::to_string(r + 1), ds, cl::num(pe.coeffs()[r])});
    }
    t.rows.push_back({"se", "", cl::num(pe.se())});
    emit(c, t.to_csv());
  } else {
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int run_orthopoly(const std::string& dist, int degree, int nodes, const Common& c) {
  const cl::Density d = cl::density_from_json(cl::load_json_arg(dist));
  const cl::OrthonormalBasis b = cl::gram_schmidt(d, degree, nodes);
  if (c.format == "csv") {
    cl::Table t;
    t.columns = {"degree", "polynomial"};
    const std::vector<std::string> x{"x"};
    for (int i = 0; i <= degree; ++i)
      t.rows.push_back({std::to_string(i), cl::MultiPoly::from_univariate(b.polynomial(i), 1, 0).to_string(x, 6)});
    emit(c, t.to_csv());
  } else {
    cl::Json j = {{"command", "orthopoly"},
                  {"config", {{"density", cl::density_to_json(d)}, {"degree", degree}, {"gs_nodes", nodes}}},
                  {"results", cl::basis_to_json(b, "x")}};
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int run_parse(const std::string& file, bool check, int degree, const Common& c) {
  const std::string src = cl::read_file(file);
  const cl::LoopProgram p = cl::parse_program(src);
  cl::Json j = {{"command", "parse"}, {"inputs_digest", cl::digest({src})}, {"program", cl::render(p)}};
  if (check) {
    j["conditions"] = cl::conditions_to_json(cl::validate_conditions(p));
    cl::EngineConfig cfg;
    cfg.degree = degree;
    const cl::PolynomializedProgram pp = cl::polynomialize(p, cfg);
    cl::Json prov = cl::Json::array();
    for (const auto& s : pp.provenance) prov.push_back(cl::provenance_to_json(s));
    j["polynomialized"] = {{"provenance", prov}, {"warnings", pp.warnings}};
  }
  if (c.format == "csv") {
    emit(c, cl::render(p));
  } else {
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int run_moments(const std::string& file, std::vector<std::string> targets, std::size_t n, int degree, int quad_nodes,
                const Common& c) {
  const std::string src = cl::read_file(file);
  const cl::LoopProgram p = cl::parse_program(src);
  cl::EngineConfig cfg;
  cfg.degree = degree;
  cfg.quad_nodes = quad_nodes;
  const auto vars = p.variables();
  if (targets.empty()) targets = vars;
  const auto ms = parse_targets(targets, vars);
  const cl::PolynomializedProgram pp = cl::polynomialize(p, cfg);
  const cl::MomentTable mt = cl::propagate(pp, ms, n);
  cl::Table t;
  t.columns = {"n"};
  for (const auto& s : targets) t.columns.push_back("E(" + s + ")");
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (const auto& m : ms) row.push_back(cl::num(mt.expectation(m, k)));
    t.rows.push_back(row);
  }
  if (c.format == "csv") {
    emit(c, t.to_csv());
  } else {
    cl::Json final_ = cl::Json::object();
    for (std::size_t i = 0; i < ms.size(); ++i) final_["E(" + targets[i] + ")"] = mt.expectation(ms[i], n);
    cl::Json prov = cl::Json::array();
    for (const auto& s : pp.provenance) prov.push_back(cl::provenance_to_json(s));
    cl::Json j = {{"command", "moments"},
                  {"inputs_digest", cl::digest({src, std::to_string(n), std::to_string(degree)})},
                  {"config", {{"degree", degree}, {"quad_nodes", quad_nodes}, {"n", n}}},
                  {"results", {{"final", final_}, {"closure_size", mt.monomials().size()}, {"trajectory", t.to_json()}}},
                  {"provenance", prov},
                  {"warnings", pp.warnings}};
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int run_simulate(const std::string& file, std::vector<std::string> targets, std::size_t n, std::uint64_t samples,
                 std::uint64_t seed, const Common& c) {
  const std::string src = cl::read_file(file);
  const cl::LoopProgram p = cl::parse_program(src);
  const auto vars = p.variables();
  if (targets.empty()) targets = vars;
  const auto ms = parse_targets(targets, vars);
  cl::SimulationOptions so;
  so.samples = samples;
  so.seed = seed;
  const cl::SimulationResult r = cl::simulate(p, ms, n, so);
  cl::Table t;
  t.columns = {"n"};
  for (const auto& s : targets) {
    t.columns.push_back("E(" + s + ")");
    t.columns.push_back("se(" + s + ")");
  }
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (const auto& m : ms) {
      row.push_back(cl::num(r.expectation(m, k)));
      row.push_back(cl::num(r.standard_error(m, k)));
    }
    t.rows.push_back(row);
  }
  if (c.format == "csv") {
    emit(c, t.to_csv());
  } else {
    cl::Json j = {{"command", "simulate"},
                  {"inputs_digest", cl::digest({src, std::to_string(n), std::to_string(samples), std::to_string(seed)})},
                  {"config", {{"samples", samples}, {"seed", seed}, {"n", n}}},
                  {"results", t.to_json()}};
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial chaos expansion for probabilistic loops"};
  app.require_subcommand(1);

  Common c_expand, c_ortho, c_parse, c_moments, c_sim, c_bench, c_table2;

  auto* expand = app.add_subcommand("expand", "Expand a function of independent germs");
  std::string fn, germs, degrees = "2";
  int quad_nodes = 64;
  expand->add_option("--fn", fn, "Function, e.g. \"log(x+y)\"")->required();
  expand->add_option("--germs", germs, "Germ list as JSON text or a JSON file")->required();
  expand->add_option("--degrees", degrees, "Per-germ degrees, comma separated");
  expand->add_option("--quad-nodes", quad_nodes, "Gaussian nodes per axis")->check(CLI::Range(1, 4096));
  add_common(expand, c_expand, "json");

  auto* ortho = app.add_subcommand("orthopoly", "Orthonormal basis for a density");
  std::string dist;
  int degree = 2, gs_nodes = cl::kDefaultGramSchmidtNodes;
  ortho->add_option("--dist", dist, "Density as JSON text or a JSON file")->required();
  ortho->add_option("--degree", degree, "Maximum degree")->check(CLI::Range(0, 60));
  ortho->add_option("--quad-nodes", gs_nodes, "Nodes for the Gram-Schmidt inner products")->check(CLI::Range(2, 4096));
  add_common(ortho, c_ortho, "json");

  auto* parse = app.add_subcommand("parse", "Parse a loop program and report its structure");
  std::string parse_file;
  bool check = false;
  int parse_degree = 5;
  parse->add_option("file", parse_file, "Program file")->required();
  parse->add_flag("--check", check, "Classify call sites and polynomialize");
  parse->add_option("--degrees", parse_degree, "Expansion degree for --check");
  add_common(parse, c_parse, "json");

  auto* moments = app.add_subcommand("moments", "Propagate monomial moments through the polynomialized loop");
  std::string mom_file;
  std::vector<std::string> mom_targets;
  std::size_t mom_n = 20;
  int mom_degree = 5, mom_quad = 64;
  moments->add_option("file", mom_file, "Program file")->required();
  moments->add_option("--target", mom_targets, "Monomials such as x or x^2*v (default: all variables)");
  moments->add_option("--n", mom_n, "Iterations");
  moments->add_option("--degrees", mom_degree, "Expansion degree for every call site")->check(CLI::Range(0, 40));
  moments->add_option("--quad-nodes", mom_quad, "Gaussian nodes per axis")->check(CLI::Range(1, 4096));
  add_common(moments, c_moments, "json");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the original loop");
  std::string sim_file;
  std::vector<std::string> sim_targets;
  std::size_t sim_n = 20;
  std::uint64_t sim_samples = 1'000'000, sim_seed = 42;
  sim->add_option("file", sim_file, "Program file")->required();
  sim->add_option("--target", sim_targets, "Monomials (default: all variables)");
  sim->add_option("--n", sim_n, "Iterations");
  sim->add_option("--samples", sim_samples, "Number of runs")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed");
  add_common(sim, c_sim, "json");

  auto* bench = app.add_subcommand("bench", "Reproduce benchmark tables");
  std::vector<std::string> suites;
  cl::BenchOptions bopts;
  bench->add_option("suites", suites, "Suites: appendix-b turning-vehicle table2 taylor-rule rimless-wheel robotic-arm");
  bench->add_option("--samples", bopts.samples, "Simulation runs")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bopts.seed, "Simulation seed");
  bench->add_option("--tau", bopts.tau, "Turning-vehicle time step")->check(CLI::PositiveNumber);
  bench->add_option("--quad-nodes", bopts.quad_nodes, "Gaussian nodes per axis")->check(CLI::Range(1, 4096));
  bench->add_flag("--timings", bopts.timings, "Include wall-clock timings in the JSON report");
  add_common(bench, c_bench, "csv");

  auto* table2 = app.add_subcommand("table2", "Recompute the non-linear function approximation table");
  cl::BenchOptions topts;
  table2->add_option("--quad-nodes", topts.quad_nodes, "Gaussian nodes per axis")->check(CLI::Range(1, 4096));
  table2->add_flag("--timings", topts.timings, "Include wall-clock timings in the JSON report");
  add_common(table2, c_table2, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*expand) return run_expand(fn, germs, degrees, quad_nodes, c_expand);
    if (*ortho) return run_orthopoly(dist, degree, gs_nodes, c_ortho);
    if (*parse) return run_parse(parse_file, check, parse_degree, c_parse);
    if (*moments) return run_moments(mom_file, mom_targets, mom_n, mom_degree, mom_quad, c_moments);
    if (*sim) return run_simulate(sim_file, sim_targets, sim_n, sim_samples, sim_seed, c_sim);
    if (*bench) {
      const cl::RunReport r = cl::run_bench(suites, bopts);
      emit_report(c_bench, r);
      return r.exit_code;
    }
    if (*table2) {
      emit_report(c_table2, cl::run_table2(topts));
      return 0;
    }
  } catch (const cl::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const cl::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const cl::ClosureError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const cl::OrderingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
