#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chaosloop/engine.hpp"
#include "chaosloop/error.hpp"
#include "chaosloop/io.hpp"

using namespace chaosloop;

namespace {

struct Run {
  PolynomializedProgram pp;
  MomentTable mt;
};

Run run(const std::string& src, const std::vector<std::string>& targets, std::size_t N, EngineConfig cfg = {}) {
  const LoopProgram p = parse_program(src);
  PolynomializedProgram pp = polynomialize(p, cfg);
  std::vector<Monomial> ms;
  for (const auto& t : targets) ms.push_back(parse_monomial(t, pp.vars));
  MomentTable mt = propagate(pp, ms, N);
  return {std::move(pp), std::move(mt)};
}

double E(const Run& r, const std::string& m, std::size_t n) {
  return r.mt.expectation(parse_monomial(m, r.pp.vars), n);
}

SimulationResult sim(const std::string& src, const std::vector<std::string>& targets, std::size_t N,
                     std::uint64_t samples = 200000) {
  const LoopProgram p = parse_program(src);
  const auto vars = p.variables();
  std::vector<Monomial> ms;
  for (const auto& t : targets) ms.push_back(parse_monomial(t, vars));
  SimulationOptions o;
  o.samples = samples;
  o.seed = 9;
  return simulate(p, ms, N, o);
}

}  // namespace

TEST_CASE("monomial text") {
  const std::vector<std::string> vars{"x", "v", "psi"};
  CHECK(parse_monomial("x^2*v", vars) == Monomial{2, 1, 0});
  CHECK(parse_monomial("1", vars) == Monomial{0, 0, 0});
  CHECK(parse_monomial("psi*psi", vars) == Monomial{0, 0, 2});
  CHECK(monomial_name({2, 1, 0}, vars) == "x^2*v");
  CHECK(monomial_name({0, 0, 0}, vars) == "1");
  CHECK_THROWS_AS(parse_monomial("q", vars), DomainError);
  CHECK_THROWS_AS(parse_monomial("x^a", vars), DomainError);
}

TEST_CASE("deterministic increment") {
  const Run r = run("x = 0\nwhile true { x := x + 1 }", {"x", "x^2"}, 20);
  for (std::size_t n = 0; n <= 20; ++n) {
    CHECK(std::abs(E(r, "x", n) - n) < 1e-10);
    CHECK(std::abs(E(r, "x^2", n) - double(n * n)) < 1e-10);
  }
}

TEST_CASE("random walk with uniform steps") {
  const Run r = run("x = 0\nwhile true { u = Uniform(0.3, 0.5); x := x + u }", {"x^2", "x"}, 30);
  for (std::size_t n = 0; n <= 30; ++n) {
    const double m = 0.4 * n, var = n * 0.2 * 0.2 / 12.0;
    CHECK(std::abs(E(r, "x", n) - m) < 1e-10);
    CHECK(std::abs(E(r, "x^2", n) - (var + m * m)) < 1e-10);
  }
  const Run s = run("x = 0\nwhile true { u = Uniform(-1, 1); x := x + u }", {"x^2", "x"}, 10);
  CHECK(std::abs(E(s, "x^2", 10) - 10.0 / 3.0) < 1e-10);
  CHECK(std::abs(E(s, "x", 10)) < 1e-12);
}

TEST_CASE("AR(1) damping matches its closed form") {
  const Run r = run("v = Uniform(6.5, 8)\nwhile true { w = Uniform(-0.1, 0.1); v := 0.95 * v + 0.5 + 0.1 * w }",
                    {"v^2"}, 25);
  const double m0 = 7.25, s0 = m0 * m0 + 1.5 * 1.5 / 12.0;
  const double ew2 = 0.2 * 0.2 / 12.0;
  double m = m0, s = s0;
  for (std::size_t n = 0; n <= 25; ++n) {
    CHECK(std::abs(E(r, "v", n) - (10 + (m0 - 10) * std::pow(0.95, double(n)))) < 1e-10);
    CHECK(std::abs(E(r, "v^2", n) - s) < 1e-10);
    s = 0.95 * 0.95 * s + 2 * 0.95 * 0.5 * m + 0.25 + 0.01 * ew2;
    m = 0.95 * m + 0.5;
  }
}

TEST_CASE("iid product") {
  const Run r = run("x = 1\nwhile true { u = Uniform(0, 2); x := x * u }", {"x^2", "x"}, 15);
  for (std::size_t n = 0; n <= 15; ++n) {
    CHECK(std::abs(E(r, "x", n) - 1.0) < 1e-10);
    CHECK(std::abs(E(r, "x^2", n) - std::pow(4.0 / 3.0, double(n))) < 1e-10 * std::pow(4.0 / 3.0, double(n)));
  }
}

TEST_CASE("coupled position-velocity closure") {
  const Run r = run("x = 0\nv = Normal(1, 0.25)\nwhile true { w = Normal(1, 1); v := 0.5 * v + w; x := x + v }",
                    {"x^2"}, 5);
  std::set<std::string> names;
  for (const auto& m : r.mt.monomials()) names.insert(monomial_name(m, r.pp.vars));
  CHECK(names == std::set<std::string>{"1", "x", "v", "x^2", "x*v", "v^2"});
  // Closed form by direct recursion of the (x, v) moments; E[w] = 1, E[w^2] = 2.
  double ex = 0, ev = 1, exx = 0, exv = 0, evv = 1.25;
  for (std::size_t n = 1; n <= 5; ++n) {
    const double nv = 0.5 * ev + 1, nvv = 0.25 * evv + ev + 2, xv_new = 0.5 * exv + ex;
    exx += 2 * xv_new + nvv;
    exv = xv_new + nvv;
    ex += nv;
    ev = nv;
    evv = nvv;
    CHECK(std::abs(E(r, "x", n) - ex) < 1e-10);
    CHECK(std::abs(E(r, "x^2", n) - exx) < 1e-10);
    CHECK(std::abs(E(r, "x*v", n) - exv) < 1e-10);
  }
}

TEST_CASE("propagation agrees with simulation on the synthetic loops") {
  const std::vector<std::pair<std::string, std::string>> loops{
      {"x = 0\nwhile true { u = Uniform(-1, 1); x := x + u }", "x^2"},
      {"v = Uniform(6.5, 8)\nwhile true { w = Uniform(-0.1, 0.1); v := 0.95 * v + 0.5 + 0.1 * w }", "v^2"},
      {"x = 1\nwhile true { u = Uniform(0, 2); x := x * u }", "x"},
      {"x = 0\nwhile true { x := x + 1 }", "x^2"},
      {"x = 0\nwhile true { u = Uniform(0.3, 0.5); x := x + u }", "x^2"},
  };
  for (const auto& [src, t] : loops) {
    const Run r = run(src, {t}, 10);
    const SimulationResult s = sim(src, {t}, 10);
    const Monomial m = parse_monomial(t, s.vars);
    const double se = s.standard_error(m, 10);
    CHECK(std::abs(E(r, t, 10) - s.expectation(m, 10)) <= 5 * se + 1e-12);
  }
}

TEST_CASE("iteration-stable site keeps the exact mean") {
  const std::string src = "x = 0\nwhile true { w = Normal(0, 0.01); x := x + cos(w) }";
  const Run r = run(src, {"x"}, 20);
  REQUIRE(r.pp.provenance.size() == 1);
  CHECK(r.pp.provenance[0].scheme == "iteration-stable");
  CHECK(std::abs(E(r, "x", 20) - 20 * std::exp(-0.005)) < 1e-10);
}

TEST_CASE("non-stable site uses the reference germ and reports its bound") {
  const std::string src =
      "germ psi ~ Normal(0, 1) on [-2, 2]\n"
      "x = 0\npsi = Normal(0, 0.01)\n"
      "while true { x := x + cos(psi); w = Normal(0, 0.01); psi := psi + w }";
  // Truncating cos at degree 12 under N(0, 1) leaves about 1e-6 per step at psi near 0.
  const Run r = run(src, {"x"}, 10, EngineConfig{.degree = 12});
  REQUIRE(r.pp.provenance.size() == 1);
  const auto& pv = r.pp.provenance[0];
  CHECK(pv.scheme == "reference-germ");
  CHECK(std::isfinite(pv.bound));
  CHECK(pv.bound > 0);
  // Exact: psi before update n has variance 0.01 n.
  double exact = 0;
  for (int n = 1; n <= 10; ++n) exact += std::exp(-0.005 * n);
  CHECK(std::abs(E(r, "x", 10) - exact) < 5e-5);
}

TEST_CASE("Lagrange schedule with exact per-iteration models") {
  const std::string src =
      "x = 0\npsi = Normal(0, 0.01)\n"
      "while true { x := x + cos(psi); w = Normal(0, 0.01); psi := psi + w }";
  std::vector<Density> models;
  for (int n = 1; n <= 10; ++n) models.push_back(Density::normal_var(0, 0.01 * n));
  EngineConfig cfg;
  cfg.degree = 6;
  const PolynomializedProgram pp = lagrange_schedule(parse_program(src), "psi", models, cfg);
  CHECK(pp.provenance.front().scheme == "lagrange");
  const MomentTable mt = propagate(pp, {parse_monomial("x", pp.vars)}, 10);
  double exact = 0;
  for (int n = 1; n <= 10; ++n) {
    exact += std::exp(-0.005 * n);
    CHECK(std::abs(mt.expectation(parse_monomial("x", pp.vars), n) - exact) < 1e-6);
  }
  CHECK_THROWS_AS(lagrange_schedule(parse_program(src), "nope", models, cfg), DomainError);
}

TEST_CASE("updates that are not affine in their own variable are rejected") {
  CHECK_THROWS_AS(polynomialize(parse_program("x = 1\nwhile true { x := x * x }")), OrderingError);
  CHECK_THROWS_AS(polynomialize(parse_program("x = 1\nwhile true { x := 0.5 * sin(x) }")), OrderingError);
}

TEST_CASE("uninitialized variables start at zero with a warning") {
  const Run r = run("while true { x := x + 2 }", {"x"}, 3);
  CHECK(std::abs(E(r, "x", 3) - 6.0) < 1e-12);
  CHECK_FALSE(r.pp.warnings.empty());
}

TEST_CASE("simulation is reproducible and independent of thread count") {
  const std::string src = read_file(CHAOSLOOP_SOURCE_DIR "/benchmarks/turning_vehicle.ppl");
  const LoopProgram p = parse_program(src);
  const std::vector<Monomial> ms{parse_monomial("x", p.variables())};
  SimulationOptions a;
  a.samples = 20000;
  a.threads = 1;
  SimulationOptions b = a;
  b.threads = 3;
  const SimulationResult ra = simulate(p, ms, 20, a), rb = simulate(p, ms, 20, b);
  CHECK(ra.mean == rb.mean);
  CHECK(ra.stderr_ == rb.stderr_);
  SimulationOptions c = a;
  c.seed = 43;
  CHECK(simulate(p, ms, 20, c).mean != ra.mean);
}

TEST_CASE("polynomialized program renders back to the loop language") {
  const LoopProgram p = parse_program(read_file(CHAOSLOOP_SOURCE_DIR "/benchmarks/turning_vehicle.ppl"));
  EngineConfig cfg;
  cfg.degree = 3;
  const PolynomializedProgram pp = polynomialize(p, cfg);
  const LoopProgram lp = pp.to_loop_program();
  const std::string text = render(lp);
  CHECK(text.find("cos") == std::string::npos);
  const LoopProgram back = parse_program(text);
  // The re-parsed polynomial program has the same moments.
  const PolynomializedProgram pp2 = polynomialize(back, cfg);
  const Monomial x = parse_monomial("x", pp.vars);
  CHECK(propagate(pp, {x}, 20).expectation(x, 20) ==
        doctest::Approx(propagate(pp2, {parse_monomial("x", pp2.vars)}, 20).expectation(parse_monomial("x", pp2.vars), 20))
            .epsilon(1e-9));
}
