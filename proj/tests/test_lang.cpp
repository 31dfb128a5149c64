#include <doctest.h>

#include <cmath>
#include <random>

#include "chaosloop/error.hpp"
#include "chaosloop/io.hpp"
#include "chaosloop/lang.hpp"

using namespace chaosloop;

namespace {

const char* kSource = R"(
# two-state example
program demo
x = 0
v = Uniform(6.5, 8)
while true {
  w = Normal(0, 0.01)
  x := x + 0.1 * v * cos(w)
  v := 0.95 * v + 0.5
}
)";

ExprPtr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> val(0, 10);
  static const char* names[] = {"x", "y", "psi", "v2"};
  switch (pick(rng)) {
    case 0:
      return Expr::constant(std::round(val(rng) * 100) / 100);
    case 1:
      return Expr::variable(names[rng() % 4]);
    case 2:
      return Expr::binary(ExprKind::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 3:
      return Expr::binary(ExprKind::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4:
      return Expr::binary(ExprKind::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5:
      return Expr::negate(random_expr(rng, depth - 1));
    case 6:
      return Expr::power(random_expr(rng, depth - 1), 1 + rng() % 3);
    default:
      return Expr::call(static_cast<Func>(rng() % 4), random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("parses a program with draws, inits and assignments") {
  const LoopProgram p = parse_program(kSource);
  CHECK(p.name == "demo");
  REQUIRE(p.inits.size() == 2);
  CHECK(std::get<double>(p.inits[0].value) == 0.0);
  CHECK(std::get<Density>(p.inits[1].value) == Density::uniform(6.5, 8));
  REQUIRE(p.body.size() == 3);
  CHECK(p.body[0].is_draw());
  CHECK(p.body[0].draw() == Density::normal_var(0, 0.01));
  CHECK(render(*p.body[1].expr()) == "x + 0.1 * v * cos(w)");
  CHECK(p.variables() == std::vector<std::string>{"x", "v", "w"});
  CHECK(p.update_index("v") == 2);
  CHECK(p.update_index("nope") == -1);
}

TEST_CASE("render then parse is a fixpoint") {
  const LoopProgram p = parse_program(kSource);
  const std::string text = render(p);
  const LoopProgram q = parse_program(text);
  CHECK(same_program(p, q));
  CHECK(render(q) == text);
  const LoopProgram tv = parse_program(read_file(CHAOSLOOP_SOURCE_DIR "/benchmarks/turning_vehicle.ppl"));
  CHECK(same_program(tv, parse_program(render(tv))));
}

TEST_CASE("precedence and associativity") {
  const std::map<std::string, double> env{{"x", 2.0}, {"y", 3.0}};
  CHECK(eval_expr(*parse_expression("1 - 2 - 3"), env) == -4.0);
  CHECK(eval_expr(*parse_expression("-x^2"), env) == -4.0);
  CHECK(eval_expr(*parse_expression("x * (y - 1)^3"), env) == 16.0);
  CHECK(eval_expr(*parse_expression("exp(log(y))"), env) == doctest::Approx(3.0));
  CHECK(render(*parse_expression("(x - (y - 1))")) == "x - (y - 1)");
  CHECK(render(*parse_expression("(x * y) * x")) == "x * y * x");
  CHECK(render(*parse_expression("-(x + y)")) == "-(x + y)");
  CHECK(render(*parse_expression("(-x)^2")) == "(-x)^2");
}

TEST_CASE("fuzz: random expressions survive render and parse") {
  std::mt19937_64 rng(11);
  const std::map<std::string, double> env{{"x", 0.3}, {"y", 1.7}, {"psi", -0.4}, {"v2", 2.2}};
  for (int i = 0; i < 10000; ++i) {
    const ExprPtr e = random_expr(rng, 5);
    const std::string t = render(*e);
    ExprPtr back;
    REQUIRE_NOTHROW(back = parse_expression(t));
    CHECK(render(*back) == t);
    const double a = eval_expr(*e, env), b = eval_expr(*back, env);
    if (std::isfinite(a)) {
      CHECK(b == doctest::Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("fuzz: mutated sources either parse or raise ParseError") {
  std::mt19937_64 rng(12);
  const std::string base = kSource;
  const std::string alphabet = "xyv01.+-*^()=:{}[],;~# \nNormalsincoswhiletrue";
  int parsed = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s = base;
    const int edits = 1 + rng() % 4;
    for (int k = 0; k < edits; ++k) {
      const std::size_t at = rng() % s.size();
      switch (rng() % 3) {
        case 0:
          s.erase(at, 1);
          break;
        case 1:
          s.insert(at, 1, alphabet[rng() % alphabet.size()]);
          break;
        default:
          s[at] = alphabet[rng() % alphabet.size()];
      }
    }
    try {
      const LoopProgram p = parse_program(s);
      ++parsed;
      CHECK(same_program(p, parse_program(render(p))));
    } catch (const ParseError& e) {
      CHECK(e.line() >= 1);
      CHECK(e.column() >= 1);
    }
  }
  CHECK(parsed > 0);
}

TEST_CASE("errors carry positions") {
  try {
    parse_program("x = 0\nwhile true {\n  x := x + \n}\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_program("x = 0\nwhile true { }"), ParseError);
  CHECK_THROWS_AS(parse_program("x = 0\nwhile true { x := y }"), ParseError);
  CHECK_THROWS_AS(parse_program("x = 0\nwhile true { x := x; x := x + 1 }"), ParseError);
  CHECK_THROWS_AS(parse_program("x = 0\nwhile true { x := x^0.5 }"), ParseError);
  CHECK_THROWS_AS(parse_program("x = 0\nx = 1\nwhile true { x := x }"), ParseError);
  CHECK_THROWS_AS(parse_program("while = 0\nwhile true { while := 1 }"), ParseError);
  std::string deep = "x = 0\nwhile true { x := ";
  for (int i = 0; i < 300; ++i) deep += "(";
  deep += "x";
  for (int i = 0; i < 300; ++i) deep += ")";
  deep += " }";
  CHECK_THROWS_AS(parse_program(deep), ParseError);
}

TEST_CASE("germ directives and distribution notation") {
  const LoopProgram p = parse_program(
      "germ psi ~ Normal(0, 1) on [-1, 1]\n"
      "psi = TruncNormal(0, 0.01, [-1, 1])\n"
      "g = TruncGamma(3, 1, [0.5, 1])\n"
      "while true { psi := psi + 0.1 * sin(psi) }\n");
  REQUIRE(p.germs.size() == 1);
  CHECK(p.germs[0].density == Density::normal(0, 1));
  REQUIRE(p.germs[0].support.has_value());
  CHECK(p.germs[0].support->lo == -1.0);
  CHECK(p.germ_for(*parse_expression("psi")) != nullptr);
  CHECK(p.germ_for(*parse_expression("2 * psi")) == nullptr);
  CHECK(std::get<Density>(p.inits[0].value).sigma() == doctest::Approx(0.1));
  CHECK(std::get<Density>(p.inits[1].value).scale() == 3.0);
}

TEST_CASE("call-site stability classification") {
  const LoopProgram p = parse_program(read_file(CHAOSLOOP_SOURCE_DIR "/benchmarks/turning_vehicle.ppl"));
  const ConditionsReport r = validate_conditions(p);
  REQUIRE(r.sites.size() == 2);
  for (const auto& s : r.sites) {
    CHECK_FALSE(s.stable);
    CHECK(s.accumulating == std::vector<std::string>{"psi"});
  }
  CHECK(r.forward_references.size() >= 2);

  const LoopProgram q = parse_program(kSource);
  const ConditionsReport rq = validate_conditions(q);
  REQUIRE(rq.sites.size() == 1);
  CHECK(rq.sites[0].stable);
  CHECK(rq.sites[0].text == "cos(w)");
  CHECK(rq.identically_distributed == Check::Holds);

  // A draw later in the body is read from the previous iteration; the first
  // iteration sees the initial value instead, so the site is not stable.
  const LoopProgram late = parse_program("x = 0\nwhile true { x := x + exp(w); w = Uniform(0, 1) }");
  CHECK_FALSE(validate_conditions(late).sites[0].stable);
  // A loop-constant random initial value is the same draw every iteration.
  const LoopProgram konst = parse_program("a = Normal(0, 1)\nx = 0\nwhile true { x := x + sin(a) }");
  CHECK(validate_conditions(konst).sites[0].stable);
}
