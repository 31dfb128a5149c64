#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chaosloop/error.hpp"
#include "chaosloop/poly.hpp"

using namespace chaosloop;

namespace {

MultiPoly random_poly(std::mt19937_64& rng, std::size_t arity, int max_exp, int terms) {
  std::uniform_int_distribution<int> e(0, max_exp);
  std::uniform_real_distribution<double> c(-2, 2);
  MultiPoly p(arity);
  for (int t = 0; t < terms; ++t) {
    Monomial m(arity);
    for (auto& x : m) x = e(rng);
    p.add_term(m, c(rng));
  }
  return p;
}

std::vector<double> random_point(std::mt19937_64& rng, std::size_t arity) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> z(arity);
  for (auto& x : z) x = u(rng);
  return z;
}

}  // namespace

TEST_CASE("univariate arithmetic and composition") {
  const UniPoly p({1, -2, 3});  // 3x^2 - 2x + 1
  const UniPoly q({0, 1});
  CHECK(p.degree() == 2);
  CHECK(p(2.0) == 9.0);
  CHECK((p * q)(2.0) == 18.0);
  CHECK((p - p).is_zero());
  CHECK((p - p).degree() == -1);
  CHECK(p.compose_affine(1, 2)(0.5) == doctest::Approx(p(2.0)));
  CHECK(UniPoly::monomial(3, 2.0).coeff(3) == 2.0);
  CHECK(UniPoly::monomial(3, 2.0).coeff(7) == 0.0);
}

TEST_CASE("ring axioms hold pointwise on random polynomials") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_poly(rng, 3, 3, 6), b = random_poly(rng, 3, 3, 6), c = random_poly(rng, 3, 2, 4);
    const auto z = random_point(rng, 3);
    const double av = a.evaluate(z), bv = b.evaluate(z), cv = c.evaluate(z);
    CHECK((a + b).evaluate(z) == doctest::Approx(av + bv));
    CHECK((a - b).evaluate(z) == doctest::Approx(av - bv));
    CHECK((a * b).evaluate(z) == doctest::Approx(av * bv));
    CHECK(((a + b) * c).evaluate(z) == doctest::Approx((a * c + b * c).evaluate(z)));
    CHECK(a.pow(3).evaluate(z) == doctest::Approx(av * av * av));
    CHECK(a * b == b * a);
  }
}

TEST_CASE("substitution equals evaluation at the substituted value") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_poly(rng, 2, 3, 5), q = random_poly(rng, 2, 2, 3);
    auto z = random_point(rng, 2);
    const double qv = q.evaluate(z);
    const double lhs = p.substitute(0, q).evaluate(z);
    z[0] = qv;
    CHECK(lhs == doctest::Approx(p.evaluate(z)));
  }
}

TEST_CASE("integrate_out replaces powers by moments") {
  // E over u ~ Uniform(0,1) of (x + u)^2 = x^2 + x + 1/3
  const auto x = MultiPoly::variable(2, 0), u = MultiPoly::variable(2, 1);
  const std::vector<double> mom{1.0, 0.5, 1.0 / 3.0};
  const MultiPoly r = (x + u).pow(2).integrate_out(1, mom);
  CHECK_FALSE(r.depends_on(1));
  CHECK(r.coeff({2, 0}) == doctest::Approx(1.0));
  CHECK(r.coeff({1, 0}) == doctest::Approx(1.0));
  CHECK(r.coeff({0, 0}) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(u.pow(3).integrate_out(1, mom));
}

TEST_CASE("degrees, embedding and arity checks") {
  const auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  const auto p = x.pow(2) * y + y.scaled(3.0);
  CHECK(p.degree(0) == 2);
  CHECK(p.degree(1) == 1);
  CHECK(p.total_degree() == 3);
  const std::size_t map[] = {2, 0};
  const MultiPoly e = p.embed(3, map);
  CHECK(e.coeff({1, 0, 2}) == 1.0);
  CHECK(e.coeff({1, 0, 0}) == 3.0);
  CHECK_THROWS_AS(p + MultiPoly::variable(3, 0), ArityError);
  CHECK(MultiPoly::constant(2, 0.0).is_zero());
}

TEST_CASE("text form") {
  const auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  const std::vector<std::string> xy{"x", "y"};
  const auto p = x.pow(2) * y.scaled(-0.5) + x + MultiPoly::constant(2, 2.25);
  CHECK(p.to_string(xy) == "-0.5x^2y + x + 2.25");
  const std::vector<std::string> long_names{"v", "psi"};
  CHECK((x * y).to_string(long_names) == "v*psi");
  CHECK(MultiPoly(2).to_string(xy) == "0");
}

TEST_CASE("cleaned drops negligible terms") {
  const auto x = MultiPoly::variable(1, 0);
  MultiPoly p = x.scaled(1.0);
  p.add_term({2}, 1e-18);
  CHECK(p.cleaned().size() == 1);
}
