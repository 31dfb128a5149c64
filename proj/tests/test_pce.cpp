#include <doctest.h>

#include <cmath>
#include <random>

#include "chaosloop/error.hpp"
#include "chaosloop/pce.hpp"
#include "oracle.hpp"

using namespace chaosloop;

namespace {

RandomVector worked_example_germs() {
  return RandomVector{{Density::truncated_normal_var(2, 0.01, 1, 3), Density::uniform(1, 2)}};
}

// Probabilists' Hermite He_n(z) / sqrt(n!) by the classical recurrence.
double hermite_orthonormal(int n, double z) {
  double hm1 = 0, h = 1, fact = 1;
  for (int k = 0; k < n; ++k) {
    const double next = z * h - k * hm1;
    hm1 = h;
    h = next;
    fact *= k + 1;
  }
  return h / std::sqrt(fact);
}

}  // namespace

TEST_CASE("degree matrix enumerates the tensor grid last-column fastest") {
  const DegreeMatrix D({2, 1});
  REQUIRE(D.rows() == 6);
  CHECK(D.row(0) == std::vector<int>{0, 0});
  CHECK(D.row(1) == std::vector<int>{0, 1});
  CHECK(D.row(2) == std::vector<int>{1, 0});
  CHECK(D.row(5) == std::vector<int>{2, 1});
  for (std::size_t r = 0; r < D.rows(); ++r) CHECK(D.index_of(D.row(r)) == r);
  CHECK(DegreeMatrix({0}).rows() == 1);
  CHECK_THROWS_AS(DegreeMatrix({99, 99, 99, 99}), DomainError);
  CHECK_THROWS_AS(DegreeMatrix({-1}), DomainError);
}

TEST_CASE("worked example: coefficients, estimator and error") {
  const int d[2] = {2, 2};
  ExpandOptions o;
  o.convergence_check = true;
  const PceExpansion e = expand([](std::span<const double> x) { return std::log(x[0] + x[1]); }, worked_example_germs(), d, o);
  const double ref[] = {1.248923375, 0.082887427, -0.003076889, 0.028792576, -0.002391855,
                        0.000177833, -0.000590776, 0.000098102, -0.000010944};
  for (int j = 0; j < 9; ++j) CHECK(std::abs(e.coeffs()[j] - ref[j]) < 1e-8);
  CHECK(e.se() == doctest::Approx(0.000151895).epsilon(1e-4));
  CHECK(e.diagnostics().convergence_delta < 1e-10);
  const std::vector<std::string> xy{"x", "y"};
  CHECK(e.estimator().to_string(xy) ==
        "-0.01038x^2y^2 + 0.05518x^2y - 0.10031x^2 + 0.06539xy^2 - 0.37514xy + 0.86516x - 0.13042y^2 + 0.93999y "
        "- 0.59927");

  // se against an independent 2D Simpson of the squared residual.
  const auto g = [](double x, double y) { return std::log(x + y); };
  const RandomVector z = worked_example_germs();
  const double mse = oracle::simpson2(
      [&](double x, double y) {
        const double xy2[2] = {x, y};
        const double r = g(x, y) - e.evaluate(xy2);
        return r * r * z[0].pdf(x) * z[1].pdf(y);
      },
      1.5, 2.5, 1, 2, 1000);
  CHECK(std::sqrt(mse) == doctest::Approx(e.se()).epsilon(1e-4));
  const double pt[2] = {2.05, 1.3};
  CHECK(e.estimator().evaluate(pt) == doctest::Approx(e.evaluate(pt)).epsilon(1e-10));
}

TEST_CASE("polynomials inside the grid are reproduced exactly") {
  const RandomVector z{{Density::normal(1, 0.5), Density::truncated_gamma(3, 1, 0.5, 1), Density::uniform(-1, 2)}};
  const auto g = [](std::span<const double> x) { return 2 * x[0] * x[0] * x[1] - x[2] * x[2] * x[2] + 0.5 * x[0] * x[2] + 1; };
  const int d[3] = {2, 1, 3};
  const PceExpansion e = expand(g, z, d);
  CHECK(std::abs(e.se()) < 1e-9);
  const MultiPoly& p = e.estimator();
  CHECK(p.coeff({2, 1, 0}) == doctest::Approx(2.0));
  CHECK(p.coeff({0, 0, 3}) == doctest::Approx(-1.0));
  CHECK(p.coeff({1, 0, 1}) == doctest::Approx(0.5));
  CHECK(p.coeff({0, 0, 0}) == doctest::Approx(1.0));
  // Constant function: zero error, single nonzero coefficient.
  const int d1[1] = {3};
  const PceExpansion c = expand([](std::span<const double>) { return 4.0; }, RandomVector{{Density::uniform(0, 1)}}, d1);
  CHECK(c.se() < 1e-12);
  CHECK(c.mean() == doctest::Approx(4.0));
  CHECK(c.variance() < 1e-24);
}

TEST_CASE("Parseval: coefficient variance equals quadrature variance of the estimator") {
  const RandomVector z{{Density::truncated_normal_var(4, 1, 3, 5), Density::truncated_gamma(3, 1, 0.5, 1)}};
  const int d[2] = {4, 3};
  const PceExpansion e = expand([](std::span<const double> x) { return std::exp(x[0] * x[1]); }, z, d);
  const Moments m = moments_from_coeffs(e);
  const auto rules = build_rules(z, 24);
  const double m1 = integrate([&](std::span<const double> x) { return e.evaluate(x); }, rules);
  const double m2 = integrate([&](std::span<const double> x) { return std::pow(e.evaluate(x), 2); }, rules);
  CHECK(m.mean == doctest::Approx(m1).epsilon(1e-10));
  CHECK(m.variance == doctest::Approx(m2 - m1 * m1).epsilon(1e-8));
}

TEST_CASE("Hermite coefficients of known functions") {
  const Density std_normal = Density::normal(0, 1);
  const auto c = hermite_coefficients([](double z) { return z * z; }, std_normal, 4);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(std::abs(c[1]) < 1e-12);
  CHECK(c[2] == doctest::Approx(std::sqrt(2.0)));
  // cos under N(0, 0.01): mean e^{-0.005}.
  const auto cc = hermite_coefficients([](double x) { return std::cos(x); }, Density::normal_var(0, 0.01), 6);
  CHECK(cc[0] == doctest::Approx(std::exp(-0.005)).epsilon(1e-12));
  for (int k = 1; k <= 5; k += 2) CHECK(std::abs(cc[k]) < 1e-14);
  // Var(sin Z) = (1 - e^{-2}) / 2 for Z ~ N(0, 1).
  CHECK(hermite_variance([](double z) { return std::sin(z); }, std_normal) ==
        doctest::Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-12));
}

TEST_CASE("error bound dominates the truncation error on a bounded support") {
  struct Case {
    std::function<double(double)> g;
    Interval s;
  };
  const std::vector<Case> corpus{
      {[](double z) { return std::sin(z); }, {-1, 1}},
      {[](double z) { return std::cos(z); }, {0, 2}},
      {[](double z) { return std::exp(z); }, {-1, 1}},
      {[](double z) { return std::exp(-z * z); }, {-2, 2}},
      {[](double z) { return std::log(1 + z * z); }, {-1, 3}},
      {[](double z) { return z * z * z - z; }, {-2, 1}},
  };
  const Density ref = Density::normal(0, 1);
  for (const auto& c : corpus) {
    const double bound = error_bound(c.g, ref, c.s);
    CHECK(std::isfinite(bound));
    const double var = oracle::simpson([&](double z) { return c.g(z) * c.g(z) * oracle::normal_pdf(z, 0, 1); }, -12, 12) -
                       std::pow(oracle::simpson([&](double z) { return c.g(z) * oracle::normal_pdf(z, 0, 1); }, -12, 12), 2);
    // log(1 + z^2) has poles at +-i, which slows Gauss-Hermite convergence to ~1e-9.
    CHECK(std::abs(hermite_variance(c.g, ref) - var) <= 1e-8 * var);
    const double f = 1.0 / c.s.width();
    for (int M = 0; M <= 6; ++M) {
      const auto coef = hermite_coefficients(c.g, ref, M);
      const auto ghat = [&](double z) {
        double s = 0;
        for (int i = 0; i <= M; ++i) s += coef[i] * hermite_orthonormal(i, z);
        return s;
      };
      const double err = oracle::simpson([&](double z) { return std::pow(c.g(z) - ghat(z), 2) * f; }, c.s.lo, c.s.hi);
      CHECK(err <= bound);
    }
  }
  CHECK(error_bound([](double) { return 3.0; }, ref, {-1, 1}) == 0.0);
  CHECK(std::isinf(error_bound([](double z) { return z; }, ref, {-100, 100})));
  CHECK_THROWS_AS(error_bound([](double z) { return z; }, Density::uniform(0, 1), {0, 1}), DomainError);
}

TEST_CASE("Lagrange selectors are indicator functions on the counter grid") {
  for (int N = 1; N <= 10; ++N)
    for (int n = 1; n <= N; ++n) {
      const UniPoly L = lagrange_selector(n, N);
      CHECK(L.degree() <= N - 1);
      for (int c = 1; c <= N; ++c) CHECK(std::abs(L(lagrange_node(c, N)) - (c == n ? 1.0 : 0.0)) < 1e-10);
    }
  CHECK_THROWS_AS(lagrange_selector(0, 3), DomainError);
  CHECK_THROWS_AS(lagrange_selector(4, 3), DomainError);
}

TEST_CASE("Lagrange conditional estimator selects the per-iteration polynomial") {
  const std::size_t arity = 2;  // (x, s)
  const auto x = MultiPoly::variable(arity, 0);
  std::vector<MultiPoly> per;
  for (int n = 1; n <= 5; ++n) per.push_back(x.pow(2).scaled(n) + MultiPoly::constant(arity, -n));
  const MultiPoly est = lagrange_conditional(per, 1);
  for (int n = 1; n <= 5; ++n)
    for (double xv : {-1.0, 0.5, 2.0}) {
      const double pt[2] = {xv, lagrange_node(n, 5)};
      CHECK(est.evaluate(pt) == doctest::Approx(n * xv * xv - n).epsilon(1e-10));
    }
}

TEST_CASE("sums and products of independent blocks") {
  const RandomVector za{{Density::normal(0, 1)}};
  const RandomVector zb{{Density::uniform(1, 2), Density::truncated_normal(4, 1, 3, 5)}};
  const auto f = [](std::span<const double> x) { return std::sin(x[0]); };
  const auto g = [](std::span<const double> y) { return std::exp(0.3 * y[0] * y[1]); };
  const int da[1] = {4}, db[2] = {2, 2};
  const PceExpansion a = expand(f, za, da), b = expand(g, zb, db);

  const PceExpansion s = sum_independent(a, b);
  CHECK(s.germs().size() == 3);
  CHECK(s.se() == doctest::Approx(std::hypot(a.se(), b.se())));
  const int dj[3] = {4, 2, 2};
  const RandomVector zj{{za[0], zb[0], zb[1]}};
  const PceExpansion sd = expand([&](std::span<const double> x) { return f(x.subspan(0, 1)) + g(x.subspan(1)); }, zj, dj);
  for (std::size_t r = 0; r < s.coeffs().size(); ++r) CHECK(std::abs(s.coeffs()[r] - sd.coeffs()[r]) < 1e-10);
  CHECK(s.se() == doctest::Approx(sd.se()).epsilon(1e-6));

  const PceExpansion p = product_independent(a, b);
  const PceExpansion pd = expand([&](std::span<const double> x) { return f(x.subspan(0, 1)) * g(x.subspan(1)); }, zj, dj);
  for (std::size_t r = 0; r < p.coeffs().size(); ++r) CHECK(std::abs(p.coeffs()[r] - pd.coeffs()[r]) < 1e-10);
  CHECK(p.se() == doctest::Approx(pd.se()).epsilon(1e-6));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const double pt[3] = {za[0].sample(rng), zb[0].sample(rng), zb[1].sample(rng)};
    CHECK(p.evaluate(pt) == doctest::Approx(a.evaluate(std::span(pt, 1)) * b.evaluate(std::span(pt + 1, 2))));
  }
}

TEST_CASE("arity mismatches and non-finite integrands are reported") {
  const int d1[1] = {2};
  CHECK_THROWS_AS(expand([](std::span<const double>) { return 0.0; }, worked_example_germs(), d1), ArityError);
  CHECK_THROWS_AS(expand([](std::span<const double> x) { return std::log(x[0]); }, RandomVector{{Density::normal(0, 1)}}, d1),
                  NumericError);
}
