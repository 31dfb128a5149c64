#include <doctest.h>

#include <cmath>
#include <random>

#include "chaosloop/error.hpp"
#include "chaosloop/quad.hpp"
#include "oracle.hpp"

using namespace chaosloop;

namespace {

double rule_sum(const QuadratureRule& r, const std::function<double(double)>& f) {
  double s = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("normal recurrence is the scaled Hermite recurrence") {
  const Recurrence r = recurrence_coefficients(Density::normal(1, 2), 6);
  for (int k = 0; k < 6; ++k) CHECK(r.alpha[k] == doctest::Approx(1.0));
  for (int k = 1; k < 6; ++k) CHECK(r.beta[k] == doctest::Approx(4.0 * k));
}

TEST_CASE("uniform recurrence is the scaled Legendre recurrence") {
  const Recurrence r = recurrence_coefficients(Density::uniform(-1, 1), 6);
  for (int k = 1; k < 6; ++k) CHECK(r.beta[k] == doctest::Approx(k * k / (4.0 * k * k - 1)));
}

TEST_CASE("gauss rules integrate polynomials of degree 2n-1 exactly") {
  const int n = 8;
  for (const Density& d : {Density::normal(0.5, 1.5), Density::uniform(1, 2)}) {
    const QuadratureRule r = build_rule(d, n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double q = rule_sum(r, [k](double x) { return std::pow(x, k); });
      CHECK(q == doctest::Approx(d.raw_moment(k)).epsilon(1e-11));
    }
  }
  // Truncated families checked against Simpson on the pdf.
  for (const Density& d : {Density::truncated_normal(2, 0.1, 1, 3), Density::truncated_normal(4, 1, 3, 5),
                           Density::truncated_gamma(3, 1, 0.5, 1)}) {
    const QuadratureRule r = build_rule(d, n);
    const Interval s = d.support();
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double q = rule_sum(r, [k](double x) { return std::pow(x, k); });
      const double ref = oracle::simpson([&](double x) { return std::pow(x, k) * d.pdf(x); }, s.lo, s.hi, 40000);
      CHECK(q == doctest::Approx(ref).epsilon(1e-9));
    }
    for (double x : r.nodes) CHECK(s.contains(x));
  }
}

TEST_CASE("smooth integrands converge to independent reference") {
  const RandomVector z{{Density::truncated_normal_var(2, 0.01, 1, 3), Density::uniform(1, 2)}};
  const auto rules = build_rules(z, 32);
  const double q = integrate([](std::span<const double> x) { return std::log(x[0] + x[1]); }, rules);
  const double ref = oracle::simpson2(
      [&](double x, double y) { return std::log(x + y) * z[0].pdf(x) * z[1].pdf(y); }, 1, 3, 1, 2, 1200);
  CHECK(q == doctest::Approx(ref).epsilon(1e-9));
  CHECK(q == doctest::Approx(1.2489233749).epsilon(1e-9));
}

TEST_CASE("grid evaluation reports the offending node") {
  const std::vector<QuadratureRule> rules{build_rule(Density::normal(0, 1), 4)};
  CHECK_THROWS_AS(evaluate_on_grid([](std::span<const double> x) { return std::log(x[0]); }, rules), NumericError);
}

TEST_CASE("sum-factorized contraction equals the naive sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t m0 = 4, m1 = 3, m2 = 5;
  std::vector<double> vals(m0 * m1 * m2);
  for (auto& v : vals) v = u(rng);
  std::vector<AxisMatrix> f{{2, m0, {}}, {3, m1, {}}, {2, m2, {}}};
  for (auto& a : f) {
    a.data.resize(a.rows * a.cols);
    for (auto& v : a.data) v = u(rng);
  }
  const auto out = contract(vals, f);
  REQUIRE(out.size() == 2 * 3 * 2);
  for (std::size_t j0 = 0; j0 < 2; ++j0)
    for (std::size_t j1 = 0; j1 < 3; ++j1)
      for (std::size_t j2 = 0; j2 < 2; ++j2) {
        double s = 0;
        for (std::size_t a = 0; a < m0; ++a)
          for (std::size_t b = 0; b < m1; ++b)
            for (std::size_t c = 0; c < m2; ++c)
              s += f[0].row(j0)[a] * f[1].row(j1)[b] * f[2].row(j2)[c] * vals[(a * m1 + b) * m2 + c];
        CHECK(out[(j0 * 3 + j1) * 2 + j2] == doctest::Approx(s).epsilon(1e-13));
      }
}
