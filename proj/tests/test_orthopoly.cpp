#include <doctest.h>

#include <cmath>

#include "chaosloop/error.hpp"
#include "chaosloop/orthopoly.hpp"
#include "chaosloop/quad.hpp"
#include "oracle.hpp"

using namespace chaosloop;

TEST_CASE("standard normal gives normalized Hermite polynomials") {
  const OrthonormalBasis b = gram_schmidt(Density::normal(0, 1), 4);
  const double inv_sqrt24 = 1.0 / std::sqrt(24.0);
  for (double x : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
    CHECK(b(0, x) == doctest::Approx(1.0));
    CHECK(b(1, x) == doctest::Approx(x));
    CHECK(b(2, x) == doctest::Approx((x * x - 1) / std::sqrt(2.0)));
    CHECK(b(3, x) == doctest::Approx((x * x * x - 3 * x) / std::sqrt(6.0)));
    CHECK(b(4, x) == doctest::Approx((std::pow(x, 4) - 6 * x * x + 3) * inv_sqrt24));
  }
}

TEST_CASE("worked-example bases") {
  const OrthonormalBasis p = gram_schmidt(Density::truncated_normal_var(2, 0.01, 1, 3), 2);
  CHECK(p.polynomial(1).coeff(1) == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(p.polynomial(1).coeff(0) == doctest::Approx(-20.0).epsilon(1e-6));
  CHECK(p.polynomial(2).coeff(2) == doctest::Approx(70.710678).epsilon(1e-6));
  CHECK(p.polynomial(2).coeff(1) == doctest::Approx(-282.842712).epsilon(1e-6));
  CHECK(p.polynomial(2).coeff(0) == doctest::Approx(282.135606).epsilon(1e-6));
  const OrthonormalBasis q = gram_schmidt(Density::uniform(1, 2), 2);
  CHECK(q.polynomial(1).coeff(1) == doctest::Approx(3.464102).epsilon(1e-6));
  CHECK(q.polynomial(1).coeff(0) == doctest::Approx(-5.196152).epsilon(1e-6));
  CHECK(q.polynomial(2).coeff(2) == doctest::Approx(13.416408).epsilon(1e-6));
  CHECK(q.polynomial(2).coeff(1) == doctest::Approx(-40.249224).epsilon(1e-6));
  CHECK(q.polynomial(2).coeff(0) == doctest::Approx(29.068884).epsilon(1e-6));
}

TEST_CASE("orthonormality against independent quadrature up to degree 10") {
  for (const Density& d : {Density::truncated_normal_var(2, 0.01, 1, 3), Density::uniform(1, 2),
                           Density::truncated_normal_var(4, 1, 3, 5), Density::truncated_gamma(3, 1, 0.5, 1),
                           Density::uniform(4, 8), Density::truncated_normal(0, 1, -1, 2)}) {
    const OrthonormalBasis b = gram_schmidt(d, 10);
    CHECK(b.gram_residual() < 1e-8);
    const Interval s = d.support();
    for (int i = 0; i <= 10; i += 3)
      for (int j = i; j <= 10; j += 2) {
        const double ip =
            oracle::simpson([&](double x) { return b(i, x) * b(j, x) * d.pdf(x); }, s.lo, s.hi, 60000);
        CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-7).scale(1.0));
      }
  }
}

TEST_CASE("gram matrix under a higher-order rule is the identity") {
  const Density d = Density::normal(3, 0.5);
  const OrthonormalBasis b = gram_schmidt(d, 10);
  const auto g = gram_matrix(b, build_rule(d, 40));
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) CHECK(std::abs(g[i * 11 + j] - (i == j ? 1.0 : 0.0)) < 1e-8);
}

TEST_CASE("batch evaluation matches pointwise") {
  const OrthonormalBasis b = gram_schmidt(Density::truncated_gamma(3, 1, 0.5, 1), 6);
  const std::vector<double> xs{0.5, 0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0, 0.66};
  std::vector<double> out(xs.size()), all(7);
  for (int i = 0; i <= 6; ++i) {
    b.evaluate_many(i, xs, out);
    for (std::size_t m = 0; m < xs.size(); ++m) {
      CHECK(out[m] == doctest::Approx(b(i, xs[m])).epsilon(1e-12));
      CHECK(b.polynomial(i)(xs[m]) == doctest::Approx(b(i, xs[m])).epsilon(1e-8));
    }
  }
  b.evaluate_all(0.7, all);
  for (int i = 0; i <= 6; ++i) CHECK(all[i] == doctest::Approx(b(i, 0.7)));
}

TEST_CASE("node count is raised to what the degree needs") {
  const OrthonormalBasis b = gram_schmidt(Density::normal(0, 1), 10, 4);
  CHECK(b.gram_residual() < 1e-10);
  CHECK_THROWS_AS(gram_schmidt(Density::normal(0, 1), -1), DomainError);
}
