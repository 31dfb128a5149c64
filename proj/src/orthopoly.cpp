#include "chaosloop/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosloop/error.hpp"
#include "chaosloop/simd/kernels.hpp"

namespace chaosloop {

OrthonormalBasis::OrthonormalBasis(Density d, double center, double scale, std::vector<UniPoly> local,
                                   double gram_residual)
    : density_(std::move(d)),
      center_(center),
      scale_(scale),
      local_(std::move(local)),
      gram_residual_(gram_residual) {}

UniPoly OrthonormalBasis::polynomial(int i) const {
  return local(i).compose_affine(-center_ / scale_, 1.0 / scale_);
}

double OrthonormalBasis::operator()(int i, double x) const { return local(i)((x - center_) / scale_); }

void OrthonormalBasis::evaluate_all(double x, std::span<double> out) const {
  const double t = (x - center_) / scale_;
  for (std::size_t i = 0; i < local_.size() && i < out.size(); ++i) out[i] = local_[i](t);
}

void OrthonormalBasis::evaluate_many(int i, std::span<const double> xs, std::span<double> out) const {
  const auto& k = simd::kernels();
  std::vector<double> t(xs.size());
  k.affine(1.0 / scale_, xs.data(), -center_ / scale_, t.data(), xs.size());
  const auto& c = local(i).coeffs();
  if (c.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  k.horner(c.data(), c.size(), t.data(), out.data(), xs.size());
}

OrthonormalBasis gram_schmidt(const Density& d, int max_degree, int quad_nodes) {
  if (max_degree < 0) throw DomainError("gram_schmidt: max_degree must be >= 0");
  const int n = std::max(quad_nodes, max_degree + 1);
  const QuadratureRule rule = build_rule(d, n);
  const double center = d.mean();
  const double scale = std::sqrt(d.variance());
  const std::size_t m = rule.nodes.size();
  const auto& k = simd::kernels();

  std::vector<double> t(m);
  k.affine(1.0 / scale, rule.nodes.data(), -center / scale, t.data(), m);
  const auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return k.dot3(rule.weights.data(), a.data(), b.data(), m);
  };

  std::vector<std::vector<double>> coeffs;  // in t, index = power
  std::vector<std::vector<double>> values;  // at the nodes
  for (int i = 0; i <= max_degree; ++i) {
    // t * p_{i-1} spans the same space as t^i with a positive leading
    // coefficient, and its node values stay bounded.
    std::vector<double> c(static_cast<std::size_t>(i) + 1, 0.0);
    std::vector<double> v(m, 1.0);
    if (i == 0) {
      c[0] = 1.0;
    } else {
      k.mul(values[i - 1].data(), t.data(), v.data(), m);
      for (std::size_t j = 0; j < coeffs[i - 1].size(); ++j) c[j + 1] = coeffs[i - 1][j];
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        const double r = inner(v, values[j]);
        k.axpy(-r, values[j].data(), v.data(), m);
        for (std::size_t p = 0; p < coeffs[j].size(); ++p) c[p] -= r * coeffs[j][p];
      }
    }
    const double nrm2 = inner(v, v);
    if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
      throw NumericError("gram_schmidt: degree " + std::to_string(i) + " polynomial has zero norm under " +
                         d.to_string() + "; raise the quadrature order or lower the degree");
    const double inv = 1.0 / std::sqrt(nrm2);
    for (auto& x : v) x *= inv;
    for (auto& x : c) x *= inv;
    coeffs.push_back(std::move(c));
    values.push_back(std::move(v));
  }

  std::vector<UniPoly> local;
  local.reserve(coeffs.size());
  for (auto& c : coeffs) local.emplace_back(std::move(c));
  OrthonormalBasis basis(d, center, scale, std::move(local), 0.0);

  // Residual is measured on the polynomials as stored, re-evaluated from their coefficients.
  const auto g = gram_matrix(basis, rule);
  const std::size_t L = static_cast<std::size_t>(max_degree) + 1;
  double residual = 0.0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) residual = std::max(residual, std::abs(g[i * L + j] - (i == j ? 1.0 : 0.0)));
  if (residual > 1e-6)
    throw NumericError("gram_schmidt: loss of orthogonality " + std::to_string(residual) + " for " + d.to_string() +
                       " at degree " + std::to_string(max_degree) +
                       "; raise the quadrature order or lower the degree");
  std::vector<UniPoly> polys;
  for (std::size_t i = 0; i < L; ++i) polys.push_back(basis.local(static_cast<int>(i)));
  return OrthonormalBasis(d, center, scale, std::move(polys), residual);
}

std::vector<double> gram_matrix(const OrthonormalBasis& b, const QuadratureRule& rule) {
  const std::size_t L = static_cast<std::size_t>(b.max_degree()) + 1;
  const std::size_t m = rule.nodes.size();
  std::vector<std::vector<double>> vals(L, std::vector<double>(m));
  for (std::size_t i = 0; i < L; ++i) b.evaluate_many(static_cast<int>(i), rule.nodes, vals[i]);
  const auto& k = simd::kernels();
  std::vector<double> g(L * L);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      g[i * L + j] = g[j * L + i] = k.dot3(rule.weights.data(), vals[i].data(), vals[j].data(), m);
  return g;
}

}  // namespace chaosloop
