// Weighted Gaussian quadrature against a Density and its tensor products.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "chaosloop/dist.hpp"

namespace chaosloop {

struct QuadratureRule {
  std::vector<double> nodes;
  // The density is folded in: weights sum to one.
  std::vector<double> weights;
  Density target;
  int order = 0;
};

struct Recurrence {
  // Monic three-term recurrence p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}; beta[0] = 1.
  std::vector<double> alpha;
  std::vector<double> beta;
};

// First n recurrence coefficients of the density: closed form for Normal and
// Uniform, discretized Stieltjes (with full reorthogonalization) otherwise.
Recurrence recurrence_coefficients(const Density& d, int n);

// n-point Gauss rule of the density, exact for polynomials of degree 2n-1.
QuadratureRule build_rule(const Density& d, int n_nodes);
std::vector<QuadratureRule> build_rules(const RandomVector& z, int n_nodes);

using ScalarFn = std::function<double(std::span<const double>)>;
using ScalarFn1 = std::function<double(double)>;

// Tensor-product sum of f over the rules, one rule per argument.
double integrate(const ScalarFn& f, std::span<const QuadratureRule> rules);

// f at every tensor node, row-major with the last argument fastest.
// Throws NumericError naming the first node where f is not finite.
std::vector<double> evaluate_on_grid(const ScalarFn& f, std::span<const QuadratureRule> rules);

// Row-major dense matrix used as a per-axis contraction factor.
struct AxisMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

// Sum-factorized contraction: out[j1..jk] = sum_{m1..mk} prod_i M_i[j_i][m_i] * values[m1..mk].
// values has shape (M_1.cols, ..., M_k.cols); the result has shape (M_1.rows, ..., M_k.rows).
std::vector<double> contract(std::span<const double> values, std::span<const AxisMatrix> factors);

}  // namespace chaosloop
