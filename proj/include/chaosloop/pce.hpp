// Truncated multivariate polynomial chaos expansions on the full tensor grid.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chaosloop/dist.hpp"
#include "chaosloop/orthopoly.hpp"
#include "chaosloop/poly.hpp"
#include "chaosloop/quad.hpp"

namespace chaosloop {

class DegreeMatrix {
 public:
  static constexpr std::size_t kMaxRows = 1'000'000;

  // Rows enumerate {0..dbar_1} x ... x {0..dbar_k}, last column fastest.
  explicit DegreeMatrix(std::vector<int> dbar);

  std::size_t rows() const { return rows_; }
  std::size_t arity() const { return dbar_.size(); }
  const std::vector<int>& max_degrees() const { return dbar_; }
  int operator()(std::size_t row, std::size_t col) const;
  std::vector<int> row(std::size_t r) const;
  // Inverse of row(): flat index of a degree tuple.
  std::size_t index_of(std::span<const int> degrees) const;

 private:
  std::vector<int> dbar_;
  std::size_t rows_;
};

struct ExpandOptions {
  int quad_nodes = 64;
  int gs_nodes = kDefaultGramSchmidtNodes;
  // Recompute the coefficients with twice the nodes and record the change.
  bool convergence_check = false;
};

struct PceDiagnostics {
  int quad_nodes = 0;
  int gs_nodes = 0;
  double max_gram_residual = 0.0;
  // Max |c(2n) - c(n)| over rows; negative when not computed.
  double convergence_delta = -1.0;
  // Quadrature value of E[g^2], the square-integrability check.
  double second_moment = 0.0;
};

class PceExpansion {
 public:
  PceExpansion(RandomVector germs, std::vector<OrthonormalBasis> bases, DegreeMatrix D, std::vector<double> coeffs,
               double se, PceDiagnostics diag);

  const RandomVector& germs() const { return germs_; }
  const std::vector<OrthonormalBasis>& bases() const { return bases_; }
  const DegreeMatrix& degrees() const { return D_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double se() const { return se_; }
  const PceDiagnostics& diagnostics() const { return diag_; }

  // sum_j c_j prod_i p_i^{d_ji}(x_i) expanded into monomials of the germ values.
  const MultiPoly& estimator() const { return estimator_; }
  // Same function evaluated through the standardized bases.
  double evaluate(std::span<const double> z) const;

  double mean() const { return coeffs_.front(); }
  double variance() const;

 private:
  RandomVector germs_;
  std::vector<OrthonormalBasis> bases_;
  DegreeMatrix D_;
  std::vector<double> coeffs_;
  double se_;
  PceDiagnostics diag_;
  MultiPoly estimator_;
};

DegreeMatrix build_degree_matrix(std::vector<int> dbar);

PceExpansion expand(const ScalarFn& g, const RandomVector& germs, std::span<const int> dbar,
                    const ExpandOptions& opts = {});

// sqrt of the integrated squared residual of the expansion against g.
double error_se(const PceExpansion& e, const ScalarFn& g, int quad_nodes = 64);

struct Moments {
  double mean;
  double variance;
};
Moments moments_from_coeffs(const PceExpansion& e);
Moments moments_from_coeffs(std::span<const double> coeffs);

// Upper bound on the squared error under a density supported on [a, b] of a
// truncated expansion of g against the reference Normal.
double error_bound(const ScalarFn1& g, const Density& reference, Interval support);

// Var of g(Z) under the reference Normal (Gauss-Hermite quadrature, so the
// whole tail of the expansion is included).
double hermite_variance(const ScalarFn1& g, const Density& reference, int quad_nodes = 128);

// Coefficients of the one-variable expansion of g against a Normal reference.
std::vector<double> hermite_coefficients(const ScalarFn1& g, const Density& reference, int degree);

// Counter values 1..N map to s = (c - (N+1)/2) / max(1, (N-1)/2) in [-1, 1].
double lagrange_node(int c, int N);
// prod_{j != n} (s - s_j) / (s_n - s_j) as a polynomial in the normalized counter s.
UniPoly lagrange_selector(int n, int N);

// Iteration-conditioned estimator sum_n P(n) * selector_n(s). Each P(n) has
// arity a; the result has the same arity and s is the variable at counter_index.
MultiPoly lagrange_conditional(std::span<const MultiPoly> per_iteration, std::size_t counter_index);

// Expansion of f(Z) + g(Y) and f(Z) * g(Y) for independent germ blocks.
PceExpansion sum_independent(const PceExpansion& a, const PceExpansion& b);
PceExpansion product_independent(const PceExpansion& a, const PceExpansion& b);

}  // namespace chaosloop
