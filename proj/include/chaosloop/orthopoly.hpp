// Orthonormal polynomial families built by Gram-Schmidt on monomials.
#pragma once

#include <span>
#include <vector>

#include "chaosloop/dist.hpp"
#include "chaosloop/poly.hpp"
#include "chaosloop/quad.hpp"

namespace chaosloop {

// Polynomials are held in the standardized variable t = (x - center) / scale,
// which keeps high degrees well conditioned on narrow supports; polynomial(i)
// returns the same function expanded in x.
class OrthonormalBasis {
 public:
  OrthonormalBasis(Density d, double center, double scale, std::vector<UniPoly> local, double gram_residual);

  const Density& density() const { return density_; }
  int max_degree() const { return static_cast<int>(local_.size()) - 1; }
  double center() const { return center_; }
  double scale() const { return scale_; }
  double gram_residual() const { return gram_residual_; }

  const UniPoly& local(int i) const { return local_.at(static_cast<std::size_t>(i)); }
  UniPoly polynomial(int i) const;

  double operator()(int i, double x) const;
  // out[i] = p_i(x) for i = 0..max_degree.
  void evaluate_all(double x, std::span<double> out) const;
  // out[m] = p_i(xs[m]).
  void evaluate_many(int i, std::span<const double> xs, std::span<double> out) const;

 private:
  Density density_;
  double center_;
  double scale_;
  std::vector<UniPoly> local_;
  double gram_residual_;
};

inline constexpr int kDefaultGramSchmidtNodes = 128;

// Throws NumericError when the observed loss of orthogonality exceeds 1e-6.
OrthonormalBasis gram_schmidt(const Density& d, int max_degree, int quad_nodes = kDefaultGramSchmidtNodes);

// <p_i, p_j> under the rule, i, j = 0..max_degree (row-major).
std::vector<double> gram_matrix(const OrthonormalBasis& b, const QuadratureRule& rule);

}  // namespace chaosloop
