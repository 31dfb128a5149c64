// Classical Gaussian rule generators shared by dist and quad.
#pragma once

#include <span>
#include <string>
#include <vector>

namespace chaosloop {

struct NodesWeights {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (weights sum to 2).
NodesWeights gauss_legendre(int n);

// Golub-Welsch: nodes/weights of the Gauss rule for the measure whose monic
// orthogonal polynomials satisfy p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}.
// beta[0] is the total mass of the measure. Requires alpha.size() == beta.size().
NodesWeights golub_welsch(std::span<const double> alpha, std::span<const double> beta);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace chaosloop
