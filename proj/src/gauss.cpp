#include "chaosloop/gauss.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace chaosloop {

NodesWeights gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  NodesWeights r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  if (n == 1) {
    r.weights[0] = 2.0;
    return r;
  }
  // Returns (P_n(x), P_n'(x)).
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

NodesWeights golub_welsch(std::span<const double> alpha, std::span<const double> beta) {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  if (n == 0 || beta.size() != alpha.size())
    throw std::invalid_argument("golub_welsch: alpha/beta size mismatch");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = alpha[i];
  for (Eigen::Index i = 1; i < n; ++i) sub[i - 1] = std::sqrt(beta[i]);
  NodesWeights r;
  r.nodes.resize(n);
  r.weights.resize(n);
  if (n == 1) {
    r.nodes[0] = alpha[0];
    r.weights[0] = beta[0];
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("golub_welsch: eigen solver failed");
  // Weights from the Christoffel function 1 / sum_k q_k(x)^2 with orthonormal
  // q_k. Unlike beta0 * v0^2 this keeps full relative accuracy at the
  // outermost nodes, where weights are far below machine epsilon.
  constexpr double kBig = 1e150;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = solver.eigenvalues()[i];
    r.nodes[i] = x;
    double qm1 = 0.0, q = 1.0, sum = 1.0;
    int scale_steps = 0;  // sum and q are stored divided by kBig^scale_steps
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double qn = ((x - alpha[k]) * q - (k > 0 ? sub[k - 1] : 0.0) * qm1) / sub[k];
      qm1 = q;
      q = qn;
      sum += q * q;
      if (std::abs(q) > kBig) {
        q /= kBig;
        qm1 /= kBig;
        sum /= kBig * kBig;
        ++scale_steps;
      }
    }
    double w = beta[0] / sum;
    for (int s = 0; s < scale_steps; ++s) w /= kBig * kBig;
    r.weights[i] = w;
  }
  return r;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace chaosloop
