#include "chaosloop/quad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chaosloop/error.hpp"
#include "chaosloop/gauss.hpp"
#include "chaosloop/simd/kernels.hpp"

namespace chaosloop {

namespace {

// Stieltjes on the tabulated measure in the standardized variable t = (x - c) / s.
Recurrence discrete_stieltjes(const Density& d, int n) {
  const auto& x = d.discrete_nodes();
  const auto& w = d.discrete_weights();
  const std::size_t m = x.size();
  if (static_cast<std::size_t>(n) * 4 > m)
    throw NumericError("quadrature order " + std::to_string(n) + " too high for the tabulated " +
                       family_name(d.family()) + " measure");
  const double c = d.mean();
  const double s = std::sqrt(d.variance());
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = (x[i] - c) / s;

  const auto& k = simd::kernels();
  // q holds orthonormal polynomial values, one vector per degree.
  std::vector<std::vector<double>> q;
  q.emplace_back(m, 1.0);
  Recurrence r;
  r.alpha.resize(n);
  r.beta.resize(n);
  r.beta[0] = 1.0;
  std::vector<double> next(m), tq(m), wq(m);
  for (int j = 0; j < n; ++j) {
    const auto& qj = q[j];
    k.mul(t.data(), qj.data(), tq.data(), m);
    const double alpha = k.dot3(w.data(), tq.data(), qj.data(), m);
    r.alpha[j] = alpha;
    if (j + 1 == n) break;
    for (std::size_t i = 0; i < m; ++i) next[i] = (t[i] - alpha) * qj[i];
    if (j > 0) k.axpy(-std::sqrt(r.beta[j]), q[j - 1].data(), next.data(), m);
    // Full reorthogonalization against every earlier vector.
    for (int l = 0; l <= j; ++l) {
      k.mul(w.data(), q[l].data(), wq.data(), m);
      k.axpy(-k.dot(wq.data(), next.data(), m), q[l].data(), next.data(), m);
    }
    const double nrm2 = k.dot3(w.data(), next.data(), next.data(), m);
    if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
      throw NumericError("Stieltjes recurrence broke down at degree " + std::to_string(j + 1));
    r.beta[j + 1] = nrm2;
    const double inv = 1.0 / std::sqrt(nrm2);
    std::vector<double> qn(m);
    k.affine(inv, next.data(), 0.0, qn.data(), m);
    q.push_back(std::move(qn));
  }
  for (int j = 0; j < n; ++j) {
    r.alpha[j] = c + s * r.alpha[j];
    if (j > 0) r.beta[j] *= s * s;
  }
  return r;
}

}  // namespace

Recurrence recurrence_coefficients(const Density& d, int n) {
  if (n < 1) throw DomainError("recurrence_coefficients: n must be >= 1");
  Recurrence r;
  r.alpha.resize(n);
  r.beta.resize(n);
  r.beta[0] = 1.0;
  switch (d.family()) {
    case Family::Normal: {
      const double v = d.sigma() * d.sigma();
      for (int k = 0; k < n; ++k) {
        r.alpha[k] = d.mu();
        if (k > 0) r.beta[k] = k * v;
      }
      return r;
    }
    case Family::Uniform: {
      const Interval s = d.support();
      const double mid = 0.5 * (s.lo + s.hi);
      const double h = 0.5 * s.width();
      for (int k = 0; k < n; ++k) {
        r.alpha[k] = mid;
        if (k > 0) r.beta[k] = h * h * k * k / (4.0 * k * k - 1.0);
      }
      return r;
    }
    default: return discrete_stieltjes(d, n);
  }
}

QuadratureRule build_rule(const Density& d, int n_nodes) {
  if (n_nodes < 1) throw DomainError("build_rule: n_nodes must be >= 1");
  const Recurrence r = recurrence_coefficients(d, n_nodes);
  NodesWeights nw = golub_welsch(r.alpha, r.beta);
  const Interval sup = d.support();
  for (auto& x : nw.nodes) x = std::clamp(x, sup.lo, sup.hi);
  const double total = std::accumulate(nw.weights.begin(), nw.weights.end(), 0.0);
  for (auto& w : nw.weights) w /= total;
  return QuadratureRule{std::move(nw.nodes), std::move(nw.weights), d, n_nodes};
}

std::vector<QuadratureRule> build_rules(const RandomVector& z, int n_nodes) {
  std::vector<QuadratureRule> rules;
  rules.reserve(z.size());
  for (const auto& d : z.components) rules.push_back(build_rule(d, n_nodes));
  return rules;
}

namespace {

// Visits every tensor node in row-major order; fn(flat_index, point, weight).
template <class Fn>
void for_each_node(std::span<const QuadratureRule> rules, Fn&& fn) {
  const std::size_t k = rules.size();
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> point(k);
  std::size_t total = 1;
  for (const auto& r : rules) total *= r.nodes.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      point[i] = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
    }
    fn(flat, std::span<const double>(point), w);
    for (std::size_t i = k; i-- > 0;) {
      if (++idx[i] < rules[i].nodes.size()) break;
      idx[i] = 0;
    }
  }
}

[[noreturn]] void throw_non_finite(std::span<const double> point, double v) {
  std::ostringstream os;
  os << "integrand is not finite (" << v << ") at node (";
  for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
  os << ")";
  throw NumericError(os.str());
}

}  // namespace

double integrate(const ScalarFn& f, std::span<const QuadratureRule> rules) {
  double sum = 0.0;
  for_each_node(rules, [&](std::size_t, std::span<const double> p, double w) {
    const double v = f(p);
    if (!std::isfinite(v)) throw_non_finite(p, v);
    sum += w * v;
  });
  return sum;
}

std::vector<double> evaluate_on_grid(const ScalarFn& f, std::span<const QuadratureRule> rules) {
  std::size_t total = 1;
  for (const auto& r : rules) total *= r.nodes.size();
  std::vector<double> out(total);
  for_each_node(rules, [&](std::size_t flat, std::span<const double> p, double) {
    const double v = f(p);
    if (!std::isfinite(v)) throw_non_finite(p, v);
    out[flat] = v;
  });
  return out;
}

std::vector<double> contract(std::span<const double> values, std::span<const AxisMatrix> factors) {
  std::vector<std::size_t> shape;
  std::size_t total = 1;
  for (const auto& f : factors) {
    shape.push_back(f.cols);
    total *= f.cols;
  }
  if (total != values.size()) throw ArityError("contract: value count does not match factor shapes");
  const auto& k = simd::kernels();
  std::vector<double> cur(values.begin(), values.end());
  for (std::size_t axis = 0; axis < factors.size(); ++axis) {
    const AxisMatrix& M = factors[axis];
    std::size_t pre = 1, post = 1;
    for (std::size_t i = 0; i < axis; ++i) pre *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) post *= shape[i];
    const std::size_t n = shape[axis];
    std::vector<double> next(pre * M.rows * post, 0.0);
    for (std::size_t a = 0; a < pre; ++a) {
      const double* in = cur.data() + a * n * post;
      double* out = next.data() + a * M.rows * post;
      if (post == 1) {
        for (std::size_t r = 0; r < M.rows; ++r) out[r] = k.dot(M.row(r), in, n);
      } else {
        for (std::size_t r = 0; r < M.rows; ++r)
          for (std::size_t m = 0; m < n; ++m) k.axpy(M.row(r)[m], in + m * post, out + r * post, post);
      }
    }
    shape[axis] = M.rows;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace chaosloop
