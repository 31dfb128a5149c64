#include "chaosloop/pce.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chaosloop/error.hpp"
#include "chaosloop/simd/kernels.hpp"

namespace chaosloop {

// ----------------------------------------------------------- DegreeMatrix

DegreeMatrix::DegreeMatrix(std::vector<int> dbar) : dbar_(std::move(dbar)), rows_(1) {
  for (int d : dbar_) {
    if (d < 0) throw DomainError("degree matrix: degrees must be nonnegative");
    const std::size_t f = static_cast<std::size_t>(d) + 1;
    if (rows_ > kMaxRows / f)
      throw DomainError("degree matrix: more than " + std::to_string(kMaxRows) + " rows requested");
    rows_ *= f;
  }
}

int DegreeMatrix::operator()(std::size_t r, std::size_t col) const {
  std::size_t stride = 1;
  for (std::size_t i = dbar_.size(); i-- > col + 1;) stride *= static_cast<std::size_t>(dbar_[i]) + 1;
  return static_cast<int>((r / stride) % (static_cast<std::size_t>(dbar_[col]) + 1));
}

std::vector<int> DegreeMatrix::row(std::size_t r) const {
  std::vector<int> out(dbar_.size());
  for (std::size_t i = dbar_.size(); i-- > 0;) {
    const std::size_t f = static_cast<std::size_t>(dbar_[i]) + 1;
    out[i] = static_cast<int>(r % f);
    r /= f;
  }
  return out;
}

std::size_t DegreeMatrix::index_of(std::span<const int> degrees) const {
  if (degrees.size() != dbar_.size()) throw ArityError("degree tuple length does not match the degree matrix");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dbar_.size(); ++i) {
    if (degrees[i] < 0 || degrees[i] > dbar_[i]) throw DomainError("degree tuple outside the truncation grid");
    idx = idx * (static_cast<std::size_t>(dbar_[i]) + 1) + static_cast<std::size_t>(degrees[i]);
  }
  return idx;
}

DegreeMatrix build_degree_matrix(std::vector<int> dbar) { return DegreeMatrix(std::move(dbar)); }

// ----------------------------------------------------------- PceExpansion

namespace {

// Monomial coefficients of every basis polynomial: T[power][degree].
AxisMatrix monomial_transform(const OrthonormalBasis& b) {
  const std::size_t L = static_cast<std::size_t>(b.max_degree()) + 1;
  AxisMatrix T{L, L, std::vector<double>(L * L, 0.0)};
  for (std::size_t d = 0; d < L; ++d) {
    const UniPoly p = b.polynomial(static_cast<int>(d));
    for (int k = 0; k <= p.degree(); ++k) T.row(static_cast<std::size_t>(k))[d] = p.coeff(k);
  }
  return T;
}

MultiPoly assemble_estimator(const std::vector<OrthonormalBasis>& bases, const DegreeMatrix& D,
                             const std::vector<double>& coeffs) {
  std::vector<AxisMatrix> T;
  for (const auto& b : bases) T.push_back(monomial_transform(b));
  const std::vector<double> mono = contract(coeffs, T);
  MultiPoly p(D.arity());
  Monomial m(D.arity());
  for (std::size_t r = 0; r < D.rows(); ++r) {
    if (mono[r] == 0.0) continue;
    const auto row = D.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) m[i] = static_cast<std::uint32_t>(row[i]);
    p.add_term(m, mono[r]);
  }
  return p.cleaned();
}

// P[m][d] = p_d(x_m), the basis values at the rule nodes.
AxisMatrix basis_at_nodes(const OrthonormalBasis& b, const QuadratureRule& rule) {
  const std::size_t L = static_cast<std::size_t>(b.max_degree()) + 1;
  const std::size_t n = rule.nodes.size();
  std::vector<double> tmp(n);
  AxisMatrix P{n, L, std::vector<double>(n * L)};
  for (std::size_t d = 0; d < L; ++d) {
    b.evaluate_many(static_cast<int>(d), rule.nodes, tmp);
    for (std::size_t m = 0; m < n; ++m) P.row(m)[d] = tmp[m];
  }
  return P;
}

// W[d][m] = w_m p_d(x_m), the projection factor.
AxisMatrix projection_factor(const OrthonormalBasis& b, const QuadratureRule& rule) {
  const AxisMatrix P = basis_at_nodes(b, rule);
  AxisMatrix W{P.cols, P.rows, std::vector<double>(P.data.size())};
  for (std::size_t m = 0; m < P.rows; ++m)
    for (std::size_t d = 0; d < P.cols; ++d) W.row(d)[m] = rule.weights[m] * P.row(m)[d];
  return W;
}

AxisMatrix weight_row(const QuadratureRule& rule) {
  return AxisMatrix{1, rule.weights.size(), rule.weights};
}

std::vector<double> project(std::span<const double> grid, const std::vector<OrthonormalBasis>& bases,
                            std::span<const QuadratureRule> rules) {
  std::vector<AxisMatrix> W;
  for (std::size_t i = 0; i < bases.size(); ++i) W.push_back(projection_factor(bases[i], rules[i]));
  return contract(grid, W);
}

double weighted_sum(std::span<const double> grid, std::span<const QuadratureRule> rules) {
  std::vector<AxisMatrix> W;
  for (const auto& r : rules) W.push_back(weight_row(r));
  return contract(grid, W).front();
}

double residual_se(std::span<const double> grid, const std::vector<OrthonormalBasis>& bases,
                   std::span<const QuadratureRule> rules, const std::vector<double>& coeffs) {
  std::vector<AxisMatrix> P;
  for (std::size_t i = 0; i < bases.size(); ++i) P.push_back(basis_at_nodes(bases[i], rules[i]));
  const std::vector<double> fitted = contract(coeffs, P);
  std::vector<double> r2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i] - fitted[i];
    r2[i] = r * r;
  }
  return std::sqrt(std::max(0.0, weighted_sum(r2, rules)));
}

}  // namespace

PceExpansion::PceExpansion(RandomVector germs, std::vector<OrthonormalBasis> bases, DegreeMatrix D,
                           std::vector<double> coeffs, double se, PceDiagnostics diag)
    : germs_(std::move(germs)),
      bases_(std::move(bases)),
      D_(std::move(D)),
      coeffs_(std::move(coeffs)),
      se_(se),
      diag_(diag) {
  if (coeffs_.size() != D_.rows()) throw ArityError("expansion: coefficient count does not match the degree matrix");
  if (bases_.size() != D_.arity() || germs_.size() != D_.arity())
    throw ArityError("expansion: one basis per germ required");
  estimator_ = assemble_estimator(bases_, D_, coeffs_);
}

double PceExpansion::evaluate(std::span<const double> z) const {
  if (z.size() != D_.arity()) throw ArityError("expansion evaluate: wrong number of germ values");
  std::vector<AxisMatrix> rows;
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    const std::size_t L = static_cast<std::size_t>(bases_[i].max_degree()) + 1;
    AxisMatrix r{1, L, std::vector<double>(L)};
    bases_[i].evaluate_all(z[i], r.data);
    rows.push_back(std::move(r));
  }
  return contract(coeffs_, rows).front();
}

double PceExpansion::variance() const { return moments_from_coeffs(coeffs_).variance; }

PceExpansion expand(const ScalarFn& g, const RandomVector& germs, std::span<const int> dbar, const ExpandOptions& opts) {
  if (dbar.size() != germs.size())
    throw ArityError("expand: " + std::to_string(germs.size()) + " germs but " + std::to_string(dbar.size()) +
                     " degrees");
  if (germs.size() == 0) throw ArityError("expand: at least one germ is required");
  DegreeMatrix D(std::vector<int>(dbar.begin(), dbar.end()));
  PceDiagnostics diag;
  diag.quad_nodes = opts.quad_nodes;
  diag.gs_nodes = opts.gs_nodes;

  std::vector<OrthonormalBasis> bases;
  for (std::size_t i = 0; i < germs.size(); ++i) {
    bases.push_back(gram_schmidt(germs[i], dbar[i], opts.gs_nodes));
    diag.max_gram_residual = std::max(diag.max_gram_residual, bases.back().gram_residual());
  }

  auto run = [&](int nodes, double* se, double* second) {
    int n = nodes;
    for (int d : dbar) n = std::max(n, d + 1);
    const auto rules = build_rules(germs, n);
    const std::vector<double> grid = evaluate_on_grid(g, rules);
    std::vector<double> sq(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sq[i] = grid[i] * grid[i];
    const double m2 = weighted_sum(sq, rules);
    if (!std::isfinite(m2)) throw NumericError("expand: E[g^2] is not finite; g is not square-integrable");
    std::vector<double> c = project(grid, bases, rules);
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (!std::isfinite(c[j])) {
        const auto row = D.row(j);
        std::string s;
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + std::to_string(row[i]);
        throw NumericError("expand: coefficient for degree row (" + s + ") is not finite");
      }
    }
    if (se) *se = residual_se(grid, bases, rules, c);
    if (second) *second = m2;
    return c;
  };

  double se = 0.0;
  std::vector<double> coeffs = run(opts.quad_nodes, &se, &diag.second_moment);
  if (opts.convergence_check) {
    const std::vector<double> fine = run(2 * opts.quad_nodes, nullptr, nullptr);
    double delta = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) delta = std::max(delta, std::abs(fine[j] - coeffs[j]));
    diag.convergence_delta = delta;
  }
  return PceExpansion(germs, std::move(bases), std::move(D), std::move(coeffs), se, diag);
}

double error_se(const PceExpansion& e, const ScalarFn& g, int quad_nodes) {
  int n = quad_nodes;
  for (int d : e.degrees().max_degrees()) n = std::max(n, d + 1);
  const auto rules = build_rules(e.germs(), n);
  const std::vector<double> grid = evaluate_on_grid(g, rules);
  return residual_se(grid, e.bases(), rules, e.coeffs());
}

Moments moments_from_coeffs(std::span<const double> coeffs) {
  if (coeffs.empty()) return {0.0, 0.0};
  double v = 0.0;
  for (std::size_t j = 1; j < coeffs.size(); ++j) v += coeffs[j] * coeffs[j];
  return {coeffs[0], v};
}

Moments moments_from_coeffs(const PceExpansion& e) { return moments_from_coeffs(e.coeffs()); }

// ------------------------------------------------- Normal-reference bound

std::vector<double> hermite_coefficients(const ScalarFn1& g, const Density& reference, int degree) {
  if (reference.family() != Family::Normal) throw DomainError("Hermite expansion needs a Normal reference");
  if (degree < 0) throw DomainError("Hermite expansion: degree must be >= 0");
  const QuadratureRule rule = build_rule(Density::normal(0.0, 1.0), std::max(128, 2 * degree + 2));
  const double mu = reference.mu(), sigma = reference.sigma();
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
    const double z = rule.nodes[m];
    const double gv = g(mu + sigma * z);
    if (!std::isfinite(gv)) throw NumericError("Hermite expansion: g is not finite at " + std::to_string(mu + sigma * z));
    // Orthonormal Hermite values h_n = He_n / sqrt(n!).
    double hm1 = 0.0, h = 1.0;
    for (int n = 0; n <= degree; ++n) {
      c[n] += rule.weights[m] * gv * h;
      const double hn = (z * h - std::sqrt(static_cast<double>(n)) * hm1) / std::sqrt(n + 1.0);
      hm1 = h;
      h = hn;
    }
  }
  return c;
}

double hermite_variance(const ScalarFn1& g, const Density& reference, int quad_nodes) {
  if (reference.family() != Family::Normal) throw DomainError("Hermite variance needs a Normal reference");
  const QuadratureRule rule = build_rule(reference, quad_nodes);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
    const double gv = g(rule.nodes[m]);
    if (!std::isfinite(gv)) throw NumericError("Hermite variance: g is not finite at " + std::to_string(rule.nodes[m]));
    m1 += rule.weights[m] * gv;
    m2 += rule.weights[m] * gv * gv;
  }
  // Rounding leaves ~eps * m1^2 of spurious variance for constant g.
  const double var = m2 - m1 * m1;
  return var <= 1e-14 * m1 * m1 ? 0.0 : var;
}

double error_bound(const ScalarFn1& g, const Density& reference, Interval support) {
  if (!(support.lo < support.hi)) throw DomainError("error_bound: need a < b");
  if (reference.family() != Family::Normal) throw DomainError("error_bound: reference germ must be Normal");
  const double var = hermite_variance(g, reference);
  if (var == 0.0) return 0.0;
  // The bound is stated for the standard normal; a general reference is
  // handled in the standardized coordinate, which leaves the f-norm unchanged.
  const double a = (support.lo - reference.mu()) / reference.sigma();
  const double b = (support.hi - reference.mu()) / reference.sigma();
  const auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  const double pmin = std::min(phi(a), phi(b));
  if (!(pmin > 0.0)) return std::numeric_limits<double>::infinity();
  return (2.0 / pmin + 1.0) * var;
}

// ------------------------------------------------------ Lagrange estimator

double lagrange_node(int c, int N) {
  const double half = std::max(1.0, (N - 1) / 2.0);
  return (c - (N + 1) / 2.0) / half;
}

UniPoly lagrange_selector(int n, int N) {
  if (N < 1) throw DomainError("Lagrange estimator: N must be >= 1");
  if (n < 1 || n > N) throw DomainError("Lagrange estimator: n must lie in 1..N");
  UniPoly p = UniPoly::constant(1.0);
  const double sn = lagrange_node(n, N);
  for (int j = 1; j <= N; ++j) {
    if (j == n) continue;
    const double sj = lagrange_node(j, N);
    p = p * UniPoly(std::vector<double>{-sj / (sn - sj), 1.0 / (sn - sj)});
  }
  return p;
}

MultiPoly lagrange_conditional(std::span<const MultiPoly> per_iteration, std::size_t counter_index) {
  const int N = static_cast<int>(per_iteration.size());
  if (N < 1) throw DomainError("Lagrange estimator: N must be >= 1");
  const std::size_t arity = per_iteration.front().arity();
  MultiPoly out(arity);
  for (int n = 1; n <= N; ++n) {
    const MultiPoly sel = MultiPoly::from_univariate(lagrange_selector(n, N), arity, counter_index);
    out = out + per_iteration[n - 1] * sel;
  }
  return out;
}

// ---------------------------------------------------- independent blocks

namespace {

struct Joined {
  RandomVector germs;
  std::vector<OrthonormalBasis> bases;
  std::vector<int> dbar;
  PceDiagnostics diag;
};

Joined join(const PceExpansion& a, const PceExpansion& b) {
  Joined j;
  j.germs = a.germs();
  for (const auto& d : b.germs().components) j.germs.components.push_back(d);
  j.bases = a.bases();
  for (const auto& x : b.bases()) j.bases.push_back(x);
  j.dbar = a.degrees().max_degrees();
  for (int d : b.degrees().max_degrees()) j.dbar.push_back(d);
  j.diag.quad_nodes = std::max(a.diagnostics().quad_nodes, b.diagnostics().quad_nodes);
  j.diag.gs_nodes = std::max(a.diagnostics().gs_nodes, b.diagnostics().gs_nodes);
  j.diag.max_gram_residual = std::max(a.diagnostics().max_gram_residual, b.diagnostics().max_gram_residual);
  return j;
}

double sq_norm(const std::vector<double>& c) {
  double s = 0.0;
  for (double x : c) s += x * x;
  return s;
}

}  // namespace

PceExpansion sum_independent(const PceExpansion& a, const PceExpansion& b) {
  Joined j = join(a, b);
  DegreeMatrix D(j.dbar);
  const std::size_t LB = b.coeffs().size();
  std::vector<double> c(D.rows(), 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) c[i * LB] += a.coeffs()[i];
  for (std::size_t i = 0; i < LB; ++i) c[i] += b.coeffs()[i];
  // Residuals of independent blocks have zero mean, so their errors add in quadrature.
  const double se = std::hypot(a.se(), b.se());
  return PceExpansion(std::move(j.germs), std::move(j.bases), std::move(D), std::move(c), se, j.diag);
}

PceExpansion product_independent(const PceExpansion& a, const PceExpansion& b) {
  Joined j = join(a, b);
  DegreeMatrix D(j.dbar);
  const std::size_t LB = b.coeffs().size();
  std::vector<double> c(D.rows(), 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i)
    for (std::size_t k = 0; k < LB; ++k) c[i * LB + k] = a.coeffs()[i] * b.coeffs()[k];
  // E[(fg - f^g^)^2] = (A + ea)(B + eb) - AB with A, B the squared coefficient norms.
  const double A = sq_norm(a.coeffs()), B = sq_norm(b.coeffs());
  const double ea = a.se() * a.se(), eb = b.se() * b.se();
  const double se = std::sqrt(A * eb + B * ea + ea * eb);
  return PceExpansion(std::move(j.germs), std::move(j.bases), std::move(D), std::move(c), se, j.diag);
}

}  // namespace chaosloop
