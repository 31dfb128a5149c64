// Floating-point polynomials: dense univariate, sparse multivariate.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace chaosloop {

class UniPoly {
 public:
  UniPoly() = default;
  explicit UniPoly(std::vector<double> coeffs);

  static UniPoly constant(double c);
  static UniPoly monomial(int k, double c = 1.0);

  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int k) const;
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

  double operator()(double x) const;

  UniPoly operator+(const UniPoly& q) const;
  UniPoly operator-(const UniPoly& q) const;
  UniPoly operator*(const UniPoly& q) const;
  UniPoly scaled(double s) const;
  // p(offset + factor * x)
  UniPoly compose_affine(double offset, double factor) const;

  bool operator==(const UniPoly&) const = default;

 private:
  void trim();
  std::vector<double> coeffs_;
};

using Monomial = std::vector<std::uint32_t>;

std::uint32_t total_degree(const Monomial& m);

class MultiPoly {
 public:
  using TermMap = std::map<Monomial, double>;

  static constexpr double kCleanupRelative = 1e-14;

  explicit MultiPoly(std::size_t arity = 0) : arity_(arity) {}

  static MultiPoly constant(std::size_t arity, double c);
  static MultiPoly variable(std::size_t arity, std::size_t index);
  static MultiPoly monomial(const Monomial& m, double c = 1.0);
  // p(x_index) embedded in an arity-k space.
  static MultiPoly from_univariate(const UniPoly& p, std::size_t arity, std::size_t index);

  std::size_t arity() const { return arity_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  double coeff(const Monomial& m) const;

  // Accumulates c into the coefficient of m; exact zeros are erased.
  void add_term(const Monomial& m, double c);

  MultiPoly operator+(const MultiPoly& q) const;
  MultiPoly operator-(const MultiPoly& q) const;
  MultiPoly operator*(const MultiPoly& q) const;
  MultiPoly scaled(double s) const;
  MultiPoly pow(unsigned n) const;

  double evaluate(std::span<const double> z) const;
  // Replaces variable var by q (same arity).
  MultiPoly substitute(std::size_t var, const MultiPoly& q) const;
  // Replaces var^k by values[k] (e.g. raw moments of an independent draw).
  MultiPoly integrate_out(std::size_t var, std::span<const double> values) const;
  // Maps variable i to new index mapping[i] in a space of arity new_arity.
  MultiPoly embed(std::size_t new_arity, std::span<const std::size_t> mapping) const;

  int degree(std::size_t var) const;
  int total_degree() const;
  bool depends_on(std::size_t var) const;

  // Drops terms with |c| < rel * max|c|.
  MultiPoly cleaned(double rel = kCleanupRelative) const;

  // Report text: descending lexicographic order, at most `decimals` decimals.
  std::string to_string(std::span<const std::string> names, int decimals = 5) const;

  bool operator==(const MultiPoly&) const = default;

 private:
  void check_arity(const MultiPoly& q, const char* op) const;
  void cleanup();

  std::size_t arity_;
  TermMap terms_;
};

}  // namespace chaosloop
