// Basic random variables ("germs"): continuous univariate densities with
// pdf, raw moments, sampling and the tabulation used by the quadrature layer.
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace chaosloop {

using Rng = std::mt19937_64;

enum class Family { Normal, Uniform, TruncNormal, TruncGamma };

const char* family_name(Family f);

struct Interval {
  double lo;
  double hi;

  bool finite() const;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Fine discretization of a truncated density plus its tabulated cdf.
struct Tabulation;

class Density {
 public:
  static Density normal(double mu, double sigma);
  static Density uniform(double a, double b);
  static Density truncated_normal(double mu, double sigma, double a, double b);
  // scale = theta, shape = k; pdf x^(k-1) e^(-x/theta) restricted to [a, b], a >= 0.
  static Density truncated_gamma(double scale, double shape, double a, double b);
  // Variance-parameterized forms used by the loop language and report tables.
  static Density normal_var(double mu, double variance);
  static Density truncated_normal_var(double mu, double variance, double a, double b);

  Family family() const { return family_; }
  // Normal / TruncNormal location and standard deviation.
  double mu() const { return p0_; }
  double sigma() const { return p1_; }
  double variance_param() const { return var_; }
  // TruncGamma parameters.
  double scale() const { return p0_; }
  double shape() const { return p1_; }
  // Support of the density (truncation bounds, or +-inf for Normal).
  Interval support() const { return support_; }
  // Reciprocal mass of the untruncated pdf on the support (1 if untruncated).
  double norm_const() const { return norm_const_; }
  bool truncated() const { return family_ == Family::TruncNormal || family_ == Family::TruncGamma; }

  double pdf(double x) const;
  double cdf(double x) const;
  double raw_moment(int k) const;
  double mean() const;
  double variance() const;
  double sample(Rng& rng) const;
  double inverse_cdf(double u) const;

  // Finite interval carrying all but a negligible (< 1e-30 relative) share of the mass.
  Interval effective_support() const;

  // Discretized measure (nodes, weights summing to 1) for truncated families.
  const std::vector<double>& discrete_nodes() const;
  const std::vector<double>& discrete_weights() const;

  // Loop-language notation: second argument of Normal/TruncNormal is the variance.
  std::string to_string() const;

  bool operator==(const Density& other) const;

 private:
  Density(Family f, double p0, double p1, Interval support);
  double untruncated_pdf(double x) const;
  void tabulate();

  Family family_;
  double p0_;
  double p1_;
  Interval support_;
  double var_ = 0.0;
  double norm_const_ = 1.0;
  std::shared_ptr<const Tabulation> tab_;
};

// Independent components; the joint law is the product of the marginals.
struct RandomVector {
  std::vector<Density> components;

  std::size_t size() const { return components.size(); }
  const Density& operator[](std::size_t i) const { return components[i]; }
  std::vector<Interval> support() const;
};

}  // namespace chaosloop
