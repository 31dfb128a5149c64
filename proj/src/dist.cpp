#include "chaosloop/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chaosloop/error.hpp"
#include "chaosloop/gauss.hpp"

namespace chaosloop {

struct Tabulation {
  // Composite Gauss-Legendre discretization, weights include the normalized pdf.
  std::vector<double> nodes;
  std::vector<double> weights;
  // Cdf table: F at grid points plus the pdf for cubic Hermite interpolation.
  std::vector<double> grid_x;
  std::vector<double> grid_F;
  std::vector<double> grid_f;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPanelNodes = 32;
constexpr int kCdfSubdivisions = 8;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Cubic Hermite interpolation of F on [x0, x1].
double hermite_cdf(double x, double x0, double x1, double F0, double F1, double f0, double f1) {
  const double h = x1 - x0;
  if (h <= 0.0) return F0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * F0 + (t3 - 2 * t2 + t) * h * f0 + (-2 * t3 + 3 * t2) * F1 +
         (t3 - t2) * h * f1;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Normal: return "Normal";
    case Family::Uniform: return "Uniform";
    case Family::TruncNormal: return "TruncNormal";
    case Family::TruncGamma: return "TruncGamma";
  }
  return "?";
}

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

std::vector<Interval> RandomVector::support() const {
  std::vector<Interval> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.support());
  return out;
}

Density::Density(Family f, double p0, double p1, Interval support)
    : family_(f), p0_(p0), p1_(p1), support_(support), var_(p1 * p1) {}

Density Density::normal_var(double mu, double variance) {
  if (!(variance > 0.0)) throw DomainError("Normal: variance must be positive");
  Density d = normal(mu, std::sqrt(variance));
  d.var_ = variance;
  return d;
}

Density Density::truncated_normal_var(double mu, double variance, double a, double b) {
  if (!(variance > 0.0)) throw DomainError("TruncNormal: variance must be positive");
  Density d = truncated_normal(mu, std::sqrt(variance), a, b);
  d.var_ = variance;
  return d;
}

Density Density::normal(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw DomainError("Normal: sigma must be positive and parameters finite");
  return Density(Family::Normal, mu, sigma, {-kInf, kInf});
}

Density Density::uniform(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("Uniform: requires finite a < b");
  return Density(Family::Uniform, a, b, {a, b});
}

Density Density::truncated_normal(double mu, double sigma, double a, double b) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw DomainError("TruncNormal: sigma must be positive and parameters finite");
  if (!(a < b)) throw DomainError("TruncNormal: requires a < b");
  Density d(Family::TruncNormal, mu, sigma, {a, b});
  d.tabulate();
  return d;
}

Density Density::truncated_gamma(double scale, double shape, double a, double b) {
  if (!(scale > 0.0) || !(shape > 0.0) || !std::isfinite(scale) || !std::isfinite(shape))
    throw DomainError("TruncGamma: theta and k must be positive");
  if (!(a < b) || a < 0.0) throw DomainError("TruncGamma: requires 0 <= a < b");
  Density d(Family::TruncGamma, scale, shape, {a, b});
  d.tabulate();
  return d;
}

double Density::untruncated_pdf(double x) const {
  switch (family_) {
    case Family::Normal:
    case Family::TruncNormal: return std_normal_pdf((x - p0_) / p1_) / p1_;
    case Family::Uniform: return 1.0 / (p1_ - p0_);
    case Family::TruncGamma: {
      if (x <= 0.0) return 0.0;
      return std::exp((p1_ - 1.0) * std::log(x) - x / p0_ - std::lgamma(p1_) - p1_ * std::log(p0_));
    }
  }
  return 0.0;
}

Interval Density::effective_support() const {
  switch (family_) {
    case Family::Normal: return {p0_ - 40.0 * p1_, p0_ + 40.0 * p1_};
    case Family::Uniform: return support_;
    case Family::TruncNormal: {
      const double m = std::clamp(p0_, support_.lo, support_.hi);
      return {std::max(support_.lo, m - 12.0 * p1_), std::min(support_.hi, m + 12.0 * p1_)};
    }
    case Family::TruncGamma: {
      const double mode = p1_ >= 1.0 ? (p1_ - 1.0) * p0_ : 0.0;
      const double m = std::clamp(mode, support_.lo, support_.hi);
      const double sd = p0_ * std::sqrt(p1_);
      return {support_.lo, std::min(support_.hi, m + 80.0 * p0_ + 20.0 * sd)};
    }
  }
  return support_;
}

void Density::tabulate() {
  const Interval w = effective_support();
  double step = 0.0;
  if (family_ == Family::TruncNormal) {
    step = p1_ / 4.0;
  } else {
    step = std::min(p0_, p0_ * std::sqrt(p1_)) / 4.0;
  }
  const int panels = static_cast<int>(std::clamp(std::ceil(w.width() / step), 16.0, 2048.0));
  const double h = w.width() / panels;
  const NodesWeights gl = gauss_legendre(kPanelNodes);
  const NodesWeights gl_sub = gauss_legendre(8);

  auto tab = std::make_shared<Tabulation>();
  tab->nodes.reserve(static_cast<std::size_t>(panels) * kPanelNodes);
  tab->weights.reserve(tab->nodes.capacity());
  double mass = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = w.lo + p * h;
    for (int i = 0; i < kPanelNodes; ++i) {
      const double x = lo + 0.5 * h * (gl.nodes[i] + 1.0);
      const double wt = 0.5 * h * gl.weights[i] * untruncated_pdf(x);
      tab->nodes.push_back(x);
      tab->weights.push_back(wt);
      mass += wt;
    }
  }
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw DomainError(std::string(family_name(family_)) + ": support carries no probability mass");
  norm_const_ = 1.0 / mass;
  for (auto& wt : tab->weights) wt *= norm_const_;

  const int cells = panels * kCdfSubdivisions;
  const double hc = w.width() / cells;
  tab->grid_x.resize(cells + 1);
  tab->grid_F.resize(cells + 1);
  tab->grid_f.resize(cells + 1);
  double F = 0.0;
  for (int c = 0; c <= cells; ++c) {
    const double x = (c == cells) ? w.hi : w.lo + c * hc;
    tab->grid_x[c] = x;
    tab->grid_f[c] = norm_const_ * untruncated_pdf(x);
    tab->grid_F[c] = F;
    if (c == cells) break;
    for (int i = 0; i < 8; ++i) {
      const double xi = x + 0.5 * hc * (gl_sub.nodes[i] + 1.0);
      F += 0.5 * hc * gl_sub.weights[i] * norm_const_ * untruncated_pdf(xi);
    }
  }
  for (auto& v : tab->grid_F) v /= F;
  for (auto& v : tab->grid_f) v /= F;
  tab->grid_F.back() = 1.0;
  tab_ = std::move(tab);
}

double Density::pdf(double x) const {
  if (!support_.contains(x)) return 0.0;
  if (family_ == Family::Uniform) return 1.0 / (p1_ - p0_);
  return norm_const_ * untruncated_pdf(x);
}

double Density::cdf(double x) const {
  if (x <= support_.lo) return 0.0;
  if (x >= support_.hi) return 1.0;
  switch (family_) {
    case Family::Normal: return 0.5 * std::erfc(-(x - p0_) / (p1_ * std::numbers::sqrt2));
    case Family::Uniform: return (x - p0_) / (p1_ - p0_);
    default: break;
  }
  const auto& gx = tab_->grid_x;
  if (x <= gx.front()) return 0.0;
  if (x >= gx.back()) return 1.0;
  const auto it = std::upper_bound(gx.begin(), gx.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - gx.begin()) - 1;
  return hermite_cdf(x, gx[i], gx[i + 1], tab_->grid_F[i], tab_->grid_F[i + 1], tab_->grid_f[i],
                     tab_->grid_f[i + 1]);
}

double Density::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("inverse_cdf: u outside [0, 1]");
  switch (family_) {
    case Family::Uniform: return p0_ + u * (p1_ - p0_);
    case Family::Normal: {
      // Bisection on the closed-form cdf over the effective support.
      double lo = p0_ - 40.0 * p1_, hi = p0_ + 40.0 * p1_;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < u ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    default: break;
  }
  const auto& F = tab_->grid_F;
  const auto& gx = tab_->grid_x;
  const auto it = std::upper_bound(F.begin(), F.end(), u);
  if (it == F.begin()) return gx.front();
  if (it == F.end()) return gx.back();
  const std::size_t i = static_cast<std::size_t>(it - F.begin()) - 1;
  double lo = gx[i], hi = gx[i + 1];
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double Fm = hermite_cdf(mid, gx[i], gx[i + 1], F[i], F[i + 1], tab_->grid_f[i], tab_->grid_f[i + 1]);
    (Fm < u ? lo : hi) = mid;
  }
  return std::clamp(0.5 * (lo + hi), support_.lo, support_.hi);
}

double Density::raw_moment(int k) const {
  if (k < 0) throw DomainError("raw_moment: order must be nonnegative");
  if (k == 0) return 1.0;
  double m = 0.0;
  switch (family_) {
    case Family::Normal: {
      // E[(mu + sigma Z)^k] = sum_j C(k,j) mu^(k-j) sigma^j E[Z^j], E[Z^j] = (j-1)!! for even j.
      double binom = 1.0, zmom = 1.0;
      for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        if (j % 2 == 0) {
          if (j > 0) zmom *= (j - 1);
          m += binom * std::pow(p0_, k - j) * std::pow(p1_, j) * zmom;
        }
      }
      break;
    }
    case Family::Uniform: {
      const double a = p0_, b = p1_;
      // (b^(k+1) - a^(k+1)) / ((k+1)(b-a)) written as a sum to avoid cancellation.
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += std::pow(a, j) * std::pow(b, k - j);
      m = s / (k + 1);
      break;
    }
    default: {
      const auto& x = tab_->nodes;
      const auto& w = tab_->weights;
      for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * std::pow(x[i], k);
      break;
    }
  }
  if (!std::isfinite(m)) throw DomainError("raw_moment: moment of order " + std::to_string(k) + " is not finite");
  return m;
}

double Density::mean() const {
  if (family_ == Family::Normal) return p0_;
  return raw_moment(1);
}

double Density::variance() const {
  if (family_ == Family::Normal) return p1_ * p1_;
  if (family_ == Family::Uniform) return (p1_ - p0_) * (p1_ - p0_) / 12.0;
  const double mu = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < tab_->nodes.size(); ++i) {
    const double d = tab_->nodes[i] - mu;
    v += tab_->weights[i] * d * d;
  }
  return v;
}

double Density::sample(Rng& rng) const {
  switch (family_) {
    case Family::Normal: return std::normal_distribution<double>(p0_, p1_)(rng);
    case Family::Uniform: return std::uniform_real_distribution<double>(p0_, p1_)(rng);
    default: return inverse_cdf(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
}

const std::vector<double>& Density::discrete_nodes() const {
  if (!tab_) throw DomainError("discrete_nodes: only truncated families are tabulated");
  return tab_->nodes;
}

const std::vector<double>& Density::discrete_weights() const {
  if (!tab_) throw DomainError("discrete_weights: only truncated families are tabulated");
  return tab_->weights;
}

std::string Density::to_string() const {
  auto n = [](double v) { return format_number(v); };
  switch (family_) {
    case Family::Normal: return "Normal(" + n(p0_) + ", " + n(var_) + ")";
    case Family::Uniform: return "Uniform(" + n(p0_) + ", " + n(p1_) + ")";
    case Family::TruncNormal:
      return "TruncNormal(" + n(p0_) + ", " + n(var_) + ", [" + n(support_.lo) + ", " + n(support_.hi) + "])";
    case Family::TruncGamma:
      return "TruncGamma(" + n(p0_) + ", " + n(p1_) + ", [" + n(support_.lo) + ", " + n(support_.hi) + "])";
  }
  return "?";
}

bool Density::operator==(const Density& o) const {
  return family_ == o.family_ && p0_ == o.p0_ && p1_ == o.p1_ && support_ == o.support_;
}

}  // namespace chaosloop
