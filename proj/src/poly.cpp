#include "chaosloop/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chaosloop/error.hpp"

namespace chaosloop {

// ---------------------------------------------------------------- UniPoly

UniPoly::UniPoly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

UniPoly UniPoly::constant(double c) { return UniPoly(std::vector<double>{c}); }

UniPoly UniPoly::monomial(int k, double c) {
  std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
  v.back() = c;
  return UniPoly(std::move(v));
}

void UniPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double UniPoly::coeff(int k) const {
  return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[k] : 0.0;
}

double UniPoly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

UniPoly UniPoly::operator+(const UniPoly& q) const {
  std::vector<double> r(std::max(coeffs_.size(), q.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r[i] += coeffs_[i];
  for (std::size_t i = 0; i < q.coeffs_.size(); ++i) r[i] += q.coeffs_[i];
  return UniPoly(std::move(r));
}

UniPoly UniPoly::operator-(const UniPoly& q) const { return *this + q.scaled(-1.0); }

UniPoly UniPoly::operator*(const UniPoly& q) const {
  if (is_zero() || q.is_zero()) return {};
  std::vector<double> r(coeffs_.size() + q.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * q.coeffs_[j];
  return UniPoly(std::move(r));
}

UniPoly UniPoly::scaled(double s) const {
  std::vector<double> r = coeffs_;
  for (auto& c : r) c *= s;
  return UniPoly(std::move(r));
}

UniPoly UniPoly::compose_affine(double offset, double factor) const {
  // Horner in the polynomial ring: acc = acc * (offset + factor x) + c_k.
  const UniPoly lin(std::vector<double>{offset, factor});
  UniPoly acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * lin + constant(*it);
  return acc;
}

// --------------------------------------------------------------- MultiPoly

std::uint32_t total_degree(const Monomial& m) {
  std::uint32_t s = 0;
  for (auto e : m) s += e;
  return s;
}

MultiPoly MultiPoly::constant(std::size_t arity, double c) {
  MultiPoly p(arity);
  p.add_term(Monomial(arity, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(std::size_t arity, std::size_t index) {
  if (index >= arity) throw ArityError("variable index out of range");
  Monomial m(arity, 0);
  m[index] = 1;
  return monomial(m);
}

MultiPoly MultiPoly::monomial(const Monomial& m, double c) {
  MultiPoly p(m.size());
  p.add_term(m, c);
  return p;
}

MultiPoly MultiPoly::from_univariate(const UniPoly& u, std::size_t arity, std::size_t index) {
  if (index >= arity) throw ArityError("variable index out of range");
  MultiPoly p(arity);
  for (int k = 0; k <= u.degree(); ++k) {
    Monomial m(arity, 0);
    m[index] = static_cast<std::uint32_t>(k);
    p.add_term(m, u.coeff(k));
  }
  return p;
}

double MultiPoly::coeff(const Monomial& m) const {
  const auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void MultiPoly::add_term(const Monomial& m, double c) {
  if (m.size() != arity_) throw ArityError("monomial length does not match polynomial arity");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void MultiPoly::check_arity(const MultiPoly& q, const char* op) const {
  if (q.arity_ != arity_)
    throw ArityError(std::string(op) + ": arity mismatch (" + std::to_string(arity_) + " vs " +
                     std::to_string(q.arity_) + ")");
}

void MultiPoly::cleanup() {
  double mx = 0.0;
  for (const auto& [m, c] : terms_) mx = std::max(mx, std::abs(c));
  const double thr = kCleanupRelative * mx;
  std::erase_if(terms_, [thr](const auto& kv) { return std::abs(kv.second) < thr; });
}

MultiPoly MultiPoly::cleaned(double rel) const {
  MultiPoly r = *this;
  double mx = 0.0;
  for (const auto& [m, c] : r.terms_) mx = std::max(mx, std::abs(c));
  const double thr = rel * mx;
  std::erase_if(r.terms_, [thr](const auto& kv) { return std::abs(kv.second) < thr; });
  return r;
}

MultiPoly MultiPoly::operator+(const MultiPoly& q) const {
  check_arity(q, "add");
  MultiPoly r = *this;
  for (const auto& [m, c] : q.terms_) r.add_term(m, c);
  r.cleanup();
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& q) const {
  check_arity(q, "sub");
  MultiPoly r = *this;
  for (const auto& [m, c] : q.terms_) r.add_term(m, -c);
  r.cleanup();
  return r;
}

MultiPoly MultiPoly::operator*(const MultiPoly& q) const {
  check_arity(q, "mul");
  MultiPoly r(arity_);
  Monomial prod(arity_);
  for (const auto& [m1, c1] : terms_) {
    for (const auto& [m2, c2] : q.terms_) {
      for (std::size_t i = 0; i < arity_; ++i) prod[i] = m1[i] + m2[i];
      r.add_term(prod, c1 * c2);
    }
  }
  r.cleanup();
  return r;
}

MultiPoly MultiPoly::scaled(double s) const {
  MultiPoly r(arity_);
  if (s == 0.0) return r;
  r.terms_ = terms_;
  for (auto& [m, c] : r.terms_) c *= s;
  return r;
}

MultiPoly MultiPoly::pow(unsigned n) const {
  MultiPoly result = constant(arity_, 1.0);
  MultiPoly base = *this;
  while (n > 0) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return result;
}

double MultiPoly::evaluate(std::span<const double> z) const {
  if (z.size() != arity_)
    throw ArityError("evaluate: expected " + std::to_string(arity_) + " values, got " + std::to_string(z.size()));
  // Power table per variable up to its maximal exponent.
  std::vector<std::vector<double>> powers(arity_);
  for (std::size_t i = 0; i < arity_; ++i) {
    const int d = std::max(degree(i), 0);
    powers[i].resize(static_cast<std::size_t>(d) + 1);
    powers[i][0] = 1.0;
    for (int k = 1; k <= d; ++k) powers[i][k] = powers[i][k - 1] * z[i];
  }
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < arity_; ++i) t *= powers[i][m[i]];
    s += t;
  }
  return s;
}

MultiPoly MultiPoly::substitute(std::size_t var, const MultiPoly& q) const {
  check_arity(q, "substitute");
  if (var >= arity_) throw ArityError("substitute: variable index out of range");
  std::vector<MultiPoly> qpow{constant(arity_, 1.0)};
  MultiPoly r(arity_);
  for (const auto& [m, c] : terms_) {
    const std::uint32_t e = m[var];
    while (qpow.size() <= e) qpow.push_back(qpow.back() * q);
    Monomial rest = m;
    rest[var] = 0;
    Monomial prod(arity_);
    for (const auto& [mq, cq] : qpow[e].terms_) {
      for (std::size_t i = 0; i < arity_; ++i) prod[i] = rest[i] + mq[i];
      r.add_term(prod, c * cq);
    }
  }
  r.cleanup();
  return r;
}

MultiPoly MultiPoly::integrate_out(std::size_t var, std::span<const double> values) const {
  if (var >= arity_) throw ArityError("integrate_out: variable index out of range");
  MultiPoly r(arity_);
  for (const auto& [m, c] : terms_) {
    const std::uint32_t e = m[var];
    if (e >= values.size()) throw ArityError("integrate_out: missing moment of order " + std::to_string(e));
    Monomial rest = m;
    rest[var] = 0;
    r.add_term(rest, c * values[e]);
  }
  r.cleanup();
  return r;
}

MultiPoly MultiPoly::embed(std::size_t new_arity, std::span<const std::size_t> mapping) const {
  if (mapping.size() != arity_) throw ArityError("embed: mapping size must equal arity");
  MultiPoly r(new_arity);
  for (const auto& [m, c] : terms_) {
    Monomial out(new_arity, 0);
    for (std::size_t i = 0; i < arity_; ++i) {
      if (mapping[i] >= new_arity) throw ArityError("embed: target index out of range");
      out[mapping[i]] += m[i];
    }
    r.add_term(out, c);
  }
  return r;
}

int MultiPoly::degree(std::size_t var) const {
  int d = terms_.empty() ? -1 : 0;
  for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m[var]));
  return d;
}

int MultiPoly::total_degree() const {
  int d = terms_.empty() ? -1 : 0;
  for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(chaosloop::total_degree(m)));
  return d;
}

bool MultiPoly::depends_on(std::size_t var) const {
  return std::any_of(terms_.begin(), terms_.end(), [var](const auto& kv) { return kv.first[var] > 0; });
}

std::string MultiPoly::to_string(std::span<const std::string> names, int decimals) const {
  if (names.size() != arity_) throw ArityError("to_string: need one name per variable");
  if (terms_.empty()) return "0";
  const bool compact = std::all_of(names.begin(), names.end(), [](const auto& n) { return n.size() == 1; });
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, std::abs(c));
    std::string num = buf;
    if (num.find('.') != std::string::npos) {
      num.erase(num.find_last_not_of('0') + 1);
      if (num.back() == '.') num.pop_back();
    }
    if (num == "0") continue;  // below the printed precision
    const bool constant = chaosloop::total_degree(m) == 0;
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    bool need_star = false;
    if (constant || num != "1") {
      out += num;
      need_star = !compact;
    }
    for (std::size_t i = 0; i < arity_; ++i) {
      if (m[i] == 0) continue;
      if (need_star) out += "*";
      out += names[i];
      if (m[i] > 1) out += "^" + std::to_string(m[i]);
      need_star = !compact;
    }
    first = false;
  }
  if (out.empty()) return "0";
  return out;
}

}  // namespace chaosloop
