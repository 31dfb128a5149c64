#include "chaosloop/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "chaosloop/error.hpp"
#include "chaosloop/gauss.hpp"

namespace chaosloop {

std::size_t PolynomializedProgram::index_of(const std::string& v) const {
  const auto it = std::find(vars.begin(), vars.end(), v);
  if (it == vars.end()) throw DomainError("unknown program variable '" + v + "'");
  return static_cast<std::size_t>(it - vars.begin());
}

namespace {

ExprPtr poly_to_expr(const MultiPoly& p, const std::vector<std::string>& vars) {
  ExprPtr sum;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    const bool neg = c < 0 && sum;
    const double mag = neg ? -c : c;
    bool has_var = false;
    for (auto e : m) has_var = has_var || e > 0;
    ExprPtr term = (mag != 1.0 || !has_var) ? Expr::constant(mag) : nullptr;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      ExprPtr f = Expr::variable(vars[i]);
      if (m[i] > 1) f = Expr::power(f, m[i]);
      term = term ? Expr::binary(ExprKind::Mul, term, f) : f;
    }
    if (!sum) {
      sum = term;
    } else {
      sum = Expr::binary(neg ? ExprKind::Sub : ExprKind::Add, sum, term);
    }
  }
  return sum ? sum : Expr::constant(0.0);
}

// sum_k q_k a^k by Horner over polynomials.
MultiPoly compose(const UniPoly& q, const MultiPoly& a) {
  MultiPoly acc(a.arity());
  const auto& c = q.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * a + MultiPoly::constant(a.arity(), *it);
  return acc;
}

// The one-variable expansion of f against `germ` written as a polynomial in x.
struct UniExpansion {
  UniPoly poly;
  PceExpansion pce;
};

UniExpansion expand_univariate(Func f, const Density& germ, int degree, int quad_nodes) {
  RandomVector z{{germ}};
  const int d[1] = {degree};
  ExpandOptions opts;
  opts.quad_nodes = quad_nodes;
  PceExpansion e = expand([f](std::span<const double> x) { return apply_func(f, x[0]); }, z, d, opts);
  UniPoly q;
  for (int k = 0; k <= degree; ++k) q = q + e.bases()[0].polynomial(k).scaled(e.coeffs()[k]);
  return {q, std::move(e)};
}

std::string unique_name(const std::vector<std::string>& vars, std::string base) {
  while (std::find(vars.begin(), vars.end(), base) != vars.end()) base += "_";
  return base;
}

class Polynomializer {
 public:
  Polynomializer(const LoopProgram& p, const EngineConfig& cfg) : p_(p), cfg_(cfg), report_(validate_conditions(p)) {
    for (const auto& s : report_.sites) sites_[s.call.get()] = &s;
  }

  PolynomializedProgram run() {
    PolynomializedProgram out;
    out.name = p_.name;
    out.vars = p_.variables();
    for (const auto& v : out.vars) {
      const Init* in = p_.find_init(v);
      out.inits.push_back(in ? in->value : std::variant<double, Density>(0.0));
      if (!in && p_.update_index(v) >= 0 && !p_.body[static_cast<std::size_t>(p_.update_index(v))].is_draw())
        out.warnings.push_back("'" + v + "' has no initial value; it starts at 0");
    }

    // Iteration-conditioned sites share one normalized counter.
    std::size_t lagrange_n = 0;
    for (const auto& s : report_.sites) {
      if (s.stable) continue;
      const auto it = cfg_.iteration_germs.find(render(*s.call->lhs));
      if (it == cfg_.iteration_germs.end()) continue;
      if (it->second.empty()) throw DomainError("iteration-conditioned estimator needs N >= 1 germ models");
      if (lagrange_n && lagrange_n != it->second.size())
        throw DomainError("all iteration-conditioned sites must use the same N");
      lagrange_n = it->second.size();
    }
    if (lagrange_n) {
      const int N = static_cast<int>(lagrange_n);
      counter_ = out.vars.size();
      out.vars.push_back(unique_name(out.vars, "c"));
      const double step = 1.0 / std::max(1.0, (N - 1) / 2.0);
      out.inits.emplace_back(lagrange_node(1, N) - step);
      PolyUpdate u;
      u.var = *counter_;
      u.poly = MultiPoly::variable(out.vars.size(), *counter_) + MultiPoly::constant(out.vars.size(), step);
      out.body.push_back(std::move(u));
    }
    vars_ = out.vars;
    for (std::size_t i = 0; i < vars_.size(); ++i) index_[vars_[i]] = i;

    for (const auto& f : report_.forward_references)
      out.warnings.push_back("forward reference (previous-iteration value): " + f);

    for (std::size_t i = 0; i < p_.body.size(); ++i) {
      const Update& u = p_.body[i];
      PolyUpdate pu;
      pu.var = index_.at(u.var);
      if (u.is_draw()) {
        pu.draw = u.draw();
      } else {
        current_ = static_cast<int>(i);
        MultiPoly P = to_poly(*u.expr());
        // Allowed: a*x + R with R free of x and a built from constants and
        // fresh draws, which keeps the monomial closure finite.
        for (const auto& [m, c] : P.terms()) {
          bool ok = m[pu.var] <= 1;
          if (m[pu.var] == 1)
            for (std::size_t k = 0; k < m.size() && ok; ++k)
              if (m[k] && k != pu.var && !is_draw_var(k)) ok = false;
          if (!ok)
            throw OrderingError("update of '" + u.var + "' is not of the form a*" + u.var +
                                " + P(other variables) after polynomialization");
        }
        pu.poly = std::move(P);
      }
      polys_.push_back(pu.poly);
      out.body.push_back(std::move(pu));
    }
    out.provenance = std::move(prov_);
    return out;
  }

 private:
  std::size_t arity() const { return vars_.size(); }

  MultiPoly to_poly(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Const: return MultiPoly::constant(arity(), e.value);
      case ExprKind::Var: return MultiPoly::variable(arity(), index_.at(e.name));
      case ExprKind::Add: return to_poly(*e.lhs) + to_poly(*e.rhs);
      case ExprKind::Sub: return to_poly(*e.lhs) - to_poly(*e.rhs);
      case ExprKind::Mul: return to_poly(*e.lhs) * to_poly(*e.rhs);
      case ExprKind::Neg: return to_poly(*e.lhs).scaled(-1.0);
      case ExprKind::Pow: return to_poly(*e.lhs).pow(e.exponent);
      case ExprKind::Call: return call(e);
    }
    return MultiPoly(arity());
  }

  MultiPoly call(const Expr& e) {
    const auto sit = sites_.find(&e);
    if (sit == sites_.end()) throw Error("internal: unclassified call site " + render(e));
    const CallSite& site = *sit->second;
    const MultiPoly arg = to_poly(*e.lhs);
    if (site.stable) return stable_call(e, site, arg);
    const std::string key = render(*e.lhs);
    if (const auto it = cfg_.iteration_germs.find(key); it != cfg_.iteration_germs.end())
      return lagrange_call(e, site, arg, it->second);
    return reference_call(e, site, arg);
  }

  // Substitutes this-iteration definitions until only fresh draws and loop
  // constants remain; loop constants with a numeric value are folded in.
  MultiPoly resolve(MultiPoly a) {
    for (int guard = 0; guard < 1000; ++guard) {
      bool changed = false;
      for (std::size_t v = 0; v < arity(); ++v) {
        if (!a.depends_on(v)) continue;
        const int j = p_.update_index(vars_[v]);
        if (j >= 0 && j < current_ && !p_.body[static_cast<std::size_t>(j)].is_draw()) {
          a = a.substitute(v, polys_[static_cast<std::size_t>(j)]);
          changed = true;
        } else if (j < 0) {
          const Init* in = p_.find_init(vars_[v]);
          if (!in || std::holds_alternative<double>(in->value)) {
            const double c = in ? std::get<double>(in->value) : 0.0;
            a = a.substitute(v, MultiPoly::constant(arity(), c));
            changed = true;
          }
        }
      }
      if (!changed) return a;
    }
    throw Error("internal: argument resolution did not terminate");
  }

  MultiPoly stable_call(const Expr& e, const CallSite& site, const MultiPoly& arg) {
    const MultiPoly resolved = resolve(arg);
    std::vector<std::size_t> germ_vars;
    RandomVector germs;
    for (std::size_t v = 0; v < arity(); ++v) {
      if (!resolved.depends_on(v)) continue;
      const int j = p_.update_index(vars_[v]);
      germ_vars.push_back(v);
      if (j >= 0)
        germs.components.push_back(p_.body[static_cast<std::size_t>(j)].draw());
      else
        germs.components.push_back(std::get<Density>(p_.find_init(vars_[v])->value));
    }
    SiteProvenance pv;
    pv.target = site.target;
    pv.call = site.text;
    pv.scheme = "iteration-stable";
    if (germ_vars.empty()) {
      const double c = apply_func(e.func, resolved.coeff(Monomial(arity(), 0)));
      pv.coeffs = {c};
      pv.polynomial = format_number(c);
      prov_.push_back(std::move(pv));
      return MultiPoly::constant(arity(), c);
    }
    std::vector<std::size_t> to_germ(arity(), 0);
    for (std::size_t g = 0; g < germ_vars.size(); ++g) to_germ[germ_vars[g]] = g;
    const MultiPoly local = resolved.embed(germ_vars.size(), to_germ);
    const Func f = e.func;
    const std::vector<int> degrees(germ_vars.size(), cfg_.degree);
    ExpandOptions opts;
    opts.quad_nodes = cfg_.quad_nodes;
    PceExpansion pce = expand([&](std::span<const double> z) { return apply_func(f, local.evaluate(z)); }, germs,
                              degrees, opts);
    const MultiPoly out = pce.estimator().embed(arity(), germ_vars);
    for (auto v : germ_vars) pv.germ_variables.push_back(vars_[v]);
    pv.germs = germs.components;
    pv.degrees = degrees;
    pv.coeffs = pce.coeffs();
    pv.se = pce.se();
    std::vector<std::string> names;
    for (auto v : germ_vars) names.push_back(vars_[v]);
    pv.polynomial = pce.estimator().to_string(names);
    prov_.push_back(std::move(pv));
    return out;
  }

  MultiPoly reference_call(const Expr& e, const CallSite& site, const MultiPoly& arg) {
    const GermDirective* gd = p_.germ_for(*e.lhs);
    const Density ref = gd ? gd->density : cfg_.default_reference;
    const UniExpansion ux = expand_univariate(e.func, ref, cfg_.degree, cfg_.quad_nodes);
    SiteProvenance pv;
    pv.target = site.target;
    pv.call = site.text;
    pv.scheme = "reference-germ";
    pv.germ_variables = {render(*e.lhs)};
    pv.germs = {ref};
    pv.degrees = {cfg_.degree};
    pv.coeffs = ux.poly.coeffs();
    pv.se = ux.pce.se();
    if (gd && gd->support && ref.family() == Family::Normal) {
      const Func f = e.func;
      pv.bound = error_bound([f](double x) { return apply_func(f, x); }, ref, *gd->support);
    }
    const std::vector<std::string> u{"u"};
    pv.polynomial = MultiPoly::from_univariate(ux.poly, 1, 0).to_string(u);
    prov_.push_back(std::move(pv));
    return compose(ux.poly, arg);
  }

  MultiPoly lagrange_call(const Expr& e, const CallSite& site, const MultiPoly& arg, const std::vector<Density>& models) {
    std::vector<MultiPoly> per;
    SiteProvenance pv;
    pv.target = site.target;
    pv.call = site.text;
    pv.scheme = "lagrange";
    pv.germ_variables = {render(*e.lhs), vars_[*counter_]};
    for (const auto& m : models) {
      const UniExpansion ux = expand_univariate(e.func, m, cfg_.degree, cfg_.quad_nodes);
      pv.se = std::max(pv.se, ux.pce.se());
      per.push_back(compose(ux.poly, arg));
    }
    pv.germs = models;
    pv.degrees = {cfg_.degree, static_cast<int>(models.size()) - 1};
    MultiPoly out = lagrange_conditional(per, *counter_);
    pv.polynomial = out.to_string(vars_);
    prov_.push_back(std::move(pv));
    return out;
  }

  bool is_draw_var(std::size_t k) const {
    return std::any_of(p_.body.begin(), p_.body.end(),
                       [&](const Update& u) { return u.is_draw() && u.var == vars_[k]; });
  }

  const LoopProgram& p_;
  const EngineConfig& cfg_;
  ConditionsReport report_;
  std::map<const Expr*, const CallSite*> sites_;
  std::vector<std::string> vars_;
  std::map<std::string, std::size_t> index_;
  std::vector<MultiPoly> polys_;  // polynomialized updates so far, by body index
  std::vector<SiteProvenance> prov_;
  std::optional<std::size_t> counter_;
  int current_ = 0;
};

}  // namespace

PolynomializedProgram polynomialize(const LoopProgram& p, const EngineConfig& cfg) {
  return Polynomializer(p, cfg).run();
}

PolynomializedProgram lagrange_schedule(const LoopProgram& p, const std::string& argument,
                                        const std::vector<Density>& models, EngineConfig cfg) {
  if (models.empty()) throw DomainError("lagrange_schedule: N must be >= 1");
  const ConditionsReport r = validate_conditions(p);
  const bool found = std::any_of(r.sites.begin(), r.sites.end(), [&](const CallSite& s) {
    return !s.stable && render(*s.call->lhs) == argument;
  });
  if (!found) throw DomainError("lagrange_schedule: no non-stable call site with argument '" + argument + "'");
  cfg.iteration_germs[argument] = models;
  return polynomialize(p, cfg);
}

LoopProgram PolynomializedProgram::to_loop_program() const {
  LoopProgram lp;
  lp.name = name;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const bool updated_as_draw = std::any_of(body.begin(), body.end(), [&](const PolyUpdate& u) {
      return u.var == i && u.draw.has_value();
    });
    if (const double* v = std::get_if<double>(&inits[i]); v && *v == 0.0 && updated_as_draw) continue;
    lp.inits.push_back({vars[i], inits[i], {}});
  }
  for (const auto& u : body) {
    if (u.draw)
      lp.body.push_back({vars[u.var], *u.draw, {}});
    else
      lp.body.push_back({vars[u.var], poly_to_expr(u.poly, vars), {}});
  }
  return lp;
}

// ---------------------------------------------------------------- monomials

Monomial parse_monomial(const std::string& text, const std::vector<std::string>& vars) {
  Monomial m(vars.size(), 0);
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty() || t == "1") return m;
  std::size_t pos = 0;
  while (pos <= t.size()) {
    const std::size_t star = t.find('*', pos);
    const std::string factor = t.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
    const std::size_t caret = factor.find('^');
    const std::string name = factor.substr(0, caret);
    unsigned e = 1;
    if (caret != std::string::npos) {
      const std::string es = factor.substr(caret + 1);
      if (es.empty() || es.find_first_not_of("0123456789") != std::string::npos || es.size() > 4)
        throw DomainError("bad exponent in monomial '" + text + "'");
      e = static_cast<unsigned>(std::stoul(es));
    }
    const auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw DomainError("unknown variable '" + name + "' in monomial '" + text + "'");
    m[static_cast<std::size_t>(it - vars.begin())] += e;
    if (star == std::string::npos) break;
    pos = star + 1;
  }
  return m;
}

std::string monomial_name(const Monomial& m, const std::vector<std::string>& vars) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += vars[i];
    if (m[i] > 1) out += "^" + std::to_string(m[i]);
  }
  return out.empty() ? "1" : out;
}

// ------------------------------------------------------------- propagation

namespace {

class Stepper {
 public:
  explicit Stepper(const PolynomializedProgram& p) : p_(p) {}

  // E[m after one iteration | state before] as a polynomial in the state before.
  MultiPoly step(const Monomial& m) {
    MultiPoly P = MultiPoly::monomial(m);
    for (std::size_t i = p_.body.size(); i-- > 0;) {
      const PolyUpdate& u = p_.body[i];
      if (!P.depends_on(u.var)) continue;
      if (u.draw) {
        P = P.integrate_out(u.var, moments(i, static_cast<std::size_t>(P.degree(u.var))));
      } else {
        P = P.substitute(u.var, u.poly);
      }
    }
    return P;
  }

 private:
  const std::vector<double>& moments(std::size_t i, std::size_t k) {
    auto& v = cache_[i];
    while (v.size() <= k) v.push_back(p_.body[i].draw->raw_moment(static_cast<int>(v.size())));
    return v;
  }

  const PolynomializedProgram& p_;
  std::map<std::size_t, std::vector<double>> cache_;
};

struct Closure {
  std::vector<Monomial> monomials;
  std::vector<MultiPoly> steps;
};

Closure build_closure(const PolynomializedProgram& p, const std::vector<Monomial>& targets) {
  if (targets.empty()) throw DomainError("close_monomials: at least one target monomial is required");
  Stepper st(p);
  Closure c;
  std::set<Monomial> seen;
  std::deque<Monomial> queue;
  for (const auto& t : targets) {
    if (t.size() != p.vars.size()) throw ArityError("target monomial has the wrong number of variables");
    if (seen.insert(t).second) queue.push_back(t);
  }
  while (!queue.empty()) {
    Monomial m = std::move(queue.front());
    queue.pop_front();
    MultiPoly s = st.step(m);
    for (const auto& [mm, coef] : s.terms()) {
      if (seen.insert(mm).second) {
        if (seen.size() > kMaxClosure)
          throw ClosureError("monomial closure exceeded " + std::to_string(kMaxClosure) +
                             " entries; the loop is probably not in solvable order");
        queue.push_back(mm);
      }
    }
    c.monomials.push_back(std::move(m));
    c.steps.push_back(std::move(s));
  }
  return c;
}

double initial_moment(const PolynomializedProgram& p, const Monomial& m) {
  double v = 1.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (const double* c = std::get_if<double>(&p.inits[i]))
      v *= std::pow(*c, static_cast<double>(m[i]));
    else
      v *= std::get<Density>(p.inits[i]).raw_moment(static_cast<int>(m[i]));
  }
  return v;
}

}  // namespace

std::vector<Monomial> close_monomials(const PolynomializedProgram& p, const std::vector<Monomial>& targets) {
  return build_closure(p, targets).monomials;
}

MomentTable::MomentTable(std::vector<std::string> vars, std::vector<Monomial> monomials,
                         std::vector<std::vector<double>> values)
    : vars_(std::move(vars)), monomials_(std::move(monomials)), values_(std::move(values)) {
  for (std::size_t i = 0; i < monomials_.size(); ++i) index_[monomials_[i]] = i;
}

double MomentTable::expectation(const Monomial& m, std::size_t n) const {
  const auto it = index_.find(m);
  if (it == index_.end()) throw DomainError("monomial " + monomial_name(m, vars_) + " is not in the moment table");
  return values_.at(n)[it->second];
}

MomentTable propagate(const PolynomializedProgram& p, const std::vector<Monomial>& targets, std::size_t N) {
  const Closure c = build_closure(p, targets);
  const std::size_t S = c.monomials.size();
  std::map<Monomial, std::size_t> index;
  for (std::size_t i = 0; i < S; ++i) index[c.monomials[i]] = i;
  // Sparse one-step recurrence rows.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(S);
  for (std::size_t i = 0; i < S; ++i)
    for (const auto& [m, coef] : c.steps[i].terms()) rows[i].emplace_back(index.at(m), coef);

  std::vector<std::vector<double>> values(N + 1, std::vector<double>(S));
  for (std::size_t i = 0; i < S; ++i) values[0][i] = initial_moment(p, c.monomials[i]);
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t i = 0; i < S; ++i) {
      double s = 0.0;
      for (const auto& [j, coef] : rows[i]) s += coef * values[n - 1][j];
      values[n][i] = s;
    }
  }
  return MomentTable(p.vars, c.monomials, std::move(values));
}

double rel_err(double est, double truth) { return std::abs(est - truth) / truth; }

}  // namespace chaosloop
