#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

#include "chaosloop/engine.hpp"
#include "chaosloop/error.hpp"
#include "chaosloop/simd/kernels.hpp"

namespace chaosloop {

unsigned worker_threads() {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PCE_LOOPS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

namespace {

enum class Op { Const, Load, Add, Sub, Mul, Neg, Pow, Call };

struct Instr {
  Op op;
  double value = 0.0;
  std::size_t var = 0;
  unsigned exponent = 0;
  Func func = Func::Sin;
};

// Postfix code for one expression, run over a whole batch at once.
struct Code {
  std::vector<Instr> instrs;
  std::size_t depth = 0;
};

void emit(const Expr& e, const std::map<std::string, std::size_t>& idx, Code& c, std::size_t& sp) {
  auto push = [&] { c.depth = std::max(c.depth, ++sp); };
  switch (e.kind) {
    case ExprKind::Const:
      c.instrs.push_back({Op::Const, e.value});
      push();
      return;
    case ExprKind::Var:
      c.instrs.push_back({Op::Load, 0.0, idx.at(e.name)});
      push();
      return;
    case ExprKind::Neg:
    case ExprKind::Pow:
    case ExprKind::Call: {
      emit(*e.lhs, idx, c, sp);
      Instr in{e.kind == ExprKind::Neg ? Op::Neg : e.kind == ExprKind::Pow ? Op::Pow : Op::Call};
      in.exponent = e.exponent;
      in.func = e.func;
      c.instrs.push_back(in);
      return;
    }
    default: {
      emit(*e.lhs, idx, c, sp);
      emit(*e.rhs, idx, c, sp);
      c.instrs.push_back({e.kind == ExprKind::Add ? Op::Add : e.kind == ExprKind::Sub ? Op::Sub : Op::Mul});
      --sp;
      return;
    }
  }
}

Code compile(const Expr& e, const std::map<std::string, std::size_t>& idx) {
  Code c;
  std::size_t sp = 0;
  emit(e, idx, c, sp);
  return c;
}

class Batch {
 public:
  Batch(std::size_t nvars, std::size_t width, std::size_t depth)
      : width_(width), state_(nvars, std::vector<double>(width)), stack_(depth, std::vector<double>(width)) {}

  std::vector<double>& var(std::size_t v) { return state_[v]; }
  std::size_t width() const { return width_; }
  void set_width(std::size_t w) { width_ = w; }

  // Result is left in the returned buffer, valid until the next run.
  const std::vector<double>& run(const Code& c) {
    const auto& k = simd::kernels();
    const std::size_t n = width_;
    std::size_t sp = 0;
    for (const Instr& in : c.instrs) {
      switch (in.op) {
        case Op::Const: std::fill_n(stack_[sp++].begin(), n, in.value); break;
        case Op::Load: std::copy_n(state_[in.var].begin(), n, stack_[sp++].begin()); break;
        case Op::Add: --sp; k.add(stack_[sp - 1].data(), stack_[sp].data(), stack_[sp - 1].data(), n); break;
        case Op::Sub: --sp; k.sub(stack_[sp - 1].data(), stack_[sp].data(), stack_[sp - 1].data(), n); break;
        case Op::Mul: --sp; k.mul(stack_[sp - 1].data(), stack_[sp].data(), stack_[sp - 1].data(), n); break;
        case Op::Neg: k.affine(-1.0, stack_[sp - 1].data(), 0.0, stack_[sp - 1].data(), n); break;
        case Op::Pow: {
          auto& top = stack_[sp - 1];
          tmp_.assign(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(n));
          std::fill_n(top.begin(), n, 1.0);
          for (unsigned e = in.exponent; e > 0; e >>= 1U) {
            if (e & 1U) k.mul(top.data(), tmp_.data(), top.data(), n);
            if (e > 1) k.mul(tmp_.data(), tmp_.data(), tmp_.data(), n);
          }
          break;
        }
        case Op::Call: {
          auto& top = stack_[sp - 1];
          for (std::size_t i = 0; i < n; ++i) top[i] = apply_func(in.func, top[i]);
          break;
        }
      }
    }
    return stack_[0];
  }

 private:
  std::size_t width_;
  std::vector<std::vector<double>> state_;
  std::vector<std::vector<double>> stack_;
  std::vector<double> tmp_;
};

struct Compiled {
  std::vector<std::string> vars;
  std::map<std::string, std::size_t> index;
  std::vector<Code> codes;  // per body update; empty for draws
  std::size_t depth = 1;
};

Compiled compile_program(const LoopProgram& p) {
  Compiled c;
  c.vars = p.variables();
  for (std::size_t i = 0; i < c.vars.size(); ++i) c.index[c.vars[i]] = i;
  for (const auto& u : p.body) {
    if (u.is_draw()) {
      c.codes.emplace_back();
    } else {
      c.codes.push_back(compile(*u.expr(), c.index));
      c.depth = std::max(c.depth, c.codes.back().depth);
    }
  }
  return c;
}

Rng chunk_rng(std::uint64_t seed, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32U)};
  return Rng(seq);
}

// Observer hooks: after_init/after_iteration(n, batch), before_update(n, i, batch).
struct Hooks {
  std::function<void(std::size_t, Batch&)> end_of_iteration;
  std::function<void(std::size_t, std::size_t, Batch&)> before_update;
};

void run_chunk(const LoopProgram& p, const Compiled& c, std::size_t N, std::size_t width, Rng& rng, Batch& b,
               const Hooks& h) {
  b.set_width(width);
  for (std::size_t v = 0; v < c.vars.size(); ++v) {
    auto& x = b.var(v);
    const Init* in = p.find_init(c.vars[v]);
    if (!in) {
      std::fill_n(x.begin(), width, 0.0);
    } else if (const double* k = std::get_if<double>(&in->value)) {
      std::fill_n(x.begin(), width, *k);
    } else {
      const Density& d = std::get<Density>(in->value);
      for (std::size_t i = 0; i < width; ++i) x[i] = d.sample(rng);
    }
  }
  if (h.end_of_iteration) h.end_of_iteration(0, b);
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t i = 0; i < p.body.size(); ++i) {
      if (h.before_update) h.before_update(n, i, b);
      const Update& u = p.body[i];
      auto& x = b.var(c.index.at(u.var));
      if (u.is_draw()) {
        const Density& d = u.draw();
        for (std::size_t s = 0; s < width; ++s) x[s] = d.sample(rng);
      } else {
        const auto& r = b.run(c.codes[i]);
        std::copy_n(r.begin(), width, x.begin());
      }
    }
    if (h.end_of_iteration) h.end_of_iteration(n, b);
  }
}

// Runs all chunks on a worker pool; per-chunk results are merged in chunk order.
template <class Acc, class MakeHooks>
std::vector<Acc> run_chunks(const LoopProgram& p, std::size_t N, const SimulationOptions& opts, MakeHooks make_hooks) {
  const Compiled c = compile_program(p);
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
  const std::size_t nchunks = (opts.samples + chunk - 1) / chunk;
  std::vector<Acc> acc(nchunks);
  std::atomic<std::size_t> next{0};
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(opts.threads ? opts.threads : worker_threads(), std::max<std::size_t>(1, nchunks)));
  auto worker = [&] {
    Batch b(c.vars.size(), chunk, c.depth);
    for (std::size_t k; (k = next.fetch_add(1)) < nchunks;) {
      const std::size_t width = std::min(chunk, static_cast<std::size_t>(opts.samples) - k * chunk);
      Rng rng = chunk_rng(opts.seed, k);
      const Hooks h = make_hooks(acc[k], c);
      run_chunk(p, c, N, width, rng, b, h);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return acc;
}

void monomial_values(Batch& b, const Monomial& m, std::vector<double>& out) {
  const auto& k = simd::kernels();
  const std::size_t n = b.width();
  out.assign(n, 1.0);
  for (std::size_t v = 0; v < m.size(); ++v)
    for (unsigned e = 0; e < m[v]; ++e) k.mul(out.data(), b.var(v).data(), out.data(), n);
}

struct Moments2 {
  double sum = 0.0;
  double sumsq = 0.0;
};

void accumulate(const std::vector<double>& vals, std::size_t n, Moments2& m) {
  const auto& k = simd::kernels();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += vals[i];
  m.sum += s;
  m.sumsq += k.dot(vals.data(), vals.data(), n);
}

}  // namespace

SimulationResult simulate(const LoopProgram& p, const std::vector<Monomial>& targets, std::size_t N,
                          const SimulationOptions& opts) {
  if (opts.samples < 2) throw DomainError("simulate: need at least 2 samples");
  const std::size_t nvars = p.variables().size();
  for (const auto& t : targets)
    if (t.size() != nvars) throw ArityError("simulate: target monomial has the wrong number of variables");
  using Acc = std::vector<std::vector<Moments2>>;  // [n][target]
  auto chunks = run_chunks<Acc>(p, N, opts, [&](Acc& acc, const Compiled&) {
    acc.assign(N + 1, std::vector<Moments2>(targets.size()));
    Hooks h;
    h.end_of_iteration = [&acc, &targets, vals = std::vector<double>()](std::size_t n, Batch& b) mutable {
      for (std::size_t t = 0; t < targets.size(); ++t) {
        monomial_values(b, targets[t], vals);
        accumulate(vals, b.width(), acc[n][t]);
      }
    };
    return h;
  });
  SimulationResult r;
  r.vars = p.variables();
  r.monomials = targets;
  r.samples = opts.samples;
  r.seed = opts.seed;
  r.mean.assign(N + 1, std::vector<double>(targets.size()));
  r.stderr_.assign(N + 1, std::vector<double>(targets.size()));
  const double S = static_cast<double>(opts.samples);
  for (std::size_t n = 0; n <= N; ++n) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      Moments2 tot;
      for (const auto& c : chunks) {
        tot.sum += c[n][t].sum;
        tot.sumsq += c[n][t].sumsq;
      }
      const double mean = tot.sum / S;
      const double var = std::max(0.0, (tot.sumsq / S - mean * mean) * S / (S - 1.0));
      r.mean[n][t] = mean;
      r.stderr_[n][t] = std::sqrt(var / S);
    }
  }
  return r;
}

namespace {

std::size_t find_monomial(const std::vector<Monomial>& ms, const Monomial& m) {
  const auto it = std::find(ms.begin(), ms.end(), m);
  if (it == ms.end()) throw DomainError("monomial was not simulated");
  return static_cast<std::size_t>(it - ms.begin());
}

}  // namespace

double SimulationResult::expectation(const Monomial& m, std::size_t n) const {
  return mean.at(n)[find_monomial(monomials, m)];
}

double SimulationResult::standard_error(const Monomial& m, std::size_t n) const {
  return stderr_.at(n)[find_monomial(monomials, m)];
}

ProbeStats probe_expression(const LoopProgram& p, const ExprPtr& e, int at, std::size_t N,
                            const SimulationOptions& opts) {
  if (at < 0 || static_cast<std::size_t>(at) >= p.body.size()) throw DomainError("probe: update index out of range");
  using Acc = std::vector<Moments2>;  // [n]
  auto chunks = run_chunks<Acc>(p, N, opts, [&](Acc& acc, const Compiled& c) {
    acc.assign(N + 1, Moments2{});
    Hooks h;
    h.before_update = [&acc, code = compile(*e, c.index), at](std::size_t n, std::size_t i, Batch& b) {
      if (i != static_cast<std::size_t>(at)) return;
      const auto& r = b.run(code);
      accumulate(r, b.width(), acc[n]);
    };
    return h;
  });
  ProbeStats s;
  const double S = static_cast<double>(opts.samples);
  for (std::size_t n = 1; n <= N; ++n) {
    Moments2 tot;
    for (const auto& c : chunks) {
      tot.sum += c[n].sum;
      tot.sumsq += c[n].sumsq;
    }
    const double mean = tot.sum / S;
    s.mean.push_back(mean);
    s.variance.push_back(std::max(0.0, tot.sumsq / S - mean * mean));
  }
  return s;
}

std::vector<Density> pilot_germ_models(const LoopProgram& p, const std::string& argument, std::size_t N,
                                       const SimulationOptions& opts) {
  const ConditionsReport r = validate_conditions(p);
  for (const auto& s : r.sites) {
    if (render(*s.call->lhs) != argument) continue;
    const ProbeStats st = probe_expression(p, s.call->lhs, s.update_index, N, opts);
    std::vector<Density> models;
    for (std::size_t n = 0; n < N; ++n) {
      // A degenerate (deterministic) argument gets a tiny spread so the basis exists.
      const double floor = 1e-12 * (1.0 + st.mean[n] * st.mean[n]);
      models.push_back(Density::normal_var(st.mean[n], std::max(st.variance[n], floor)));
    }
    return models;
  }
  throw DomainError("pilot_germ_models: no call site with argument '" + argument + "'");
}

}  // namespace chaosloop
