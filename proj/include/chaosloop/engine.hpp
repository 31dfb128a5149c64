// Polynomialization of loops with non-polynomial updates, exact per-iteration
// moment propagation, and the Monte Carlo oracle.
#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaosloop/dist.hpp"
#include "chaosloop/lang.hpp"
#include "chaosloop/pce.hpp"
#include "chaosloop/poly.hpp"

namespace chaosloop {

struct EngineConfig {
  // Expansion degree per germ at every call site.
  int degree = 5;
  int quad_nodes = 64;
  // Reference germ for non-stable sites without a `germ` directive.
  Density default_reference = Density::normal(0.0, 1.0);
  // Per-iteration germ models keyed by the rendered call argument. When set
  // for a non-stable site, that site uses the iteration-conditioned scheme.
  std::map<std::string, std::vector<Density>> iteration_germs;
};

struct SiteProvenance {
  std::string target;
  std::string call;
  std::string scheme;  // "iteration-stable", "reference-germ" or "lagrange"
  std::vector<std::string> germ_variables;
  std::vector<Density> germs;
  std::vector<int> degrees;
  std::vector<double> coeffs;
  double se = 0.0;
  // Normal-reference error bound; NaN when no support was declared.
  double bound = std::numeric_limits<double>::quiet_NaN();
  // Replacement polynomial in the argument (reference-germ scheme) or germs.
  std::string polynomial;
};

struct PolyUpdate {
  std::size_t var = 0;
  std::optional<Density> draw;
  // x_var := poly (over all program variables), empty for draws.
  MultiPoly poly;
};

struct PolynomializedProgram {
  std::string name;
  std::vector<std::string> vars;
  // Initial value or law per variable; variables without one start at 0.
  std::vector<std::variant<double, Density>> inits;
  std::vector<PolyUpdate> body;
  std::vector<SiteProvenance> provenance;
  std::vector<std::string> warnings;

  std::size_t index_of(const std::string& v) const;
  // Back to the loop language (calls replaced by their polynomials).
  LoopProgram to_loop_program() const;
};

PolynomializedProgram polynomialize(const LoopProgram& p, const EngineConfig& cfg = {});

// Replace the site's call by the iteration-conditioned estimator over
// models[n-1], n = 1..N; adds the normalized counter variable.
PolynomializedProgram lagrange_schedule(const LoopProgram& p, const std::string& argument,
                                        const std::vector<Density>& models, EngineConfig cfg = {});

// Monomial parsing/printing over a variable list, e.g. "x^2*v".
Monomial parse_monomial(const std::string& text, const std::vector<std::string>& vars);
std::string monomial_name(const Monomial& m, const std::vector<std::string>& vars);

inline constexpr std::size_t kMaxClosure = 100'000;

std::vector<Monomial> close_monomials(const PolynomializedProgram& p, const std::vector<Monomial>& targets);

class MomentTable {
 public:
  MomentTable(std::vector<std::string> vars, std::vector<Monomial> monomials, std::vector<std::vector<double>> values);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  std::size_t iterations() const { return values_.size() - 1; }
  double expectation(const Monomial& m, std::size_t n) const;
  bool contains(const Monomial& m) const { return index_.count(m) > 0; }
  const std::vector<double>& at(std::size_t n) const { return values_.at(n); }

 private:
  std::vector<std::string> vars_;
  std::vector<Monomial> monomials_;
  std::map<Monomial, std::size_t> index_;
  std::vector<std::vector<double>> values_;
};

MomentTable propagate(const PolynomializedProgram& p, const std::vector<Monomial>& targets, std::size_t N);

struct SimulationResult {
  std::vector<std::string> vars;
  std::vector<Monomial> monomials;
  // mean[n][i] and standard error of the mean for monomial i after n iterations.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> stderr_;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  double expectation(const Monomial& m, std::size_t n) const;
  double standard_error(const Monomial& m, std::size_t n) const;
};

struct SimulationOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::size_t chunk = 4096;
  // 0: PCE_LOOPS_THREADS or hardware concurrency.
  unsigned threads = 0;
};

// Runs the original program (true sin/cos/exp/log) on independent samples.
SimulationResult simulate(const LoopProgram& p, const std::vector<Monomial>& targets, std::size_t N,
                          const SimulationOptions& opts = {});

// Mean and variance of an expression evaluated just before body update `at`,
// for iterations 1..N, from a pilot simulation.
struct ProbeStats {
  std::vector<double> mean;
  std::vector<double> variance;
};
ProbeStats probe_expression(const LoopProgram& p, const ExprPtr& e, int at, std::size_t N,
                            const SimulationOptions& opts);

// Normal models moment-matched to the pilot statistics of a call argument.
std::vector<Density> pilot_germ_models(const LoopProgram& p, const std::string& argument, std::size_t N,
                                       const SimulationOptions& opts);

double rel_err(double est, double truth);

unsigned worker_threads();

}  // namespace chaosloop
