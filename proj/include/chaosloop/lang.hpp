// Probabilistic loop language: AST, parser, renderer and condition checks.
//
//   program   = ["program" ID] { germ | init } "while" "true" "{" { update } "}"
//   germ      = "germ" expr "~" dist [ "on" "[" NUMBER "," NUMBER "]" ]
//   init      = ID "=" (NUMBER | "-" NUMBER | dist)
//   update    = ID ":=" expr | ID "=" dist
//   dist      = FAMILY "(" args ")"       FAMILY in Normal Uniform TruncNormal TruncGamma
//   expr      = term { ("+" | "-") term }
//   term      = unary { "*" unary }
//   unary     = "-" unary | power
//   power     = primary [ "^" INT ]
//   primary   = NUMBER | ID | FUNC "(" expr ")" | "(" expr ")"   FUNC in sin cos exp log
//
// Normal(mu, var) and TruncNormal(mu, var, [a, b]) take the variance;
// TruncGamma(theta, k, [a, b]) takes scale then shape. '#' starts a comment,
// ';' may separate statements.
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "chaosloop/dist.hpp"

namespace chaosloop {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class ExprKind { Const, Var, Add, Sub, Mul, Neg, Pow, Call };
enum class Func { Sin, Cos, Exp, Log };

const char* func_name(Func f);
double apply_func(Func f, double x);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Const;
  double value = 0.0;      // Const
  std::string name;        // Var
  Func func = Func::Sin;   // Call
  unsigned exponent = 0;   // Pow
  ExprPtr lhs;             // operand of Neg/Pow/Call, left of binary ops
  ExprPtr rhs;
  SourcePos pos;

  static ExprPtr constant(double v, SourcePos p = {});
  static ExprPtr variable(std::string name, SourcePos p = {});
  static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b, SourcePos p = {});
  static ExprPtr negate(ExprPtr a, SourcePos p = {});
  static ExprPtr power(ExprPtr a, unsigned e, SourcePos p = {});
  static ExprPtr call(Func f, ExprPtr a, SourcePos p = {});
};

// Structural equality (positions ignored).
bool same_expr(const Expr& a, const Expr& b);
std::string render(const Expr& e);
void collect_variables(const Expr& e, std::set<std::string>& out);
bool contains_call(const Expr& e);
// Calls in post-order (inner calls before the calls containing them).
void collect_calls(const ExprPtr& e, std::vector<ExprPtr>& out);
double eval_expr(const Expr& e, const std::map<std::string, double>& env);

struct Init {
  std::string var;
  std::variant<double, Density> value;
  SourcePos pos;
};

struct Update {
  std::string var;
  // Density: a fresh independent draw; ExprPtr: an assignment.
  std::variant<Density, ExprPtr> form;
  SourcePos pos;

  bool is_draw() const { return std::holds_alternative<Density>(form); }
  const Density& draw() const { return std::get<Density>(form); }
  const ExprPtr& expr() const { return std::get<ExprPtr>(form); }
};

// Reference germ used when expanding calls whose argument is `argument`.
// The optional support is the interval the argument is known to stay in,
// used for the error bound of the reference-germ expansion.
struct GermDirective {
  ExprPtr argument;
  Density density;
  SourcePos pos;
  std::optional<Interval> support;
};

struct LoopProgram {
  std::string name;
  std::vector<GermDirective> germs;
  std::vector<Init> inits;
  std::vector<Update> body;

  // Initialized and updated variables, in order of first appearance.
  std::vector<std::string> variables() const;
  const Init* find_init(const std::string& v) const;
  // Index into body, or -1.
  int update_index(const std::string& v) const;
  const GermDirective* germ_for(const Expr& argument) const;
};

LoopProgram parse_program(const std::string& source);
// A single expression (the `expr` rule) with no declaration checks.
ExprPtr parse_expression(const std::string& source);
std::string render(const LoopProgram& p);
bool same_program(const LoopProgram& a, const LoopProgram& b);

struct CallSite {
  std::string target;      // variable whose update contains the call
  int update_index = -1;
  ExprPtr call;
  std::string text;
  bool stable = false;
  // Variables in the argument that carry state across iterations.
  std::vector<std::string> accumulating;
  SourcePos pos;
};

enum class Check { Holds, Fails, Deferred, Assumed };
const char* check_name(Check c);

struct ConditionsReport {
  std::vector<CallSite> sites;
  Check independent_germs = Check::Holds;        // (A) fresh draws are independent by construction
  Check square_integrable = Check::Holds;        // (B) exp/log: checked when the call is expanded
  Check moment_determinate = Check::Assumed;     // (C) true for every supported family
  Check fixed_arguments = Check::Holds;          // (D) a call site's argument is a fixed expression
  Check identically_distributed = Check::Holds;  // (E)
  // Updates reading a variable that is updated later in the body (previous-iteration value).
  std::vector<std::string> forward_references;
  std::vector<std::string> notes;
};

ConditionsReport validate_conditions(const LoopProgram& p);

}  // namespace chaosloop
