#include "chaosloop/lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <functional>

#include "chaosloop/error.hpp"
#include "chaosloop/gauss.hpp"

namespace chaosloop {

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
  }
  return "?";
}

double apply_func(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Exp: return std::exp(x);
    case Func::Log: return std::log(x);
  }
  return 0.0;
}

// ------------------------------------------------------------------- Expr

ExprPtr Expr::constant(double v, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Const;
  e->value = v;
  e->pos = p;
  return e;
}

ExprPtr Expr::variable(std::string name, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = std::move(name);
  e->pos = p;
  return e;
}

ExprPtr Expr::binary(ExprKind k, ExprPtr a, ExprPtr b, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  e->pos = p;
  return e;
}

ExprPtr Expr::negate(ExprPtr a, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Neg;
  e->lhs = std::move(a);
  e->pos = p;
  return e;
}

ExprPtr Expr::power(ExprPtr a, unsigned n, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Pow;
  e->lhs = std::move(a);
  e->exponent = n;
  e->pos = p;
  return e;
}

ExprPtr Expr::call(Func f, ExprPtr a, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Call;
  e->func = f;
  e->lhs = std::move(a);
  e->pos = p;
  return e;
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Const: return a.value == b.value;
    case ExprKind::Var: return a.name == b.name;
    case ExprKind::Neg: return same_expr(*a.lhs, *b.lhs);
    case ExprKind::Pow: return a.exponent == b.exponent && same_expr(*a.lhs, *b.lhs);
    case ExprKind::Call: return a.func == b.func && same_expr(*a.lhs, *b.lhs);
    default: return same_expr(*a.lhs, *b.lhs) && same_expr(*a.rhs, *b.rhs);
  }
}

namespace {

// Binding strength used by the renderer.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Const: return e.value < 0 || std::signbit(e.value) ? 3 : 5;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

void render_into(const Expr& e, std::string& out);

void render_operand(const Expr& e, int min_prec, std::string& out) {
  const bool paren = precedence(e) < min_prec;
  if (paren) out += '(';
  render_into(e, out);
  if (paren) out += ')';
}

void render_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Const: out += e.value == 0.0 && std::signbit(e.value) ? "-0" : format_number(e.value); break;
    case ExprKind::Var: out += e.name; break;
    case ExprKind::Add:
    case ExprKind::Sub:
      render_operand(*e.lhs, 1, out);
      out += e.kind == ExprKind::Add ? " + " : " - ";
      render_operand(*e.rhs, 2, out);
      break;
    case ExprKind::Mul:
      render_operand(*e.lhs, 2, out);
      out += " * ";
      render_operand(*e.rhs, 3, out);
      break;
    case ExprKind::Neg:
      out += '-';
      render_operand(*e.lhs, 3, out);
      break;
    case ExprKind::Pow:
      render_operand(*e.lhs, 5, out);
      out += '^';
      out += std::to_string(e.exponent);
      break;
    case ExprKind::Call:
      out += func_name(e.func);
      out += '(';
      render_into(*e.lhs, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string render(const Expr& e) {
  std::string out;
  render_into(e, out);
  return out;
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var) out.insert(e.name);
  if (e.lhs) collect_variables(*e.lhs, out);
  if (e.rhs) collect_variables(*e.rhs, out);
}

bool contains_call(const Expr& e) {
  if (e.kind == ExprKind::Call) return true;
  return (e.lhs && contains_call(*e.lhs)) || (e.rhs && contains_call(*e.rhs));
}

void collect_calls(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (!e) return;
  collect_calls(e->lhs, out);
  collect_calls(e->rhs, out);
  if (e->kind == ExprKind::Call) out.push_back(e);
}

double eval_expr(const Expr& e, const std::map<std::string, double>& env) {
  switch (e.kind) {
    case ExprKind::Const: return e.value;
    case ExprKind::Var: {
      const auto it = env.find(e.name);
      if (it == env.end()) throw Error("unbound variable " + e.name);
      return it->second;
    }
    case ExprKind::Add: return eval_expr(*e.lhs, env) + eval_expr(*e.rhs, env);
    case ExprKind::Sub: return eval_expr(*e.lhs, env) - eval_expr(*e.rhs, env);
    case ExprKind::Mul: return eval_expr(*e.lhs, env) * eval_expr(*e.rhs, env);
    case ExprKind::Neg: return -eval_expr(*e.lhs, env);
    case ExprKind::Pow: return std::pow(eval_expr(*e.lhs, env), static_cast<double>(e.exponent));
    case ExprKind::Call: return apply_func(e.func, eval_expr(*e.lhs, env));
  }
  return 0.0;
}

// ------------------------------------------------------------ LoopProgram

std::vector<std::string> LoopProgram::variables() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  for (const auto& i : inits) add(i.var);
  for (const auto& u : body) add(u.var);
  return out;
}

const Init* LoopProgram::find_init(const std::string& v) const {
  for (const auto& i : inits)
    if (i.var == v) return &i;
  return nullptr;
}

int LoopProgram::update_index(const std::string& v) const {
  for (std::size_t i = 0; i < body.size(); ++i)
    if (body[i].var == v) return static_cast<int>(i);
  return -1;
}

const GermDirective* LoopProgram::germ_for(const Expr& argument) const {
  for (const auto& g : germs)
    if (same_expr(*g.argument, argument)) return &g;
  return nullptr;
}

// ------------------------------------------------------------------ Lexer

namespace {

enum class Tok { Ident, Number, Assign, Eq, Tilde, Plus, Minus, Star, Caret, LParen, RParen, LBrack, RBrack, Comma, LBrace, RBrace, Semi, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Assign: return "':='";
    case Tok::Eq: return "'='";
    case Tok::Tilde: return "'~'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Comma: return "','";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < src.size()) {
    const char c = src[i];
    const SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident(src[j])) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), 0.0, pos});
      advance(j - i);
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      const std::string text = src.substr(i, j - i);
      double v = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw ParseError("invalid number '" + text + "'", pos.line, pos.column);
      out.push_back({Tok::Number, text, v, pos});
      advance(j - i);
      continue;
    }
    Tok k = Tok::End;
    std::size_t len = 1;
    switch (c) {
      case ':':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          k = Tok::Assign;
          len = 2;
        }
        break;
      case '=': k = Tok::Eq; break;
      case '~': k = Tok::Tilde; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBrack; break;
      case ']': k = Tok::RBrack; break;
      case ',': k = Tok::Comma; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ';': k = Tok::Semi; break;
      default: break;
    }
    if (k == Tok::End) {
      std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + [&] {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", static_cast<unsigned char>(c));
        return std::string(b);
      }();
      throw ParseError("unexpected character '" + shown + "'", pos.line, pos.column);
    }
    out.push_back({k, src.substr(i, len), 0.0, pos});
    advance(len);
  }
  out.push_back({Tok::End, "", 0.0, {line, col}});
  return out;
}

// ----------------------------------------------------------------- Parser

constexpr int kMaxDepth = 200;

std::optional<Func> as_func(const std::string& s) {
  if (s == "sin") return Func::Sin;
  if (s == "cos") return Func::Cos;
  if (s == "exp") return Func::Exp;
  if (s == "log") return Func::Log;
  return std::nullopt;
}

bool is_family(const std::string& s) {
  return s == "Normal" || s == "Uniform" || s == "TruncNormal" || s == "TruncGamma";
}

bool is_keyword(const std::string& s) {
  return s == "while" || s == "true" || s == "germ" || s == "program" || s == "on" || as_func(s) || is_family(s);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  LoopProgram program() {
    LoopProgram p;
    if (is_ident("program")) {
      next();
      p.name = expect_ident("program name").text;
    }
    while (!is_ident("while")) {
      if (peek().kind == Tok::Semi) {
        next();
        continue;
      }
      if (peek().kind == Tok::End) fail(peek(), "expected 'while true { ... }'");
      if (is_ident("germ")) {
        const Token kw = next();
        ExprPtr arg = expr();
        expect(Tok::Tilde, "'~' after germ argument");
        GermDirective g{std::move(arg), dist(), kw.pos, std::nullopt};
        if (is_ident("on")) {
          next();
          expect(Tok::LBrack, "'['");
          const double a = signed_number();
          expect(Tok::Comma, "','");
          const double b = signed_number();
          const Token close = expect(Tok::RBrack, "']'");
          if (!(a < b)) fail(close, "germ support needs a < b");
          g.support = Interval{a, b};
        }
        p.germs.push_back(std::move(g));
        continue;
      }
      const Token id = expect_ident("variable name");
      if (peek().kind == Tok::Assign) fail(peek(), "initial values use '=', updates inside the loop use ':='");
      expect(Tok::Eq, "'=' in initial assignment");
      for (const auto& in : p.inits)
        if (in.var == id.text) fail(id, "duplicate initial assignment of '" + id.text + "'");
      if (peek().kind == Tok::Ident && is_family(peek().text)) {
        p.inits.push_back({id.text, dist(), id.pos});
      } else {
        double sign = 1.0;
        if (peek().kind == Tok::Minus) {
          next();
          sign = -1.0;
        }
        const Token num = expect(Tok::Number, "number or distribution");
        p.inits.push_back({id.text, sign * num.number, id.pos});
      }
    }
    const Token kw = next();
    if (!is_ident("true")) fail(peek(), "expected 'true' after 'while'");
    next();
    expect(Tok::LBrace, "'{'");
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::Semi) {
        next();
        continue;
      }
      if (peek().kind == Tok::End) fail(peek(), "missing '}' to close the loop body");
      const Token id = expect_ident("variable name");
      if (p.update_index(id.text) >= 0) fail(id, "duplicate update of '" + id.text + "' in loop body");
      if (peek().kind == Tok::Eq) {
        next();
        p.body.push_back({id.text, dist(), id.pos});
      } else {
        expect(Tok::Assign, "':=' or '='");
        p.body.push_back({id.text, expr(), id.pos});
      }
    }
    const Token close = next();
    while (peek().kind == Tok::Semi) next();
    if (peek().kind != Tok::End) fail(peek(), "unexpected " + std::string(tok_name(peek().kind)) + " after loop body");
    if (p.body.empty()) throw ParseError("no updates", kw.pos.line, kw.pos.column);
    check_declared(p);
    (void)close;
    return p;
  }

  ExprPtr expression_only() {
    ExprPtr e = expr();
    if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()) + " after expression");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() {
    Token t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(msg, t.pos.line, t.pos.column);
  }

  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what + ", found " + describe(peek()));
    return next();
  }

  Token expect_ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail(t, "expected " + what + ", found " + describe(t));
    if (is_keyword(t.text)) fail(t, "'" + t.text + "' is reserved and cannot be used as " + what);
    return next();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident || t.kind == Tok::Number) return std::string(tok_name(t.kind)) + " '" + t.text + "'";
    return tok_name(t.kind);
  }

  double signed_number() {
    double sign = 1.0;
    if (peek().kind == Tok::Minus) {
      next();
      sign = -1.0;
    }
    return sign * expect(Tok::Number, "number").number;
  }

  Density dist() {
    const Token fam = next();
    if (fam.kind != Tok::Ident || !is_family(fam.text)) fail(fam, "expected a distribution family");
    expect(Tok::LParen, "'(' after " + fam.text);
    const double p0 = signed_number();
    expect(Tok::Comma, "','");
    const double p1 = signed_number();
    double a = 0.0, b = 0.0;
    const bool bounded = fam.text == "TruncNormal" || fam.text == "TruncGamma";
    if (bounded) {
      expect(Tok::Comma, "','");
      expect(Tok::LBrack, "'[' opening the truncation interval");
      a = signed_number();
      expect(Tok::Comma, "','");
      b = signed_number();
      expect(Tok::RBrack, "']'");
    }
    expect(Tok::RParen, "')'");
    try {
      if (fam.text == "Normal") {
        if (!(p1 > 0.0)) throw DomainError("Normal: variance must be positive");
        return Density::normal_var(p0, p1);
      }
      if (fam.text == "Uniform") return Density::uniform(p0, p1);
      if (fam.text == "TruncNormal") {
        if (!(p1 > 0.0)) throw DomainError("TruncNormal: variance must be positive");
        return Density::truncated_normal_var(p0, p1, a, b);
      }
      return Density::truncated_gamma(p0, p1, a, b);
    } catch (const DomainError& e) {
      fail(fam, e.what());
    }
  }

  ExprPtr expr() {
    Guard g(*this);
    ExprPtr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token op = next();
      ExprPtr rhs = term();
      lhs = Expr::binary(op.kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub, lhs, rhs, op.pos);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (peek().kind == Tok::Star) {
      const Token op = next();
      lhs = Expr::binary(ExprKind::Mul, lhs, unary(), op.pos);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek().kind == Tok::Minus) {
      Guard g(*this);
      const Token op = next();
      ExprPtr a = unary();
      // A negated literal is a negative constant.
      if (a->kind == ExprKind::Const && !std::signbit(a->value)) return Expr::constant(-a->value, op.pos);
      return Expr::negate(a, op.pos);
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (peek().kind == Tok::Caret) {
      const Token op = next();
      if (peek().kind == Tok::Minus) fail(peek(), "exponent must be a nonnegative integer");
      const Token n = expect(Tok::Number, "integer exponent");
      if (n.text.find_first_not_of("0123456789") != std::string::npos || n.number > 1000)
        fail(n, "exponent must be a nonnegative integer, found '" + n.text + "'");
      base = Expr::power(base, static_cast<unsigned>(n.number), op.pos);
      if (peek().kind == Tok::Caret) fail(peek(), "chained '^' is ambiguous; use parentheses");
    }
    return base;
  }

  ExprPtr primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number: next(); return Expr::constant(t.number, t.pos);
      case Tok::LParen: {
        next();
        ExprPtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        if (const auto f = as_func(t.text)) {
          next();
          expect(Tok::LParen, "'(' after " + t.text);
          ExprPtr arg = expr();
          expect(Tok::RParen, "')'");
          return Expr::call(*f, arg, t.pos);
        }
        if (is_keyword(t.text)) fail(t, "unexpected keyword '" + t.text + "' in expression");
        next();
        return Expr::variable(t.text, t.pos);
      }
      default: fail(t, "expected an expression, found " + describe(t));
    }
  }

  void check_declared(const LoopProgram& p) const {
    std::set<std::string> declared;
    for (const auto& v : p.variables()) declared.insert(v);
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
      if (e.kind == ExprKind::Var && !declared.count(e.name))
        throw ParseError("undeclared variable '" + e.name + "'", e.pos.line, e.pos.column);
      if (e.lhs) walk(*e.lhs);
      if (e.rhs) walk(*e.rhs);
    };
    for (const auto& g : p.germs) walk(*g.argument);
    for (const auto& u : p.body)
      if (!u.is_draw()) walk(*u.expr());
  }

  struct Guard {
    explicit Guard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) p_.fail(p_.peek(), "expression nested too deeply");
    }
    ~Guard() { --p_.depth_; }
    Parser& p_;
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

LoopProgram parse_program(const std::string& source) { return Parser(lex(source)).program(); }

ExprPtr parse_expression(const std::string& source) { return Parser(lex(source)).expression_only(); }

std::string render(const LoopProgram& p) {
  std::string out;
  if (!p.name.empty()) out += "program " + p.name + "\n\n";
  for (const auto& g : p.germs) {
    out += "germ " + render(*g.argument) + " ~ " + g.density.to_string();
    if (g.support) out += " on [" + format_number(g.support->lo) + ", " + format_number(g.support->hi) + "]";
    out += "\n";
  }
  for (const auto& i : p.inits) {
    out += i.var + " = ";
    if (const double* v = std::get_if<double>(&i.value))
      out += format_number(*v);
    else
      out += std::get<Density>(i.value).to_string();
    out += "\n";
  }
  out += "\nwhile true {\n";
  for (const auto& u : p.body) {
    out += "  " + u.var;
    out += u.is_draw() ? " = " + u.draw().to_string() : " := " + render(*u.expr());
    out += "\n";
  }
  out += "}\n";
  return out;
}

bool same_program(const LoopProgram& a, const LoopProgram& b) {
  if (a.name != b.name || a.germs.size() != b.germs.size() || a.inits.size() != b.inits.size() ||
      a.body.size() != b.body.size())
    return false;
  for (std::size_t i = 0; i < a.germs.size(); ++i)
    if (!same_expr(*a.germs[i].argument, *b.germs[i].argument) || !(a.germs[i].density == b.germs[i].density) ||
        a.germs[i].support != b.germs[i].support)
      return false;
  for (std::size_t i = 0; i < a.inits.size(); ++i) {
    if (a.inits[i].var != b.inits[i].var || a.inits[i].value.index() != b.inits[i].value.index()) return false;
    if (const double* v = std::get_if<double>(&a.inits[i].value)) {
      if (*v != std::get<double>(b.inits[i].value)) return false;
    } else if (!(std::get<Density>(a.inits[i].value) == std::get<Density>(b.inits[i].value))) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.body.size(); ++i) {
    const auto& u = a.body[i];
    const auto& w = b.body[i];
    if (u.var != w.var || u.is_draw() != w.is_draw()) return false;
    if (u.is_draw() ? !(u.draw() == w.draw()) : !same_expr(*u.expr(), *w.expr())) return false;
  }
  return true;
}

// ------------------------------------------------------------- Conditions

namespace {

// A variable read just before body index `at` has the same law in every
// iteration when it is a loop constant or is rebuilt this iteration from such
// values without reading itself.
bool iteration_stable(const LoopProgram& p, const std::string& v, int at, std::vector<std::string>& acc, int depth = 0) {
  const int j = p.update_index(v);
  if (j < 0) return true;
  if (j >= at || depth > 64) {
    acc.push_back(v);
    return false;
  }
  const Update& u = p.body[static_cast<std::size_t>(j)];
  if (u.is_draw()) return true;
  std::set<std::string> vars;
  collect_variables(*u.expr(), vars);
  if (vars.count(v)) {
    acc.push_back(v);
    return false;
  }
  bool ok = true;
  for (const auto& w : vars) ok = iteration_stable(p, w, j, acc, depth + 1) && ok;
  return ok;
}

}  // namespace

const char* check_name(Check c) {
  switch (c) {
    case Check::Holds: return "holds";
    case Check::Fails: return "fails";
    case Check::Deferred: return "deferred";
    case Check::Assumed: return "assumed";
  }
  return "?";
}

ConditionsReport validate_conditions(const LoopProgram& p) {
  ConditionsReport r;
  for (std::size_t i = 0; i < p.body.size(); ++i) {
    const Update& u = p.body[i];
    if (u.is_draw()) continue;
    std::set<std::string> vars;
    collect_variables(*u.expr(), vars);
    for (const auto& v : vars) {
      const int j = p.update_index(v);
      if (j > static_cast<int>(i)) r.forward_references.push_back(u.var + " reads " + v);
    }
    std::vector<ExprPtr> calls;
    collect_calls(u.expr(), calls);
    for (const auto& c : calls) {
      CallSite s;
      s.target = u.var;
      s.update_index = static_cast<int>(i);
      s.call = c;
      s.text = render(*c);
      s.pos = c->pos;
      std::set<std::string> avars;
      collect_variables(*c->lhs, avars);
      bool stable = true;
      for (const auto& v : avars) stable = iteration_stable(p, v, static_cast<int>(i), s.accumulating) && stable;
      std::sort(s.accumulating.begin(), s.accumulating.end());
      s.accumulating.erase(std::unique(s.accumulating.begin(), s.accumulating.end()), s.accumulating.end());
      s.stable = stable;
      if (c->func == Func::Exp || c->func == Func::Log) r.square_integrable = Check::Deferred;
      if (!stable) r.identically_distributed = Check::Fails;
      r.sites.push_back(std::move(s));
    }
  }
  if (r.square_integrable == Check::Deferred)
    r.notes.push_back("(B) for exp/log calls is checked numerically when the call is expanded");
  if (r.identically_distributed == Check::Fails)
    r.notes.push_back("(E) fails for non-stable sites: expand against a reference germ or schedule per-iteration expansions");
  return r;
}

}  // namespace chaosloop
