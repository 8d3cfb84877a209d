#include "hocp/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <utility>

namespace hocp {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::string name;
  std::vector<Expr> args;
};

ParseError::ParseError(std::size_t offset, const std::string& what)
    : ExprError("syntax error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

Expr::Expr() : node_(std::make_shared<const Node>()) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value == 0.0 ? 0.0 : value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::make(Op op, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return Expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
std::span<const Expr> Expr::args() const { return node_->args; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const:
      return a.value() == b.value();
    case Op::Var:
      return a.name() == b.name();
    default:
      break;
  }
  auto aa = a.args();
  auto ba = b.args();
  if (aa.size() != ba.size()) return false;
  for (std::size_t i = 0; i < aa.size(); ++i) {
    if (!(aa[i] == ba[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scalar kernels shared by tree evaluation, folding, and Program.

namespace {

[[noreturn]] void domain(const char* what) { throw DomainError(what); }

inline double checked(double r) {
  if (!std::isfinite(r)) domain("non-finite result");
  return r;
}

inline double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg:
      return -a;
    case Op::Sin:
      return std::sin(a);
    case Op::Cos:
      return std::cos(a);
    case Op::Exp:
      return checked(std::exp(a));
    case Op::Log:
      if (!(a > 0.0)) domain("log of nonpositive value");
      return std::log(a);
    case Op::Sqrt:
      if (a < 0.0) domain("sqrt of negative value");
      return std::sqrt(a);
    case Op::Abs:
      return std::fabs(a);
    case Op::Sgn:
      return a >= 0.0 ? 1.0 : -1.0;
    default:
      domain("bad unary op");
  }
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add:
      return checked(a + b);
    case Op::Sub:
      return checked(a - b);
    case Op::Mul:
      return checked(a * b);
    case Op::Div:
      if (b == 0.0) domain("division by zero");
      return checked(a / b);
    case Op::Pow: {
      if (a == 0.0 && b < 0.0) domain("division by zero");
      if (a < 0.0 && std::floor(b) != b) domain("negative base with non-integer exponent");
      if (b == 2.0) return checked(a * a);
      return checked(std::pow(a, b));
    }
    default:
      domain("bad binary op");
  }
}

inline double apply_ternary(Op op, double e, double lo, double hi) {
  if (lo > hi) domain("empty interval");
  if (op == Op::Sat) return std::min(std::max(e, lo), hi);
  return (lo <= e && e < hi) ? 1.0 : 0.0;
}

int arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return 2;
    case Op::Sat:
    case Op::Ind:
      return 3;
    default:
      return 1;
  }
}

struct FunctionInfo {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"sin", Op::Sin},
    {"cos", Op::Cos},
    {"exp", Op::Exp},
    {"log", Op::Log},
    {"sqrt", Op::Sqrt},
    {"abs", Op::Abs},
    {"sgn", Op::Sgn},
    {"sat", Op::Sat},
    {"ind", Op::Ind},
}};

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

Expr fold_or_make(Op op, std::vector<Expr> args) {
  bool all_const = std::all_of(args.begin(), args.end(), [](const Expr& a) { return a.is_constant(); });
  if (all_const) {
    try {
      double v = 0.0;
      switch (arity(op)) {
        case 1:
          v = apply_unary(op, args[0].value());
          break;
        case 2:
          v = apply_binary(op, args[0].value(), args[1].value());
          break;
        default:
          v = apply_ternary(op, args[0].value(), args[1].value(), args[2].value());
          break;
      }
      if (std::isfinite(v)) return Expr::constant(v);
    } catch (const DomainError&) {
      // keep the node so evaluation reports the domain error
    }
  }
  return Expr::make(op, std::move(args));
}

}  // namespace

// ---------------------------------------------------------------------------
// Folding constructors

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return fold_or_make(Op::Add, {a, b});
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return fold_or_make(Op::Sub, {a, b});
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return fold_or_make(Op::Mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  return fold_or_make(Op::Div, {a, b});
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.args()[0];
  return Expr::make(Op::Neg, {a});
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(0.0)) return Expr::constant(1.0);
  if (exponent.is_constant(1.0)) return base;
  return fold_or_make(Op::Pow, {base, exponent});
}

Expr sin(const Expr& e) { return fold_or_make(Op::Sin, {e}); }
Expr cos(const Expr& e) { return fold_or_make(Op::Cos, {e}); }
Expr exp(const Expr& e) { return fold_or_make(Op::Exp, {e}); }
Expr log(const Expr& e) { return fold_or_make(Op::Log, {e}); }
Expr sqrt(const Expr& e) { return fold_or_make(Op::Sqrt, {e}); }
Expr abs(const Expr& e) { return fold_or_make(Op::Abs, {e}); }
Expr sgn(const Expr& e) { return fold_or_make(Op::Sgn, {e}); }
Expr sat(const Expr& e, const Expr& lo, const Expr& hi) { return fold_or_make(Op::Sat, {e, lo, hi}); }
Expr ind(const Expr& e, const Expr& lo, const Expr& hi) { return fold_or_make(Op::Ind, {e, lo, hi}); }

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      std::string text(s.substr(start, i - start));
      double v = std::strtod(text.c_str(), nullptr);
      if (!std::isfinite(v)) throw ParseError(start, "numeric literal out of range");
      out.push_back({Tok::Number, start, std::move(text), v});
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, start, std::string(s.substr(start, i - start))});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+':
        kind = Tok::Plus;
        break;
      case '-':
        kind = Tok::Minus;
        break;
      case '*':
        kind = Tok::Star;
        break;
      case '/':
        kind = Tok::Slash;
        break;
      case '^':
        kind = Tok::Caret;
        break;
      case '(':
        kind = Tok::LParen;
        break;
      case ')':
        kind = Tok::RParen;
        break;
      case ',':
        kind = Tok::Comma;
        break;
      default:
        throw ParseError(i, "unexpected character");
    }
    out.push_back({kind, i, std::string(1, static_cast<char>(c))});
    ++i;
  }
  out.push_back({Tok::End, s.size(), ""});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, const VarSet& declared) : toks_(tokenize(src)), declared_(declared) {}

  Expr parse_all() {
    if (peek().kind == Tok::End) throw ParseError(peek().offset, "empty expression");
    Expr e = additive();
    if (peek().kind != Tok::End) throw ParseError(peek().offset, "expected operator or end of input");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_++]; }

  Expr additive() {
    Expr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Op op = next().kind == Tok::Plus ? Op::Add : Op::Sub;
      lhs = Expr::make(op, {lhs, term()});
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      Op op = next().kind == Tok::Star ? Op::Mul : Op::Div;
      lhs = Expr::make(op, {lhs, unary()});
    }
    return lhs;
  }

  Expr unary() {
    if (peek().kind == Tok::Minus) {
      next();
      // A negated literal is a negative constant unless it is the base of '^'.
      if (peek().kind == Tok::Number && peek(1).kind != Tok::Caret) {
        return Expr::constant(-next().number);
      }
      return Expr::make(Op::Neg, {unary()});
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek().kind == Tok::Caret) {
      next();
      return Expr::make(Op::Pow, {base, unary()});
    }
    return base;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return Expr::constant(t.number);
      case Tok::LParen: {
        next();
        Expr inner = additive();
        expect(Tok::RParen, "expected ')'");
        return inner;
      }
      case Tok::Ident: {
        next();
        if (peek().kind == Tok::LParen) return call(t);
        if (!declared_.contains(t.text)) {
          throw ParseError(t.offset, "unknown variable '" + t.text + "'");
        }
        return Expr::variable(t.text);
      }
      default:
        throw ParseError(t.offset, "expected operand");
    }
  }

  Expr call(const Token& name) {
    auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                           [&](const FunctionInfo& f) { return f.name == name.text; });
    if (it == kFunctions.end()) throw ParseError(name.offset, "unknown function '" + name.text + "'");
    next();  // '('
    std::vector<Expr> args;
    if (peek().kind != Tok::RParen) {
      args.push_back(additive());
      while (peek().kind == Tok::Comma) {
        next();
        args.push_back(additive());
      }
    }
    expect(Tok::RParen, "expected ')' or ','");
    int want = arity(it->op);
    if (static_cast<int>(args.size()) != want) {
      throw ParseError(name.offset, "arity mismatch: " + name.text + " takes " + std::to_string(want) +
                                        " argument(s), got " + std::to_string(args.size()));
    }
    return Expr::make(it->op, std::move(args));
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw ParseError(peek().offset, what);
    next();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const VarSet& declared_;
};

}  // namespace

Expr parse(std::string_view source, const VarSet& declared) { return Parser(source, declared).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, const Bindings& bindings) {
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw UnboundVariable("unbound variable '" + e.name() + "'");
      return it->second;
    }
    default:
      break;
  }
  auto a = e.args();
  switch (arity(e.op())) {
    case 1:
      return apply_unary(e.op(), eval(a[0], bindings));
    case 2:
      return apply_binary(e.op(), eval(a[0], bindings), eval(a[1], bindings));
    default:
      return apply_ternary(e.op(), eval(a[0], bindings), eval(a[1], bindings), eval(a[2], bindings));
  }
}

// ---------------------------------------------------------------------------
// Structure queries

bool depends_on(const Expr& e, std::string_view var) {
  if (e.op() == Op::Var) return e.name() == var;
  for (const auto& a : e.args()) {
    if (depends_on(a, var)) return true;
  }
  return false;
}

VarSet variables(const Expr& e) {
  VarSet out;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    if (n.op() == Op::Var) out.insert(n.name());
    for (const auto& a : n.args()) walk(a);
  };
  walk(e);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  if (e.op() == Op::Var) {
    auto it = replacements.find(e.name());
    return it == replacements.end() ? e : it->second;
  }
  if (e.args().empty()) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(substitute(a, replacements));
  return Expr::make(e.op(), std::move(args));
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, std::string_view var) {
  const Expr zero = Expr::constant(0.0);
  const Expr one = Expr::constant(1.0);
  if (e.op() == Op::Var) return e.name() == var ? one : zero;
  if (!depends_on(e, var)) return zero;

  auto a = e.args();
  auto d = [&](std::size_t i) { return differentiate(a[i], var); };
  const Expr two = Expr::constant(2.0);
  const Expr half = Expr::constant(0.5);

  switch (e.op()) {
    case Op::Neg:
      return -d(0);
    case Op::Sin:
      return cos(a[0]) * d(0);
    case Op::Cos:
      return -(sin(a[0]) * d(0));
    case Op::Exp:
      return exp(a[0]) * d(0);
    case Op::Log:
      return d(0) / a[0];
    case Op::Sqrt:
      return d(0) / (two * sqrt(a[0]));
    case Op::Abs:
      return sgn(a[0]) * d(0);
    case Op::Sgn:
    case Op::Ind:
      return zero;
    case Op::Add:
      return d(0) + d(1);
    case Op::Sub:
      return d(0) - d(1);
    case Op::Mul:
      return d(0) * a[1] + a[0] * d(1);
    case Op::Div: {
      if (!depends_on(a[1], var)) return d(0) / a[1];
      if (!depends_on(a[0], var)) return -(a[0] * d(1)) / pow(a[1], two);
      return (d(0) * a[1] - a[0] * d(1)) / pow(a[1], two);
    }
    case Op::Pow: {
      if (!depends_on(a[1], var)) return a[1] * pow(a[0], a[1] - one) * d(0);
      if (!depends_on(a[0], var)) return pow(a[0], a[1]) * log(a[0]) * d(1);
      return pow(a[0], a[1]) * (d(1) * log(a[0]) + a[1] * d(0) / a[0]);
    }
    case Op::Sat: {
      // Interior indicator times the argument's derivative, plus the bound
      // derivatives on the clamped sides (right-continuous at the kinks).
      Expr out = ind(a[0], a[1], a[2]) * d(0);
      Expr dlo = d(1);
      Expr dhi = d(2);
      if (!dlo.is_constant(0.0)) out = out + half * (one - sgn(a[0] - a[1])) * dlo;
      if (!dhi.is_constant(0.0)) out = out + half * (one + sgn(a[0] - a[2])) * dhi;
      return out;
    }
    default:
      throw ExprError("malformed expression");
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Binding strength of the rendered form: 1 additive, 2 multiplicative,
// 3 unary minus (and negative literals), 4 power, 5 atom.
int level(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
      return e.value() < 0.0 ? 3 : 5;
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

void render(const Expr& e, std::string& out);

void render_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  render(e, out);
  if (wrap) out += ')';
}

void render(const Expr& e, std::string& out) {
  auto a = e.args();
  switch (e.op()) {
    case Op::Const:
      out += format_number(e.value());
      return;
    case Op::Var:
      out += e.name();
      return;
    case Op::Add:
    case Op::Sub:
      render_wrapped(a[0], false, out);
      out += e.op() == Op::Add ? " + " : " - ";
      render_wrapped(a[1], level(a[1]) <= 1, out);
      return;
    case Op::Mul:
    case Op::Div:
      render_wrapped(a[0], level(a[0]) < 2, out);
      out += e.op() == Op::Mul ? "*" : "/";
      render_wrapped(a[1], level(a[1]) <= 2, out);
      return;
    case Op::Neg: {
      out += '-';
      // "-<literal>" would read back as a negative constant
      bool wrap = level(a[0]) < 3 || (a[0].is_constant() && a[0].value() >= 0.0);
      render_wrapped(a[0], wrap, out);
      return;
    }
    case Op::Pow:
      render_wrapped(a[0], level(a[0]) < 5, out);
      out += '^';
      render_wrapped(a[1], level(a[1]) < 3, out);
      return;
    default: {
      out += function_name(e.op());
      out += '(';
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        render(a[i], out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  render(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Program

Program::Program(const Expr& e, std::span<const std::string> layout) {
  std::size_t depth = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& n) {
    for (const auto& a : n.args()) emit(a);
    Instr ins{n.op(), 0, 0.0};
    if (n.op() == Op::Const) {
      ins.value = n.value();
    } else if (n.op() == Op::Var) {
      auto it = std::find(layout.begin(), layout.end(), n.name());
      if (it == layout.end()) throw UnboundVariable("unbound variable '" + n.name() + "'");
      ins.index = static_cast<std::uint32_t>(it - layout.begin());
    }
    int k = arity(n.op());
    depth = depth + 1 - static_cast<std::size_t>(k);
    max_depth_ = std::max(max_depth_, depth);
    code_.push_back(ins);
  };
  emit(e);
}

double Program::operator()(std::span<const double> values) const {
  std::array<double, 64> small{};
  std::vector<double> big;
  double* st = small.data();
  if (max_depth_ > small.size()) {
    big.resize(max_depth_);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Op::Const:
        st[sp++] = ins.value;
        break;
      case Op::Var:
        st[sp++] = values[ins.index];
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow:
        --sp;
        st[sp - 1] = apply_binary(ins.op, st[sp - 1], st[sp]);
        break;
      case Op::Sat:
      case Op::Ind:
        sp -= 2;
        st[sp - 1] = apply_ternary(ins.op, st[sp - 1], st[sp], st[sp + 1]);
        break;
      default:
        st[sp - 1] = apply_unary(ins.op, st[sp - 1]);
        break;
    }
  }
  return st[0];
}

}  // namespace hocp
