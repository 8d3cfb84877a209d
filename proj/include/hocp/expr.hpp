#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hocp {

/// Node kinds of the scalar expression language.
///
/// `Sgn` and `Ind` only arise from differentiating `abs` and `sat`; they are
/// still ordinary, parseable functions so printed derivatives round-trip.
///   sgn(e)          = 1 if e >= 0 else -1
///   ind(e, lo, hi)  = 1 if lo <= e < hi else 0
enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Sgn,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sat,
  Ind,
};

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ExprError {
 public:
  ParseError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Numeric domain violation during evaluation (division by zero, log of a
/// nonpositive number, non-finite result, ...).
class DomainError : public ExprError {
 public:
  using ExprError::ExprError;
};

class UnboundVariable : public ExprError {
 public:
  using ExprError::ExprError;
};

/// Immutable scalar expression tree. Copies share structure.
class Expr {
 public:
  Expr();  // constant 0

  static Expr constant(double value);
  static Expr variable(std::string name);
  /// Raw node construction without folding (the parser uses this).
  static Expr make(Op op, std::vector<Expr> args);

  Op op() const;
  double value() const;
  const std::string& name() const;
  std::span<const Expr> args() const;

  bool is_constant() const { return op() == Op::Const; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Folding constructors. Used by differentiation and model builders:
// 0*e -> 0, 1*e -> e, e+0 -> e, constant subtrees collapse.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);
Expr abs(const Expr& e);
Expr sgn(const Expr& e);
Expr sat(const Expr& e, const Expr& lo, const Expr& hi);
Expr ind(const Expr& e, const Expr& lo, const Expr& hi);

using VarSet = std::set<std::string, std::less<>>;
using Bindings = std::map<std::string, double, std::less<>>;

/// Parses infix source. Precedence: ^ (right assoc) > unary minus > * / > + -.
/// Every identifier not followed by '(' must be in `declared`.
Expr parse(std::string_view source, const VarSet& declared);

/// Tree evaluation. Throws UnboundVariable or DomainError.
double eval(const Expr& e, const Bindings& bindings);

/// Exact symbolic derivative with constant folding. abs and sat use the
/// right derivative with respect to their argument at the kinks.
Expr differentiate(const Expr& e, std::string_view var);

/// Infix rendering that parses back to a structurally identical tree.
std::string to_string(const Expr& e);

bool depends_on(const Expr& e, std::string_view var);
VarSet variables(const Expr& e);
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

/// Flat postfix form of an expression bound to a fixed variable layout.
/// Evaluation is allocation free for stack depths up to 64.
class Program {
 public:
  Program() = default;
  Program(const Expr& e, std::span<const std::string> layout);

  double operator()(std::span<const double> values) const;
  bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }

 private:
  struct Instr {
    Op op;
    std::uint32_t index;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace hocp
