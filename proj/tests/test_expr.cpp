#include "hocp/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace hocp;

namespace {

const VarSet xu{"x", "u"};

Expr var(const char* n) { return Expr::variable(n); }

// Random raw trees over x and y; every node kind appears.
Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 15 : 2);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  auto sub = [&] { return random_tree(rng, depth - 1); };
  switch (pick(rng)) {
    case 0:
      return Expr::constant(std::round(val(rng) * 100.0) / 100.0);
    case 1:
      return var("x");
    case 2:
      return var("y");
    case 3:
      return Expr::make(Op::Neg, {sub()});
    case 4:
      return Expr::make(Op::Sin, {sub()});
    case 5:
      return Expr::make(Op::Cos, {sub()});
    case 6:
      return Expr::make(Op::Exp, {sub()});
    case 7:
      return Expr::make(Op::Log, {sub()});
    case 8:
      return Expr::make(Op::Sqrt, {sub()});
    case 9:
      return Expr::make(Op::Abs, {sub()});
    case 10:
      return Expr::make(Op::Add, {sub(), sub()});
    case 11:
      return Expr::make(Op::Sub, {sub(), sub()});
    case 12:
      return Expr::make(Op::Mul, {sub(), sub()});
    case 13:
      return Expr::make(Op::Div, {sub(), sub()});
    case 14:
      return Expr::make(Op::Pow, {sub(), sub()});
    default:
      return Expr::make(Op::Sat, {sub(), Expr::constant(-1.0), Expr::constant(1.0)});
  }
}

// Smooth random expressions that stay in their domain near the sample box.
Expr random_smooth(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 2);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  auto sub = [&] { return random_smooth(rng, depth - 1); };
  const Expr one = Expr::constant(1.0);
  switch (pick(rng)) {
    case 0:
      return Expr::constant(val(rng));
    case 1:
      return var("x");
    case 2:
      return var("y");
    case 3:
      return sin(sub());
    case 4:
      return exp(Expr::constant(0.3) * sub());
    case 5:
      return log(one + pow(sub(), Expr::constant(2.0)));
    case 6:
      return sub() * sub();
    case 7:
      return sub() / (one + pow(sub(), Expr::constant(2.0)));
    case 8:
      return sqrt(one + pow(sub(), Expr::constant(2.0)));
    default:
      return sub() - cos(sub());
  }
}

}  // namespace

TEST(Parse, VectorFieldOfFirstLocation) {
  const Expr e = parse("x + x*u", xu);
  EXPECT_EQ(e, Expr::make(Op::Add, {var("x"), Expr::make(Op::Mul, {var("x"), var("u")})}));
}

TEST(Parse, Constant) {
  const Expr e = parse("0", {});
  EXPECT_TRUE(e.is_constant(0.0));
}

TEST(Parse, SyntaxErrorReportsOffset) {
  try {
    parse("x + * u", xu);
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parse, UnknownVariableAndArity) {
  EXPECT_THROW(parse("x + y", xu), ParseError);
  EXPECT_THROW(parse("sat(x, 1)", xu), ParseError);
  EXPECT_THROW(parse("sin(x, u)", xu), ParseError);
  EXPECT_THROW(parse("", xu), ParseError);
  EXPECT_THROW(parse("(x", xu), ParseError);
}

TEST(Parse, Precedence) {
  const Bindings b{{"x", 2.0}, {"u", 3.0}};
  EXPECT_DOUBLE_EQ(eval(parse("-x^2", xu), b), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("x^u^2", xu), b), std::pow(2.0, 9.0));
  EXPECT_DOUBLE_EQ(eval(parse("x - u - 1", xu), b), -2.0);
  EXPECT_DOUBLE_EQ(eval(parse("x / u * 3", xu), b), 2.0);
  EXPECT_DOUBLE_EQ(eval(parse("2*-x", xu), b), -4.0);
}

TEST(Eval, Examples) {
  EXPECT_DOUBLE_EQ(eval(parse("x + x*u", xu), {{"x", 0.5}, {"u", 0.0}}), 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("1/(1+x^2)", xu), {{"x", 0.0}}), 1.0);
  EXPECT_DOUBLE_EQ(eval(parse("sat(y, -1, 1)", {"y"}), {{"y", 3.0}}), 1.0);
}

TEST(Eval, DomainErrorsAreNotSilent) {
  EXPECT_THROW(eval(parse("1/x", xu), {{"x", 0.0}}), DomainError);
  EXPECT_THROW(eval(parse("log(x)", xu), {{"x", 0.0}}), DomainError);
  EXPECT_THROW(eval(parse("log(x)", xu), {{"x", -1.0}}), DomainError);
  EXPECT_THROW(eval(parse("sqrt(x)", xu), {{"x", -1.0}}), DomainError);
  EXPECT_THROW(eval(parse("exp(x)", xu), {{"x", 1e6}}), DomainError);
  EXPECT_THROW(eval(parse("x + u", xu), {{"x", 1.0}}), UnboundVariable);
}

TEST(Differentiate, Polynomial) {
  const Expr d = differentiate(parse("x + x*u", xu), "x");
  EXPECT_EQ(d, parse("1 + u", xu));
}

TEST(Differentiate, SwitchingCostGradient) {
  const Expr d = differentiate(parse("1/(1+x^2)", xu), "x");
  for (double x : {-2.0, -0.3, 0.0, 0.7, 1.0, 5.0}) {
    const double want = -2.0 * x / std::pow(1.0 + x * x, 2);
    EXPECT_NEAR(eval(d, {{"x", x}}), want, 1e-15 * (1.0 + std::fabs(want)));
  }
}

TEST(Differentiate, SaturationOneSided) {
  const Expr d = differentiate(parse("sat(u, -1, 1)", xu), "u");
  EXPECT_EQ(eval(d, {{"u", 0.0}}), 1.0);
  EXPECT_EQ(eval(d, {{"u", 2.0}}), 0.0);
  // right derivative at the kinks
  EXPECT_EQ(eval(d, {{"u", -1.0}}), 1.0);
  EXPECT_EQ(eval(d, {{"u", 1.0}}), 0.0);
  const Expr a = differentiate(parse("abs(u)", xu), "u");
  EXPECT_EQ(eval(a, {{"u", 0.0}}), 1.0);
  EXPECT_EQ(eval(a, {{"u", -0.5}}), -1.0);
}

TEST(Differentiate, FoldsTrivialTerms) {
  EXPECT_TRUE(differentiate(parse("u^2 + 3", xu), "x").is_constant(0.0));
  EXPECT_EQ(differentiate(parse("2*x", xu), "x"), Expr::constant(2.0));
  EXPECT_EQ(differentiate(parse("x", xu), "x"), Expr::constant(1.0));
}

TEST(Differentiate, MatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  int checked = 0;
  while (checked < 1000) {
    const Expr e = random_smooth(rng, 3);
    for (const char* v : {"x", "y"}) {
      const Expr d = differentiate(e, v);
      Bindings b{{"x", pt(rng)}, {"y", pt(rng)}};
      const double h = 1e-6;
      Bindings hi = b, lo = b;
      hi[v] += h;
      lo[v] -= h;
      const double fd = (eval(e, hi) - eval(e, lo)) / (2.0 * h);
      const double ex = eval(d, b);
      EXPECT_LE(std::fabs(ex - fd), 1e-6 * (1.0 + std::fabs(ex))) << to_string(e) << " d/d" << v;
      ++checked;
    }
  }
}

TEST(Print, RoundTripsStructurally) {
  std::mt19937_64 rng(3);
  const VarSet vars{"x", "y"};
  for (int i = 0; i < 2000; ++i) {
    const Expr e = random_tree(rng, 4);
    const std::string s = to_string(e);
    EXPECT_EQ(parse(s, vars), e) << s;
  }
}

TEST(Print, NegativeLiterals) {
  const VarSet vars{"x"};
  for (const char* s : {"-2^x", "(-2)^x", "x - -3", "-(2)", "2^-x", "-x^-2"}) {
    const Expr e = parse(s, vars);
    EXPECT_EQ(parse(to_string(e), vars), e) << s;
  }
}

TEST(Program, AgreesBitwiseWithTreeEvaluation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  const std::vector<std::string> layout{"x", "y"};
  for (int i = 0; i < 500; ++i) {
    const Expr e = random_smooth(rng, 3);
    const Program p(e, layout);
    const double x = pt(rng), y = pt(rng);
    const std::vector<double> vals{x, y};
    EXPECT_EQ(p(vals), eval(e, {{"x", x}, {"y", y}}));
    EXPECT_EQ(p(vals), p(vals));
  }
  EXPECT_THROW(Program(parse("x + z", {"x", "z"}), layout), UnboundVariable);
}

TEST(Substitute, ReplacesVariables) {
  const Expr e = parse("a*x + b", {"a", "b", "x"});
  const Expr s = substitute(e, {{"a", Expr::constant(2.0)}, {"b", var("x")}});
  EXPECT_DOUBLE_EQ(eval(s, {{"x", 3.0}}), 9.0);
  EXPECT_EQ(variables(s), (VarSet{"x"}));
  EXPECT_TRUE(depends_on(s, "x"));
  EXPECT_FALSE(depends_on(s, "a"));
}
