#include <gtest/gtest.h>

#include "selfgraph/logic.hpp"

using namespace selfgraph;
using namespace selfgraph::logic;

namespace {

ExprPtr V(char c) { return ex::Var(c); }
ExprPtr N(long n) { return ex::Num(n); }
ExprPtr Sq(ExprPtr e) { return ex::Pow(e, N(2)); }
ExprPtr ZeroPow(ExprPtr e) { return ex::Pow(N(0), Sq(e)); }

Env Bind(const Env* parent, char v, long n) {
  return Env(parent, v, MakeValue(Value(n)));
}

}  // namespace

TEST(Compile, Atoms) {
  ExprPtr c = Compile(pr::Eq(V('d'), N(50)));
  EXPECT_TRUE(StructurallyEqual(*c, *ex::Sub(V('d'), N(50))));
  EXPECT_EQ(SerializeText(*c), "(d−50)");
}

TEST(Compile, OrIsProduct) {
  ExprPtr e1 = ex::Sub(V('a'), N(1)), e2 = ex::Sub(V('b'), N(2));
  ExprPtr c = Compile(pr::Or(pr::Eq(e1), pr::Eq(e2)));
  EXPECT_TRUE(StructurallyEqual(*c, *ex::Mul(e1, e2)));
}

TEST(Compile, NotAndExists) {
  ExprPtr e = ex::Sub(V('v'), N(3));
  EXPECT_TRUE(StructurallyEqual(*Compile(pr::Not(pr::Eq(e))), *ZeroPow(e)));
  ExprPtr c = Compile(pr::Exists('v', pr::Eq(e)));
  EXPECT_TRUE(StructurallyEqual(
      *c, *ex::Prod('v', ex::Sub(N(1), ZeroPow(e)))));
}

TEST(Compile, DeMorgan) {
  ExprPtr e1 = ex::Sub(V('a'), N(1)), e2 = ex::Sub(V('b'), N(2));
  // And(p, q) = Not(Or(Not p, Not q))
  ExprPtr c = Compile(pr::And(pr::Eq(e1), pr::Eq(e2)));
  EXPECT_TRUE(StructurallyEqual(*c, *ZeroPow(ex::Mul(ZeroPow(e1), ZeroPow(e2)))));
}

TEST(Semantic, Basics) {
  PredBudget b;
  b.quantifier_bound = 10;
  Env env;
  EXPECT_EQ(EvalPred(*pr::Eq(N(0), N(0)), env, b).truth, Truth::kTrue);
  PredPtr ex3 = pr::Exists('v', pr::Eq(ex::Sub(V('v'), N(3))));
  EXPECT_EQ(EvalPred(*ex3, env, b).truth, Truth::kTrue);
  EXPECT_EQ(EvalPred(*pr::Not(ex3), env, b).truth, Truth::kFalse);

  // brute force oracle: no v <= 10 with v = 11, and without a hint the
  // search cannot conclude there is none at all
  PredPtr ex11 = pr::Exists('v', pr::Eq(ex::Sub(V('v'), N(11))));
  EXPECT_EQ(EvalPred(*ex11, env, b).truth, Truth::kUnknown);
  EXPECT_EQ(EvalPred(*pr::ForallBelow('v', N(5), pr::Le(V('v'), N(4))), env, b)
                .truth,
            Truth::kTrue);
}

TEST(Agreement, Examples) {
  PredBudget b;
  Env d50 = Bind(nullptr, 'd', 50);
  auto r = AgreementCheck(pr::Eq(V('d'), N(50)), d50, b);
  EXPECT_TRUE(r.decided);
  EXPECT_TRUE(r.agree);
  EXPECT_EQ(r.semantic.truth, Truth::kTrue);

  // e/100 <= y at e = 0, y = -1
  Env e0 = Bind(nullptr, 'e', 0);
  Env y = Bind(&e0, 'y', -1);
  auto le = AgreementCheck(pr::Le(ex::Div(V('e'), N(100)), V('y')), y, b);
  EXPECT_TRUE(le.decided);
  EXPECT_TRUE(le.agree);
  EXPECT_EQ(le.semantic.truth, Truth::kFalse);
  EXPECT_NE(le.compiled.value, 0);
}

TEST(TextFormat, RoundTrip) {
  std::string t = "(exists v (or (eq [(v−3)]) (not (le [v] [2]))))";
  PredPtr p = ParsePred(t);
  EXPECT_EQ(ToText(*p), t);
  EXPECT_THROW(ParsePred("(exists (eq [v]))"), std::invalid_argument);
}

TEST(Scope, FreshLetters) {
  Scope s;
  s.Reserve("abcde");
  char v = s.Fresh();
  EXPECT_FALSE(std::string("abcdexyn").find(v) != std::string::npos);
  Scope child = s;
  char w = child.Fresh();
  EXPECT_NE(v, w);
  EXPECT_EQ(s.Fresh(), w);  // copies do not share allocations
}
