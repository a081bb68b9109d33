#include <gtest/gtest.h>

#include <random>

#include "selfgraph/eqlang.hpp"

using namespace selfgraph;

namespace {

Font TestFont() { return LoadFontFile(SELFGRAPH_TEST_FONT); }

Equation Parse(const std::string& text) {
  auto r = ParseEquation(text);
  EXPECT_TRUE(std::holds_alternative<Equation>(r)) << text;
  return std::get<Equation>(r);
}

Value EvalAt(const ExprPtr& e, const Value& x) {
  Env env(nullptr, 'x', MakeValue(x));
  EvalOutcome o = EvalExpr(*e, env, EvalBudget{});
  EXPECT_TRUE(o.is_value()) << o.reason;
  return o.value;
}

ExprPtr RandomExpr(std::mt19937_64& rng, int depth) {
  int pick = depth == 0 ? rng() % 2 : rng() % 8;
  switch (pick) {
    case 0:
      return ex::Var("xyabk"[rng() % 5]);
    case 1:
      return ex::Num(static_cast<long>(rng() % 30));
    case 7:
      return ex::Prod("abk"[rng() % 3], RandomExpr(rng, depth - 1));
    default:
      return ex::Bin(static_cast<BinOp>(rng() % 5), RandomExpr(rng, depth - 1),
                     RandomExpr(rng, depth - 1));
  }
}

}  // namespace

TEST(EqLang, ParseCircle) {
  Equation e = Parse("x^2+y^2=1");
  Equation want{ex::Add(ex::Pow(ex::Var('x'), ex::Num(2)),
                        ex::Pow(ex::Var('y'), ex::Num(2))),
                ex::Num(1)};
  EXPECT_TRUE(StructurallyEqual(e, want));
  EXPECT_EQ(SerializeText(e), "((x^2)+(y^2))=1");
  EXPECT_EQ(SerializeText(*ex::Num(0)), "0");
}

TEST(EqLang, ParseRejects) {
  EXPECT_TRUE(std::holds_alternative<ParseError>(ParseEquation("+=")));
  EXPECT_TRUE(std::holds_alternative<ParseError>(ParseEquation("x=")));
  EXPECT_TRUE(std::holds_alternative<ParseError>(ParseEquation("x=y=1")));
}

TEST(EqLang, RoundTripRandom) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    ExprPtr e = RandomExpr(rng, 6);
    auto back = ParseExpr(Serialize(*e));
    ASSERT_TRUE(std::holds_alternative<ExprPtr>(back)) << SerializeText(*e);
    EXPECT_TRUE(StructurallyEqual(*std::get<ExprPtr>(back), *e))
        << SerializeText(*e);
  }
}

TEST(EqLang, ProductShape) {
  ExprPtr p = ex::Prod('n', ex::Pow(ex::Num(1), ex::Var('n')));
  EXPECT_EQ(SerializeText(Equation{p, ex::Num(1)}), "Π_(n=0)^∞(1^n)=1");
}

TEST(EqLang, Identities) {
  EXPECT_EQ(EvalAt(ex::Pow(ex::Num(0), ex::Num(0)), 0), 1);
  ExprPtr abs = ex::Pow(ex::Pow(ex::Var('x'), ex::Num(2)),
                        ex::Div(ex::Num(1), ex::Num(2)));
  EXPECT_EQ(EvalAt(abs, -3), 3);

  auto all_one = std::make_shared<WitnessHint>(WitnessHint{
      "all-one", [](const Env&) { return HintResult::Candidates({}, true); }});
  ExprPtr p = ex::Prod('n', ex::Pow(ex::Num(1), ex::Var('n')), all_one);
  EXPECT_EQ(EvalAt(p, 0), 1);

  // without a certificate the truncation is not trusted
  ExprPtr bare = ex::Prod('n', ex::Pow(ex::Num(1), ex::Var('n')));
  Env env;
  EXPECT_FALSE(EvalExpr(*bare, env, EvalBudget{}).is_value());
}

TEST(EqLang, UndefinedValues) {
  Env env;
  auto div0 = EvalExpr(*ex::Div(ex::Num(1), ex::Num(0)), env, EvalBudget{});
  EXPECT_EQ(div0.status, EvalOutcome::Status::kUndefined);
  auto sq = EvalExpr(*ex::Pow(ex::Sub(ex::Num(0), ex::Num(1)),
                              ex::Div(ex::Num(1), ex::Num(2))),
                     env, EvalBudget{});
  EXPECT_EQ(sq.status, EvalOutcome::Status::kUndefined);
}

TEST(EqLang, Membership) {
  Equation circle = Parse("x^2+y^2=1");
  EXPECT_EQ(GraphMembership(circle, {1, 0}, EvalBudget{}).membership,
            Membership::kIn);
  EXPECT_EQ(GraphMembership(circle, {0, 0}, EvalBudget{}).membership,
            Membership::kOut);

  Equation empty = Parse("x^2=0-1");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    mpq_class x(static_cast<long>(rng() % 401) - 200, 1 + rng() % 50);
    mpq_class y(static_cast<long>(rng() % 401) - 200, 1 + rng() % 50);
    x.canonicalize();
    y.canonicalize();
    EXPECT_EQ(GraphMembership(empty, {x, y}, EvalBudget{}).membership,
              Membership::kOut);
  }
}

TEST(EqLang, GraphInvalidRendersMessage) {
  Font f = TestFont();
  GraphResult g = Gr(ParseSymbols("+="), Window{0, 0, 24, 1}, f, EvalBudget{});
  EXPECT_FALSE(g.valid);
  EXPECT_GT(g.bitmap.count(), 0u);
  EXPECT_EQ(g.bitmap, Rasterize(GlyphOfString(InvalidEquationMessage(), f),
                                Window{0, 0, 24, 1}));

  // free variables other than x, y also make a string invalid
  GraphResult h = Gr(ParseSymbols("z=1"), Window{0, 0, 1, 1}, f, EvalBudget{});
  EXPECT_FALSE(h.valid);
}

TEST(EqLang, GraphEmptyAndCircle) {
  Font f = TestFont();
  GraphResult e = Gr(ParseSymbols("x^2=0-1"), Window{-2, -2, 2, 2}, f,
                     EvalBudget{});
  EXPECT_TRUE(e.valid);
  EXPECT_EQ(e.bitmap.count(), 0u);

  // center oracle: pixel (i, j) has center ((2i+1)/16, (2j+1)/16)
  GraphResult c = Gr(ParseSymbols("x^2+y^2=50/256"), Window{-2, -2, 2, 2}, f,
                     EvalBudget{});
  EXPECT_TRUE(c.heuristic);
  EXPECT_EQ(c.unknown.count(), 0u);
  std::size_t lit = 0;
  for (std::int64_t j = -16; j < 16; ++j) {
    for (std::int64_t i = -16; i < 16; ++i) {
      bool on = (2 * i + 1) * (2 * i + 1) + (2 * j + 1) * (2 * j + 1) == 50;
      EXPECT_EQ(c.bitmap.get(i, j), on) << i << "," << j;
      lit += on;
    }
  }
  EXPECT_EQ(lit, 12u);
}
