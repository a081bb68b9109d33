#include <gtest/gtest.h>

#include <random>

#include "selfgraph/arith.hpp"
#include "selfgraph/codec.hpp"

using namespace selfgraph;
using namespace selfgraph::machine;
namespace ar = selfgraph::arith;
using logic::Truth;

namespace {

Font TestFont() { return LoadFontFile(SELFGRAPH_TEST_FONT); }

ValuePtr Val(const mpq_class& v) { return MakeValue(v); }

struct Bindings {
  std::vector<std::unique_ptr<Env>> chain;
  Bindings& Set(char v, const mpq_class& x) {
    const Env* parent = chain.empty() ? nullptr : chain.back().get();
    chain.push_back(std::make_unique<Env>(parent, v, Val(x)));
    return *this;
  }
  const Env& env() const { return *chain.back(); }
};

Truth Eval(const logic::PredPtr& p, const Bindings& b,
           logic::PredBudget budget = {}) {
  return logic::EvalPred(*p, b.env(), budget).truth;
}

mpq_class Q(long num, long den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

TEST(Beta, BruteForceCode) {
  std::vector<mpz_class> seq{3, 1, 4};
  // smallest (k2, k1) by search
  mpz_class k1, k2;
  bool found = false;
  for (long b = 1; b < 200 && !found; ++b) {
    for (long a = 0; a < 200000 && !found; ++a) {
      if (a % (1 + b) == 3 && a % (1 + 2 * b) == 1 && a % (1 + 3 * b) == 4) {
        k1 = a;
        k2 = b;
        found = true;
      }
    }
  }
  ASSERT_TRUE(found);
  logic::Scope s;
  s.Reserve("kli");
  auto p = ar::BetaPred(s, ex::Var('k'), ex::Var('l'), ex::Var('i'), ex::Var('v'));
  for (long v = 0; v < 8; ++v) {
    Bindings b;
    b.Set('k', k1).Set('l', k2).Set('i', 2).Set('v', v);
    EXPECT_EQ(Eval(p, b), v == 4 ? Truth::kTrue : Truth::kFalse) << v;
  }
  auto [c1, c2] = ar::BetaEncode(seq);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ar::Beta(c1, c2, i), seq[i]);

  auto [z1, z2] = ar::BetaEncode({0});
  for (long v = 0; v < 4; ++v) {
    Bindings b;
    b.Set('k', z1).Set('l', z2).Set('i', 0).Set('v', v);
    EXPECT_EQ(Eval(p, b), v == 0 ? Truth::kTrue : Truth::kFalse);
  }
}

TEST(Beta, ModularOracle) {
  std::mt19937_64 rng(17);
  logic::Scope s;
  s.Reserve("kli");
  auto p = ar::BetaPred(s, ex::Var('k'), ex::Var('l'), ex::Var('i'), ex::Var('v'));
  for (int t = 0; t < 100; ++t) {
    long k1 = rng() % 100000, k2 = rng() % 50, i = rng() % 10;
    long want = k1 % (1 + (i + 1) * k2);
    long v = rng() % 2 ? want : static_cast<long>(rng() % 60);
    Bindings b;
    b.Set('k', k1).Set('l', k2).Set('i', i).Set('v', v);
    EXPECT_EQ(Eval(p, b), v == want ? Truth::kTrue : Truth::kFalse);
  }
}

TEST(Trace, InterpreterOracle) {
  auto ctx = std::make_shared<ar::WitnessContext>();
  logic::Scope s;
  s.Reserve("ab");
  auto tp = ar::TracePred(s, ex::Var('n'), ex::Var('a'), ex::Var('b'), ctx);

  auto check = [&](const Program& prog, long a, long b) {
    Bindings env;
    env.Set('n', EncodeProgram(prog)).Set('a', a).Set('b', b);
    return Eval(tp, env);
  };
  EXPECT_EQ(check({Instr::Halt()}, 0, 0), Truth::kTrue);
  Program set7{Instr::Set(0, 7), Instr::Halt()};
  EXPECT_EQ(check(set7, 1, 7), Truth::kTrue);
  EXPECT_EQ(check(set7, 2, 7), Truth::kFalse);
  EXPECT_EQ(check(set7, 1, 6), Truth::kFalse);
  Program loop{Instr::Set(1, 1), Instr::Jmp(0)};
  for (long a = 0; a <= 20; ++a) {
    for (long b = 0; b <= 2; ++b) EXPECT_EQ(check(loop, a, b), Truth::kFalse);
  }
}

TEST(Trace, ConstructAndReplayAgree) {
  Program p{Instr::Set(1, 3), Instr::Alu(Op::kMul, 0, 1, 1), Instr::Jz(2, 4),
            Instr::Halt(), Instr::Set(0, 1)};
  RunResult r = machine::Run(p, 0, 100);
  ASSERT_TRUE(r.halted);
  for (auto mode : {ar::TraceWitness::kConstruct, ar::TraceWitness::kReplay}) {
    auto ctx = std::make_shared<ar::WitnessContext>(mode);
    logic::Scope s;
    s.Reserve("ab");
    auto tp = ar::TracePred(s, ex::Var('n'), ex::Var('a'), ex::Var('b'), ctx);
    for (long a = 0; a <= 5; ++a) {
      for (long b = 0; b <= 10; ++b) {
        Bindings env;
        env.Set('n', EncodeProgram(p)).Set('a', a).Set('b', b);
        bool want = r.steps == static_cast<std::uint64_t>(a) && r.output == b;
        EXPECT_EQ(Eval(tp, env), want ? Truth::kTrue : Truth::kFalse);
      }
    }
  }
}

TEST(Glyph, PixelPredicate) {
  Font f = TestFont();
  auto ctx = std::make_shared<ar::WitnessContext>();
  logic::Scope s;
  s.Reserve("bcde");
  auto gp = ar::GlyphPixelPred(s, 'b', 'c', 'd', 'e', f, ctx);
  mpz_class plus = codec::Encode({sym::kPlus});
  const PixelSet& glyph = f.glyph(sym::kPlus);
  for (int c = 0; c <= 1; ++c) {
    for (int d = 0; d < 8; ++d) {
      for (int e = 0; e < 8; ++e) {
        Bindings env;
        env.Set('b', plus).Set('c', c).Set('d', d).Set('e', e);
        bool want = c == 0 && glyph.contains({d, e});
        EXPECT_EQ(Eval(gp, env), want ? Truth::kTrue : Truth::kFalse)
            << c << " " << d << " " << e;
      }
    }
  }
  EXPECT_LE(ar::GlyphDisjunctCount(f), 8u * 8u * 47u);
}

TEST(Glyph, SymbolPredicate) {
  auto ctx = std::make_shared<ar::WitnessContext>();
  logic::Scope sc;
  sc.Reserve("bcs");
  auto sp = ar::SymPred(sc, 'b', 'c', 's', ctx);
  SymbolString text = ParseSymbols("x^2=Π∞");
  mpz_class b = codec::Encode(text);
  for (int c = 0; c <= 6; ++c) {
    for (Symbol s : AllSymbols()) {
      Bindings env;
      env.Set('b', b).Set('c', c).Set('s', s.index());
      bool want = c < 6 && text[c] == s;
      EXPECT_EQ(Eval(sp, env), want ? Truth::kTrue : Truth::kFalse);
    }
  }
}

TEST(Pixel, Containment) {
  auto p = ar::PixelContainmentPred('c', 'd', 'e', 100);
  auto at = [&](const mpq_class& x, const mpq_class& y) {
    Bindings env;
    env.Set('c', 0).Set('d', 50).Set('e', 0).Set('x', x).Set('y', y);
    return Eval(p, env);
  };
  EXPECT_EQ(at(Q(505, 1000), Q(5, 1000)), Truth::kTrue);
  EXPECT_EQ(at(Q(499, 1000), Q(5, 1000)), Truth::kFalse);
  EXPECT_EQ(at(Q(50, 100), Q(0, 1)), Truth::kTrue);
  EXPECT_EQ(at(Q(51, 100), Q(1, 100)), Truth::kTrue);
  EXPECT_EQ(at(Q(51, 100), Q(-1, 1000)), Truth::kFalse);
}

TEST(Star, MatchesGlyphs) {
  Font f = TestFont();
  SymbolString text = ParseSymbols("1+x");
  mpz_class n = MakeConst(codec::Encode(text));
  ar::WitnessBounds bounds;
  bounds.max_steps = 1000;
  bounds.max_output = codec::Encode(text);
  bounds.max_column = text.size();
  bounds.max_d = 8;
  bounds.max_e = 8;
  auto ctx = std::make_shared<ar::WitnessContext>(ar::TraceWitness::kConstruct,
                                                  bounds);
  auto star = ar::BuildStar(f, ctx);
  PixelSet gl = GlyphOfString(text, f);
  logic::PredEvaluator ev;
  auto eval = [&](const mpq_class& x, const mpq_class& y) {
    Bindings env;
    env.Set('n', n).Set('x', x).Set('y', y);
    return ev.Eval(*star, env.env()).truth;
  };
  for (long col = 0; col < 24; col += 1) {
    for (long row = 0; row < 8; row += 3) {
      bool want = gl.contains({col, row});
      EXPECT_EQ(eval(Q(2 * col + 1, 16), Q(2 * row + 1, 16)),
                want ? Truth::kTrue : Truth::kFalse)
          << col << "," << row;
    }
  }
  EXPECT_EQ(eval(Q(1, 16), 2), Truth::kFalse);
  EXPECT_EQ(eval(Q(-1, 16), Q(1, 16)), Truth::kFalse);
}

TEST(Template, Numeral) {
  EXPECT_EQ(ToText(ar::Numeral(311)), "311");
  EXPECT_EQ(ToText(ar::Numeral(0)), "0");
}

TEST(Template, SubstitutionAndF) {
  Font f = TestFont();
  auto ctx = std::make_shared<ar::WitnessContext>();
  ar::EquationTemplate t = ar::BuildE(f, ctx);
  EXPECT_LE(t.quantifier_depth, 23);
  for (long n : {0L, 1L, 2L, 311L}) {
    SymbolString s = ar::SubstituteNText(t, n);
    EXPECT_EQ(s, Serialize(ar::SubstituteN(t, n)));
    EXPECT_EQ(codec::Decode(ar::F(t, n)), s);
    auto parsed = ParseGraphable(s);
    ASSERT_TRUE(std::holds_alternative<Equation>(parsed));
    EXPECT_EQ(FreeVariables(std::get<Equation>(parsed)), "xy");
  }
  // the numeral sits between the fixed prefix and suffix
  SymbolString s = ar::SubstituteNText(t, 311);
  SymbolString mid(s.begin() + t.prefix.size(), s.end() - t.suffix.size());
  EXPECT_EQ(ToText(mid), "311");
}

TEST(Template, MachineF) {
  Font f = TestFont();
  auto ctx = std::make_shared<ar::WitnessContext>();
  ar::EquationTemplate t = ar::BuildE(f, ctx);
  Program fp = ar::FProgram(t);
  std::mt19937_64 rng(23);
  std::vector<long> ns{0, 311};
  for (int i = 0; i < 20; ++i) ns.push_back(static_cast<long>(rng() % 1000001));
  for (long n : ns) {
    RunResult r = machine::Run(fp, n, 1'000'000);
    ASSERT_TRUE(r.halted) << n;
    EXPECT_EQ(r.output, ar::F(t, n)) << n;
  }
}

TEST(PixelSet, EquationGraphsExactly) {
  Font f = TestFont();
  SymbolString text = ParseSymbols("a+");
  PixelSet target = GlyphOfString(text, f);
  Equation eq = ar::PixelSetEquation(target);
  Window w{0, 0, 2, 1};
  GraphResult g = GraphEquation(eq, w, 8, EvalBudget{});
  EXPECT_EQ(g.unknown.count(), 0u);
  EXPECT_EQ(ToPbm(g.bitmap), ToPbm(Rasterize(target, w)));
}
