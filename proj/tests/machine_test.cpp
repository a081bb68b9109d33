#include <gtest/gtest.h>

#include <random>

#include "selfgraph/machine.hpp"

using namespace selfgraph;
using namespace selfgraph::machine;

namespace {

// Layout formula written out by hand:
// n = (2^w - 1) + 2^(w+1) (L + 2^w (g + 2^(4wL) p))
mpz_class Pack(unsigned w, unsigned len, const mpz_class& g, const mpz_class& p) {
  auto pow2 = [&](unsigned e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
  };
  return (pow2(w) - 1) + pow2(w + 1) * (len + pow2(w) * (g + pow2(4 * w * len) * p));
}

Program RandomProgram(std::mt19937_64& rng, std::size_t len) {
  Program p;
  for (std::size_t i = 0; i < len; ++i) {
    auto reg = [&] { return mpz_class(static_cast<unsigned long>(rng() % 6)); };
    switch (rng() % 5) {
      case 0: {
        mpz_class k(static_cast<unsigned long>(rng()));
        if (rng() % 3 == 0) k = k * k * k;
        p.push_back(Instr::Set(reg(), k));
        break;
      }
      case 1:
        p.push_back(Instr::Alu(static_cast<Op>(2 + rng() % 5), reg(), reg(), reg()));
        break;
      case 2:
        p.push_back(Instr::Jz(reg(), static_cast<unsigned long>(rng() % (len + 3))));
        break;
      case 3:
        p.push_back(Instr::Jmp(static_cast<unsigned long>(rng() % (len + 3))));
        break;
      default:
        p.push_back(Instr::Halt());
    }
  }
  return p;
}

}  // namespace

TEST(Encoding, Golden) {
  EXPECT_EQ(EncodeProgram({Instr::Halt()}), Pack(1, 1, 0, 0));
  EXPECT_EQ(EncodeProgram({Instr::Halt()}), 5);
  // SET: op 1 in the first field, pool offset 0, last SET so no length
  Program set7{Instr::Set(0, 7), Instr::Halt()};
  EXPECT_EQ(EncodeProgram(set7), Pack(2, 2, 1, 7));
  EXPECT_EQ(EncodeProgram(set7), 14680115);
}

TEST(Encoding, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    Program p = RandomProgram(rng, rng() % 21);
    if (p.empty()) p.push_back(Instr::Halt());
    EXPECT_EQ(DecodeProgram(EncodeProgram(p)), p) << ToAssembly(p);
  }
}

TEST(Encoding, ZeroIsHalt) {
  Program p = DecodeProgram(0);
  EXPECT_EQ(p, Program{Instr::Halt()});
  for (int m = 0; m < 10; ++m) {
    RunResult r = RunIndex(0, m, 10);
    EXPECT_TRUE(r.halted);
    EXPECT_EQ(r.output, m);
    EXPECT_EQ(r.steps, 0u);
  }
}

TEST(Encoding, AnyNumberDecodes) {
  for (int n = 0; n < 5000; ++n) {
    Program p = DecodeProgram(n);
    EXPECT_FALSE(p.empty());
    // every index is a program; runs are bounded by the budget
    RunIndex(n, 1, 50);
  }
}

TEST(Interpreter, Steps) {
  RunResult h = RunIndex(EncodeProgram({Instr::Halt()}), 5, 100);
  EXPECT_TRUE(h.halted);
  EXPECT_EQ(h.output, 5);
  EXPECT_EQ(h.steps, 0u);

  RunResult s = RunIndex(EncodeProgram({Instr::Set(0, 7), Instr::Halt()}), 0, 100);
  EXPECT_TRUE(s.halted);
  EXPECT_EQ(s.output, 7);
  EXPECT_EQ(s.steps, 1u);

  RunResult loop = machine::Run({Instr::Jmp(0)}, 0, 10000);
  EXPECT_FALSE(loop.halted);
  EXPECT_EQ(loop.steps, 10000u);
}

TEST(Interpreter, Arithmetic) {
  // r0 = (in + 3) * 4 monus 5, then r1 = r0 / 0 and r2 = r0 mod 0
  Program p = ParseAssembly(R"(
    SET 1 3
    ADD 0 0 1
    SET 1 4
    MUL 0 0 1
    SET 1 5
    MONUS 0 0 1
    SET 3 0
    DIVQ 1 0 3
    MOD 2 0 3
    ADD 0 0 1
    ADD 0 0 2
    HALT
  )");
  RunResult r = machine::Run(p, 2, 100);
  ASSERT_TRUE(r.halted);
  EXPECT_EQ(r.output, 15 + 0 + 15);
  RunResult m = machine::Run(ParseAssembly("SET 1 9\nMONUS 0 0 1\nHALT"), 4, 10);
  EXPECT_EQ(m.output, 0);
}

TEST(Interpreter, JumpsPastEndHalt) {
  RunResult r = machine::Run(ParseAssembly("SET 0 1\nJZ 1 99\nSET 0 2"), 0, 10);
  EXPECT_TRUE(r.halted);
  EXPECT_EQ(r.output, 1);
}

TEST(Assembly, RoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    Program p = RandomProgram(rng, 1 + rng() % 10);
    EXPECT_EQ(ParseAssembly(ToAssembly(p)), p);
  }
  EXPECT_THROW(ParseAssembly("FROB 1 2"), std::exception);
}

TEST(MakeConst, IgnoresInput) {
  EXPECT_EQ(RunIndex(MakeConst(42), 0, 1000).output, 42);
  EXPECT_EQ(RunIndex(MakeConst(42), 999, 1000).output, 42);
  EXPECT_EQ(RunIndex(MakeConst(0), 0, 1000).output, 0);
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), 10, 300);
  EXPECT_EQ(RunIndex(MakeConst(big), 7, 1000).output, big);
}

TEST(Universal, MatchesInterpreter) {
  Program u = UniversalProgram();
  std::mt19937_64 rng(13);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    Program p = RandomProgram(rng, 1 + rng() % 6);
    mpz_class in = static_cast<unsigned long>(rng() % 20);
    RunResult direct = machine::Run(p, in, 200);
    if (!direct.halted) continue;
    // code in r0, input in r1
    Asm a;
    a.Set(1, in);
    a.Set(0, EncodeProgram(p));
    auto done = a.NewLabel();
    a.Inline(u, 0, done);
    a.Bind(done);
    a.Halt();
    RunResult via = machine::Run(a.Finish(), 0, 50'000'000);
    ASSERT_TRUE(via.halted);
    EXPECT_EQ(via.output, direct.output) << ToAssembly(p);
    ++compared;
  }
  EXPECT_GT(compared, 20);
}

TEST(FixedPoint, ConstantTransformer) {
  // g ignores n and returns the index of make_const(42)
  Program g = ConstProgram(MakeConst(42));
  FixedPoint fp = MakeFixedPoint(g);
  EXPECT_EQ(DecodeProgram(fp.index), fp.program);
  RunResult lhs = RunIndex(fp.index, 0, 10'000'000);
  ASSERT_TRUE(lhs.halted);
  EXPECT_EQ(lhs.output, 42);
  EXPECT_EQ(RunIndex(MakeConst(42), 0, 1000).output, lhs.output);
}
