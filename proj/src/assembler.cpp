#include <stdexcept>

#include "selfgraph/machine.hpp"

namespace selfgraph::machine {

Asm::Label Asm::NewLabel() {
  bound_.emplace_back();
  return Label{bound_.size() - 1};
}

void Asm::Bind(Label l) {
  if (bound_.at(l.id)) throw std::logic_error("label bound twice");
  bound_[l.id] = code_.size();
}

void Asm::Set(Reg r, const mpz_class& k) {
  code_.push_back({Instr::Set(r, k), std::nullopt});
}

void Asm::Alu(Op op, Reg r, Reg s, Reg t) {
  code_.push_back({Instr::Alu(op, r, s, t), std::nullopt});
}

void Asm::Jz(Reg r, Label l) { code_.push_back({Instr::Jz(r, 0), l.id}); }

void Asm::Jmp(Label l) { code_.push_back({Instr::Jmp(0), l.id}); }

void Asm::Halt() { code_.push_back({Instr::Halt(), std::nullopt}); }

void Asm::Copy(Reg dst, Reg src, const Consts& c) {
  if (dst != src) Add(dst, src, c.zero);
}

void Asm::Pow(Reg dst, Reg base, Reg exp, Reg tmp_b, Reg tmp_e, Reg tmp_bit,
              const Consts& c) {
  Label loop = NewLabel(), square = NewLabel(), done = NewLabel();
  Copy(tmp_b, base, c);
  Copy(tmp_e, exp, c);
  Copy(dst, c.one, c);
  Bind(loop);
  Jz(tmp_e, done);
  Mod(tmp_bit, tmp_e, c.two);
  Divq(tmp_e, tmp_e, c.two);
  Jz(tmp_bit, square);
  Mul(dst, dst, tmp_b);
  Bind(square);
  Jz(tmp_e, done);
  Mul(tmp_b, tmp_b, tmp_b);
  Jmp(loop);
  Bind(done);
}

void Asm::JumpIfLess(Reg a, Reg b, Label l, Reg tmp) {
  Label skip = NewLabel();
  Monus(tmp, b, a);
  Jz(tmp, skip);
  Jmp(l);
  Bind(skip);
}

void Asm::JumpIfGreaterEq(Reg a, Reg b, Label l, Reg tmp) {
  Monus(tmp, b, a);
  Jz(tmp, l);
}

void Asm::Inline(const Program& p, Reg base, Label exit) {
  std::vector<Label> at;
  for (std::size_t i = 0; i < p.size(); ++i) at.push_back(NewLabel());
  auto target = [&](const mpz_class& label) {
    return label < p.size() ? at[label.get_ui()] : exit;
  };
  auto reg = [&](const mpz_class& r) { return r.get_ui() + base; };
  for (std::size_t i = 0; i < p.size(); ++i) {
    Bind(at[i]);
    const Instr& in = p[i];
    switch (in.op) {
      case Op::kSet:
        Set(reg(in.r), in.k);
        break;
      case Op::kJz:
        Jz(reg(in.r), target(in.label));
        break;
      case Op::kJmp:
        Jmp(target(in.label));
        break;
      case Op::kHalt:
        Jmp(exit);
        break;
      default:
        Alu(in.op, reg(in.r), reg(in.s), reg(in.t));
    }
  }
  // Falling off the end halts.
  Jmp(exit);
}

Program Asm::Finish() const {
  Program out;
  out.reserve(code_.size());
  for (const Pending& p : code_) {
    Instr in = p.instr;
    if (p.label) {
      const auto& b = bound_.at(*p.label);
      if (!b) throw std::logic_error("unbound label");
      in.label = *b;
    }
    out.push_back(in);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Universal interpreter
//
// Decodes j the way DecodeProgram does, keeps the simulated registers packed
// in one number REGS = sum v_r * BASE^r (BASE is squared, and REGS repacked,
// whenever a value would not fit), and steps until the simulated program
// halts.

void EmitUniversal(Asm& a, Asm::Reg j, Asm::Reg in, Asm::Reg out,
                   Asm::Reg base) {
  using R = Asm::Reg;
  R next = base;
  auto reg = [&] { return next++; };
  const R ZERO = reg(), ONE = reg(), TWO = reg(), SIX = reg(), SEVEN = reg();
  const R T = reg(), BIT = reg(), WB = reg(), W = reg(), L = reg();
  const R GW = reg(), GM = reg(), G = reg(), P = reg(), NR = reg();
  const R PC = reg(), F = reg(), OP = reg(), A = reg(), B = reg(), C = reg();
  const R BASE = reg(), REGS = reg(), BR = reg(), X = reg(), Y = reg();
  const R V = reg(), OLD = reg(), TGT = reg(), T2 = reg(), T3 = reg();
  const R NB = reg(), NREGS = reg(), I = reg(), OB = reg(), RB = reg();
  const R PB = reg(), PE = reg(), PT = reg(), FW = reg();
  if (next - base > kUniversalRegs) throw std::logic_error("register overflow");
  const Asm::Consts c{ZERO, ONE, TWO};
  auto pow = [&](R dst, R b, R e) { a.Pow(dst, b, e, PB, PE, PT, c); };

  auto trivial = a.NewLabel(), end = a.NewLabel(), halt = a.NewLabel();

  a.Monus(ZERO, ZERO, ZERO);
  a.Set(ONE, 1);
  a.Add(TWO, ONE, ONE);
  a.Set(SIX, 6);
  a.Add(SEVEN, SIX, ONE);

  // w = number of trailing ones of j.
  {
    auto loop = a.NewLabel(), done = a.NewLabel();
    a.Copy(T, j, c);
    a.Copy(WB, ZERO, c);
    a.Bind(loop);
    a.Mod(BIT, T, TWO);
    a.Jz(BIT, done);
    a.Add(WB, WB, ONE);
    a.Divq(T, T, TWO);
    a.Jmp(loop);
    a.Bind(done);
  }
  a.Jz(WB, trivial);
  pow(W, TWO, WB);
  a.Divq(T, T, TWO);
  a.Mod(L, T, W);
  a.Divq(T, T, W);
  a.Jz(L, trivial);
  a.Mul(GW, W, W);
  a.Mul(GW, GW, GW);
  pow(GM, GW, L);
  a.Mod(G, T, GM);
  a.Divq(P, T, GM);

  // NR = 1 + largest register index named by the program.
  auto raise = [&](R field) {
    auto skip = a.NewLabel();
    a.Add(T2, field, ONE);
    a.Monus(T3, T2, NR);
    a.Jz(T3, skip);
    a.Copy(NR, T2, c);
    a.Bind(skip);
  };
  {
    auto scan = a.NewLabel(), next_instr = a.NewLabel(), done = a.NewLabel();
    auto regs_a = a.NewLabel(), regs_bc = a.NewLabel();
    a.Copy(NR, ONE, c);
    a.Copy(PC, ZERO, c);
    a.Copy(F, G, c);
    a.Bind(scan);
    a.JumpIfGreaterEq(PC, L, done, T2);
    a.Mod(OP, F, W);
    a.Divq(F, F, W);
    a.Mod(A, F, W);
    a.Divq(F, F, W);
    a.Mod(B, F, W);
    a.Divq(F, F, W);
    a.Mod(C, F, W);
    a.Divq(F, F, W);
    a.Jz(OP, next_instr);
    a.Monus(T2, OP, SEVEN);
    a.Jz(T2, regs_a);
    a.Jmp(next_instr);
    a.Bind(regs_a);
    raise(A);
    a.Monus(T2, OP, ONE);
    a.Jz(T2, next_instr);
    a.Monus(T2, OP, SIX);
    a.Jz(T2, regs_bc);
    a.Jmp(next_instr);
    a.Bind(regs_bc);
    raise(B);
    raise(C);
    a.Bind(next_instr);
    a.Add(PC, PC, ONE);
    a.Jmp(scan);
    a.Bind(done);
  }

  // Register file holds the input in register 0.
  {
    auto grow = a.NewLabel(), ready = a.NewLabel();
    a.Copy(BASE, TWO, c);
    a.Bind(grow);
    a.JumpIfLess(in, BASE, ready, T2);
    a.Mul(BASE, BASE, BASE);
    a.Jmp(grow);
    a.Bind(ready);
    a.Copy(REGS, in, c);
    a.Copy(PC, ZERO, c);
  }

  auto step = a.NewLabel(), do_set = a.NewLabel(), do_alu = a.NewLabel();
  auto do_jz = a.NewLabel(), do_jmp = a.NewLabel(), write = a.NewLabel();
  auto jump = a.NewLabel();
  auto read = [&](R dst, R index) {
    pow(BR, BASE, index);
    a.Divq(dst, REGS, BR);
    a.Mod(dst, dst, BASE);
  };

  a.Bind(step);
  a.JumpIfGreaterEq(PC, L, halt, T2);
  pow(FW, GW, PC);
  a.Divq(F, G, FW);
  a.Mod(OP, F, W);
  a.Divq(F, F, W);
  a.Mod(A, F, W);
  a.Divq(F, F, W);
  a.Mod(B, F, W);
  a.Divq(F, F, W);
  a.Mod(C, F, W);
  // Dispatch on op: 0 halt, 1 set, 2..6 alu, 7 jz, 8 jmp, else halt.
  a.Copy(T2, OP, c);
  a.Jz(T2, halt);
  a.Monus(T2, T2, ONE);
  a.Jz(T2, do_set);
  for (int k = 2; k <= 6; ++k) {
    a.Monus(T2, T2, ONE);
    a.Jz(T2, do_alu);
  }
  a.Monus(T2, T2, ONE);
  a.Jz(T2, do_jz);
  a.Monus(T2, T2, ONE);
  a.Jz(T2, do_jmp);
  a.Jmp(halt);

  // SET: V = (P div 2^B) mod 2^C, or the whole tail when C = 0.
  a.Bind(do_set);
  pow(T2, TWO, B);
  a.Divq(V, P, T2);
  a.Jz(C, write);
  pow(T2, TWO, C);
  a.Mod(V, V, T2);
  a.Jmp(write);

  // ALU: the simulated op is carried out by the same native op.
  a.Bind(do_alu);
  read(X, B);
  read(Y, C);
  {
    const Op ops[] = {Op::kAdd, Op::kMonus, Op::kMul, Op::kDivq};
    std::vector<Asm::Label> cases;
    a.Monus(T2, OP, TWO);
    for (int k = 0; k < 4; ++k) {
      if (k > 0) a.Monus(T2, T2, ONE);
      cases.push_back(a.NewLabel());
      a.Jz(T2, cases.back());
    }
    a.Mod(V, X, Y);
    a.Jmp(write);
    for (int k = 0; k < 4; ++k) {
      a.Bind(cases[k]);
      a.Alu(ops[k], V, X, Y);
      a.Jmp(write);
    }
  }

  // Write V into register A, growing BASE first if needed.
  a.Bind(write);
  {
    auto fits = a.NewLabel(), repack = a.NewLabel(), repacked = a.NewLabel();
    a.Bind(repack);
    a.JumpIfLess(V, BASE, fits, T2);
    a.Mul(NB, BASE, BASE);
    a.Copy(NREGS, ZERO, c);
    a.Copy(I, ZERO, c);
    a.Copy(OB, ONE, c);
    a.Copy(RB, ONE, c);
    auto loop = a.NewLabel();
    a.Bind(loop);
    a.JumpIfGreaterEq(I, NR, repacked, T2);
    a.Divq(T2, REGS, OB);
    a.Mod(T2, T2, BASE);
    a.Mul(T2, T2, RB);
    a.Add(NREGS, NREGS, T2);
    a.Mul(OB, OB, BASE);
    a.Mul(RB, RB, NB);
    a.Add(I, I, ONE);
    a.Jmp(loop);
    a.Bind(repacked);
    a.Copy(REGS, NREGS, c);
    a.Copy(BASE, NB, c);
    a.Jmp(repack);
    a.Bind(fits);
    pow(BR, BASE, A);
    a.Divq(OLD, REGS, BR);
    a.Mod(OLD, OLD, BASE);
    a.Mul(T2, OLD, BR);
    a.Monus(REGS, REGS, T2);
    a.Mul(T2, V, BR);
    a.Add(REGS, REGS, T2);
    a.Add(PC, PC, ONE);
    a.Jmp(step);
  }

  a.Bind(do_jz);
  read(X, A);
  {
    auto taken = a.NewLabel();
    a.Jz(X, taken);
    a.Add(PC, PC, ONE);
    a.Jmp(step);
    a.Bind(taken);
    a.Copy(TGT, B, c);
    a.Jmp(jump);
  }

  a.Bind(do_jmp);
  a.Copy(TGT, A, c);
  a.Bind(jump);
  {
    auto ok = a.NewLabel();
    a.JumpIfLess(TGT, L, ok, T2);
    a.Copy(PC, L, c);
    a.Jmp(step);
    a.Bind(ok);
    a.Copy(PC, TGT, c);
    a.Jmp(step);
  }

  a.Bind(halt);
  read(out, ZERO);
  a.Jmp(end);

  a.Bind(trivial);
  a.Copy(out, in, c);

  a.Bind(end);
}

Program UniversalProgram() {
  Asm a;
  EmitUniversal(a, 0, 1, 2, 10);
  a.Add(0, 2, 10);
  a.Halt();
  return a.Finish();
}

// ---------------------------------------------------------------------------
// Fixed point
//
//   JMP load
//   start: IN = r0; SELF = D + D * 2^E; run G on SELF, giving J;
//          r0 = phi_J(IN); HALT
//   load:  SET D <tail>; JMP start
//
// SET D is the last SET, so its constant is the pool tail and sits at bit E
// of the code. With the tail empty the code is D; with tail D it is
// D + 2^E * D, which is exactly what the program computes as SELF.

namespace {

Program FixedPointTemplate(const Program& g, const mpz_class& e,
                           const mpz_class& tail) {
  using R = Asm::Reg;
  const R IN = 1, D = 2, EREG = 3, P2 = 4, SELF = 5, J = 6, OUT = 7;
  const R ZERO = 8, ONE = 9, TWO = 10, T1 = 11, T2 = 12, T3 = 13;
  const R UBASE = 20;
  const R GB = kFixedPointGBase;
  static_assert(UBASE + kUniversalRegs <= kFixedPointGBase);
  const Asm::Consts c{ZERO, ONE, TWO};

  Asm a;
  auto start = a.NewLabel(), load = a.NewLabel(), gdone = a.NewLabel();
  a.Jmp(load);
  a.Bind(start);
  a.Monus(ZERO, ZERO, ZERO);
  a.Set(ONE, 1);
  a.Add(TWO, ONE, ONE);
  a.Copy(IN, 0, c);
  a.Set(EREG, e);
  a.Pow(P2, TWO, EREG, T1, T2, T3, c);
  a.Mul(SELF, D, P2);
  a.Add(SELF, SELF, D);
  a.Copy(GB, SELF, c);
  a.Inline(g, GB, gdone);
  a.Bind(gdone);
  a.Copy(J, GB, c);
  EmitUniversal(a, J, IN, OUT, UBASE);
  a.Copy(0, OUT, c);
  a.Halt();
  a.Bind(load);
  a.Set(D, tail);
  a.Jmp(start);
  return a.Finish();
}

}  // namespace

FixedPoint MakeFixedPoint(const Program& g) {
  Program probe = FixedPointTemplate(g, 0, 0);
  auto e = TailBitOffset(probe);
  if (!e) throw std::logic_error("fixed-point template has no tail");
  Program base = FixedPointTemplate(g, *e, 0);
  if (TailBitOffset(base) != e) {
    throw std::logic_error("tail offset moved when E was filled in");
  }
  FixedPoint fp;
  fp.tail_offset = *e;
  fp.base_code = EncodeProgram(base);
  mpz_class shifted;
  mpz_mul_2exp(shifted.get_mpz_t(), fp.base_code.get_mpz_t(), *e);
  fp.index = fp.base_code + shifted;
  fp.program = FixedPointTemplate(g, *e, fp.base_code);
  if (EncodeProgram(fp.program) != fp.index) {
    throw std::logic_error("fixed-point code does not reproduce itself");
  }
  return fp;
}

}  // namespace selfgraph::machine
