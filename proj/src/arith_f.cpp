#include "arith_internal.hpp"

namespace selfgraph::arith {

// Register 0 holds n on entry and f(n) on exit.
machine::Program FProgram(const EquationTemplate& t) {
  using machine::Asm;
  enum : Asm::Reg {
    kN = 0, kZero, kOne, kTwo, kTen, kBase, kDigitOffset, kAcc, kPlace, kDigit,
    kSufLen, kSufPlace, kCode, kTmpB, kTmpE, kTmpBit
  };
  Asm a;
  const Asm::Consts c{kZero, kOne, kTwo};
  a.Monus(kZero, kZero, kZero);
  a.Set(kOne, 1);
  a.Add(kTwo, kOne, kOne);
  a.Set(kTen, 10);
  a.Set(kBase, 47);
  a.Set(kDigitOffset, 27);  // digit d has code value d + 27
  a.Monus(kAcc, kAcc, kAcc);
  a.Copy(kPlace, kOne, c);

  // Numeral code, least significant digit first.
  Asm::Label loop = a.NewLabel(), done = a.NewLabel();
  a.Bind(loop);
  a.Mod(kDigit, kN, kTen);
  a.Divq(kN, kN, kTen);
  a.Add(kDigit, kDigit, kDigitOffset);
  a.Mul(kDigit, kDigit, kPlace);
  a.Add(kAcc, kAcc, kDigit);
  a.Mul(kPlace, kPlace, kBase);
  a.Jz(kN, done);
  a.Jmp(loop);
  a.Bind(done);

  // (prefix * 47^|digits| + digits) * 47^|suffix| + suffix
  a.Set(kSufLen, mpz_class(static_cast<unsigned long>(t.suffix.size())));
  a.Pow(kSufPlace, kBase, kSufLen, kTmpB, kTmpE, kTmpBit, c);
  a.Set(kCode, t.prefix_code);
  a.Mul(kCode, kCode, kPlace);
  a.Add(kCode, kCode, kAcc);
  a.Mul(kCode, kCode, kSufPlace);
  a.Set(kTmpB, t.suffix_code);
  a.Add(kN, kCode, kTmpB);
  a.Halt();
  return a.Finish();
}

}  // namespace selfgraph::arith
