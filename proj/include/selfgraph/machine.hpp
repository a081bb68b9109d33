#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfgraph::machine {

enum class Op : std::uint8_t {
  kHalt = 0,
  kSet = 1,
  kAdd = 2,
  kMonus = 3,
  kMul = 4,
  kDivq = 5,  // x / 0 = 0
  kMod = 6,   // x mod 0 = x
  kJz = 7,
  kJmp = 8,
};

const char* OpName(Op op);

struct Instr {
  Op op = Op::kHalt;
  mpz_class r;      // SET, ALU destination; JZ tested register
  mpz_class s, t;   // ALU sources
  mpz_class k;      // SET constant
  mpz_class label;  // JZ, JMP target

  static Instr Set(const mpz_class& r, const mpz_class& k);
  static Instr Alu(Op op, const mpz_class& r, const mpz_class& s,
                   const mpz_class& t);
  static Instr Jz(const mpz_class& r, const mpz_class& label);
  static Instr Jmp(const mpz_class& label);
  static Instr Halt();

  friend bool operator==(const Instr&, const Instr&) = default;
};

using Program = std::vector<Instr>;

// Code layout, w = field width:
//   n = (2^w - 1) + 2^(w+1) * (L + 2^w * (g + 2^(4wL) * p))
// g packs the fields (op, A, B, C) of instruction i at bit w*(4i+j); p is the
// constant pool. See the README for the field table.
mpz_class EncodeProgram(const Program& p);
Program DecodeProgram(const mpz_class& n);

// Raw layout pieces of a code (any n decomposes uniquely).
struct CodeParts {
  std::uint64_t w = 0;
  mpz_class length;  // L
  mpz_class g;
  mpz_class pool;
};
CodeParts SplitCode(const mpz_class& n);

// Field (op, A, B, C) of instruction i under the code's layout.
std::array<mpz_class, 4> FetchFields(const CodeParts& parts, std::uint64_t i);

// 1 + the largest register index any instruction names (at least 1).
mpz_class RegisterBound(const Program& p);

// Bit offset, within n, of the last SET constant (the pool tail). Empty when
// the program has no SET.
std::optional<std::uint64_t> TailBitOffset(const Program& p);

struct Snapshot {
  std::uint64_t pc = 0;
  std::vector<mpz_class> regs;  // registers 0..R-1
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct RunResult {
  bool halted = false;
  mpz_class output;
  std::uint64_t steps = 0;
};

class OutOfBudget : public std::runtime_error {
 public:
  explicit OutOfBudget(std::uint64_t steps);
  std::uint64_t steps() const { return steps_; }

 private:
  std::uint64_t steps_;
};

// Deterministic interpreter over a decoded program. Registers are unbounded;
// unset registers read 0. steps counts executed non-HALT instructions.
class Interpreter {
 public:
  explicit Interpreter(const Program& program);

  RunResult Run(const mpz_class& input, std::uint64_t step_budget) const;

  // Snapshots C_0..C_a' with a' = min(a, halting step), registers 0..R-1.
  std::vector<Snapshot> Trace(const mpz_class& input, std::uint64_t max_steps,
                              std::uint64_t register_bound) const;

  std::size_t length() const { return code_.size(); }

 private:
  struct Decoded {
    Op op;
    std::size_t r, s, t;  // dense register slots
    std::size_t target;   // clamped label
    mpz_class k;
  };
  void Step(std::vector<mpz_class>& regs, std::size_t& pc) const;

  std::vector<Decoded> code_;
  std::vector<mpz_class> slot_index_;  // slot -> register number
  std::size_t slot_of_zero_ = 0;
};

RunResult Run(const Program& p, const mpz_class& input,
              std::uint64_t step_budget);
RunResult RunIndex(const mpz_class& n, const mpz_class& input,
                   std::uint64_t step_budget);

// Index of a program that ignores its input and outputs X.
mpz_class MakeConst(const mpz_class& x);
Program ConstProgram(const mpz_class& x);

// Assembly text, one instruction per line:
//   SET r k | ADD r s t | MONUS r s t | MUL r s t | DIVQ r s t | MOD r s t |
//   JZ r label | JMP label | HALT       ('#' starts a comment)
std::string ToAssembly(const Program& p);
Program ParseAssembly(std::string_view text);

// ---------------------------------------------------------------------------
// Assembler with labels, used to write the universal interpreter, f and the
// fixed-point template.

class Asm {
 public:
  using Reg = std::uint64_t;
  struct Label {
    std::size_t id;
  };

  Label NewLabel();
  void Bind(Label l);

  void Set(Reg r, const mpz_class& k);
  void Alu(Op op, Reg r, Reg s, Reg t);
  void Add(Reg r, Reg s, Reg t) { Alu(Op::kAdd, r, s, t); }
  void Monus(Reg r, Reg s, Reg t) { Alu(Op::kMonus, r, s, t); }
  void Mul(Reg r, Reg s, Reg t) { Alu(Op::kMul, r, s, t); }
  void Divq(Reg r, Reg s, Reg t) { Alu(Op::kDivq, r, s, t); }
  void Mod(Reg r, Reg s, Reg t) { Alu(Op::kMod, r, s, t); }
  void Jz(Reg r, Label l);
  void Jmp(Label l);
  void Halt();

  // Registers holding 0, 1 and 2 for the macros below.
  struct Consts {
    Reg zero, one, two;
  };
  // Macros; tmp registers are clobbered.
  void Copy(Reg dst, Reg src, const Consts& c);
  // dst = base^exp by binary exponentiation.
  void Pow(Reg dst, Reg base, Reg exp, Reg tmp_b, Reg tmp_e, Reg tmp_bit,
           const Consts& c);
  // Jump when a < b.
  void JumpIfLess(Reg a, Reg b, Label l, Reg tmp);
  // Jump when a >= b.
  void JumpIfGreaterEq(Reg a, Reg b, Label l, Reg tmp);

  // Appends p with registers shifted by `base`; its HALTs and out-of-range
  // labels jump to `exit`.
  void Inline(const Program& p, Reg base, Label exit);

  std::size_t size() const { return code_.size(); }
  Program Finish() const;

 private:
  struct Pending {
    Instr instr;
    std::optional<std::size_t> label;  // unresolved label id
  };
  std::vector<Pending> code_;
  std::vector<std::optional<std::size_t>> bound_;
};

// Universal interpreter: with a program code in `j` and an input in `in`,
// leaves phi_j(in) in `out`. Uses registers [base, base + kUniversalRegs);
// register `base` holds 0 afterwards.
inline constexpr std::uint64_t kUniversalRegs = 48;
void EmitUniversal(Asm& a, Asm::Reg j, Asm::Reg in, Asm::Reg out,
                   Asm::Reg base);
// Stand-alone form: code in register 0, input in register 1, result in 0.
Program UniversalProgram();

// Constructive recursion theorem. For a program G computing an index
// transformer g, returns n* with phi_{n*}(0) = phi_{g(n*)}(0): the program
// of n* rebuilds its own index, applies G, and runs the result.
struct FixedPoint {
  mpz_class index;        // n*
  Program program;        // decode(n*)
  mpz_class base_code;    // D: the code with an empty tail
  std::uint64_t tail_offset = 0;  // E: n* = D + 2^E * D
};
FixedPoint MakeFixedPoint(const Program& g);

// Registers the fixed-point template reserves below the inlined G.
inline constexpr std::uint64_t kFixedPointGBase = 100;

}  // namespace selfgraph::machine
