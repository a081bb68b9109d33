#include "selfgraph/machine.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace selfgraph::machine {
namespace {

std::uint64_t BitLength(const mpz_class& z) {
  return z == 0 ? 0 : mpz_sizeinbase(z.get_mpz_t(), 2);
}

mpz_class Shl(const mpz_class& z, std::uint64_t bits) {
  mpz_class r;
  mpz_mul_2exp(r.get_mpz_t(), z.get_mpz_t(), bits);
  return r;
}

mpz_class Shr(const mpz_class& z, std::uint64_t bits) {
  mpz_class r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), z.get_mpz_t(), bits);
  return r;
}

mpz_class LowBits(const mpz_class& z, std::uint64_t bits) {
  mpz_class r;
  mpz_fdiv_r_2exp(r.get_mpz_t(), z.get_mpz_t(), bits);
  return r;
}

// Programs longer than this are cut after their last non-HALT instruction
// when decoded.
constexpr std::uint64_t kMaxDecodedLength = 65536;

struct Layout {
  std::vector<std::array<mpz_class, 4>> fields;
  mpz_class pool;
  std::uint64_t w = 1;
  std::optional<std::uint64_t> tail_start;
};

Layout MakeLayout(const Program& p) {
  Layout lay;
  std::optional<std::size_t> last_set;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].op == Op::kSet) last_set = i;
  }
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Instr& in = p[i];
    std::array<mpz_class, 4> f{mpz_class(static_cast<int>(in.op)), 0, 0, 0};
    switch (in.op) {
      case Op::kSet: {
        if (in.k < 0) throw std::invalid_argument("negative SET constant");
        f[1] = in.r;
        f[2] = offset;
        lay.pool += Shl(in.k, offset);
        if (last_set && *last_set == i) {
          f[3] = 0;
          lay.tail_start = offset;
        } else {
          std::uint64_t len =
              64 * ((std::max<std::uint64_t>(1, BitLength(in.k)) + 63) / 64);
          f[3] = len;
          offset += len;
        }
        break;
      }
      case Op::kAdd:
      case Op::kMonus:
      case Op::kMul:
      case Op::kDivq:
      case Op::kMod:
        f[1] = in.r;
        f[2] = in.s;
        f[3] = in.t;
        break;
      case Op::kJz:
        f[1] = in.r;
        f[2] = in.label;
        break;
      case Op::kJmp:
        f[1] = in.label;
        break;
      case Op::kHalt:
        break;
    }
    lay.fields.push_back(f);
  }
  lay.w = std::max<std::uint64_t>(1, BitLength(mpz_class(p.size())));
  for (const auto& f : lay.fields) {
    for (const mpz_class& x : f) {
      if (x < 0) throw std::invalid_argument("negative instruction field");
      lay.w = std::max(lay.w, BitLength(x));
    }
  }
  return lay;
}

}  // namespace

const char* OpName(Op op) {
  switch (op) {
    case Op::kHalt: return "HALT";
    case Op::kSet: return "SET";
    case Op::kAdd: return "ADD";
    case Op::kMonus: return "MONUS";
    case Op::kMul: return "MUL";
    case Op::kDivq: return "DIVQ";
    case Op::kMod: return "MOD";
    case Op::kJz: return "JZ";
    case Op::kJmp: return "JMP";
  }
  return "?";
}

Instr Instr::Set(const mpz_class& r, const mpz_class& k) {
  Instr i;
  i.op = Op::kSet;
  i.r = r;
  i.k = k;
  return i;
}

Instr Instr::Alu(Op op, const mpz_class& r, const mpz_class& s,
                 const mpz_class& t) {
  Instr i;
  i.op = op;
  i.r = r;
  i.s = s;
  i.t = t;
  return i;
}

Instr Instr::Jz(const mpz_class& r, const mpz_class& label) {
  Instr i;
  i.op = Op::kJz;
  i.r = r;
  i.label = label;
  return i;
}

Instr Instr::Jmp(const mpz_class& label) {
  Instr i;
  i.op = Op::kJmp;
  i.label = label;
  return i;
}

Instr Instr::Halt() { return Instr{}; }

mpz_class EncodeProgram(const Program& p) {
  if (p.empty()) return EncodeProgram(Program{Instr::Halt()});
  Layout lay = MakeLayout(p);
  const std::uint64_t w = lay.w;
  mpz_class g;
  for (std::size_t i = 0; i < lay.fields.size(); ++i) {
    for (int j = 0; j < 4; ++j) {
      g += Shl(lay.fields[i][j], w * (4 * i + j));
    }
  }
  const std::uint64_t gbits = 4 * w * p.size();
  mpz_class rest = g + Shl(lay.pool, gbits);
  mpz_class m = mpz_class(p.size()) + Shl(rest, w);
  return (Shl(1, w) - 1) + Shl(m, w + 1);
}

CodeParts SplitCode(const mpz_class& n) {
  if (n < 0) throw std::invalid_argument("negative program code");
  CodeParts parts;
  parts.w = mpz_scan0(n.get_mpz_t(), 0);
  mpz_class m = Shr(n, parts.w + 1);
  parts.length = LowBits(m, parts.w);
  mpz_class rest = Shr(m, parts.w);
  // 4wL may exceed anything addressable; then g is all of rest.
  mpz_class gbits = mpz_class(4 * parts.w) * parts.length;
  if (gbits >= BitLength(rest) + 1) {
    parts.g = rest;
    parts.pool = 0;
  } else {
    std::uint64_t gb = gbits.get_ui();
    parts.g = LowBits(rest, gb);
    parts.pool = Shr(rest, gb);
  }
  return parts;
}

std::array<mpz_class, 4> FetchFields(const CodeParts& parts, std::uint64_t i) {
  std::array<mpz_class, 4> f;
  const std::uint64_t w = parts.w;
  mpz_class word = LowBits(Shr(parts.g, 4 * w * i), 4 * w);
  for (int j = 0; j < 4; ++j) {
    f[j] = LowBits(word, w);
    word = Shr(word, w);
  }
  return f;
}

Program DecodeProgram(const mpz_class& n) {
  CodeParts parts = SplitCode(n);
  if (parts.w == 0 || parts.length == 0) return {Instr::Halt()};
  std::uint64_t count;
  bool truncated = false;
  if (parts.length > kMaxDecodedLength) {
    // Instructions past the last nonzero bits of g are all HALT.
    std::uint64_t used = (BitLength(parts.g) + 4 * parts.w - 1) / (4 * parts.w);
    if (parts.length > used) {
      count = used;
      truncated = true;
    } else {
      count = parts.length.get_ui();
    }
  } else {
    count = parts.length.get_ui();
  }
  const std::uint64_t pool_bits = BitLength(parts.pool);
  Program out;
  out.reserve(count + 1);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto f = FetchFields(parts, i);
    if (f[0] > 8) {
      out.push_back(Instr::Halt());
      continue;
    }
    Op op = static_cast<Op>(f[0].get_ui());
    switch (op) {
      case Op::kSet: {
        mpz_class k;
        if (f[2] < pool_bits) {
          k = Shr(parts.pool, f[2].get_ui());
          if (f[3] != 0 && f[3] < BitLength(k)) k = LowBits(k, f[3].get_ui());
        }
        out.push_back(Instr::Set(f[1], k));
        break;
      }
      case Op::kAdd:
      case Op::kMonus:
      case Op::kMul:
      case Op::kDivq:
      case Op::kMod:
        out.push_back(Instr::Alu(op, f[1], f[2], f[3]));
        break;
      case Op::kJz:
        out.push_back(Instr::Jz(f[1], f[2]));
        break;
      case Op::kJmp:
        out.push_back(Instr::Jmp(f[1]));
        break;
      case Op::kHalt:
        out.push_back(Instr::Halt());
        break;
    }
  }
  if (truncated) out.push_back(Instr::Halt());
  return out;
}

mpz_class RegisterBound(const Program& p) {
  mpz_class bound = 1;
  for (const Instr& in : p) {
    switch (in.op) {
      case Op::kSet:
      case Op::kJz:
        bound = std::max(bound, mpz_class(in.r + 1));
        break;
      case Op::kAdd:
      case Op::kMonus:
      case Op::kMul:
      case Op::kDivq:
      case Op::kMod:
        bound = std::max({bound, mpz_class(in.r + 1), mpz_class(in.s + 1),
                          mpz_class(in.t + 1)});
        break;
      default:
        break;
    }
  }
  return bound;
}

std::optional<std::uint64_t> TailBitOffset(const Program& p) {
  Layout lay = MakeLayout(p);
  if (!lay.tail_start) return std::nullopt;
  const std::uint64_t w = lay.w;
  return (w + 1) + w + 4 * w * p.size() + *lay.tail_start;
}

// ---------------------------------------------------------------------------
// Interpreter

OutOfBudget::OutOfBudget(std::uint64_t steps)
    : std::runtime_error("step budget exhausted after " +
                         std::to_string(steps) + " steps"),
      steps_(steps) {}

Interpreter::Interpreter(const Program& program) {
  std::map<mpz_class, std::size_t> slots;
  auto slot = [&](const mpz_class& r) {
    auto [it, inserted] = slots.emplace(r, slot_index_.size());
    if (inserted) slot_index_.push_back(r);
    return it->second;
  };
  slot_of_zero_ = slot(0);
  const mpz_class len(program.size());
  for (const Instr& in : program) {
    Decoded d{in.op, 0, 0, 0, 0, in.k};
    switch (in.op) {
      case Op::kSet:
        d.r = slot(in.r);
        break;
      case Op::kAdd:
      case Op::kMonus:
      case Op::kMul:
      case Op::kDivq:
      case Op::kMod:
        d.r = slot(in.r);
        d.s = slot(in.s);
        d.t = slot(in.t);
        break;
      case Op::kJz:
        d.r = slot(in.r);
        [[fallthrough]];
      case Op::kJmp:
        d.target = in.label < len ? in.label.get_ui() : program.size();
        break;
      case Op::kHalt:
        break;
    }
    code_.push_back(std::move(d));
  }
}

RunResult Interpreter::Run(const mpz_class& input,
                           std::uint64_t step_budget) const {
  std::vector<mpz_class> regs(slot_index_.size());
  regs[slot_of_zero_] = input;
  std::size_t pc = 0;
  RunResult res;
  const std::size_t len = code_.size();
  while (true) {
    if (pc >= len || code_[pc].op == Op::kHalt) {
      res.halted = true;
      res.output = regs[slot_of_zero_];
      return res;
    }
    if (res.steps >= step_budget) return res;
    ++res.steps;
    Step(regs, pc);
  }
}

void Interpreter::Step(std::vector<mpz_class>& regs, std::size_t& pc) const {
  const Decoded& d = code_[pc];
  switch (d.op) {
    case Op::kSet:
      regs[d.r] = d.k;
      ++pc;
      break;
    case Op::kAdd:
      mpz_add(regs[d.r].get_mpz_t(), regs[d.s].get_mpz_t(),
              regs[d.t].get_mpz_t());
      ++pc;
      break;
    case Op::kMonus:
      if (regs[d.s] > regs[d.t]) {
        mpz_sub(regs[d.r].get_mpz_t(), regs[d.s].get_mpz_t(),
                regs[d.t].get_mpz_t());
      } else {
        regs[d.r] = 0;
      }
      ++pc;
      break;
    case Op::kMul:
      mpz_mul(regs[d.r].get_mpz_t(), regs[d.s].get_mpz_t(),
              regs[d.t].get_mpz_t());
      ++pc;
      break;
    case Op::kDivq:
      if (regs[d.t] == 0) {
        regs[d.r] = 0;
      } else {
        mpz_fdiv_q(regs[d.r].get_mpz_t(), regs[d.s].get_mpz_t(),
                   regs[d.t].get_mpz_t());
      }
      ++pc;
      break;
    case Op::kMod:
      if (regs[d.t] != 0) {
        mpz_fdiv_r(regs[d.r].get_mpz_t(), regs[d.s].get_mpz_t(),
                   regs[d.t].get_mpz_t());
      } else if (d.r != d.s) {
        regs[d.r] = regs[d.s];
      }
      ++pc;
      break;
    case Op::kJz:
      pc = regs[d.r] == 0 ? d.target : pc + 1;
      break;
    case Op::kJmp:
      pc = d.target;
      break;
    case Op::kHalt:
      break;
  }
}

std::vector<Snapshot> Interpreter::Trace(const mpz_class& input,
                                         std::uint64_t max_steps,
                                         std::uint64_t register_bound) const {
  // Replays step by step with Run's semantics, recording every snapshot.
  std::vector<std::optional<std::size_t>> slot_of(register_bound);
  for (std::size_t s = 0; s < slot_index_.size(); ++s) {
    if (slot_index_[s] < register_bound) slot_of[slot_index_[s].get_ui()] = s;
  }
  std::vector<Snapshot> out;
  std::vector<mpz_class> regs(slot_index_.size());
  regs[slot_of_zero_] = input;
  std::size_t pc = 0;
  auto record = [&] {
    Snapshot s;
    s.pc = pc;
    s.regs.resize(register_bound);
    for (std::uint64_t r = 0; r < register_bound; ++r) {
      if (slot_of[r]) s.regs[r] = regs[*slot_of[r]];
    }
    out.push_back(std::move(s));
  };
  record();
  for (std::uint64_t step = 0; step < max_steps; ++step) {
    if (pc >= code_.size() || code_[pc].op == Op::kHalt) break;
    Step(regs, pc);
    record();
  }
  return out;
}

RunResult Run(const Program& p, const mpz_class& input,
              std::uint64_t step_budget) {
  return Interpreter(p).Run(input, step_budget);
}

RunResult RunIndex(const mpz_class& n, const mpz_class& input,
                   std::uint64_t step_budget) {
  return Run(DecodeProgram(n), input, step_budget);
}

Program ConstProgram(const mpz_class& x) {
  return {Instr::Set(0, x), Instr::Halt()};
}

mpz_class MakeConst(const mpz_class& x) {
  return EncodeProgram(ConstProgram(x));
}

// ---------------------------------------------------------------------------
// Assembly text

std::string ToAssembly(const Program& p) {
  std::ostringstream out;
  for (const Instr& in : p) {
    out << OpName(in.op);
    switch (in.op) {
      case Op::kSet:
        out << ' ' << in.r << ' ' << in.k;
        break;
      case Op::kAdd:
      case Op::kMonus:
      case Op::kMul:
      case Op::kDivq:
      case Op::kMod:
        out << ' ' << in.r << ' ' << in.s << ' ' << in.t;
        break;
      case Op::kJz:
        out << ' ' << in.r << ' ' << in.label;
        break;
      case Op::kJmp:
        out << ' ' << in.label;
        break;
      case Op::kHalt:
        break;
    }
    out << '\n';
  }
  return out.str();
}

Program ParseAssembly(std::string_view text) {
  static const std::map<std::string, std::pair<Op, int>> kOps = {
      {"HALT", {Op::kHalt, 0}}, {"SET", {Op::kSet, 2}},
      {"ADD", {Op::kAdd, 3}},   {"MONUS", {Op::kMonus, 3}},
      {"MUL", {Op::kMul, 3}},   {"DIVQ", {Op::kDivq, 3}},
      {"MOD", {Op::kMod, 3}},   {"JZ", {Op::kJz, 2}},
      {"JMP", {Op::kJmp, 1}}};
  Program p;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    auto it = kOps.find(name);
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("assembly line " + std::to_string(lineno) +
                                  ": " + why);
    };
    if (it == kOps.end()) fail("unknown instruction '" + name + "'");
    std::vector<mpz_class> args;
    std::string tok;
    while (ls >> tok) {
      mpz_class v;
      if (tok.empty() || tok[0] == '-' || v.set_str(tok, 10) != 0) {
        fail("bad operand '" + tok + "'");
      }
      args.push_back(v);
    }
    if (static_cast<int>(args.size()) != it->second.second) {
      fail(name + " takes " + std::to_string(it->second.second) + " operands");
    }
    switch (it->second.first) {
      case Op::kHalt: p.push_back(Instr::Halt()); break;
      case Op::kSet: p.push_back(Instr::Set(args[0], args[1])); break;
      case Op::kJz: p.push_back(Instr::Jz(args[0], args[1])); break;
      case Op::kJmp: p.push_back(Instr::Jmp(args[0])); break;
      default:
        p.push_back(Instr::Alu(it->second.first, args[0], args[1], args[2]));
    }
  }
  if (p.empty()) throw std::invalid_argument("empty program");
  return p;
}

}  // namespace selfgraph::machine
