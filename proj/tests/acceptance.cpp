// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [criterion ...]     (default: all of 1..9)

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "selfgraph/arith.hpp"
#include "selfgraph/codec.hpp"
#include "selfgraph/logic.hpp"
#include "selfgraph/selfgraph.hpp"

using namespace selfgraph;
using namespace selfgraph::machine;
namespace ar = selfgraph::arith;
namespace fs = std::filesystem;
using logic::Truth;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fixed(double s) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << s;
  return o.str();
}

Env Bind(const Env* parent, char v, const mpq_class& x) {
  return Env(parent, v, MakeValue(x));
}

// 1. codec bijection over every string of length <= 3 and n < 47^3
Outcome Codec() {
  Outcome out;
  std::vector<SymbolString> level{{}};
  std::uint64_t expect = 0, checked = 0;
  for (int len = 0; len <= 3; ++len) {
    std::vector<SymbolString> next;
    for (const SymbolString& s : level) {
      if (codec::Encode(s) != expect || codec::Decode(expect) != s) {
        out.pass = false;
        out.detail = "position " + std::to_string(expect);
        return out;
      }
      ++expect;
      ++checked;
      if (len < 3) {
        for (Symbol c : AllSymbols()) {
          SymbolString t = s;
          t.push_back(c);
          next.push_back(std::move(t));
        }
      }
    }
    level = std::move(next);
  }
  for (long n = 0; n < 47L * 47 * 47; ++n) {
    SymbolString s = codec::Decode(n);
    if (s.size() > 3 || codec::Encode(s) != n) {
      out.pass = false;
      out.detail = "n = " + std::to_string(n);
      return out;
    }
  }
  out.detail = std::to_string(checked) + " strings";
  return out;
}

// 2. identities and compile shapes
Outcome Identities() {
  Outcome out;
  std::vector<std::string> bad;
  Env none;
  EvalBudget b;
  auto eval = [&](const ExprPtr& e, const Env& env) {
    return EvalExpr(*e, env, b);
  };
  auto zz = eval(ex::Pow(ex::Num(0), ex::Num(0)), none);
  if (!zz.is_value() || zz.value != 1) bad.push_back("0^0");
  Env x = Bind(nullptr, 'x', -3);
  auto abs = eval(ex::Pow(ex::Pow(ex::Var('x'), ex::Num(2)),
                          ex::Div(ex::Num(1), ex::Num(2))),
                  x);
  if (!abs.is_value() || abs.value != 3) bad.push_back("(x^2)^(1/2)");
  auto ones = std::make_shared<WitnessHint>(WitnessHint{
      "all-one", [](const Env&) { return HintResult::Candidates({}, true); }});
  auto prod = eval(ex::Prod('n', ex::Pow(ex::Num(1), ex::Var('n')), ones), none);
  if (!prod.is_value() || prod.value != 1) bad.push_back("product of 1^n");

  ExprPtr e1 = ex::Sub(ex::Var('a'), ex::Num(1));
  ExprPtr e2 = ex::Sub(ex::Var('b'), ex::Num(2));
  auto zero_pow = [](ExprPtr e) {
    return ex::Pow(ex::Num(0), ex::Pow(e, ex::Num(2)));
  };
  namespace pr = logic::pr;
  if (!StructurallyEqual(*logic::Compile(pr::Or(pr::Eq(e1), pr::Eq(e2))),
                         *ex::Mul(e1, e2))) {
    bad.push_back("compile(or)");
  }
  if (!StructurallyEqual(*logic::Compile(pr::Not(pr::Eq(e1))), *zero_pow(e1))) {
    bad.push_back("compile(not)");
  }
  if (!StructurallyEqual(*logic::Compile(pr::Exists('v', pr::Eq(e1))),
                         *ex::Prod('v', ex::Sub(ex::Num(1), zero_pow(e1))))) {
    bad.push_back("compile(exists)");
  }
  out.pass = bad.empty();
  for (const auto& s : bad) out.detail += s + " ";
  if (out.pass) out.detail = "6 identities";
  return out;
}

// 3. random predicates: semantic truth agrees with compiled membership
class PredGen {
 public:
  explicit PredGen(std::uint64_t seed) : rng_(seed) {}

  logic::PredPtr Make(int depth, std::string vars, std::string pool) {
    namespace pr = logic::pr;
    int pick = depth == 0 ? rng_() % 2 : rng_() % 7;
    switch (pick) {
      case 0:
        return pr::Eq(Term(vars, 2), Term(vars, 2));
      case 1:
        return pr::Le(Term(vars, 2), Term(vars, 2));
      case 2:
        return pr::Not(Make(depth - 1, vars, pool));
      case 3:
        return pr::Or(Make(depth - 1, vars, pool), Make(depth - 1, vars, pool));
      case 4:
        return pr::And(Make(depth - 1, vars, pool), Make(depth - 1, vars, pool));
      default: {
        if (pool.empty()) return pr::Not(Make(depth - 1, vars, pool));
        char v = pool.back();
        pool.pop_back();
        logic::PredPtr body = Make(depth - 1, vars + v, pool);
        const bool exists = pick == 5;
        switch (rng_() % 3) {
          case 0:  // bounded with a complete range hint
            if (exists) {
              return logic::pr::Not(logic::pr::ForallBelow(
                  v, ex::Num(21), logic::pr::Not(body)));
            }
            return logic::pr::ForallBelow(v, ex::Num(21), body);
          default:
            return exists ? pr::Exists(v, body) : pr::Forall(v, body);
        }
      }
    }
  }

 private:
  ExprPtr Term(const std::string& vars, int depth) {
    int pick = depth == 0 ? rng_() % 2 : rng_() % 5;
    switch (pick) {
      case 0:
        return ex::Var(vars[rng_() % vars.size()]);
      case 1:
        return ex::Num(static_cast<long>(rng_() % 21));
      case 2:
        return ex::Add(Term(vars, depth - 1), Term(vars, depth - 1));
      case 3:
        return ex::Sub(Term(vars, depth - 1), Term(vars, depth - 1));
      default:
        return ex::Mul(Term(vars, depth - 1), Term(vars, depth - 1));
    }
  }

  std::mt19937_64 rng_;
};

Outcome Agreement() {
  Outcome out;
  PredGen gen(2024);
  logic::PredBudget budget;
  budget.quantifier_bound = 20;
  std::uint64_t decided = 0, points = 0, mismatches = 0;
  std::string first;
  for (int i = 0; i < 200; ++i) {
    logic::PredPtr p = gen.Make(4, "ab", "uvw");
    for (long a = 0; a <= 3; ++a) {
      for (long b = 0; b <= 3; ++b) {
        Env ea = Bind(nullptr, 'a', a);
        Env eb = Bind(&ea, 'b', b);
        auto r = logic::AgreementCheck(p, eb, budget);
        ++points;
        if (!r.decided) continue;
        ++decided;
        if (!r.agree) {
          ++mismatches;
          if (first.empty()) first = r.counterexample;
        }
      }
    }
  }
  out.pass = mismatches == 0 && decided > points / 2;
  out.detail = std::to_string(decided) + "/" + std::to_string(points) +
               " points decided, " + std::to_string(mismatches) + " mismatches";
  if (!first.empty()) out.detail += "; " + first;
  return out;
}

// 4. constant programs ignore their input
Outcome Constants() {
  Outcome out;
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    mpz_class x = static_cast<unsigned long>(rng() % 1'000'001);
    mpz_class n = MakeConst(x);
    for (long m = 0; m <= 10; ++m) {
      RunResult r = RunIndex(n, m, 1000);
      ++checked;
      if (!r.halted || r.output != x) {
        out.pass = false;
        out.detail = "X = " + x.get_str() + ", m = " + std::to_string(m);
        return out;
      }
    }
  }
  out.detail = std::to_string(checked) + " runs";
  return out;
}

// 5. fixed points of three index transformers
Program MakeConstOf(const Program& h) {
  // h leaves its value in r0; then r0 = make_const(r0)
  Asm a;
  auto after = a.NewLabel();
  a.Inline(h, 0, after);
  a.Bind(after);
  a.Set(1, mpz_class(1) << 21);
  a.Mul(0, 0, 1);
  a.Set(1, 51);
  a.Add(0, 0, 1);
  a.Halt();
  return a.Finish();
}

Outcome FixedPoints() {
  Outcome out;
  struct Case {
    std::string name;
    Program g;
    std::function<mpz_class(const mpz_class&)> host;  // g as a function
  };
  std::vector<Case> cases;
  cases.push_back({"constant index", ConstProgram(MakeConst(42)),
                   [](const mpz_class&) { return MakeConst(42); }});
  cases.push_back({"make_const(n mod 1000)",
                   MakeConstOf(ParseAssembly("SET 1 1000\nMOD 0 0 1\nHALT")),
                   [](const mpz_class& n) { return MakeConst(n % 1000); }});
  cases.push_back({"make_const(2n+3)",
                   MakeConstOf(ParseAssembly("ADD 0 0 0\nSET 1 3\nADD 0 0 1\nHALT")),
                   [](const mpz_class& n) { return MakeConst(2 * n + 3); }});
  for (const Case& c : cases) {
    for (long n : {0L, 5L, 123456L}) {
      RunResult r = Run(c.g, n, 1000);
      if (!r.halted || r.output != c.host(n)) {
        out.pass = false;
        out.detail = c.name + ": transformer program disagrees with host";
        return out;
      }
    }
    FixedPoint fp = MakeFixedPoint(c.g);
    RunResult lhs = RunIndex(fp.index, 0, 50'000'000);
    RunResult rhs = RunIndex(c.host(fp.index), 0, 50'000'000);
    if (!lhs.halted || !rhs.halted || lhs.output != rhs.output) {
      out.pass = false;
      out.detail = c.name + ": run(n*,0) != run(g(n*),0)";
      return out;
    }
  }
  out.detail = "3 transformers";
  return out;
}

// 6. trace predicate against the interpreter, every short program
Outcome TraceOracle() {
  Outcome out;
  std::vector<Instr> alphabet;
  for (int r = 0; r < 2; ++r) {
    for (int k : {0, 2}) alphabet.push_back(Instr::Set(r, k));
  }
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) alphabet.push_back(Instr::Alu(Op::kAdd, r, s, t));
    }
  }
  for (int r = 0; r < 2; ++r) {
    for (int l = 0; l < 4; ++l) alphabet.push_back(Instr::Jz(r, l));
  }
  alphabet.push_back(Instr::Halt());

  std::vector<Program> programs;
  std::function<void(Program&)> extend = [&](Program& p) {
    if (!p.empty()) programs.push_back(p);
    if (p.size() == 3) return;
    for (const Instr& in : alphabet) {
      p.push_back(in);
      extend(p);
      p.pop_back();
    }
  };
  Program start;
  extend(start);

  auto ctx = std::make_shared<ar::WitnessContext>();
  logic::Scope scope;
  scope.Reserve("ab");
  auto tp = ar::TracePred(scope, ex::Var('n'), ex::Var('a'), ex::Var('b'), ctx);
  std::uint64_t evals = 0, mismatches = 0, unknown = 0;
  std::string first;
  // spot-check counts carry across programs; the memo does not
  logic::PredEvaluator ev;
  for (const Program& p : programs) {
    const mpz_class n = EncodeProgram(p);
    RunResult r = Run(p, 0, 10);
    std::set<mpz_class> bs{0, 1, 2, 3, r.output};
    ev.ClearMemo();
    Env en = Bind(nullptr, 'n', n);
    for (long a = 0; a <= 10; ++a) {
      Env ea = Bind(&en, 'a', a);
      for (const mpz_class& b : bs) {
        Env eb = Bind(&ea, 'b', b);
        Truth t = ev.Eval(*tp, eb).truth;
        const bool want = r.halted && r.steps == static_cast<std::uint64_t>(a) &&
                          r.output == b;
        ++evals;
        if (t == Truth::kUnknown) {
          ++unknown;
        } else if ((t == Truth::kTrue) != want) {
          ++mismatches;
        } else {
          continue;
        }
        if (first.empty()) {
          first = ToAssembly(p) + "a=" + std::to_string(a) + " b=" + b.get_str();
        }
      }
    }
  }
  out.pass = mismatches == 0 && unknown == 0;
  out.detail = std::to_string(programs.size()) + " programs, " +
               std::to_string(evals) + " evaluations, " +
               std::to_string(mismatches) + " mismatches, " +
               std::to_string(unknown) + " undecided";
  if (!first.empty()) {
    for (char& c : first) c = c == '\n' ? ';' : c;
    out.detail += "; first at " + first;
  }
  return out;
}

// 7. end to end at G=8
Outcome EndToEnd(const fs::path& dir) {
  Outcome out;
  constexpr double kBudgetSeconds = 30 * 60;
  const auto t0 = Clock::now();
  Font font = LoadFontFile(SELFGRAPH_TEST_FONT);
  BuildOutput b = BuildSelfGraphing(font, BuildOptions{});
  const double build_s = Seconds(t0);
  const Certificate& c = b.certificate;
  std::ostringstream size;
  size << "|E| " << b.tmpl.prefix.size() + b.tmpl.suffix.size() - 1
       << ", |sigma| " << b.sigma.size() << ", n* bits "
       << mpz_sizeinbase(c.n.get_mpz_t(), 2) << ", run steps " << c.a
       << ", pixels " << b.sigma.size() * 64;
  if (c.b != ar::F(b.tmpl, c.n) || RunIndex(c.n, 0, 50'000'000).output != c.b) {
    out.pass = false;
    out.detail = "b* != f(n*); " + size.str();
    return out;
  }
  VerifyOptions vo;
  vo.exterior_samples = 100;
  vo.literal_in = 10;
  vo.literal_out = 10;
  vo.fail_fast = true;
  VerifyReport rep = VerifySelfGraphing(b.sigma, c, font, vo);
  const double total = Seconds(t0);
  fs::create_directories(dir);
  WritePbmFile((dir / "glyphs.pbm").string(), rep.glyph_bitmap);
  WritePbmFile((dir / "semantic.pbm").string(), rep.semantic_bitmap);
  {
    std::ofstream kv(dir / "verify.txt");
    kv << rep.ToKeyValues().ToText();
  }
  const bool images = ToPbm(rep.glyph_bitmap) == ToPbm(rep.semantic_bitmap);
  out.pass = rep.ok && rep.pbm_identical && images &&
             rep.exterior_checked >= 100 && rep.literal_in_checked >= 10 &&
             rep.literal_out_checked >= 10 && total <= kBudgetSeconds;
  out.detail = size.str() + "; build " + Fixed(build_s) + " s, total " +
               Fixed(total) + " s; lit " + std::to_string(rep.lit) +
               ", exterior " + std::to_string(rep.exterior_checked) +
               ", literal " + std::to_string(rep.literal_in_checked) + "+" +
               std::to_string(rep.literal_out_checked) +
               (images ? ", PBMs identical" : ", PBMs differ");
  if (total > kBudgetSeconds) out.detail += "; over the 30 min budget";
  if (!rep.failures.empty()) out.detail += "; " + rep.failures.front();
  return out;
}

// 8. Gr sanity
Outcome GrSanity() {
  Outcome out;
  std::vector<std::string> bad;
  auto eq = [](const std::string& s) {
    return std::get<Equation>(ParseEquation(s));
  };
  Equation circle = eq("x^2+y^2=1");
  if (GraphMembership(circle, {1, 0}, EvalBudget{}).membership != Membership::kIn) {
    bad.push_back("(1,0) not in the circle");
  }
  if (GraphMembership(circle, {0, 0}, EvalBudget{}).membership != Membership::kOut) {
    bad.push_back("(0,0) in the circle");
  }
  Equation none = eq("x^2=0-1");
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    mpq_class x(static_cast<long>(rng() % 201) - 100, 1 + rng() % 20);
    mpq_class y(static_cast<long>(rng() % 201) - 100, 1 + rng() % 20);
    x.canonicalize();
    y.canonicalize();
    if (GraphMembership(none, {x, y}, EvalBudget{}).membership != Membership::kOut) {
      bad.push_back("x^2=-1 has a point");
      break;
    }
  }
  Font font = LoadFontFile(SELFGRAPH_TEST_FONT);
  GraphResult err = Gr(ParseSymbols("+="), Window{0, 0, 30, 1}, font, EvalBudget{});
  if (err.valid || err.bitmap.count() == 0) bad.push_back("\"+=\" rendering empty");
  out.pass = bad.empty();
  for (const auto& s : bad) out.detail += s + "; ";
  if (out.pass) {
    out.detail = "error rendering has " + std::to_string(err.bitmap.count()) +
                 " pixels";
  }
  return out;
}

// 9. two build-quine runs give identical files
Outcome Determinism(const fs::path& dir) {
  Outcome out;
  const std::string cli = SELFGRAPH_CLI;
  fs::create_directories(dir);
  std::vector<fs::path> runs{dir / "run1", dir / "run2"};
  for (const fs::path& r : runs) {
    fs::remove_all(r);
    std::string cmd = cli + " build-quine --no-verify -o " + r.string() +
                      " > " + (r.string() + ".log") + " 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      out.pass = false;
      out.detail = "build-quine failed, see " + r.string() + ".log";
      return out;
    }
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::uintmax_t bytes = 0;
  for (const char* f : {"sigma.txt", "certificate.txt", "report.txt", "glyphs.pbm"}) {
    const std::string a = slurp(runs[0] / f), b = slurp(runs[1] / f);
    if (a.empty() || a != b) {
      out.pass = false;
      out.detail = std::string(f) + " differs";
      return out;
    }
    bytes += a.size();
  }
  out.detail = "4 files, " + std::to_string(bytes) + " bytes identical";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const fs::path dir = fs::current_path() / "acceptance_out";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"codec bijection", Codec},
      {"identities", Identities},
      {"compiler/semantic agreement", Agreement},
      {"constant programs", Constants},
      {"fixed point at input 0", FixedPoints},
      {"trace predicate oracle", TraceOracle},
      {"end-to-end self-graphing at G=8", [&] { return EndToEnd(dir / "e2e"); }},
      {"Gr sanity", GrSanity},
      {"determinism", [&] { return Determinism(dir); }},
  };
  const double limits[] = {10, 1, 120, 10, 60, 300, 1800, 1, 0};

  int failed = 0;
  for (int k : want) {
    if (k < 1 || k > 9) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = all[k - 1].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double s = Seconds(t0);
    const double limit = limits[k - 1];
    if (limit > 0 && s > limit) {
      o.pass = false;
      o.detail += "; took longer than " + Fixed(limit) + " s";
    }
    failed += !o.pass;
    std::cout << "criterion " << k << " " << (o.pass ? "PASS" : "FAIL") << " ["
              << all[k - 1].first << "] " << Fixed(s) << " s: " << o.detail
              << std::endl;
  }
  return failed ? 1 : 0;
}
