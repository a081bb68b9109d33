#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "selfgraph/alphabet.hpp"
#include "selfgraph/eqlang.hpp"
#include "selfgraph/glyphs.hpp"
#include "selfgraph/logic.hpp"
#include "selfgraph/machine.hpp"

namespace selfgraph::arith {

using logic::PredPtr;
using logic::Scope;

// beta(k1, k2, i) = k1 mod (1 + (i+1) k2)
mpz_class Beta(const mpz_class& k1, const mpz_class& k2, const mpz_class& i);

// (k1, k2) with Beta(k1, k2, i) = seq[i] for every i, by Chinese remaindering.
std::pair<mpz_class, mpz_class> BetaEncode(const std::vector<mpz_class>& seq);

// How the sequence-code existential of the trace predicate is witnessed.
//  kConstruct: k1, k2 are computed by CRT from an interpreter run and the
//              predicate body is then evaluated in full.
//  kReplay:    the existential is decided by replaying the run (for traces
//              whose codes are far too large to write down).
enum class TraceWitness { kConstruct, kReplay };

// Upper bounds the hints may use. Anything a hint would need beyond these
// makes it give up (the evaluator then reports Unknown).
struct WitnessBounds {
  std::uint64_t max_steps = 2'000'000;      // a
  std::optional<mpz_class> max_output;      // b
  std::optional<mpz_class> max_column;      // c < max_column
  std::optional<std::int64_t> max_d;        // d < max_d
  std::optional<std::int64_t> max_e;        // e < max_e
};

// Shared state behind the witness hints: run results, sequence codes and
// decoded strings, cached by value. Thread-safe.
class WitnessContext {
 public:
  explicit WitnessContext(TraceWitness mode = TraceWitness::kConstruct,
                          WitnessBounds bounds = {});

  TraceWitness mode() const { return mode_; }
  const WitnessBounds& bounds() const { return bounds_; }
  // Drops cached runs, which depend on the step bound.
  void set_bounds(const WitnessBounds& b);

  struct RunFacts {
    machine::Program program;
    machine::CodeParts parts;
    machine::RunResult result;  // within bounds().max_steps
    mpz_class register_bound;
    ValuePtr steps;             // shared so memo keys coincide
    ValuePtr output;
  };
  std::shared_ptr<const RunFacts> Facts(const mpz_class& n);

  // Sequence code of the first a+1 snapshots (registers 0..r-1) of the run
  // of n; past a halt the last snapshot repeats.
  struct SequenceCode {
    ValuePtr k1, k2;
  };
  std::shared_ptr<const SequenceCode> Code(const mpz_class& n,
                                           std::uint64_t a,
                                           std::uint64_t r);

  struct Decoded {
    SymbolString text;
    mpz_class offset;  // b - (47^L - 1)/46
  };
  std::shared_ptr<const Decoded> Decode(const ValuePtr& b);

  // Quotient and remainder of offset by 47^j for the digit hints.
  std::pair<ValuePtr, ValuePtr> DigitSplit(const ValuePtr& b, std::uint64_t j);

 private:
  TraceWitness mode_;
  WitnessBounds bounds_;
  std::mutex mu_;
  std::map<mpz_class, std::shared_ptr<const RunFacts>> facts_;
  std::map<std::tuple<mpz_class, std::uint64_t, std::uint64_t>,
           std::shared_ptr<const SequenceCode>>
      codes_;
  const Value* last_b_ = nullptr;
  ValuePtr last_b_keep_;
  std::shared_ptr<const Decoded> last_decoded_;
  std::tuple<const Value*, std::uint64_t, ValuePtr, ValuePtr> last_split_;
};

using ContextPtr = std::shared_ptr<WitnessContext>;

// value = beta(k1, k2, index)
PredPtr BetaPred(Scope s, ExprPtr k1, ExprPtr k2, ExprPtr index, ExprPtr value);

// The n-th machine on input 0 halts after exactly a steps with output b.
PredPtr TracePred(Scope s, ExprPtr n, ExprPtr a, ExprPtr b,
                  const ContextPtr& ctx);

// The c-th symbol of decode(b) exists and has canonical index s.
PredPtr SymPred(Scope scope, char b, char c, char s, const ContextPtr& ctx);

// Pixel (d, e) of the glyph of the c-th symbol of decode(b) is lit.
PredPtr GlyphPixelPred(Scope scope, char b, char c, char d, char e,
                       const Font& font, const ContextPtr& ctx);

// (x, y) lies in pixel (d, e) of the unit square [c, c+1] x [0, 1].
PredPtr PixelContainmentPred(char c, char d, char e, int resolution);

// P(n, a, b, c, d, e) and (*) = exists a, b, c, d, e: P.
PredPtr BuildP(const Font& font, const ContextPtr& ctx);
PredPtr BuildStar(const Font& font, const ContextPtr& ctx);

// Number of (symbol, pixel) disjuncts in the glyph predicate.
std::size_t GlyphDisjunctCount(const Font& font);

// E with free variables n, x, y; n occurs exactly once, so the serialized
// equation E(n)=0 splits into prefix, numeral, suffix.
struct EquationTemplate {
  ExprPtr expr;
  PredPtr star;
  SymbolString prefix;
  SymbolString suffix;
  mpz_class prefix_code;
  mpz_class suffix_code;
  int quantifier_depth = 0;
};

EquationTemplate BuildE(const Font& font, const ContextPtr& ctx);

// Decimal numeral of n as symbols ("311" for 311).
SymbolString Numeral(const mpz_class& n);

// E(n)=0 with the numeral substituted (hints kept).
Equation SubstituteN(const EquationTemplate& t, const mpz_class& n);
SymbolString SubstituteNText(const EquationTemplate& t, const mpz_class& n);

// f(n) = code of "E(n)=0".
mpz_class F(const EquationTemplate& t, const mpz_class& n);

// Register-machine program computing f.
machine::Program FProgram(const EquationTemplate& t);

// Quantifier-free equation whose graph is exactly the given pixel set
// (a union of closed pixels, all with nonnegative coordinates).
Equation PixelSetEquation(const PixelSet& pixels);

struct SizeEstimate {
  std::string part;
  std::uint64_t symbols = 0;
};
std::vector<SizeEstimate> DryRun(const Font& font);

}  // namespace selfgraph::arith
