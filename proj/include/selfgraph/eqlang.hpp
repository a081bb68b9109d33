#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "selfgraph/alphabet.hpp"
#include "selfgraph/glyphs.hpp"

namespace selfgraph {

using Value = mpq_class;
using ValuePtr = std::shared_ptr<const Value>;

inline ValuePtr MakeValue(Value v) {
  return std::make_shared<const Value>(std::move(v));
}

// Variable bindings as a parent-linked chain; children live on the stack of
// whoever binds them. Variables are the letters a..z.
class Env {
 public:
  Env() = default;
  Env(const Env* parent, char var, ValuePtr value)
      : parent_(parent), var_(var), value_(std::move(value)) {}

  const Value* Lookup(char var) const;
  const ValuePtr* LookupPtr(char var) const;
  // Convenience for tests and hints: value as an integer (truncates).
  std::optional<mpz_class> Integer(char var) const;

 private:
  const Env* parent_ = nullptr;
  char var_ = 0;
  ValuePtr value_;
};

// A stabilization certificate attached to an infinite product (or to the
// existential it was compiled from). Given the bindings in scope it either
// names candidate factor indices (when `complete`, every other factor is 1),
// or decides the product outright.
struct HintResult {
  enum class Kind { kNone, kCandidates, kDecided };
  Kind kind = Kind::kNone;
  std::vector<ValuePtr> candidates;
  bool complete = false;
  bool verdict = false;  // kDecided: true means some factor is 0.
  std::string note;

  static HintResult None(std::string note = {}) {
    HintResult r;
    r.note = std::move(note);
    return r;
  }
  static HintResult Candidates(std::vector<ValuePtr> values, bool complete) {
    HintResult r;
    r.kind = Kind::kCandidates;
    r.candidates = std::move(values);
    r.complete = complete;
    return r;
  }
  static HintResult Decided(bool verdict, std::string note = {}) {
    HintResult r;
    r.kind = Kind::kDecided;
    r.verdict = verdict;
    r.note = std::move(note);
    return r;
  }
};

struct WitnessHint {
  std::string tag;  // "unique-witness", "range-bound", "trace-replay", ...
  std::function<HintResult(const Env&)> fn;
};
using HintPtr = std::shared_ptr<const WitnessHint>;

enum class BinOp { kAdd, kSub, kMul, kDiv, kPow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { kVar, kNum, kBin, kProd };
  Kind kind = Kind::kNum;
  char var = 0;          // kVar: the variable; kProd: the bound variable.
  mpz_class num;         // kNum: nonnegative literal.
  BinOp op = BinOp::kAdd;
  ExprPtr lhs;           // kBin: left operand; kProd: body.
  ExprPtr rhs;
  HintPtr hint;          // kProd only; ignored by equality.
};

namespace ex {
ExprPtr Var(char v);
ExprPtr Num(const mpz_class& n);
ExprPtr Num(long n);
ExprPtr Bin(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr Add(ExprPtr a, ExprPtr b);
ExprPtr Sub(ExprPtr a, ExprPtr b);
ExprPtr Mul(ExprPtr a, ExprPtr b);
ExprPtr Div(ExprPtr a, ExprPtr b);
ExprPtr Pow(ExprPtr a, ExprPtr b);
// Infinite product of `body` as `v` runs from 0 to infinity.
ExprPtr Prod(char v, ExprPtr body, HintPtr hint = nullptr);
}  // namespace ex

bool StructurallyEqual(const Expr& a, const Expr& b);

// Sorted free variables.
std::string FreeVariables(const Expr& e);

struct Equation {
  ExprPtr lhs;
  ExprPtr rhs;
};
bool StructurallyEqual(const Equation& a, const Equation& b);
std::string FreeVariables(const Equation& e);

struct ParseError {
  std::size_t position = 0;  // symbol index
  std::string expected;
  std::string message() const;
};

// Accepts the canonical fully parenthesized form and conventional precedence
// (^ over ·,/ over +,−; all left associative). No unary minus.
std::variant<Equation, ParseError> ParseEquation(const SymbolString& text);
std::variant<Equation, ParseError> ParseEquation(std::string_view utf8);
std::variant<ExprPtr, ParseError> ParseExpr(const SymbolString& text);
std::variant<ExprPtr, ParseError> ParseExpr(std::string_view utf8);

SymbolString Serialize(const Expr& e);
SymbolString Serialize(const Equation& e);
std::string SerializeText(const Expr& e);
std::string SerializeText(const Equation& e);

struct EvalBudget {
  std::int64_t max_steps = 50'000'000;     // expression nodes visited
  std::int64_t factor_budget = 64;         // uncertified product factors tried
  std::uint64_t max_power_bits = 1ull << 28;
  int spot_check_width = 2;                // extra factors checked past a
                                           // complete candidate list
};

struct EvalOutcome {
  enum class Status { kValue, kUnknown, kUndefined };
  Status status = Status::kValue;
  Value value;
  std::string reason;

  bool is_value() const { return status == Status::kValue; }
  static EvalOutcome Of(Value v) { return {Status::kValue, std::move(v), {}}; }
  static EvalOutcome Unknown(std::string why) {
    return {Status::kUnknown, 0, std::move(why)};
  }
  static EvalOutcome Undefined(std::string why) {
    return {Status::kUndefined, 0, std::move(why)};
  }
};

// Raised when a stabilization certificate is contradicted by evaluation, or a
// compiled factor is not 0 or 1.
class CertificateViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EvalOutcome EvalExpr(const Expr& e, const Env& env, const EvalBudget& budget);

// Exact a^b under the language's rules (0^0 = 1, halves allowed).
EvalOutcome EvalPower(const Value& base, const Value& exponent,
                      const EvalBudget& budget);

enum class Membership { kIn, kOut, kUnknown };

struct MembershipResult {
  Membership membership = Membership::kUnknown;
  bool undefined = false;  // Out because the difference was undefined.
  std::string reason;
};

// `extra` supplies bindings beyond x and y (e.g. parameters hints consult).
MembershipResult GraphMembership(const Equation& eq, const Point& p,
                                 const EvalBudget& budget,
                                 const Env* extra = nullptr);

// Text graphed for strings that are not valid equations. Uses only alphabet
// symbols.
const SymbolString& InvalidEquationMessage();

// Valid equations are well-formed and have free variables within {x, y}.
std::variant<Equation, ParseError> ParseGraphable(const SymbolString& text);

struct GraphResult {
  Bitmap bitmap;
  Bitmap unknown;        // pixels whose center could not be decided
  bool valid = true;
  bool heuristic = true; // center sampling is exact only for pixel unions
  std::size_t undefined_pixels = 0;
  std::string invalid_reason;
};

// Gr rasterized over `window`: for invalid strings the glyphs of the error
// message; otherwise a pixel is lit iff its center is In.
GraphResult Gr(const SymbolString& sigma, const Window& window,
               const Font& font, const EvalBudget& budget);
GraphResult GraphEquation(const Equation& eq, const Window& window,
                          int resolution, const EvalBudget& budget,
                          const Env* extra = nullptr);

}  // namespace selfgraph
