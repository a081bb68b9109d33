#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "selfgraph/eqlang.hpp"

namespace selfgraph::logic {

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

// First-order formula over N-valued variables (plus the plane variables x, y).
// kEq with several terms means every term is 0; it compiles to a sum of
// squares, so one atom carries a conjunction of equalities.
struct Pred {
  enum class Kind { kEq, kLe, kNot, kOr, kAnd, kExists, kForall };
  Kind kind = Kind::kEq;
  std::vector<ExprPtr> terms;  // kEq: terms = 0; kLe: terms[0] <= terms[1]
  std::vector<PredPtr> kids;
  char var = 0;                // quantifiers
  // Quantifiers only. For Exists the candidates are the possible witnesses;
  // for Forall they are the possible counterexamples. A Decided verdict is
  // "a witness exists" for Exists, "a counterexample exists" for Forall.
  HintPtr hint;
  bool memo = false;           // cache semantic results keyed by free values
  std::string label;

  // Filled in by the builders.
  std::uint64_t id = 0;
  std::string free;            // sorted free variables
  bool safe = true;            // can never evaluate to Undefined
};

namespace pr {
PredPtr Eq(ExprPtr e);                      // e = 0
PredPtr Eq(ExprPtr lhs, ExprPtr rhs);       // lhs - rhs = 0
PredPtr EqAll(std::vector<ExprPtr> terms);  // every term = 0
PredPtr Le(ExprPtr lhs, ExprPtr rhs);
PredPtr Not(PredPtr p);
PredPtr Or(std::vector<PredPtr> kids);
PredPtr And(std::vector<PredPtr> kids);
PredPtr Or(PredPtr a, PredPtr b);
PredPtr And(PredPtr a, PredPtr b);
PredPtr Exists(char v, PredPtr body, HintPtr hint = nullptr);
PredPtr Forall(char v, PredPtr body, HintPtr hint = nullptr);
// Forall v (bound <= v  or  body): v ranges over 0..bound-1, with a hint
// naming exactly that range.
PredPtr ForallBelow(char v, ExprPtr bound, PredPtr body);
// Copy of p flagged for memoization, with a label for reports.
PredPtr Memo(PredPtr p, std::string label);
PredPtr Labeled(PredPtr p, std::string label);
}  // namespace pr

// True when evaluation of e can never be Undefined, assuming every variable
// other than x and y holds a natural number.
bool ExprIsSafe(const Expr& e);

class VariablePoolExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Letters available for quantified variables: a..z without x, y, n.
const std::string& VariablePool();

// Path-scoped fresh-letter allocator. Copies are independent, so passing a
// Scope by value to a sub-builder frees its letters for siblings.
class Scope {
 public:
  Scope();
  // Marks letters as taken (free variables of the enclosing formula).
  Scope& Reserve(const std::string& letters);
  char Fresh();
  bool Taken(char v) const;
  int depth() const { return depth_; }
  // Deepest use seen by this scope and all its copies.
  int max_depth() const { return *max_depth_; }

 private:
  std::uint32_t used_ = 0;
  int depth_ = 0;
  std::shared_ptr<int> max_depth_;
};

enum class Truth { kTrue, kFalse, kUnknown };

struct PredOutcome {
  Truth truth = Truth::kUnknown;
  bool undefined = false;  // Unknown because some atom was Undefined
  std::string reason;

  static PredOutcome True() { return {Truth::kTrue, false, {}}; }
  static PredOutcome False() { return {Truth::kFalse, false, {}}; }
  static PredOutcome Unknown(std::string why) {
    return {Truth::kUnknown, false, std::move(why)};
  }
  static PredOutcome Undefined(std::string why) {
    return {Truth::kUnknown, true, std::move(why)};
  }
};

struct PredBudget {
  std::int64_t quantifier_bound = 20;  // unhinted searches cover 0..bound
  EvalBudget expr;
  int spot_check_width = 2;
  // Spot checks per quantifier node before its certificate is trusted.
  std::int64_t spot_checks_per_node = 256;
};

struct PredStats {
  std::uint64_t atoms = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t memo_entries = 0;
  std::uint64_t hint_calls = 0;
};

// Semantic reference evaluator. Keeps its memo across calls; one instance per
// thread.
class PredEvaluator {
 public:
  explicit PredEvaluator(PredBudget budget = {});
  ~PredEvaluator();
  PredEvaluator(const PredEvaluator&) = delete;
  PredEvaluator& operator=(const PredEvaluator&) = delete;

  PredOutcome Eval(const Pred& p, const Env& env);
  // Spot-check counts survive, so the per-node limit holds across calls.
  void ClearMemo();
  const PredStats& stats() const { return stats_; }
  const PredBudget& budget() const { return budget_; }

 private:
  struct Memo;
  PredOutcome EvalNode(const Pred& p, const Env& env);
  PredOutcome EvalQuantifier(const Pred& p, const Env& env);
  PredOutcome EvalAtom(const Pred& p, const Env& env);

  PredBudget budget_;
  PredStats stats_;
  std::unique_ptr<Memo> memo_;
  bool in_spot_check_ = false;
  std::unordered_map<std::uint64_t, std::int64_t> spot_checks_;
};

PredOutcome EvalPred(const Pred& p, const Env& env, const PredBudget& budget);

// And and Forall rewritten through Not/Or/Exists; hints and memo flags kept.
PredPtr DeMorgan(const PredPtr& p);

// Expr E with: p holds iff E = 0.
ExprPtr Compile(const PredPtr& p);

struct AgreementReport {
  bool decided = false;  // both sides produced a verdict
  bool agree = true;
  PredOutcome semantic;
  EvalOutcome compiled;
  std::string counterexample;
};

AgreementReport AgreementCheck(const PredPtr& p, const Env& env,
                               const PredBudget& budget);

// Prefix text format, e.g. (exists v (eq [v-3])). Brackets hold expressions
// in the equation syntax. Hints and memo flags are not represented.
std::string ToText(const Pred& p);
PredPtr ParsePred(std::string_view text);

struct PredSize {
  std::uint64_t nodes = 0;
  std::uint64_t quantifiers = 0;
  std::uint64_t atoms = 0;
};
PredSize Measure(const Pred& p);

}  // namespace selfgraph::logic
