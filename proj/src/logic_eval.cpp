#include <cstring>
#include <unordered_map>

#include "selfgraph/logic.hpp"

namespace selfgraph::logic {

struct PredEvaluator::Memo {
  struct Entry {
    PredOutcome outcome;
    std::vector<ValuePtr> keepalive;
  };
  std::unordered_map<std::string, Entry> table;
};

namespace {

// Small integers are keyed by value, everything else by object identity
// (the pointer is kept alive by the entry, so it cannot be reused).
void AppendKey(std::string& key, const Env& env, char v,
               std::vector<ValuePtr>& keep) {
  const ValuePtr* p = env.LookupPtr(v);
  char tag = 'u';
  std::int64_t word = 0;
  if (p) {
    const Value& x = **p;
    if (x.get_den() == 1 && x.get_num().fits_slong_p()) {
      tag = 's';
      word = x.get_num().get_si();
    } else {
      tag = 'p';
      word = static_cast<std::int64_t>(reinterpret_cast<std::uintptr_t>(p->get()));
      keep.push_back(*p);
    }
  }
  key.push_back(tag);
  char buf[sizeof word];
  std::memcpy(buf, &word, sizeof word);
  key.append(buf, sizeof buf);
}

bool IsTrue(const PredOutcome& o) { return o.truth == Truth::kTrue; }
bool IsFalse(const PredOutcome& o) { return o.truth == Truth::kFalse; }

}  // namespace

PredEvaluator::PredEvaluator(PredBudget budget)
    : budget_(budget), memo_(std::make_unique<Memo>()) {}

PredEvaluator::~PredEvaluator() = default;

void PredEvaluator::ClearMemo() {
  memo_->table.clear();
  stats_.memo_entries = 0;
}

PredOutcome PredEvaluator::Eval(const Pred& p, const Env& env) {
  if (!p.memo) return EvalNode(p, env);
  std::string key;
  std::uint64_t id = p.id;
  key.append(reinterpret_cast<const char*>(&id), sizeof id);
  std::vector<ValuePtr> keep;
  for (char v : p.free) AppendKey(key, env, v, keep);
  auto it = memo_->table.find(key);
  if (it != memo_->table.end()) {
    ++stats_.memo_hits;
    return it->second.outcome;
  }
  PredOutcome out = EvalNode(p, env);
  memo_->table.emplace(std::move(key), Memo::Entry{out, std::move(keep)});
  ++stats_.memo_entries;
  return out;
}

PredOutcome PredEvaluator::EvalAtom(const Pred& p, const Env& env) {
  ++stats_.atoms;
  if (p.kind == Pred::Kind::kLe) {
    EvalOutcome a = EvalExpr(*p.terms[0], env, budget_.expr);
    if (a.status == EvalOutcome::Status::kUndefined)
      return PredOutcome::Undefined(a.reason);
    EvalOutcome b = EvalExpr(*p.terms[1], env, budget_.expr);
    if (b.status == EvalOutcome::Status::kUndefined)
      return PredOutcome::Undefined(b.reason);
    if (!a.is_value()) return PredOutcome::Unknown(a.reason);
    if (!b.is_value()) return PredOutcome::Unknown(b.reason);
    return a.value <= b.value ? PredOutcome::True() : PredOutcome::False();
  }
  bool unknown = false;
  bool nonzero = false;
  std::string why;
  for (const ExprPtr& t : p.terms) {
    EvalOutcome o = EvalExpr(*t, env, budget_.expr);
    if (o.status == EvalOutcome::Status::kUndefined)
      return PredOutcome::Undefined(o.reason);
    if (!o.is_value()) {
      unknown = true;
      why = o.reason;
    } else if (o.value != 0) {
      nonzero = true;
      if (p.safe) break;
    }
  }
  if (nonzero) return PredOutcome::False();
  if (unknown) return PredOutcome::Unknown(why);
  return PredOutcome::True();
}

PredOutcome PredEvaluator::EvalNode(const Pred& p, const Env& env) {
  switch (p.kind) {
    case Pred::Kind::kEq:
    case Pred::Kind::kLe:
      return EvalAtom(p, env);
    case Pred::Kind::kNot: {
      PredOutcome o = Eval(*p.kids[0], env);
      if (IsTrue(o)) return PredOutcome::False();
      if (IsFalse(o)) return PredOutcome::True();
      return o;
    }
    case Pred::Kind::kOr:
    case Pred::Kind::kAnd: {
      // Or stops at the first true child, And at the first false one, unless
      // a later child could still be Undefined (which would poison the
      // compiled product).
      const bool is_or = p.kind == Pred::Kind::kOr;
      bool decisive = false;
      bool unknown = false;
      std::string why;
      for (const PredPtr& k : p.kids) {
        PredOutcome o = Eval(*k, env);
        if (o.undefined) return o;
        if (o.truth == Truth::kUnknown) {
          unknown = true;
          why = o.reason;
        } else if (IsTrue(o) == is_or) {
          decisive = true;
          if (p.safe) break;
        }
      }
      if (decisive) return is_or ? PredOutcome::True() : PredOutcome::False();
      if (unknown) return PredOutcome::Unknown(why);
      return is_or ? PredOutcome::False() : PredOutcome::True();
    }
    case Pred::Kind::kExists:
    case Pred::Kind::kForall:
      return EvalQuantifier(p, env);
  }
  return PredOutcome::Unknown("bad node");
}

PredOutcome PredEvaluator::EvalQuantifier(const Pred& p, const Env& env) {
  const bool exists = p.kind == Pred::Kind::kExists;
  const Pred& body = *p.kids[0];
  // A "hit" is a witness for Exists and a counterexample for Forall.
  const Truth hit = exists ? Truth::kTrue : Truth::kFalse;
  const PredOutcome on_hit = exists ? PredOutcome::True() : PredOutcome::False();
  const PredOutcome on_miss =
      exists ? PredOutcome::False() : PredOutcome::True();

  std::vector<ValuePtr> tried;
  bool unknown = false;
  std::string why;
  auto probe = [&](const ValuePtr& v) -> std::optional<PredOutcome> {
    for (const ValuePtr& t : tried) {
      if (*t == *v) return std::nullopt;
    }
    tried.push_back(v);
    Env child(&env, p.var, v);
    PredOutcome o = Eval(body, child);
    if (o.undefined) return o;
    if (o.truth == hit) return on_hit;
    if (o.truth == Truth::kUnknown) {
      unknown = true;
      why = o.reason;
    }
    return std::nullopt;
  };

  if (p.hint) {
    ++stats_.hint_calls;
    HintResult h = p.hint->fn(env);
    if (h.kind == HintResult::Kind::kDecided) {
      return h.verdict ? on_hit : on_miss;
    }
    if (h.kind == HintResult::Kind::kCandidates) {
      for (const ValuePtr& c : h.candidates) {
        if (auto r = probe(c)) return *r;
      }
      if (unknown) return PredOutcome::Unknown(why);
      if (h.complete) {
        if (!in_spot_check_ && budget_.spot_check_width > 0 &&
            spot_checks_[p.id]++ < budget_.spot_checks_per_node) {
          Value start = 0;
          for (const ValuePtr& c : h.candidates) start = std::max(start, Value(*c + 1));
          in_spot_check_ = true;
          for (int k = 0; k < budget_.spot_check_width; ++k) {
            Value v = start + k;
            Env child(&env, p.var, MakeValue(v));
            PredOutcome o = Eval(body, child);
            if (o.truth == hit) {
              in_spot_check_ = false;
              throw CertificateViolation(
                  "certificate (" + p.hint->tag + ") for " + p.var +
                  " is contradicted at " + v.get_str());
            }
          }
          in_spot_check_ = false;
        }
        return on_miss;
      }
    }
  }
  for (std::int64_t i = 0; i <= budget_.quantifier_bound; ++i) {
    if (auto r = probe(MakeValue(Value(i)))) return *r;
  }
  if (unknown) return PredOutcome::Unknown(why);
  return PredOutcome::Unknown(std::string("no ") +
                              (exists ? "witness" : "counterexample") +
                              " for " + p.var + " up to " +
                              std::to_string(budget_.quantifier_bound) +
                              " and no certificate");
}

PredOutcome EvalPred(const Pred& p, const Env& env, const PredBudget& budget) {
  PredEvaluator ev(budget);
  return ev.Eval(p, env);
}

AgreementReport AgreementCheck(const PredPtr& p, const Env& env,
                               const PredBudget& budget) {
  AgreementReport r;
  r.semantic = EvalPred(*p, env, budget);
  ExprPtr compiled = Compile(p);
  EvalBudget eb = budget.expr;
  eb.factor_budget = std::max<std::int64_t>(eb.factor_budget,
                                            budget.quantifier_bound + 1);
  r.compiled = EvalExpr(*compiled, env, eb);
  const bool sem_decided = r.semantic.truth != Truth::kUnknown;
  const bool comp_decided =
      r.compiled.status != EvalOutcome::Status::kUnknown;
  r.decided = sem_decided && comp_decided;
  if (!r.decided) return r;
  const bool in = r.compiled.is_value() && r.compiled.value == 0;
  r.agree = (r.semantic.truth == Truth::kTrue) == in;
  if (!r.agree) {
    r.counterexample = ToText(*p) + " : semantic " +
                       (r.semantic.truth == Truth::kTrue ? "true" : "false") +
                       ", compiled " +
                       (r.compiled.is_value() ? r.compiled.value.get_str()
                                              : "undefined (" +
                                                    r.compiled.reason + ")");
  }
  return r;
}

}  // namespace selfgraph::logic
