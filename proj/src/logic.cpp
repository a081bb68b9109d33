#include "selfgraph/logic.hpp"

#include <atomic>
#include <map>
#include <set>
#include <unordered_map>

namespace selfgraph::logic {
namespace {

std::atomic<std::uint64_t> next_id{1};

std::string Union(const std::string& a, const std::string& b) {
  std::set<char> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return std::string(s.begin(), s.end());
}

// Fills id, free and safe.
PredPtr Finish(Pred p) {
  p.id = next_id.fetch_add(1);
  p.free.clear();
  p.safe = true;
  for (const ExprPtr& t : p.terms) {
    p.free = Union(p.free, FreeVariables(*t));
    p.safe = p.safe && ExprIsSafe(*t);
  }
  for (const PredPtr& k : p.kids) {
    p.free = Union(p.free, k->free);
    p.safe = p.safe && k->safe;
  }
  if (p.kind == Pred::Kind::kExists || p.kind == Pred::Kind::kForall) {
    std::erase(p.free, p.var);
  }
  return std::make_shared<const Pred>(std::move(p));
}

PredPtr Node(Pred::Kind kind, std::vector<PredPtr> kids) {
  Pred p;
  p.kind = kind;
  p.kids = std::move(kids);
  return Finish(std::move(p));
}

bool NaturalValued(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kNum:
      return true;
    case Expr::Kind::kVar:
      return e.var != 'x' && e.var != 'y';
    case Expr::Kind::kBin:
      return (e.op == BinOp::kAdd || e.op == BinOp::kMul ||
              e.op == BinOp::kPow) &&
             NaturalValued(*e.lhs) && NaturalValued(*e.rhs);
    case Expr::Kind::kProd:
      return false;
  }
  return false;
}

bool IsLiteral(const Expr& e, long v) {
  return e.kind == Expr::Kind::kNum && e.num == v;
}

}  // namespace

bool ExprIsSafe(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kNum:
    case Expr::Kind::kVar:
      return true;
    case Expr::Kind::kProd:
      return false;
    case Expr::Kind::kBin:
      break;
  }
  if (!ExprIsSafe(*e.lhs)) return false;
  switch (e.op) {
    case BinOp::kAdd:
    case BinOp::kSub:
    case BinOp::kMul:
      return ExprIsSafe(*e.rhs);
    case BinOp::kDiv:
      return e.rhs->kind == Expr::Kind::kNum && e.rhs->num != 0;
    case BinOp::kPow: {
      if (NaturalValued(*e.rhs)) return true;
      // |t| spelled (t^2)^(1/2)
      const Expr& r = *e.rhs;
      const Expr& l = *e.lhs;
      return r.kind == Expr::Kind::kBin && r.op == BinOp::kDiv &&
             IsLiteral(*r.lhs, 1) && IsLiteral(*r.rhs, 2) &&
             l.kind == Expr::Kind::kBin && l.op == BinOp::kPow &&
             IsLiteral(*l.rhs, 2);
    }
  }
  return false;
}

namespace pr {

PredPtr Eq(ExprPtr e) { return EqAll({std::move(e)}); }

PredPtr Eq(ExprPtr lhs, ExprPtr rhs) { return Eq(ex::Sub(lhs, rhs)); }

PredPtr EqAll(std::vector<ExprPtr> terms) {
  if (terms.empty()) throw std::invalid_argument("EqAll needs a term");
  Pred p;
  p.kind = Pred::Kind::kEq;
  p.terms = std::move(terms);
  return Finish(std::move(p));
}

PredPtr Le(ExprPtr lhs, ExprPtr rhs) {
  Pred p;
  p.kind = Pred::Kind::kLe;
  p.terms = {std::move(lhs), std::move(rhs)};
  return Finish(std::move(p));
}

PredPtr Not(PredPtr p) { return Node(Pred::Kind::kNot, {std::move(p)}); }

PredPtr Or(std::vector<PredPtr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty disjunction");
  if (kids.size() == 1) return kids[0];
  return Node(Pred::Kind::kOr, std::move(kids));
}

PredPtr And(std::vector<PredPtr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty conjunction");
  if (kids.size() == 1) return kids[0];
  return Node(Pred::Kind::kAnd, std::move(kids));
}

PredPtr Or(PredPtr a, PredPtr b) { return Or(std::vector{a, b}); }
PredPtr And(PredPtr a, PredPtr b) { return And(std::vector{a, b}); }

PredPtr Exists(char v, PredPtr body, HintPtr hint) {
  Pred p;
  p.kind = Pred::Kind::kExists;
  p.var = v;
  p.kids = {std::move(body)};
  p.hint = std::move(hint);
  return Finish(std::move(p));
}

PredPtr Forall(char v, PredPtr body, HintPtr hint) {
  Pred p;
  p.kind = Pred::Kind::kForall;
  p.var = v;
  p.kids = {std::move(body)};
  p.hint = std::move(hint);
  return Finish(std::move(p));
}

PredPtr ForallBelow(char v, ExprPtr bound, PredPtr body) {
  auto hint = std::make_shared<WitnessHint>();
  hint->tag = "range-bound";
  hint->fn = [bound](const Env& env) {
    EvalOutcome b = EvalExpr(*bound, env, EvalBudget{});
    if (!b.is_value()) return HintResult::None("bound not evaluable");
    mpz_class hi = b.value.get_num() / b.value.get_den();
    if (hi > 50'000'000) return HintResult::None("range too large to list");
    std::vector<ValuePtr> c;
    for (long i = 0; i < hi.get_si(); ++i) c.push_back(MakeValue(Value(i)));
    return HintResult::Candidates(std::move(c), true);
  };
  return Forall(v, Or(Le(bound, ex::Var(v)), std::move(body)), hint);
}

PredPtr Memo(PredPtr p, std::string label) {
  Pred copy = *p;
  copy.memo = true;
  copy.label = std::move(label);
  return Finish(std::move(copy));
}

PredPtr Labeled(PredPtr p, std::string label) {
  Pred copy = *p;
  copy.label = std::move(label);
  return Finish(std::move(copy));
}

}  // namespace pr

// ---------------------------------------------------------------------------
// Scope

const std::string& VariablePool() {
  static const std::string pool = [] {
    std::string s;
    for (char c = 'a'; c <= 'z'; ++c) {
      if (c != 'x' && c != 'y' && c != 'n') s.push_back(c);
    }
    return s;
  }();
  return pool;
}

Scope::Scope() : max_depth_(std::make_shared<int>(0)) {}

Scope& Scope::Reserve(const std::string& letters) {
  for (char c : letters) {
    if (c >= 'a' && c <= 'z' && !Taken(c)) {
      used_ |= 1u << (c - 'a');
      if (VariablePool().find(c) != std::string::npos) ++depth_;
    }
  }
  *max_depth_ = std::max(*max_depth_, depth_);
  return *this;
}

bool Scope::Taken(char v) const { return (used_ >> (v - 'a')) & 1u; }

char Scope::Fresh() {
  for (char c : VariablePool()) {
    if (!Taken(c)) {
      used_ |= 1u << (c - 'a');
      ++depth_;
      *max_depth_ = std::max(*max_depth_, depth_);
      return c;
    }
  }
  throw VariablePoolExhausted(
      "all " + std::to_string(VariablePool().size()) +
      " quantifier letters are in use on this path");
}

// ---------------------------------------------------------------------------
// De Morgan and compilation

namespace {

PredPtr NotOf(const PredPtr& q) {
  if (q->kind == Pred::Kind::kNot) return q->kids[0];
  return pr::Not(q);
}

PredPtr KeepFlags(const Pred& from, PredPtr to) {
  if (from.memo) return pr::Memo(to, from.label);
  if (!from.label.empty()) return pr::Labeled(to, from.label);
  return to;
}

class DeMorganPass {
 public:
  PredPtr Run(const PredPtr& p) {
    auto it = done_.find(p.get());
    if (it != done_.end()) return it->second;
    PredPtr out;
    switch (p->kind) {
      case Pred::Kind::kEq:
      case Pred::Kind::kLe:
        out = p;
        break;
      case Pred::Kind::kNot:
        out = NotOf(Run(p->kids[0]));
        break;
      case Pred::Kind::kOr: {
        std::vector<PredPtr> k;
        for (const PredPtr& c : p->kids) k.push_back(Run(c));
        out = pr::Or(std::move(k));
        break;
      }
      case Pred::Kind::kAnd: {
        std::vector<PredPtr> k;
        for (const PredPtr& c : p->kids) k.push_back(NotOf(Run(c)));
        out = pr::Not(pr::Or(std::move(k)));
        break;
      }
      case Pred::Kind::kExists:
        out = pr::Exists(p->var, Run(p->kids[0]), p->hint);
        break;
      case Pred::Kind::kForall:
        out = pr::Not(pr::Exists(p->var, NotOf(Run(p->kids[0])), p->hint));
        break;
    }
    if (out != p) out = KeepFlags(*p, out);
    done_.emplace(p.get(), out);
    keep_.push_back(p);
    return out;
  }

 private:
  std::unordered_map<const Pred*, PredPtr> done_;
  std::vector<PredPtr> keep_;
};

ExprPtr Balanced(const std::vector<ExprPtr>& xs, std::size_t lo,
                 std::size_t hi, BinOp op) {
  if (hi - lo == 1) return xs[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return ex::Bin(op, Balanced(xs, lo, mid, op), Balanced(xs, mid, hi, op));
}

ExprPtr Square(ExprPtr e) { return ex::Pow(std::move(e), ex::Num(2)); }

ExprPtr NotExpr(ExprPtr e) { return ex::Pow(ex::Num(0), Square(std::move(e))); }

class CompilePass {
 public:
  ExprPtr Run(const PredPtr& p) {
    auto it = done_.find(p.get());
    if (it != done_.end()) return it->second;
    ExprPtr out;
    switch (p->kind) {
      case Pred::Kind::kEq:
        if (p->terms.size() == 1) {
          out = p->terms[0];
        } else {
          std::vector<ExprPtr> sq;
          for (const ExprPtr& t : p->terms) sq.push_back(Square(t));
          out = Balanced(sq, 0, sq.size(), BinOp::kAdd);
        }
        break;
      case Pred::Kind::kLe: {
        ExprPtr d = ex::Sub(p->terms[1], p->terms[0]);
        out = ex::Sub(d, ex::Pow(Square(d), ex::Div(ex::Num(1), ex::Num(2))));
        break;
      }
      case Pred::Kind::kNot:
        out = NotExpr(Run(p->kids[0]));
        break;
      case Pred::Kind::kOr: {
        std::vector<ExprPtr> k;
        for (const PredPtr& c : p->kids) k.push_back(Run(c));
        out = Balanced(k, 0, k.size(), BinOp::kMul);
        break;
      }
      case Pred::Kind::kExists:
        out = ex::Prod(p->var, ex::Sub(ex::Num(1), NotExpr(Run(p->kids[0]))),
                       p->hint);
        break;
      case Pred::Kind::kAnd:
      case Pred::Kind::kForall:
        throw std::logic_error("compile expects a De Morgan normalized formula");
    }
    done_.emplace(p.get(), out);
    return out;
  }

 private:
  std::unordered_map<const Pred*, ExprPtr> done_;
};

}  // namespace

PredPtr DeMorgan(const PredPtr& p) { return DeMorganPass().Run(p); }

ExprPtr Compile(const PredPtr& p) { return CompilePass().Run(DeMorgan(p)); }

// ---------------------------------------------------------------------------
// Text format

namespace {

void Write(const Pred& p, std::string& out) {
  auto bracket = [&](const ExprPtr& e) {
    out += " [" + SerializeText(*e) + "]";
  };
  switch (p.kind) {
    case Pred::Kind::kEq:
      out += "(eq";
      for (const ExprPtr& t : p.terms) bracket(t);
      out += ")";
      return;
    case Pred::Kind::kLe:
      out += "(le";
      bracket(p.terms[0]);
      bracket(p.terms[1]);
      out += ")";
      return;
    case Pred::Kind::kNot:
    case Pred::Kind::kOr:
    case Pred::Kind::kAnd:
      out += p.kind == Pred::Kind::kNot  ? "(not"
             : p.kind == Pred::Kind::kOr ? "(or"
                                         : "(and";
      break;
    case Pred::Kind::kExists:
      out += std::string("(exists ") + p.var;
      break;
    case Pred::Kind::kForall:
      out += std::string("(forall ") + p.var;
      break;
  }
  for (const PredPtr& k : p.kids) {
    out += " ";
    Write(*k, out);
  }
  out += ")";
}

class TextParser {
 public:
  explicit TextParser(std::string_view s) : s_(s) {}

  PredPtr Parse() {
    PredPtr p = ParseNode();
    SkipSpace();
    if (i_ != s_.size()) Fail("trailing text");
    return p;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) {
    throw std::invalid_argument("predicate text at byte " +
                                std::to_string(i_) + ": " + what);
  }

  void SkipSpace() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
  }

  std::string Word() {
    SkipSpace();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_])))
      ++i_;
    if (start == i_) Fail("expected a word");
    return std::string(s_.substr(start, i_ - start));
  }

  void Expect(char c) {
    SkipSpace();
    if (i_ >= s_.size() || s_[i_] != c) Fail(std::string("expected '") + c + "'");
    ++i_;
  }

  bool PeekIs(char c) {
    SkipSpace();
    return i_ < s_.size() && s_[i_] == c;
  }

  ExprPtr Bracketed() {
    Expect('[');
    std::size_t close = s_.find(']', i_);
    if (close == std::string_view::npos) Fail("unclosed '['");
    auto parsed = ParseExpr(s_.substr(i_, close - i_));
    if (auto* err = std::get_if<ParseError>(&parsed)) Fail(err->message());
    i_ = close + 1;
    return std::get<ExprPtr>(parsed);
  }

  PredPtr ParseNode() {
    Expect('(');
    std::string head = Word();
    PredPtr out;
    if (head == "eq") {
      std::vector<ExprPtr> terms;
      while (PeekIs('[')) terms.push_back(Bracketed());
      if (terms.empty()) Fail("eq needs a term");
      out = pr::EqAll(std::move(terms));
    } else if (head == "le") {
      ExprPtr a = Bracketed();
      ExprPtr b = Bracketed();
      out = pr::Le(a, b);
    } else if (head == "not") {
      out = pr::Not(ParseNode());
    } else if (head == "or" || head == "and") {
      std::vector<PredPtr> kids;
      while (PeekIs('(')) kids.push_back(ParseNode());
      if (kids.size() < 2) Fail(head + " needs two operands");
      out = head == "or" ? pr::Or(std::move(kids)) : pr::And(std::move(kids));
    } else if (head == "exists" || head == "forall") {
      std::string v = Word();
      if (v.size() != 1 || v == "x" || v == "y") Fail("bad bound variable");
      PredPtr body = ParseNode();
      out = head == "exists" ? pr::Exists(v[0], body) : pr::Forall(v[0], body);
    } else {
      Fail("unknown head '" + head + "'");
    }
    Expect(')');
    return out;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

void MeasureInto(const Pred& p, PredSize& s) {
  ++s.nodes;
  if (p.kind == Pred::Kind::kEq || p.kind == Pred::Kind::kLe) ++s.atoms;
  if (p.kind == Pred::Kind::kExists || p.kind == Pred::Kind::kForall)
    ++s.quantifiers;
  for (const PredPtr& k : p.kids) MeasureInto(*k, s);
}

}  // namespace

std::string ToText(const Pred& p) {
  std::string out;
  Write(p, out);
  return out;
}

PredPtr ParsePred(std::string_view text) { return TextParser(text).Parse(); }

PredSize Measure(const Pred& p) {
  PredSize s;
  MeasureInto(p, s);
  return s;
}

}  // namespace selfgraph::logic
