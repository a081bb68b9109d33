#include "selfgraph/eqlang.hpp"

#include <algorithm>
#include <set>

namespace selfgraph {

// ---------------------------------------------------------------------------
// Env

const ValuePtr* Env::LookupPtr(char var) const {
  for (const Env* e = this; e != nullptr; e = e->parent_) {
    if (e->var_ == var && e->value_) return &e->value_;
  }
  return nullptr;
}

const Value* Env::Lookup(char var) const {
  const ValuePtr* p = LookupPtr(var);
  return p ? p->get() : nullptr;
}

std::optional<mpz_class> Env::Integer(char var) const {
  const Value* v = Lookup(var);
  if (!v) return std::nullopt;
  return mpz_class(v->get_num() / v->get_den());
}

// ---------------------------------------------------------------------------
// Construction and structure

namespace ex {

ExprPtr Var(char v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kVar;
  e->var = v;
  return e;
}

ExprPtr Num(const mpz_class& n) {
  if (n < 0) throw std::invalid_argument("literals are nonnegative");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kNum;
  e->num = n;
  return e;
}

ExprPtr Num(long n) { return Num(mpz_class(n)); }

ExprPtr Bin(BinOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kBin;
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr Add(ExprPtr a, ExprPtr b) { return Bin(BinOp::kAdd, a, b); }
ExprPtr Sub(ExprPtr a, ExprPtr b) { return Bin(BinOp::kSub, a, b); }
ExprPtr Mul(ExprPtr a, ExprPtr b) { return Bin(BinOp::kMul, a, b); }
ExprPtr Div(ExprPtr a, ExprPtr b) { return Bin(BinOp::kDiv, a, b); }
ExprPtr Pow(ExprPtr a, ExprPtr b) { return Bin(BinOp::kPow, a, b); }

ExprPtr Prod(char v, ExprPtr body, HintPtr hint) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kProd;
  e->var = v;
  e->lhs = std::move(body);
  e->hint = std::move(hint);
  return e;
}

}  // namespace ex

bool StructurallyEqual(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::kVar:
      return a.var == b.var;
    case Expr::Kind::kNum:
      return a.num == b.num;
    case Expr::Kind::kBin:
      return a.op == b.op && StructurallyEqual(*a.lhs, *b.lhs) &&
             StructurallyEqual(*a.rhs, *b.rhs);
    case Expr::Kind::kProd:
      return a.var == b.var && StructurallyEqual(*a.lhs, *b.lhs);
  }
  return false;
}

bool StructurallyEqual(const Equation& a, const Equation& b) {
  return StructurallyEqual(*a.lhs, *b.lhs) && StructurallyEqual(*a.rhs, *b.rhs);
}

namespace {

void CollectFree(const Expr& e, std::string& bound, std::set<char>& out) {
  switch (e.kind) {
    case Expr::Kind::kVar:
      if (bound.find(e.var) == std::string::npos) out.insert(e.var);
      return;
    case Expr::Kind::kNum:
      return;
    case Expr::Kind::kBin:
      CollectFree(*e.lhs, bound, out);
      CollectFree(*e.rhs, bound, out);
      return;
    case Expr::Kind::kProd:
      bound.push_back(e.var);
      CollectFree(*e.lhs, bound, out);
      bound.pop_back();
      return;
  }
}

}  // namespace

std::string FreeVariables(const Expr& e) {
  std::string bound;
  std::set<char> out;
  CollectFree(e, bound, out);
  return std::string(out.begin(), out.end());
}

std::string FreeVariables(const Equation& e) {
  std::string bound;
  std::set<char> out;
  CollectFree(*e.lhs, bound, out);
  CollectFree(*e.rhs, bound, out);
  return std::string(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// Parser

std::string ParseError::message() const {
  return "invalid equation at symbol " + std::to_string(position) +
         ": expected " + expected;
}

namespace {

class Parser {
 public:
  explicit Parser(const SymbolString& text) : text_(text) {}

  std::variant<Equation, ParseError> Equation_() {
    try {
      ExprPtr lhs = ParseSum();
      Expect(sym::kEquals, "'='");
      ExprPtr rhs = ParseSum();
      if (pos_ != text_.size()) Fail("end of input");
      return Equation{lhs, rhs};
    } catch (const ParseError& e) {
      return e;
    }
  }

  std::variant<ExprPtr, ParseError> Expr_() {
    try {
      ExprPtr e = ParseSum();
      if (pos_ != text_.size()) Fail("end of input");
      return e;
    } catch (const ParseError& e) {
      return e;
    }
  }

 private:
  [[noreturn]] void Fail(std::string expected) {
    throw ParseError{pos_, std::move(expected)};
  }

  bool AtEnd() const { return pos_ >= text_.size(); }
  bool Peek(Symbol s) const { return !AtEnd() && text_[pos_] == s; }

  void Expect(Symbol s, const char* what) {
    if (!Peek(s)) Fail(what);
    ++pos_;
  }

  ExprPtr ParseSum() {
    ExprPtr acc = ParseTerm();
    while (Peek(sym::kPlus) || Peek(sym::kMinus)) {
      BinOp op = Peek(sym::kPlus) ? BinOp::kAdd : BinOp::kSub;
      ++pos_;
      acc = ex::Bin(op, acc, ParseTerm());
    }
    return acc;
  }

  ExprPtr ParseTerm() {
    ExprPtr acc = ParsePower();
    while (Peek(sym::kTimes) || Peek(sym::kSlash)) {
      BinOp op = Peek(sym::kTimes) ? BinOp::kMul : BinOp::kDiv;
      ++pos_;
      acc = ex::Bin(op, acc, ParsePower());
    }
    return acc;
  }

  ExprPtr ParsePower() {
    ExprPtr acc = ParsePrimary();
    while (Peek(sym::kCaret)) {
      ++pos_;
      acc = ex::Pow(acc, ParsePrimary());
    }
    return acc;
  }

  ExprPtr ParsePrimary() {
    if (AtEnd()) Fail("variable, numeral, '(' or 'Π'");
    Symbol s = text_[pos_];
    if (s.is_letter()) {
      ++pos_;
      return ex::Var(s.letter());
    }
    if (s.is_digit()) return ParseNumeral();
    if (s == sym::kLParen) {
      ++pos_;
      ExprPtr inner = ParseSum();
      Expect(sym::kRParen, "')'");
      return inner;
    }
    if (s == sym::kPi) {
      ++pos_;
      Expect(sym::kUnderscore, "'_'");
      Expect(sym::kLParen, "'('");
      if (AtEnd() || !text_[pos_].is_letter()) Fail("bound variable");
      char v = text_[pos_].letter();
      ++pos_;
      Expect(sym::kEquals, "'='");
      Expect(sym::Digit(0), "'0'");
      Expect(sym::kRParen, "')'");
      Expect(sym::kCaret, "'^'");
      Expect(sym::kInfinity, "'∞'");
      return ex::Prod(v, ParsePrimary());
    }
    Fail("variable, numeral, '(' or 'Π'");
  }

  ExprPtr ParseNumeral() {
    std::size_t start = pos_;
    std::string digits;
    while (!AtEnd() && text_[pos_].is_digit()) {
      digits.push_back(static_cast<char>('0' + text_[pos_].digit_value()));
      ++pos_;
    }
    if (digits.size() > 1 && digits[0] == '0') {
      pos_ = start + 1;
      Fail("operator after numeral 0 (no leading zeros)");
    }
    return ex::Num(mpz_class(digits, 10));
  }

  const SymbolString& text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::variant<Equation, ParseError> ParseEquation(const SymbolString& text) {
  return Parser(text).Equation_();
}

std::variant<Equation, ParseError> ParseEquation(std::string_view utf8) {
  try {
    return ParseEquation(ParseSymbols(utf8));
  } catch (const UnknownSymbolError& e) {
    return ParseError{e.symbol_position(), "alphabet symbol, found '" +
                                               e.found() + "'"};
  }
}

std::variant<ExprPtr, ParseError> ParseExpr(const SymbolString& text) {
  return Parser(text).Expr_();
}

std::variant<ExprPtr, ParseError> ParseExpr(std::string_view utf8) {
  try {
    return ParseExpr(ParseSymbols(utf8));
  } catch (const UnknownSymbolError& e) {
    return ParseError{e.symbol_position(), "alphabet symbol, found '" +
                                               e.found() + "'"};
  }
}

// ---------------------------------------------------------------------------
// Serializer

namespace {

Symbol OpSymbol(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return sym::kPlus;
    case BinOp::kSub: return sym::kMinus;
    case BinOp::kMul: return sym::kTimes;
    case BinOp::kDiv: return sym::kSlash;
    case BinOp::kPow: return sym::kCaret;
  }
  return sym::kPlus;
}

void SerializeInto(const Expr& e, SymbolString& out) {
  switch (e.kind) {
    case Expr::Kind::kVar:
      out.push_back(sym::Letter(e.var));
      return;
    case Expr::Kind::kNum:
      for (char c : e.num.get_str(10)) out.push_back(sym::Digit(c - '0'));
      return;
    case Expr::Kind::kBin:
      out.push_back(sym::kLParen);
      SerializeInto(*e.lhs, out);
      out.push_back(OpSymbol(e.op));
      SerializeInto(*e.rhs, out);
      out.push_back(sym::kRParen);
      return;
    case Expr::Kind::kProd:
      out.insert(out.end(), {sym::kPi, sym::kUnderscore, sym::kLParen,
                             sym::Letter(e.var), sym::kEquals, sym::Digit(0),
                             sym::kRParen, sym::kCaret, sym::kInfinity});
      if (e.lhs->kind == Expr::Kind::kBin) {
        SerializeInto(*e.lhs, out);
      } else {
        out.push_back(sym::kLParen);
        SerializeInto(*e.lhs, out);
        out.push_back(sym::kRParen);
      }
      return;
  }
}

}  // namespace

SymbolString Serialize(const Expr& e) {
  SymbolString out;
  SerializeInto(e, out);
  return out;
}

SymbolString Serialize(const Equation& e) {
  SymbolString out;
  SerializeInto(*e.lhs, out);
  out.push_back(sym::kEquals);
  SerializeInto(*e.rhs, out);
  return out;
}

std::string SerializeText(const Expr& e) { return ToText(Serialize(e)); }
std::string SerializeText(const Equation& e) { return ToText(Serialize(e)); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool IsInteger(const Value& v) { return v.get_den() == 1; }

std::uint64_t Bits(const mpz_class& z) {
  return z == 0 ? 0 : mpz_sizeinbase(z.get_mpz_t(), 2);
}

// True for bodies of the compiled shape 1 − 0^(E^2).
bool IsCompiledFactor(const Expr& body) {
  if (body.kind != Expr::Kind::kBin || body.op != BinOp::kSub) return false;
  const Expr& one = *body.lhs;
  const Expr& pow = *body.rhs;
  return one.kind == Expr::Kind::kNum && one.num == 1 &&
         pow.kind == Expr::Kind::kBin && pow.op == BinOp::kPow &&
         pow.lhs->kind == Expr::Kind::kNum && pow.lhs->num == 0;
}

struct StepsExhausted {};

class ExprEvaluator {
 public:
  explicit ExprEvaluator(const EvalBudget& budget) : budget_(budget) {}

  EvalOutcome Eval(const Expr& e, const Env& env) {
    if (++steps_ > budget_.max_steps) throw StepsExhausted{};
    switch (e.kind) {
      case Expr::Kind::kNum:
        return EvalOutcome::Of(Value(e.num));
      case Expr::Kind::kVar: {
        const Value* v = env.Lookup(e.var);
        if (!v) {
          return EvalOutcome::Undefined(std::string("unbound variable ") +
                                        e.var);
        }
        return EvalOutcome::Of(*v);
      }
      case Expr::Kind::kBin:
        return EvalBin(e, env);
      case Expr::Kind::kProd:
        return EvalProd(e, env);
    }
    return EvalOutcome::Undefined("bad node");
  }

 private:
  EvalOutcome EvalBin(const Expr& e, const Env& env) {
    EvalOutcome a = Eval(*e.lhs, env);
    if (a.status == EvalOutcome::Status::kUndefined) return a;
    EvalOutcome b = Eval(*e.rhs, env);
    if (b.status == EvalOutcome::Status::kUndefined) return b;
    if (!a.is_value()) return a;
    if (!b.is_value()) return b;
    switch (e.op) {
      case BinOp::kAdd:
        return EvalOutcome::Of(a.value + b.value);
      case BinOp::kSub:
        return EvalOutcome::Of(a.value - b.value);
      case BinOp::kMul:
        return EvalOutcome::Of(a.value * b.value);
      case BinOp::kDiv:
        if (b.value == 0) return EvalOutcome::Undefined("division by zero");
        return EvalOutcome::Of(a.value / b.value);
      case BinOp::kPow:
        return EvalPower(a.value, b.value, budget_);
    }
    return EvalOutcome::Undefined("bad operator");
  }

  EvalOutcome Factor(const Expr& prod, const Env& env, const ValuePtr& v,
                     bool compiled) {
    Env child(&env, prod.var, v);
    EvalOutcome o = Eval(*prod.lhs, child);
    if (compiled && o.is_value() && o.value != 0 && o.value != 1) {
      throw CertificateViolation("compiled product factor is neither 0 nor 1");
    }
    return o;
  }

  EvalOutcome EvalProd(const Expr& e, const Env& env) {
    const bool compiled = IsCompiledFactor(*e.lhs);
    std::vector<ValuePtr> tried;
    Value product = 1;
    bool unknown = false;
    std::string unknown_reason;

    auto consider = [&](const ValuePtr& v) -> std::optional<EvalOutcome> {
      for (const ValuePtr& t : tried) {
        if (*t == *v) return std::nullopt;
      }
      tried.push_back(v);
      EvalOutcome o = Factor(e, env, v, compiled);
      if (o.status == EvalOutcome::Status::kUndefined) return o;
      if (o.status == EvalOutcome::Status::kUnknown) {
        unknown = true;
        unknown_reason = o.reason;
        return std::nullopt;
      }
      if (o.value == 0) return EvalOutcome::Of(0);
      product *= o.value;
      return std::nullopt;
    };

    if (e.hint) {
      HintResult h = e.hint->fn(env);
      if (h.kind == HintResult::Kind::kDecided) {
        if (!compiled) {
          throw CertificateViolation("decided certificate on a product that "
                                     "is not of compiled shape");
        }
        return EvalOutcome::Of(h.verdict ? 0 : 1);
      }
      if (h.kind == HintResult::Kind::kCandidates) {
        for (const ValuePtr& c : h.candidates) {
          if (auto r = consider(c)) return *r;
        }
        if (unknown) return EvalOutcome::Unknown(unknown_reason);
        if (h.complete) {
          SpotCheck(e, env, h.candidates, compiled);
          return EvalOutcome::Of(product);
        }
      }
    }
    for (std::int64_t i = 0; i < budget_.factor_budget; ++i) {
      if (auto r = consider(MakeValue(Value(i)))) return *r;
    }
    if (unknown) return EvalOutcome::Unknown(unknown_reason);
    return EvalOutcome::Unknown("no zero factor among the first " +
                                std::to_string(budget_.factor_budget) +
                                " and no certificate");
  }

  // Factors just past a complete candidate list must be 1.
  void SpotCheck(const Expr& e, const Env& env,
                 const std::vector<ValuePtr>& candidates, bool compiled) {
    if (in_spot_check_ || budget_.spot_check_width <= 0) return;
    Value start = 0;
    for (const ValuePtr& c : candidates) {
      if (*c + 1 > start) start = *c + 1;
    }
    in_spot_check_ = true;
    for (int k = 0; k < budget_.spot_check_width; ++k) {
      EvalOutcome o = Factor(e, env, MakeValue(start + k), compiled);
      if (o.is_value() && o.value != 1) {
        in_spot_check_ = false;
        throw CertificateViolation(
            std::string("certificate claims factor ") + e.var + "=" +
            Value(start + k).get_str() + " is 1 but it evaluates to " +
            o.value.get_str());
      }
    }
    in_spot_check_ = false;
  }

  const EvalBudget& budget_;
  std::int64_t steps_ = 0;
  bool in_spot_check_ = false;
};

}  // namespace

namespace {

// Large powers of small integers recur across evaluations (47^L with the
// same L for every column), so the last few are kept per thread.
constexpr std::uint64_t kCachedPowerBits = 1u << 16;

const mpz_class& CachedPower(long base, unsigned long k) {
  struct Entry {
    long base;
    unsigned long k;
    mpz_class value;
  };
  thread_local std::vector<Entry> cache;
  for (std::size_t i = 0; i < cache.size(); ++i) {
    if (cache[i].base == base && cache[i].k == k) {
      if (i > 0) std::swap(cache[i], cache[i - 1]);
      return cache[i > 0 ? i - 1 : 0].value;
    }
  }
  Entry e{base, k, 0};
  mpz_class b(base);
  mpz_pow_ui(e.value.get_mpz_t(), b.get_mpz_t(), k);
  if (cache.size() >= 8) cache.pop_back();
  cache.push_back(std::move(e));
  return cache.back().value;
}

}  // namespace

EvalOutcome EvalPower(const Value& base, const Value& exponent,
                      const EvalBudget& budget) {
  if (base == 0) {
    if (exponent == 0) return EvalOutcome::Of(1);
    if (exponent > 0) return EvalOutcome::Of(0);
    return EvalOutcome::Undefined("0 raised to a negative power");
  }
  if (base == 1) {
    if (IsInteger(exponent) || exponent.get_den() == 2) return EvalOutcome::Of(1);
    return EvalOutcome::Undefined("fractional power other than a half");
  }
  const mpz_class& p = exponent.get_num();
  const mpz_class& q = exponent.get_den();
  if (q != 1 && q != 2) {
    return EvalOutcome::Undefined("fractional power other than a half");
  }
  if (base == -1 && q == 1) {
    return EvalOutcome::Of(mpz_odd_p(p.get_mpz_t()) ? -1 : 1);
  }
  mpz_class mag = abs(p);
  const std::uint64_t base_bits =
      Bits(base.get_num()) + Bits(base.get_den());
  if (mag > mpz_class(static_cast<unsigned long>(budget.max_power_bits)) ||
      base_bits * mag.get_ui() > budget.max_power_bits) {
    return EvalOutcome::Unknown("power result exceeds the size budget");
  }
  const unsigned long k = mag.get_ui();
  if (q == 1 && p > 0 && base.get_den() == 1 && base.get_num().fits_slong_p() &&
      base_bits * k > kCachedPowerBits) {
    return EvalOutcome::Of(Value(CachedPower(base.get_num().get_si(), k)));
  }
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), k);
  if (q == 2) {
    if (num < 0) return EvalOutcome::Undefined("square root of a negative");
    if (!mpz_perfect_square_p(num.get_mpz_t()) ||
        !mpz_perfect_square_p(den.get_mpz_t())) {
      return EvalOutcome::Undefined("irrational square root");
    }
    mpz_sqrt(num.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(den.get_mpz_t(), den.get_mpz_t());
  }
  Value r(num, den);
  r.canonicalize();
  if (p < 0) r = 1 / r;
  return EvalOutcome::Of(r);
}

EvalOutcome EvalExpr(const Expr& e, const Env& env, const EvalBudget& budget) {
  ExprEvaluator ev(budget);
  try {
    return ev.Eval(e, env);
  } catch (const StepsExhausted&) {
    return EvalOutcome::Unknown("step budget exhausted");
  }
}

MembershipResult GraphMembership(const Equation& eq, const Point& p,
                                 const EvalBudget& budget, const Env* extra) {
  Env xe(extra, 'x', MakeValue(p.x));
  Env ye(&xe, 'y', MakeValue(p.y));
  EvalOutcome diff = EvalExpr(*ex::Sub(eq.lhs, eq.rhs), ye, budget);
  MembershipResult r;
  switch (diff.status) {
    case EvalOutcome::Status::kValue:
      r.membership = diff.value == 0 ? Membership::kIn : Membership::kOut;
      break;
    case EvalOutcome::Status::kUndefined:
      r.membership = Membership::kOut;
      r.undefined = true;
      r.reason = diff.reason;
      break;
    case EvalOutcome::Status::kUnknown:
      r.membership = Membership::kUnknown;
      r.reason = diff.reason;
      break;
  }
  return r;
}

const SymbolString& InvalidEquationMessage() {
  static const SymbolString msg = ParseSymbols("error(invalid_equation)");
  return msg;
}

std::variant<Equation, ParseError> ParseGraphable(const SymbolString& text) {
  auto parsed = ParseEquation(text);
  if (auto* eq = std::get_if<Equation>(&parsed)) {
    for (char v : FreeVariables(*eq)) {
      if (v != 'x' && v != 'y') {
        return ParseError{0, std::string("no free variables other than x, y "
                                         "(found ") + v + ")"};
      }
    }
  }
  return parsed;
}

GraphResult GraphEquation(const Equation& eq, const Window& window,
                          int resolution, const EvalBudget& budget,
                          const Env* extra) {
  GraphResult out;
  out.bitmap = MakeWindowBitmap(window, resolution);
  out.unknown = MakeWindowBitmap(window, resolution);
  for (std::int64_t r = 0; r < out.bitmap.height(); ++r) {
    for (std::int64_t c = 0; c < out.bitmap.width(); ++c) {
      const std::int64_t col = out.bitmap.col0() + c;
      const std::int64_t row = out.bitmap.row0() + r;
      Point center{mpq_class(2 * col + 1, 2 * resolution),
                   mpq_class(2 * row + 1, 2 * resolution)};
      center.x.canonicalize();
      center.y.canonicalize();
      MembershipResult m = GraphMembership(eq, center, budget, extra);
      if (m.membership == Membership::kIn) out.bitmap.set(col, row);
      if (m.membership == Membership::kUnknown) out.unknown.set(col, row);
      if (m.undefined) ++out.undefined_pixels;
    }
  }
  return out;
}

GraphResult Gr(const SymbolString& sigma, const Window& window,
               const Font& font, const EvalBudget& budget) {
  auto parsed = ParseGraphable(sigma);
  if (auto* err = std::get_if<ParseError>(&parsed)) {
    GraphResult out;
    out.valid = false;
    out.heuristic = false;
    out.invalid_reason = err->message();
    out.bitmap = Rasterize(GlyphOfString(InvalidEquationMessage(), font), window);
    out.unknown = MakeWindowBitmap(window, font.resolution());
    return out;
  }
  return GraphEquation(std::get<Equation>(parsed), window, font.resolution(),
                       budget);
}

}  // namespace selfgraph
