#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "arith_internal.hpp"
#include "selfgraph/codec.hpp"

namespace selfgraph::arith {

using namespace detail;
namespace pr = logic::pr;

namespace {

ExprPtr BalancedProduct(const std::vector<ExprPtr>& xs, std::size_t lo,
                        std::size_t hi) {
  if (hi - lo == 1) return xs[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return Mul(BalancedProduct(xs, lo, mid), BalancedProduct(xs, mid, hi));
}

ExprPtr Pow47(ExprPtr e) { return Pow(N(47), e); }

// Candidates k in {ceil(u)-1, floor(u)} with 0 <= k < limit.
std::vector<mpz_class> CellsAround(const Value& u,
                                   const std::optional<mpz_class>& limit) {
  mpz_class fl, ce;
  mpz_fdiv_q(fl.get_mpz_t(), u.get_num_mpz_t(), u.get_den_mpz_t());
  mpz_cdiv_q(ce.get_mpz_t(), u.get_num_mpz_t(), u.get_den_mpz_t());
  std::vector<mpz_class> out;
  for (mpz_class k = ce - 1; k <= fl; ++k) {
    if (k < 0) continue;
    if (limit && k >= *limit) continue;
    out.push_back(k);
  }
  return out;
}

HintResult Listing(const std::vector<mpz_class>& ks) {
  std::vector<ValuePtr> c;
  for (const auto& k : ks) c.push_back(MakeValue(Value(k)));
  return HintResult::Candidates(std::move(c), true);
}

}  // namespace

PredPtr SymPred(Scope scope, char b, char c, char s, const ContextPtr& ctx) {
  const char j = scope.Fresh(), q = scope.Fresh(), r = scope.Fresh(),
             t = scope.Fresh();
  ExprPtr big = Inc(Mul(N(46), V(b)));
  ExprPtr lo = Pow47(Add(Inc(V(c)), V(j)));
  ExprPtr hi = Pow47(Add(Add(V(c), N(2)), V(j)));
  ExprPtr pj = Pow47(V(j));
  PredPtr body = pr::And({
      pr::Le(lo, big),
      pr::Le(Inc(big), hi),
      pr::EqAll({Sub(Sub(big, lo), Mul(N(46), Add(Mul(V(q), pj), V(r)))),
                 Sub(V(q), Add(Mul(N(47), V(t)), V(s)))}),
      pr::Le(Inc(V(r)), pj),
      pr::Le(Inc(V(s)), N(47)),
  });

  auto length_of = [ctx, b](const Env& env) -> std::optional<std::size_t> {
    const ValuePtr* bp = env.LookupPtr(b);
    if (!bp) return std::nullopt;
    auto d = ctx->Decode(*bp);
    if (!d) return std::nullopt;
    return d->text.size();
  };
  auto jh = MakeHint("unique-witness", [=](const Env& env) {
    auto len = length_of(env);
    auto cv = Nat(c, env);
    if (!len || !cv) return HintResult::None("digit operands");
    if (*cv >= *len) return NoWitness();
    return One(mpz_class(*len - 1 - cv->get_ui()));
  });
  auto split = [ctx, b, j](const Env& env) -> std::pair<ValuePtr, ValuePtr> {
    const ValuePtr* bp = env.LookupPtr(b);
    auto jv = Nat(j, env);
    if (!bp || !jv || !jv->fits_ulong_p()) return {};
    return ctx->DigitSplit(*bp, jv->get_ui());
  };
  auto qh = MakeHint("unique-witness", [=](const Env& env) {
    auto sp = split(env);
    return sp.first ? One(sp.first) : HintResult::None("digit split");
  });
  auto rh = MakeHint("unique-witness", [=](const Env& env) {
    auto sp = split(env);
    return sp.second ? One(sp.second) : HintResult::None("digit split");
  });
  auto th = MakeHint("unique-witness", [=](const Env& env) {
    auto qv = Nat(q, env);
    if (!qv) return HintResult::None("digit operands");
    return One(mpz_class(*qv / 47));
  });
  body = pr::Exists(t, body, th);
  body = pr::Exists(r, body, rh);
  body = pr::Exists(q, body, qh);
  return pr::Memo(pr::Exists(j, body, jh), "sym");
}

std::size_t GlyphDisjunctCount(const Font& font) {
  std::size_t n = 0;
  for (Symbol s : AllSymbols()) n += font.glyph(s).size();
  return n;
}

PredPtr GlyphPixelPred(Scope scope, char b, char c, char d, char e,
                       const Font& font, const ContextPtr& ctx) {
  const int g = font.resolution();
  const char s = scope.Fresh();
  PredPtr sym = SymPred(scope, b, c, s, ctx);
  const char v = scope.Fresh();
  std::vector<PredPtr> cases;
  for (Symbol k : AllSymbols()) {
    std::vector<ExprPtr> factors;
    for (const Pixel& px : font.glyph(k).pixels()) {
      factors.push_back(Sub(V(v), N(static_cast<long>(g * px.row + px.col))));
    }
    ExprPtr is_k = k.index() == 0 ? V(s) : Sub(V(s), N(k.index()));
    cases.push_back(
        pr::EqAll({is_k, BalancedProduct(factors, 0, factors.size())}));
  }
  auto vh = MakeHint("unique-witness", [=](const Env& env) {
    auto dv = Nat(d, env), ev = Nat(e, env);
    if (!dv || !ev) return HintResult::None("pixel operands");
    return One(mpz_class(g * *ev + *dv));
  });
  PredPtr lit = pr::Exists(
      v,
      pr::And(pr::Eq(Sub(V(v), Add(Mul(N(g), V(e)), V(d)))), pr::Or(cases)),
      vh);
  auto sh = MakeHint("unique-witness", [=](const Env& env) {
    const ValuePtr* bp = env.LookupPtr(b);
    auto cv = Nat(c, env);
    if (!bp || !cv) return HintResult::None("symbol operands");
    auto dec = ctx->Decode(*bp);
    if (!dec) return HintResult::None("symbol operands");
    if (*cv >= dec->text.size()) return NoWitness();
    return One(mpz_class(dec->text[cv->get_ui()].index()));
  });
  PredPtr body = pr::And({sym, pr::Le(Inc(V(d)), N(g)), pr::Le(Inc(V(e)), N(g)),
                          lit});
  return pr::Exists(s, body, sh);
}

PredPtr PixelContainmentPred(char c, char d, char e, int resolution) {
  ExprPtr g = N(resolution);
  ExprPtr dx = Sub(V('x'), V(c));
  return pr::And({pr::Le(ex::Div(V(d), g), dx),
                  pr::Le(dx, ex::Div(Inc(V(d)), g)),
                  pr::Le(ex::Div(V(e), g), V('y')),
                  pr::Le(V('y'), ex::Div(Inc(V(e)), g))});
}

PredPtr BuildP(const Font& font, const ContextPtr& ctx) {
  Scope scope;
  scope.Reserve("abcde");
  return pr::And({PixelContainmentPred('c', 'd', 'e', font.resolution()),
                  GlyphPixelPred(scope, 'b', 'c', 'd', 'e', font, ctx),
                  TracePred(scope, V('n'), V('a'), V('b'), ctx)});
}

PredPtr BuildStar(const Font& font, const ContextPtr& ctx) {
  const int g = font.resolution();
  auto ah = MakeHint("halting-run", [ctx](const Env& env) {
    auto nv = Nat('n', env);
    if (!nv) return HintResult::None("no code");
    auto f = ctx->Facts(*nv);
    if (!f->result.halted) return HintResult::None("no halt within the bound");
    return One(f->steps);
  });
  auto bh = MakeHint("halting-run", [ctx](const Env& env) {
    auto nv = Nat('n', env);
    if (!nv) return HintResult::None("no code");
    auto f = ctx->Facts(*nv);
    if (!f->result.halted) return HintResult::None("no halt within the bound");
    const auto& cap = ctx->bounds().max_output;
    if (cap && f->result.output > *cap)
      return HintResult::None("output beyond the bound");
    return One(f->output);
  });
  auto ch = MakeHint("geometric", [ctx](const Env& env) {
    const Value* x = env.Lookup('x');
    if (!x) return HintResult::None("no x");
    auto ks = CellsAround(*x, std::nullopt);
    const auto& cap = ctx->bounds().max_column;
    if (cap && !ks.empty() && ks.back() >= *cap) {
      // past the string every column is empty, which Sym decides; a column
      // inside the string but past a truncated bound is not vouched for
      const ValuePtr* bp = env.LookupPtr('b');
      auto dec = bp ? ctx->Decode(*bp) : nullptr;
      if (!dec) return HintResult::None("column beyond the bound");
      for (const auto& k : ks) {
        if (k >= *cap && k < dec->text.size()) {
          return HintResult::None("column beyond the bound");
        }
      }
    }
    return Listing(ks);
  });
  auto dh = MakeHint("geometric", [ctx, g](const Env& env) {
    const Value* x = env.Lookup('x');
    auto cv = Nat('c', env);
    if (!x || !cv) return HintResult::None("no x");
    auto ks = CellsAround(Value(g * (*x - *cv)), mpz_class(g));
    const auto& cap = ctx->bounds().max_d;
    for (const auto& k : ks) {
      if (cap && k >= *cap) return HintResult::None("d beyond the bound");
    }
    return Listing(ks);
  });
  auto eh = MakeHint("geometric", [ctx, g](const Env& env) {
    const Value* y = env.Lookup('y');
    if (!y) return HintResult::None("no y");
    auto ks = CellsAround(Value(g * *y), mpz_class(g));
    const auto& cap = ctx->bounds().max_e;
    for (const auto& k : ks) {
      if (cap && k >= *cap) return HintResult::None("e beyond the bound");
    }
    return Listing(ks);
  });
  PredPtr p = BuildP(font, ctx);
  p = pr::Exists('e', p, eh);
  p = pr::Exists('d', p, dh);
  p = pr::Exists('c', p, ch);
  p = pr::Exists('b', p, bh);
  return pr::Exists('a', p, ah);
}

// ---------------------------------------------------------------------------

namespace {

ExprPtr SubstituteVar(const ExprPtr& e, char var, const ExprPtr& value,
                      std::unordered_map<const Expr*, ExprPtr>& done) {
  auto it = done.find(e.get());
  if (it != done.end()) return it->second;
  ExprPtr out;
  switch (e->kind) {
    case Expr::Kind::kVar:
      out = e->var == var ? value : e;
      break;
    case Expr::Kind::kNum:
      out = e;
      break;
    case Expr::Kind::kBin: {
      ExprPtr a = SubstituteVar(e->lhs, var, value, done);
      ExprPtr b = SubstituteVar(e->rhs, var, value, done);
      out = (a == e->lhs && b == e->rhs) ? e : ex::Bin(e->op, a, b);
      break;
    }
    case Expr::Kind::kProd: {
      if (e->var == var) {
        out = e;
        break;
      }
      ExprPtr body = SubstituteVar(e->lhs, var, value, done);
      out = body == e->lhs ? e : ex::Prod(e->var, body, e->hint);
      break;
    }
  }
  done.emplace(e.get(), out);
  return out;
}

int QuantifierDepth(const logic::Pred& p) {
  int deepest = 0;
  for (const auto& k : p.kids) deepest = std::max(deepest, QuantifierDepth(*k));
  bool q = p.kind == logic::Pred::Kind::kExists ||
           p.kind == logic::Pred::Kind::kForall;
  return deepest + (q ? 1 : 0);
}

}  // namespace

SymbolString Numeral(const mpz_class& n) {
  if (n < 0) throw std::invalid_argument("negative numeral");
  std::string digits = n.get_str(10);
  SymbolString out;
  out.reserve(digits.size());
  for (char ch : digits) out.push_back(sym::Digit(ch - '0'));
  return out;
}

EquationTemplate BuildE(const Font& font, const ContextPtr& ctx) {
  EquationTemplate t;
  t.star = BuildStar(font, ctx);
  t.expr = logic::Compile(t.star);
  SymbolString text = Serialize(Equation{t.expr, ex::Num(0)});
  std::size_t at = text.size();
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == sym::Letter('n')) {
      if (at != text.size()) {
        throw std::logic_error("n occurs more than once in the template");
      }
      at = i;
    }
  }
  if (at == text.size()) throw std::logic_error("n does not occur in E");
  t.prefix.assign(text.begin(), text.begin() + at);
  t.suffix.assign(text.begin() + at + 1, text.end());
  t.prefix_code = codec::Encode(t.prefix);
  t.suffix_code = codec::Encode(t.suffix);
  t.quantifier_depth = QuantifierDepth(*t.star);
  return t;
}

Equation SubstituteN(const EquationTemplate& t, const mpz_class& n) {
  std::unordered_map<const Expr*, ExprPtr> done;
  return Equation{SubstituteVar(t.expr, 'n', ex::Num(n), done), ex::Num(0)};
}

SymbolString SubstituteNText(const EquationTemplate& t, const mpz_class& n) {
  SymbolString out = t.prefix;
  SymbolString num = Numeral(n);
  out.insert(out.end(), num.begin(), num.end());
  out.insert(out.end(), t.suffix.begin(), t.suffix.end());
  return out;
}

mpz_class F(const EquationTemplate& t, const mpz_class& n) {
  SymbolString num = Numeral(n);
  mpz_class head = codec::Concat(t.prefix_code, codec::Encode(num), num.size());
  return codec::Concat(head, t.suffix_code, t.suffix.size());
}

Equation PixelSetEquation(const PixelSet& pixels) {
  const int g = pixels.resolution();
  std::vector<PredPtr> cells;
  for (const Pixel& px : pixels.pixels()) {
    if (px.col < 0 || px.row < 0) {
      throw std::invalid_argument("pixel with a negative coordinate");
    }
    cells.push_back(pr::And(
        {pr::Le(ex::Div(N(px.col), N(g)), V('x')),
         pr::Le(V('x'), ex::Div(N(px.col + 1), N(g))),
         pr::Le(ex::Div(N(px.row), N(g)), V('y')),
         pr::Le(V('y'), ex::Div(N(px.row + 1), N(g)))}));
  }
  if (cells.empty()) return Equation{N(1), N(0)};
  return Equation{logic::Compile(pr::Or(cells)), N(0)};
}

std::vector<SizeEstimate> DryRun(const Font& font) {
  auto ctx = std::make_shared<WitnessContext>();
  auto size_of = [](const PredPtr& p) {
    return static_cast<std::uint64_t>(Serialize(*logic::Compile(p)).size());
  };
  Scope scope;
  scope.Reserve("abcde");
  std::vector<SizeEstimate> out;
  out.push_back({"symbols.pixel", size_of(PixelContainmentPred('c', 'd', 'e',
                                                        font.resolution()))});
  out.push_back({"symbols.sym", size_of(SymPred(scope, 'b', 'c', 's', ctx))});
  out.push_back(
      {"symbols.glyph", size_of(GlyphPixelPred(scope, 'b', 'c', 'd', 'e', font, ctx))});
  out.push_back({"symbols.trace", size_of(TracePred(scope, V('n'), V('a'), V('b'), ctx))});
  EquationTemplate t = BuildE(font, ctx);
  out.push_back({"symbols.E", static_cast<std::uint64_t>(t.prefix.size() +
                                                 t.suffix.size() - 1)});
  out.push_back({"quantifier_depth",
                 static_cast<std::uint64_t>(t.quantifier_depth)});
  out.push_back({"glyph_disjuncts", GlyphDisjunctCount(font)});
  return out;
}

}  // namespace selfgraph::arith
