#include <algorithm>
#include <stdexcept>

#include "arith_internal.hpp"
#include "selfgraph/codec.hpp"

namespace selfgraph::arith {

using namespace detail;
namespace pr = logic::pr;

namespace detail {

HintPtr MakeHint(std::string tag, std::function<HintResult(const Env&)> fn) {
  auto h = std::make_shared<WitnessHint>();
  h->tag = std::move(tag);
  h->fn = std::move(fn);
  return h;
}

HintResult One(const mpz_class& v) {
  if (v < 0) return NoWitness();
  return HintResult::Candidates({MakeValue(Value(v))}, true);
}

HintResult One(ValuePtr v) { return HintResult::Candidates({std::move(v)}, true); }

HintResult NoWitness() { return HintResult::Candidates({}, true); }

std::optional<mpz_class> Nat(const Expr& e, const Env& env) {
  if (e.kind == Expr::Kind::kVar) return Nat(e.var, env);
  if (e.kind == Expr::Kind::kNum) return e.num;
  EvalOutcome o = EvalExpr(e, env, EvalBudget{});
  if (!o.is_value() || o.value.get_den() != 1 || o.value < 0) return std::nullopt;
  return o.value.get_num();
}

std::optional<mpz_class> Nat(char v, const Env& env) {
  const Value* x = env.Lookup(v);
  if (!x || x->get_den() != 1 || *x < 0) return std::nullopt;
  return x->get_num();
}

}  // namespace detail

mpz_class Beta(const mpz_class& k1, const mpz_class& k2, const mpz_class& i) {
  mpz_class m = 1 + (i + 1) * k2;
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), k1.get_mpz_t(), m.get_mpz_t());
  return r;
}

std::pair<mpz_class, mpz_class> BetaEncode(const std::vector<mpz_class>& seq) {
  mpz_class l = 1;
  mpz_class top = 0;
  for (std::size_t i = 1; i <= std::max<std::size_t>(seq.size(), 1); ++i) {
    mpz_lcm_ui(l.get_mpz_t(), l.get_mpz_t(), i);
  }
  for (const auto& v : seq) {
    if (v < 0) throw std::invalid_argument("negative sequence entry");
    top = std::max(top, v);
  }
  mpz_class k2 = l * (top / l + 1);
  mpz_class x = 0, mod = 1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    mpz_class m = 1 + mpz_class(i + 1) * k2;
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), mod.get_mpz_t(), m.get_mpz_t());
    mpz_class t = (seq[i] - x) * inv;
    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t());
    x += mod * t;
    mod *= m;
  }
  return {x, k2};
}

// ---------------------------------------------------------------------------

WitnessContext::WitnessContext(TraceWitness mode, WitnessBounds bounds)
    : mode_(mode), bounds_(std::move(bounds)) {}

void WitnessContext::set_bounds(const WitnessBounds& b) {
  std::lock_guard<std::mutex> lock(mu_);
  bounds_ = b;
  facts_.clear();
  codes_.clear();
}

std::shared_ptr<const WitnessContext::RunFacts> WitnessContext::Facts(
    const mpz_class& n) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = facts_.find(n);
    if (it != facts_.end()) return it->second;
  }
  auto f = std::make_shared<RunFacts>();
  f->program = machine::DecodeProgram(n);
  f->parts = machine::SplitCode(n);
  f->result = machine::Interpreter(f->program).Run(0, bounds_.max_steps);
  f->register_bound = machine::RegisterBound(f->program);
  f->steps = MakeValue(Value(mpz_class(f->result.steps)));
  f->output = MakeValue(Value(f->result.output));
  std::lock_guard<std::mutex> lock(mu_);
  return facts_.emplace(n, std::move(f)).first->second;
}

std::shared_ptr<const WitnessContext::SequenceCode> WitnessContext::Code(
    const mpz_class& n, std::uint64_t a, std::uint64_t r) {
  auto key = std::make_tuple(n, a, r);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = codes_.find(key);
    if (it != codes_.end()) return it->second;
  }
  if (a > bounds_.max_steps) return nullptr;
  auto facts = Facts(n);
  auto snaps = machine::Interpreter(facts->program).Trace(0, a, r);
  while (snaps.size() < a + 1) snaps.push_back(snaps.back());
  std::vector<mpz_class> seq;
  seq.reserve(snaps.size() * (r + 1));
  for (const auto& s : snaps) {
    seq.push_back(mpz_class(s.pc));
    for (const auto& v : s.regs) seq.push_back(v);
  }
  auto [k1, k2] = BetaEncode(seq);
  auto c = std::make_shared<SequenceCode>();
  c->k1 = MakeValue(Value(k1));
  c->k2 = MakeValue(Value(k2));
  std::lock_guard<std::mutex> lock(mu_);
  return codes_.emplace(key, std::move(c)).first->second;
}

std::shared_ptr<const WitnessContext::Decoded> WitnessContext::Decode(
    const ValuePtr& b) {
  std::lock_guard<std::mutex> lock(mu_);
  if (b.get() == last_b_) return last_decoded_;
  if (b->get_den() != 1 || *b < 0) return nullptr;
  auto d = std::make_shared<Decoded>();
  const mpz_class& n = b->get_num();
  d->text = codec::Decode(n);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 47, d->text.size());
  d->offset = n - (p - 1) / 46;
  last_b_ = b.get();
  last_b_keep_ = b;
  last_decoded_ = d;
  std::get<0>(last_split_) = nullptr;
  return d;
}

std::pair<ValuePtr, ValuePtr> WitnessContext::DigitSplit(const ValuePtr& b,
                                                         std::uint64_t j) {
  auto d = Decode(b);
  if (!d) return {};
  std::lock_guard<std::mutex> lock(mu_);
  if (std::get<0>(last_split_) == b.get() && std::get<1>(last_split_) == j) {
    return {std::get<2>(last_split_), std::get<3>(last_split_)};
  }
  mpz_class p, q, r;
  mpz_ui_pow_ui(p.get_mpz_t(), 47, j);
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), d->offset.get_mpz_t(),
              p.get_mpz_t());
  auto qv = MakeValue(Value(q));
  auto rv = MakeValue(Value(r));
  last_split_ = {b.get(), j, qv, rv};
  return {qv, rv};
}

// ---------------------------------------------------------------------------

PredPtr BetaPred(Scope s, ExprPtr k1, ExprPtr k2, ExprPtr index,
                 ExprPtr value) {
  const char q = s.Fresh();
  ExprPtr m = Inc(Mul(Inc(index), k2));
  auto hint = MakeHint("unique-witness", [=](const Env& env) {
    auto kv = Nat(*k1, env);
    auto mv = Nat(*m, env);
    if (!kv || !mv || *mv == 0) return HintResult::None("beta operands");
    return One(mpz_class(*kv / *mv));
  });
  return pr::Exists(
      q,
      pr::And(pr::Eq(Sub(k1, Add(Mul(V(q), m), value))),
              pr::Le(Inc(value), m)),
      hint);
}

namespace {

class TraceBuilder {
 public:
  TraceBuilder(ExprPtr n, ExprPtr a, ExprPtr b, ContextPtr ctx)
      : n_(std::move(n)), a_(std::move(a)), b_(std::move(b)),
        ctx_(std::move(ctx)) {}

  PredPtr Build(Scope s) {
    w_ = s.Fresh();
    l_ = s.Fresh();
    g_ = s.Fresh();
    p_ = s.Fresh();
    ExprPtr pw = Pow(N(2), V(w_));
    ExprPtr gsize = Pow(N(2), Mul(Mul(N(4), V(w_)), V(l_)));
    ExprPtr code = Add(
        Sub(pw, N(1)),
        Mul(Pow(N(2), Inc(V(w_))),
            Add(V(l_), Mul(pw, Add(V(g_), Mul(gsize, V(p_)))))));
    PredPtr header = pr::And({pr::Eq(Sub(n_, code)), pr::Le(Inc(V(l_)), pw),
                              pr::Le(Inc(V(g_)), gsize)});

    r_ = s.Fresh();
    PredPtr body = pr::And(header, pr::Exists(r_, Registers(s), RHint()));
    body = pr::Exists(p_, body, PartHint(3));
    body = pr::Exists(g_, body, PartHint(2));
    body = pr::Exists(l_, body, PartHint(1));
    return pr::Exists(w_, body, PartHint(0));
  }

 private:
  ExprPtr Pw() const { return Pow(N(2), V(w_)); }
  ExprPtr Width() const { return Inc(V(r_)); }
  ExprPtr Cur(ExprPtr i) const { return Mul(i, Width()); }
  ExprPtr Next(ExprPtr i) const { return Mul(Inc(i), Width()); }
  ExprPtr RegAt(ExprPtr base, ExprPtr u) const { return Add(Inc(base), u); }

  PredPtr Read(Scope s, ExprPtr idx, ExprPtr val) const {
    return BetaPred(s, V(k_), V(m_), idx, val);
  }

  // Witness hint for a variable holding beta(k, m, idx).
  HintPtr ReadHint(ExprPtr idx) const {
    const char k = k_, m = m_;
    return MakeHint("unique-witness", [=](const Env& env) {
      auto kv = Nat(k, env);
      auto mv = Nat(m, env);
      auto iv = Nat(*idx, env);
      if (!kv || !mv || !iv) return HintResult::None("beta operands");
      return One(Beta(*kv, *mv, *iv));
    });
  }

  std::optional<mpz_class> EnvN(const Env& env) const { return Nat(*n_, env); }

  HintPtr PartHint(int which) const {
    auto ctx = ctx_;
    ExprPtr n = n_;
    return MakeHint("unique-witness", [=](const Env& env) {
      auto nv = Nat(*n, env);
      if (!nv) return HintResult::None("code");
      const auto& parts = ctx->Facts(*nv)->parts;
      switch (which) {
        case 0: return One(mpz_class(parts.w));
        case 1: return One(parts.length);
        case 2: return One(parts.g);
        default: return One(parts.pool);
      }
    });
  }

  // Complete because the body holds for some r only if it holds for the
  // least r bounding the register fields.
  HintPtr RHint() const {
    auto ctx = ctx_;
    ExprPtr n = n_;
    return MakeHint("least-witness", [=](const Env& env) {
      auto nv = Nat(*n, env);
      if (!nv) return HintResult::None("code");
      return One(ctx->Facts(*nv)->register_bound);
    });
  }

  // o, f, s, t are the fields of instruction h; z and q are transient.
  PredPtr Fetch(Scope s, char h, char o, char f, char a, char t) const {
    const char z = s.Fresh();
    const char q = s.Fresh();
    ExprPtr pw = Pw();
    ExprPtr shift = Pow(N(2), Mul(Mul(N(4), V(w_)), V(h)));
    ExprPtr word = Add(
        V(o),
        Mul(pw, Add(V(f), Mul(pw, Add(V(a), Mul(pw, Add(V(t), Mul(pw, V(q)))))))));
    PredPtr rel = pr::And({pr::Eq(Sub(V(g_), Add(V(z), Mul(shift, word)))),
                           pr::Le(Inc(V(z)), shift), pr::Le(Inc(V(o)), pw),
                           pr::Le(Inc(V(f)), pw), pr::Le(Inc(V(a)), pw),
                           pr::Le(Inc(V(t)), pw)});
    const char w = w_, g = g_;
    auto low = MakeHint("unique-witness", [=](const Env& env) {
      auto wv = Nat(w, env), gv = Nat(g, env), hv = Nat(h, env);
      if (!wv || !gv || !hv || !wv->fits_ulong_p() || !hv->fits_ulong_p())
        return HintResult::None("fetch operands");
      mpz_class r;
      mpz_fdiv_r_2exp(r.get_mpz_t(), gv->get_mpz_t(),
                      4 * wv->get_ui() * hv->get_ui());
      return One(r);
    });
    auto high = MakeHint("unique-witness", [=](const Env& env) {
      auto wv = Nat(w, env), gv = Nat(g, env), hv = Nat(h, env);
      if (!wv || !gv || !hv || !wv->fits_ulong_p() || !hv->fits_ulong_p())
        return HintResult::None("fetch operands");
      mpz_class r;
      mpz_fdiv_q_2exp(r.get_mpz_t(), gv->get_mpz_t(),
                      4 * wv->get_ui() * (hv->get_ui() + 1));
      return One(r);
    });
    return pr::Exists(z, pr::Exists(q, rel, high), low);
  }

  HintPtr FieldHint(char h, int j) const {
    const char w = w_, g = g_;
    return MakeHint("unique-witness", [=](const Env& env) {
      auto wv = Nat(w, env), gv = Nat(g, env), hv = Nat(h, env);
      if (!wv || !gv || !hv || !wv->fits_ulong_p() || !hv->fits_ulong_p())
        return HintResult::None("fetch operands");
      const std::uint64_t wb = wv->get_ui();
      mpz_class r;
      mpz_fdiv_q_2exp(r.get_mpz_t(), gv->get_mpz_t(),
                      wb * (4 * hv->get_ui() + j));
      mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), wb);
      return One(r);
    });
  }

  // exists o, f, s, t: fetch(h) and body(o, f, s, t)
  template <typename F>
  PredPtr WithFields(Scope s, char h, F body) const {
    const char o = s.Fresh(), f = s.Fresh(), a = s.Fresh(), t = s.Fresh();
    PredPtr p = pr::And(Fetch(s, h, o, f, a, t), body(s, o, f, a, t));
    p = pr::Exists(t, p, FieldHint(h, 3));
    p = pr::Exists(a, p, FieldHint(h, 2));
    p = pr::Exists(f, p, FieldHint(h, 1));
    return pr::Exists(o, p, FieldHint(h, 0));
  }

  PredPtr Registers(Scope s) {
    Scope t = s;
    const char h = t.Fresh();
    ExprPtr r = V(r_);
    PredPtr ok = WithFields(t, h, [&](Scope, char o, char f, char a, char t) {
      return pr::Or({pr::Eq(V(o)), pr::Le(N(9), V(o)), pr::Eq(Sub(V(o), N(8))),
                     pr::And(pr::Le(Inc(V(f)), r),
                             pr::Or({pr::Eq(Sub(V(o), N(1))),
                                     pr::Eq(Sub(V(o), N(7))),
                                     pr::And(pr::Le(Inc(V(a)), r),
                                             pr::Le(Inc(V(t)), r))}))});
    });
    PredPtr bound = pr::And(pr::Le(N(1), r), pr::ForallBelow(h, V(l_), ok));
    return pr::And(bound, Run(s));
  }

  PredPtr Run(Scope s) {
    m_ = s.Fresh();
    k_ = s.Fresh();
    PredPtr init;
    {
      Scope t = s;
      const char u = t.Fresh();
      init = pr::And(Read(t, N(0), N(0)),
                     pr::ForallBelow(u, V(r_), Read(t, Inc(V(u)), N(0))));
    }
    PredPtr steps;
    {
      Scope t = s;
      const char i = t.Fresh();
      steps = pr::ForallBelow(i, a_, Step(t, V(i)));
    }
    // the final configuration first; a wrong (a, b) usually fails there
    PredPtr fin = Final(s);
    PredPtr body = pr::And({fin, init, steps});
    return pr::Exists(m_, pr::Exists(k_, body, K1Hint()), K2Hint());
  }

  HintPtr K2Hint() const {
    auto ctx = ctx_;
    ExprPtr n = n_, a = a_, b = b_;
    const char r = r_;
    if (ctx->mode() == TraceWitness::kReplay) {
      return MakeHint("trace-replay", [=](const Env& env) {
        auto nv = Nat(*n, env), av = Nat(*a, env), bv = Nat(*b, env),
             rv = Nat(r, env);
        if (!nv || !av || !bv || !rv) return HintResult::None("trace operands");
        auto facts = ctx->Facts(*nv);
        if (*rv < facts->register_bound)
          return HintResult::None("register bound below the program's");
        const auto& run = facts->result;
        if (!run.halted && *av >= run.steps)
          return HintResult::None("run exceeds the step bound");
        bool hit = run.halted && *av == run.steps && *bv == run.output;
        return HintResult::Decided(hit, "replayed run");
      });
    }
    return MakeHint("unique-witness", [=](const Env& env) {
      auto nv = Nat(*n, env), av = Nat(*a, env), rv = Nat(r, env);
      if (!nv || !av || !rv || !av->fits_ulong_p() || !rv->fits_ulong_p())
        return HintResult::None("trace operands");
      if (*rv < ctx->Facts(*nv)->register_bound)
        return HintResult::None("register bound below the program's");
      auto code = ctx->Code(*nv, av->get_ui(), rv->get_ui());
      if (!code) return HintResult::None("trace beyond the step bound");
      return One(code->k2);
    });
  }

  HintPtr K1Hint() const {
    auto ctx = ctx_;
    ExprPtr n = n_, a = a_;
    const char r = r_, m = m_;
    return MakeHint("unique-witness", [=](const Env& env) {
      auto nv = Nat(*n, env), av = Nat(*a, env), rv = Nat(r, env),
           mv = Nat(m, env);
      if (!nv || !av || !rv || !mv || !av->fits_ulong_p() || !rv->fits_ulong_p())
        return HintResult::None("trace operands");
      auto code = ctx->Code(*nv, av->get_ui(), rv->get_ui());
      if (!code || *code->k2 != *mv) return HintResult::None("no sequence code");
      return One(code->k1);
    });
  }

  // Frame: every register u < r other than `dest` carries over.
  PredPtr Frame(Scope s, ExprPtr i, ExprPtr dest) const {
    const char u = s.Fresh();
    const char v = s.Fresh();
    ExprPtr src = RegAt(Cur(i), V(u));
    PredPtr same = pr::Exists(
        v, pr::And(Read(s, src, V(v)), Read(s, RegAt(Next(i), V(u)), V(v))),
        ReadHint(src));
    PredPtr body = dest ? pr::Or(pr::Eq(Sub(V(u), dest)), same) : same;
    return pr::ForallBelow(u, V(r_), body);
  }

  PredPtr Jump(Scope s, ExprPtr i, ExprPtr label) const {
    return pr::Or(pr::And(pr::Le(label, V(l_)), Read(s, Next(i), label)),
                  pr::And(pr::Le(V(l_), label), Read(s, Next(i), V(l_))));
  }

  PredPtr Step(Scope s, ExprPtr i) const {
    const char h = s.Fresh();
    PredPtr cases = WithFields(s, h, [&](Scope t, char o, char f, char a,
                                         char tt) {
      ExprPtr advance = Inc(V(h));
      ExprPtr O = V(o), F = V(f), S = V(a), T = V(tt);
      PredPtr set = pr::And({pr::Eq(Sub(O, N(1))), Read(t, Next(i), advance),
                             Frame(t, i, F), SetValue(t, i, F, S, T)});
      PredPtr alu = pr::And({pr::Le(N(2), O), pr::Le(O, N(6)),
                             Read(t, Next(i), advance), Frame(t, i, F),
                             AluValue(t, i, O, F, S, T)});
      PredPtr jz;
      {
        Scope u = t;
        const char x = u.Fresh();
        ExprPtr src = RegAt(Cur(i), F);
        PredPtr branch =
            pr::Or(pr::And(pr::Eq(V(x)), Jump(u, i, S)),
                   pr::And(pr::Le(N(1), V(x)), Read(u, Next(i), advance)));
        jz = pr::And({pr::Eq(Sub(O, N(7))), Frame(t, i, nullptr),
                      pr::Exists(x, pr::And(Read(u, src, V(x)), branch),
                                 ReadHint(src))});
      }
      PredPtr jmp = pr::And(
          {pr::Eq(Sub(O, N(8))), Frame(t, i, nullptr), Jump(t, i, F)});
      return pr::Or({set, alu, jz, jmp});
    });
    PredPtr body = pr::And(
        {Read(s, Cur(i), V(h)), pr::Le(Inc(V(h)), V(l_)), cases});
    return pr::Exists(h, body, ReadHint(Cur(i)));
  }

  // The destination register of a SET receives its pool constant.
  PredPtr SetValue(Scope s, ExprPtr i, ExprPtr f, ExprPtr start,
                   ExprPtr len) const {
    const char z = s.Fresh();
    const char q = s.Fresh();
    const char mm = s.Fresh();
    ExprPtr dst = RegAt(Next(i), f);
    ExprPtr p = V(p_);
    ExprPtr lo = Pow(N(2), start);
    PredPtr tail = pr::EqAll({len, V(q), Sub(p, Add(V(mm), Mul(lo, V(z))))});
    PredPtr slot = pr::And(
        {pr::Le(N(1), len), pr::Le(Inc(V(z)), Pow(N(2), len)),
         pr::Eq(Sub(p, Add(V(mm), Mul(lo, Add(V(z), Mul(Pow(N(2), len), V(q)))))))});
    PredPtr rel = pr::And(pr::Le(Inc(V(mm)), lo), pr::Or(tail, slot));
    const char pc = p_;
    auto low = MakeHint("unique-witness", [=](const Env& env) {
      auto pv = Nat(pc, env);
      auto sv = Nat(*start, env);
      if (!pv || !sv || !sv->fits_ulong_p()) return HintResult::None("pool");
      mpz_class r;
      mpz_fdiv_r_2exp(r.get_mpz_t(), pv->get_mpz_t(), sv->get_ui());
      return One(r);
    });
    auto high = MakeHint("unique-witness", [=](const Env& env) {
      auto pv = Nat(pc, env);
      auto sv = Nat(*start, env);
      auto tv = Nat(*len, env);
      if (!pv || !sv || !tv || !sv->fits_ulong_p() || !tv->fits_ulong_p())
        return HintResult::None("pool");
      if (*tv == 0) return One(mpz_class(0));
      mpz_class r;
      mpz_fdiv_q_2exp(r.get_mpz_t(), pv->get_mpz_t(),
                      sv->get_ui() + tv->get_ui());
      return One(r);
    });
    PredPtr inner = pr::Exists(q, pr::Exists(mm, rel, low), high);
    return pr::Exists(z, pr::And(Read(s, dst, V(z)), inner), ReadHint(dst));
  }

  PredPtr AluValue(Scope s, ExprPtr i, ExprPtr o, ExprPtr f, ExprPtr a,
                   ExprPtr t) const {
    const char x = s.Fresh(), y = s.Fresh(), z = s.Fresh();
    ExprPtr X = V(x), Y = V(y), Z = V(z);
    ExprPtr xs = RegAt(Cur(i), a), ys = RegAt(Cur(i), t),
            zs = RegAt(Next(i), f);
    Scope u = s;
    const char e = u.Fresh();
    auto rem = MakeHint("unique-witness", [=](const Env& env) {
      auto xv = Nat(x, env), yv = Nat(y, env), zv = Nat(z, env);
      if (!xv || !yv || !zv) return HintResult::None("operands");
      mpz_class r = *xv - *zv * *yv;
      return r < 0 ? NoWitness() : One(r);
    });
    auto quo = MakeHint("unique-witness", [=](const Env& env) {
      auto xv = Nat(x, env), yv = Nat(y, env);
      if (!xv || !yv) return HintResult::None("operands");
      if (*yv == 0) return NoWitness();
      return One(mpz_class(*xv / *yv));
    });
    PredPtr rel = pr::Or({
        pr::EqAll({Sub(o, N(2)), Sub(Z, Add(X, Y))}),
        pr::And(pr::Eq(Sub(o, N(3))),
                pr::Or(pr::And(pr::Le(X, Y), pr::Eq(Z)),
                       pr::And(pr::Le(Y, X), pr::Eq(Sub(Z, Sub(X, Y)))))),
        pr::EqAll({Sub(o, N(4)), Sub(Z, Mul(X, Y))}),
        pr::And(pr::Eq(Sub(o, N(5))),
                pr::Or(pr::EqAll({Y, Z}),
                       pr::Exists(e,
                                  pr::And(pr::Eq(Sub(X, Add(Mul(Z, Y), V(e)))),
                                          pr::Le(Inc(V(e)), Y)),
                                  rem))),
        pr::And(pr::Eq(Sub(o, N(6))),
                pr::Or(pr::EqAll({Y, Sub(Z, X)}),
                       pr::Exists(e,
                                  pr::And(pr::Eq(Sub(X, Add(Mul(V(e), Y), Z))),
                                          pr::Le(Inc(Z), Y)),
                                  quo))),
    });
    PredPtr body = pr::And({Read(s, xs, X), Read(s, ys, Y), Read(s, zs, Z), rel});
    body = pr::Exists(z, body, ReadHint(zs));
    body = pr::Exists(y, body, ReadHint(ys));
    return pr::Exists(x, body, ReadHint(xs));
  }

  // Halted at step a with b in register 0.
  PredPtr Final(Scope s) const {
    ExprPtr base = Cur(a_);
    Scope t = s;
    const char h = t.Fresh();
    PredPtr stopped = pr::Or(
        pr::Le(V(l_), V(h)),
        WithFields(t, h, [](Scope, char o, char, char, char) {
          return pr::Or(pr::Eq(V(o)), pr::Le(N(9), V(o)));
        }));
    PredPtr pc = pr::Exists(h, pr::And(Read(t, base, V(h)), stopped),
                            ReadHint(base));
    return pr::And(pc, Read(s, Inc(base), b_));
  }

  ExprPtr n_, a_, b_;
  ContextPtr ctx_;
  char w_ = 0, l_ = 0, g_ = 0, p_ = 0, r_ = 0, m_ = 0, k_ = 0;
};

}  // namespace

PredPtr TracePred(Scope s, ExprPtr n, ExprPtr a, ExprPtr b,
                  const ContextPtr& ctx) {
  TraceBuilder tb(n, a, b, ctx);
  return pr::Memo(tb.Build(s), "trace");
}

}  // namespace selfgraph::arith
