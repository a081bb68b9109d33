#include "selfgraph/selfgraph.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "selfgraph/codec.hpp"

namespace selfgraph {

void KeyValues::Set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

void KeyValues::Set(const std::string& key, const mpz_class& value) {
  Set(key, value.get_str());
}

void KeyValues::Set(const std::string& key, std::uint64_t value) {
  Set(key, std::to_string(value));
}

bool KeyValues::Has(const std::string& key) const {
  for (const auto& kv : items_) {
    if (kv.first == key) return true;
  }
  return false;
}

const std::string& KeyValues::Get(const std::string& key) const {
  for (const auto& kv : items_) {
    if (kv.first == key) return kv.second;
  }
  throw std::invalid_argument("missing key: " + key);
}

mpz_class KeyValues::GetNumber(const std::string& key) const {
  mpz_class v;
  if (v.set_str(Get(key), 10) != 0) {
    throw std::invalid_argument("not a number: " + key);
  }
  return v;
}

std::string KeyValues::ToText() const {
  std::string out;
  for (const auto& [k, v] : items_) out += k + " = " + v + "\n";
  return out;
}

KeyValues KeyValues::Parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    kv.Set(std::string(trim(line.substr(0, eq))),
           std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

// ---------------------------------------------------------------------------

KeyValues Certificate::ToKeyValues() const {
  KeyValues kv;
  kv.Set("resolution", static_cast<std::uint64_t>(resolution));
  kv.Set("length", length);
  kv.Set("witness",
         witness == arith::TraceWitness::kReplay ? "replay" : "construct");
  kv.Set("bound.a", a_bound);
  kv.Set("bound.b", b_bound);
  kv.Set("bound.c", c_bound);
  kv.Set("bound.d", d_bound);
  kv.Set("bound.e", e_bound);
  kv.Set("a", a);
  kv.Set("n", n);
  kv.Set("b", b);
  return kv;
}

Certificate Certificate::FromKeyValues(const KeyValues& kv) {
  Certificate c;
  c.resolution = static_cast<int>(kv.GetNumber("resolution").get_si());
  c.length = kv.GetNumber("length").get_ui();
  const std::string& w = kv.Get("witness");
  if (w == "replay") {
    c.witness = arith::TraceWitness::kReplay;
  } else if (w == "construct") {
    c.witness = arith::TraceWitness::kConstruct;
  } else {
    throw std::invalid_argument("unknown witness mode: " + w);
  }
  c.a_bound = kv.GetNumber("bound.a");
  c.b_bound = kv.GetNumber("bound.b");
  c.c_bound = kv.GetNumber("bound.c");
  c.d_bound = kv.GetNumber("bound.d");
  c.e_bound = kv.GetNumber("bound.e");
  c.a = kv.GetNumber("a");
  c.n = kv.GetNumber("n");
  c.b = kv.GetNumber("b");
  return c;
}

SymbolString SigmaOf(const Certificate& c) { return codec::Decode(c.b); }

Window StringWindow(std::size_t length) {
  return Window{0, 0, static_cast<std::int64_t>(length), 1};
}

// ---------------------------------------------------------------------------

machine::Program BuildGProgram(const arith::EquationTemplate& t) {
  machine::Asm a;
  auto after = a.NewLabel();
  a.Inline(arith::FProgram(t), 0, after);
  a.Bind(after);
  // make_const(X) = 51 + 2^21 X
  a.Set(1, mpz_class(1) << 21);
  a.Mul(0, 0, 1);
  a.Set(1, 51);
  a.Add(0, 0, 1);
  a.Halt();
  return a.Finish();
}

BuildOutput BuildSelfGraphing(const Font& font, const BuildOptions& options) {
  BuildOutput out;
  auto ctx = std::make_shared<arith::WitnessContext>(options.witness);
  out.tmpl = arith::BuildE(font, ctx);
  out.f_program = arith::FProgram(out.tmpl);
  out.g_program = BuildGProgram(out.tmpl);
  out.fixed_point = machine::MakeFixedPoint(out.g_program);
  const mpz_class& n = out.fixed_point.index;
  out.run = machine::Run(out.fixed_point.program, 0, options.step_budget);
  if (!out.run.halted) {
    throw BuildError("the fixed point did not halt within " +
                     std::to_string(options.step_budget) + " steps");
  }
  const mpz_class fn = arith::F(out.tmpl, n);
  if (out.run.output != fn) throw BuildError("run output differs from f(n*)");
  out.sigma = arith::SubstituteNText(out.tmpl, n);
  if (codec::Encode(out.sigma) != out.run.output) {
    throw BuildError("decode(b*) differs from E(n*)=0");
  }
  if (std::holds_alternative<ParseError>(ParseGraphable(out.sigma))) {
    throw BuildError("sigma does not parse as a graphable equation");
  }

  Certificate& c = out.certificate;
  c.n = n;
  c.a = out.run.steps;
  c.b = out.run.output;
  c.length = out.sigma.size();
  c.resolution = font.resolution();
  c.witness = options.witness;
  c.a_bound = c.a;
  c.b_bound = c.b;
  c.c_bound = c.length;
  c.d_bound = font.resolution();
  c.e_bound = font.resolution();

  KeyValues& r = out.report;
  r.Set("resolution", static_cast<std::uint64_t>(font.resolution()));
  r.Set("glyph_disjuncts", arith::GlyphDisjunctCount(font));
  r.Set("template_symbols", out.tmpl.prefix.size() + out.tmpl.suffix.size() + 1);
  r.Set("quantifier_depth", static_cast<std::uint64_t>(out.tmpl.quantifier_depth));
  r.Set("f_instructions", out.f_program.size());
  r.Set("g_instructions", out.g_program.size());
  r.Set("fixed_point_instructions", out.fixed_point.program.size());
  r.Set("n_bits", static_cast<std::uint64_t>(mpz_sizeinbase(n.get_mpz_t(), 2)));
  r.Set("n_digits", arith::Numeral(n).size());
  r.Set("run_steps", out.run.steps);
  r.Set("b_bits",
        static_cast<std::uint64_t>(mpz_sizeinbase(out.run.output.get_mpz_t(), 2)));
  r.Set("sigma_symbols", out.sigma.size());
  r.Set("pixels", static_cast<std::uint64_t>(out.sigma.size()) *
                      font.resolution() * font.resolution());
  return out;
}

// ---------------------------------------------------------------------------

KeyValues VerifyReport::ToKeyValues() const {
  KeyValues kv;
  kv.Set("ok", ok ? "true" : "false");
  kv.Set("pixels", pixels);
  kv.Set("lit", lit);
  kv.Set("mismatches", mismatches);
  kv.Set("unknown", unknown);
  kv.Set("exterior_checked", exterior_checked);
  kv.Set("literal_in_checked", literal_in_checked);
  kv.Set("literal_out_checked", literal_out_checked);
  kv.Set("pbm_identical", pbm_identical ? "true" : "false");
  for (std::size_t i = 0; i < failures.size(); ++i) {
    kv.Set("failure." + std::to_string(i), failures[i]);
  }
  return kv;
}

namespace {

Point Center(std::int64_t col, std::int64_t row, int g) {
  Point p{mpq_class(2 * col + 1, 2 * g), mpq_class(2 * row + 1, 2 * g)};
  p.x.canonicalize();
  p.y.canonicalize();
  return p;
}

logic::Truth EvalStar(logic::PredEvaluator& ev, const logic::Pred& star,
                      const Env& base, const Point& p) {
  Env xe(&base, 'x', MakeValue(p.x));
  Env ye(&xe, 'y', MakeValue(p.y));
  return ev.Eval(star, ye).truth;
}

// Deterministic points outside [0, len] x [0, 1], never on a grid line.
std::vector<Point> ExteriorSamples(std::size_t count, std::size_t len, int g,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const long den = 7L * g;
  auto frac = [&](long lo_units, long hi_units) {
    std::uniform_int_distribution<long> d(lo_units * den, hi_units * den - 1);
    long k = d(rng);
    if (k % 7 == 0) ++k;
    mpq_class q(k, den);
    q.canonicalize();
    return q;
  };
  const long L = static_cast<long>(len);
  std::vector<Point> out;
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % 4) {
      case 0: out.push_back({frac(-2, L + 2), frac(1, 4)}); break;     // above
      case 1: out.push_back({frac(-2, L + 2), frac(-3, 0)}); break;    // below
      case 2: out.push_back({frac(-3, 0), frac(0, 1)}); break;         // left
      default: out.push_back({frac(L, L + 3), frac(0, 1)}); break;     // right
    }
  }
  return out;
}

}  // namespace

VerifyReport VerifySelfGraphing(const SymbolString& sigma,
                                const Certificate& cert, const Font& font,
                                const VerifyOptions& options) {
  VerifyReport rep;
  auto fail = [&](std::string why) { rep.failures.push_back(std::move(why)); };
  auto note = [&](const std::string& s) {
    if (options.progress) options.progress(s);
  };
  const int g = font.resolution();
  const std::size_t len = sigma.size();

  auto parsed = ParseGraphable(sigma);
  const bool graphable = std::holds_alternative<Equation>(parsed);
  if (!graphable) {
    fail("sigma is not a graphable equation: " +
         std::get<ParseError>(parsed).message());
  }
  if (cert.length != len) fail("certificate length differs from |sigma|");
  if (cert.resolution != g) {
    fail("certificate resolution differs from the font");
    return rep;
  }
  if (codec::Encode(sigma) != cert.b) fail("certificate b is not the code of sigma");
  if (!cert.a_bound.fits_ulong_p() || !cert.d_bound.fits_slong_p() ||
      !cert.e_bound.fits_slong_p()) {
    fail("certificate bound out of range");
    return rep;
  }

  arith::WitnessBounds bounds;
  bounds.max_steps = cert.a_bound.get_ui();
  bounds.max_output = cert.b_bound;
  bounds.max_column = cert.c_bound;
  bounds.max_d = cert.d_bound.get_si();
  bounds.max_e = cert.e_bound.get_si();
  auto ctx = std::make_shared<arith::WitnessContext>(cert.witness, bounds);

  note("rebuilding the template");
  arith::EquationTemplate t = arith::BuildE(font, ctx);
  const SymbolString expected = arith::SubstituteNText(t, cert.n);
  // Columns where sigma differs from the certified equation are scanned
  // first, so a tampered sigma is caught at its first bad pixel quickly.
  std::vector<std::int64_t> order;
  {
    std::vector<char> early(len, 0);
    for (std::size_t i = 0; i < len; ++i) {
      if (i >= expected.size() || expected[i] != sigma[i]) {
        early[i] = 1;
        order.push_back(static_cast<std::int64_t>(i));
      }
    }
    if (!order.empty() || expected.size() != len) {
      fail("sigma is not the template with n* substituted");
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (!early[i]) order.push_back(static_cast<std::int64_t>(i));
    }
  }
  Equation hinted = arith::SubstituteN(t, cert.n);
  bool aligned = graphable && expected == sigma;
  if (aligned && !StructurallyEqual(std::get<Equation>(parsed), hinted)) {
    fail("parsed sigma does not align with the template");
    aligned = false;
  }
  note("replaying n*");
  auto facts = ctx->Facts(cert.n);
  if (!facts->result.halted || facts->result.steps != cert.a ||
      facts->result.output != cert.b) {
    fail("n* does not halt at a with output b within the certificate bound");
  }

  const Window window = StringWindow(len);
  Env base(nullptr, 'n', MakeValue(Value(cert.n)));
  rep.glyph_bitmap = Rasterize(GlyphOfString(sigma, font), window);
  rep.semantic_bitmap = MakeWindowBitmap(window, g);

  if (options.semantic) {
    const std::int64_t rows = rep.glyph_bitmap.height();
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> unknown{0}, mismatches{0}, done{0};
    std::mutex mu;
    // First offending pixel by scan position, for a deterministic report.
    std::size_t first_pos = SIZE_MAX;
    std::string first_what;
    const int jobs = std::max(1, options.jobs);
    constexpr std::size_t kBlock = 4;
    auto worker = [&] {
      logic::PredEvaluator ev;
      while (!stop) {
        const std::size_t k0 = next.fetch_add(kBlock);
        if (k0 >= order.size()) break;
        const std::size_t k1 = std::min(order.size(), k0 + kBlock);
        for (std::size_t k = k0; k < k1 && !stop; ++k) {
          const std::int64_t sym = order[k];
          for (std::int64_t c = sym * g; c < (sym + 1) * g; ++c) {
            for (std::int64_t r = 0; r < rows; ++r) {
              logic::Truth tr = EvalStar(ev, *t.star, base, Center(c, r, g));
              const bool on = tr == logic::Truth::kTrue;
              std::string what;
              if (tr == logic::Truth::kUnknown) {
                ++unknown;
                what = "undecided";
              } else if (on != rep.glyph_bitmap.get(c, r)) {
                ++mismatches;
                what = on ? "lit by the equation but not by the glyphs"
                          : "lit by the glyphs but not by the equation";
              }
              std::lock_guard<std::mutex> lock(mu);
              if (on) rep.semantic_bitmap.set(c, r);
              if (!what.empty()) {
                const std::size_t pos = (k * g + (c - sym * g)) * rows + r;
                if (pos < first_pos) {
                  first_pos = pos;
                  first_what = "pixel (" + std::to_string(c) + ", " +
                               std::to_string(r) + ") " + what;
                }
                if (options.fail_fast) stop = true;
              }
            }
          }
        }
        const std::uint64_t d = done.fetch_add(k1 - k0) + (k1 - k0);
        if (options.progress && d % 4096 < kBlock) {
          std::lock_guard<std::mutex> lock(mu);
          note("semantic symbols " + std::to_string(d) + "/" +
               std::to_string(order.size()));
        }
      }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    rep.pixels = static_cast<std::uint64_t>(rep.glyph_bitmap.width() * rows);
    rep.unknown = unknown;
    rep.mismatches = mismatches;
    rep.lit = rep.semantic_bitmap.count();
    if (!first_what.empty()) fail("first failure: " + first_what);
    if (stop) fail("semantic pass stopped at the first failure");
    if (rep.unknown) fail(std::to_string(rep.unknown) + " pixels undecided");
    if (rep.mismatches) {
      fail(std::to_string(rep.mismatches) + " pixels differ from Gl(sigma)");
    }
    rep.pbm_identical = !stop && ToPbm(rep.semantic_bitmap) == ToPbm(rep.glyph_bitmap);
    if (!rep.pbm_identical) fail("PBM images differ");

    if (!stop) {
      note("exterior samples");
      logic::PredEvaluator ev;
      for (const Point& p :
           ExteriorSamples(options.exterior_samples, len, g, options.seed)) {
        logic::Truth tr = EvalStar(ev, *t.star, base, p);
        ++rep.exterior_checked;
        if (tr != logic::Truth::kFalse) {
          ++rep.unknown;
          fail("exterior point (" + p.x.get_str() + ", " + p.y.get_str() +
               ") is " + (tr == logic::Truth::kTrue ? "in" : "undecided"));
          if (options.fail_fast) break;
        }
      }
    }
  }

  if (options.literal && aligned && rep.failures.empty()) {
    note("literal evaluation");
    std::vector<std::pair<std::int64_t, std::int64_t>> ins, outs;
    for (std::int64_t c = 0; c < rep.glyph_bitmap.width(); ++c) {
      for (std::int64_t r = 0; r < rep.glyph_bitmap.height(); ++r) {
        (rep.glyph_bitmap.get(c, r) ? ins : outs).emplace_back(c, r);
      }
    }
    std::mt19937_64 rng(options.seed + 1);
    std::shuffle(ins.begin(), ins.end(), rng);
    std::shuffle(outs.begin(), outs.end(), rng);
    EvalBudget budget;
    auto check = [&](std::int64_t c, std::int64_t r, bool want) {
      MembershipResult m = GraphMembership(hinted, Center(c, r, g), budget, &base);
      Membership expect = want ? Membership::kIn : Membership::kOut;
      if (m.membership == Membership::kUnknown) ++rep.unknown;
      if (m.membership != expect) {
        if (m.membership != Membership::kUnknown) ++rep.mismatches;
        fail("literal evaluation at pixel (" + std::to_string(c) + ", " +
             std::to_string(r) + ") gave " +
             (m.membership == Membership::kIn    ? "in"
              : m.membership == Membership::kOut ? "out"
                                                 : "unknown: " + m.reason));
      }
    };
    for (std::size_t i = 0; i < std::min(options.literal_in, ins.size()); ++i) {
      check(ins[i].first, ins[i].second, true);
      ++rep.literal_in_checked;
    }
    for (std::size_t i = 0; i < std::min(options.literal_out, outs.size()); ++i) {
      check(outs[i].first, outs[i].second, false);
      ++rep.literal_out_checked;
    }
  }
  rep.ok = rep.failures.empty();
  return rep;
}

}  // namespace selfgraph
