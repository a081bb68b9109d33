#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "selfgraph/arith.hpp"
#include "selfgraph/glyphs.hpp"
#include "selfgraph/machine.hpp"

namespace selfgraph {

// Ordered key = value text, one pair per line. Used for certificates and
// build reports.
class KeyValues {
 public:
  void Set(const std::string& key, const std::string& value);
  void Set(const std::string& key, const mpz_class& value);
  void Set(const std::string& key, std::uint64_t value);
  bool Has(const std::string& key) const;
  const std::string& Get(const std::string& key) const;  // throws
  mpz_class GetNumber(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

  std::string ToText() const;
  static KeyValues Parse(std::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// What a verifier needs besides sigma and the font: the fixed point, its run,
// and the bounds witness hints may use.
struct Certificate {
  mpz_class n;       // n*
  mpz_class a;       // halting step count of n* on input 0
  mpz_class b;       // its output, the code of sigma
  std::uint64_t length = 0;  // |sigma|
  int resolution = 0;
  arith::TraceWitness witness = arith::TraceWitness::kReplay;
  // Bounds on the witnesses (a <= a_bound, b <= b_bound, c < c_bound, ...).
  mpz_class a_bound, b_bound, c_bound, d_bound, e_bound;

  KeyValues ToKeyValues() const;
  static Certificate FromKeyValues(const KeyValues& kv);
};

struct BuildOptions {
  arith::TraceWitness witness = arith::TraceWitness::kReplay;
  std::uint64_t step_budget = 50'000'000;
};

struct BuildOutput {
  arith::EquationTemplate tmpl;
  machine::Program f_program;
  machine::Program g_program;
  machine::FixedPoint fixed_point;
  machine::RunResult run;
  SymbolString sigma;
  Certificate certificate;
  KeyValues report;
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// g: f followed by j = make_const(f(n)).
machine::Program BuildGProgram(const arith::EquationTemplate& t);

// Throws BuildError when an internal consistency check fails.
BuildOutput BuildSelfGraphing(const Font& font, const BuildOptions& options);

// Symbol-text of "E(n*)=0" from the certificate's b.
SymbolString SigmaOf(const Certificate& c);

struct VerifyOptions {
  int jobs = 1;
  std::size_t exterior_samples = 100;
  std::size_t literal_in = 10;
  std::size_t literal_out = 10;
  std::uint64_t seed = 1;
  bool semantic = true;  // exhaustive pixel pass
  bool literal = true;
  bool fail_fast = false;  // stop at the first bad pixel
  std::function<void(const std::string&)> progress;
};

struct VerifyReport {
  bool ok = false;
  std::vector<std::string> failures;
  std::uint64_t pixels = 0;
  std::uint64_t lit = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t unknown = 0;
  std::uint64_t exterior_checked = 0;
  std::uint64_t literal_in_checked = 0;
  std::uint64_t literal_out_checked = 0;
  bool pbm_identical = false;
  Bitmap semantic_bitmap;
  Bitmap glyph_bitmap;
  KeyValues ToKeyValues() const;
};

// Checks sigma against the certificate: the template rebuilt from the font
// must print as sigma with n* substituted, and Gr(sigma) = Gl(sigma) pixel for
// pixel on [0, |sigma|] x [0, 1], plus exterior and literal spot checks.
VerifyReport VerifySelfGraphing(const SymbolString& sigma,
                                const Certificate& cert, const Font& font,
                                const VerifyOptions& options);

// Window [0, len] x [0, 1].
Window StringWindow(std::size_t length);

}  // namespace selfgraph
