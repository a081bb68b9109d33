#include "selfgraph/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace selfgraph::codec {
namespace {

// GMP digit characters for bases above 36.
constexpr std::string_view kGmpDigits =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

int GmpDigitValue(char c) {
  auto pos = kGmpDigits.find(c);
  if (pos == std::string_view::npos) throw std::logic_error("bad GMP digit");
  return static_cast<int>(pos);
}

mpz_class Pow47(std::size_t k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 47, k);
  return r;
}

// (47^k - 1) / 46, the code of the first string of length k.
mpz_class FirstOfLength(std::size_t k) { return (Pow47(k) - 1) / 46; }

}  // namespace

mpz_class Encode(const SymbolString& s) {
  if (s.empty()) return 0;
  std::string digits;
  digits.reserve(s.size());
  for (Symbol x : s) digits.push_back(kGmpDigits[x.index()]);
  mpz_class offset;
  if (mpz_set_str(offset.get_mpz_t(), digits.c_str(), 47) != 0) {
    throw std::logic_error("base-47 conversion failed");
  }
  return offset + FirstOfLength(s.size());
}

std::size_t DecodedLength(const mpz_class& n) {
  if (n == 0) return 0;
  // Largest L with 47^L <= 46n + 1.
  mpz_class t = 46 * n + 1;
  std::size_t guess = static_cast<std::size_t>(
      static_cast<double>(mpz_sizeinbase(t.get_mpz_t(), 2)) / std::log2(47.0));
  if (guess > 0) --guess;
  mpz_class p = Pow47(guess);
  while (p * 47 <= t) {
    p *= 47;
    ++guess;
  }
  while (p > t) {
    p /= 47;
    --guess;
  }
  return guess;
}

SymbolString Decode(const mpz_class& n) {
  if (n < 0) throw std::invalid_argument("negative Goedel number");
  std::size_t len = DecodedLength(n);
  if (len == 0) return {};
  mpz_class offset = n - FirstOfLength(len);
  std::string digits = offset.get_str(47);
  SymbolString out(len, Symbol::FromIndex(0));
  std::size_t pad = len - digits.size();
  for (std::size_t i = 0; i < digits.size(); ++i) {
    out[pad + i] = Symbol::FromIndex(GmpDigitValue(digits[i]));
  }
  return out;
}

mpz_class Concat(const mpz_class& s_code, const mpz_class& t_code,
                 std::size_t t_length) {
  return s_code * Pow47(t_length) + t_code;
}

}  // namespace selfgraph::codec
