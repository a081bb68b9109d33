#include "selfgraph/alphabet.hpp"

#include <cctype>

namespace selfgraph {
namespace {

constexpr std::array<std::string_view, kAlphabetSize> kSpellings = {
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l",
    "m", "n", "o", "p", "q", "r", "s", "t", "u", "v", "w", "x",
    "y", "z", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "(", ")", "+", "·", "−", "/", "^", "=", "Π", "_", "∞"};

struct Alias {
  std::string_view text;
  Symbol symbol;
};

}  // namespace

std::string_view Symbol::text() const { return kSpellings[index_]; }

UnknownSymbolError::UnknownSymbolError(std::size_t byte_offset,
                                       std::size_t symbol_position,
                                       std::string found)
    : std::runtime_error("unknown symbol '" + found + "' at position " +
                         std::to_string(symbol_position)),
      byte_offset_(byte_offset),
      symbol_position_(symbol_position),
      found_(std::move(found)) {}

const std::array<Symbol, kAlphabetSize>& AllSymbols() {
  static const std::array<Symbol, kAlphabetSize> all = [] {
    std::array<Symbol, kAlphabetSize> a{};
    for (int i = 0; i < kAlphabetSize; ++i) a[i] = Symbol::FromIndex(i);
    return a;
  }();
  return all;
}

std::optional<Symbol> SymbolFromText(std::string_view text) {
  for (int i = 0; i < kAlphabetSize; ++i) {
    if (kSpellings[i] == text) return Symbol::FromIndex(i);
  }
  return std::nullopt;
}

SymbolString ParseSymbols(std::string_view text) {
  static const Alias kAliases[] = {
      {"PROD", sym::kPi}, {"*", sym::kTimes}, {"-", sym::kMinus}};
  SymbolString out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    bool matched = false;
    if (!out.empty() && out.back() == sym::kCaret &&
        text.substr(i, 3) == "inf") {
      out.push_back(sym::kInfinity);
      i += 3;
      continue;
    }
    for (const Alias& a : kAliases) {
      if (text.substr(i, a.text.size()) == a.text) {
        out.push_back(a.symbol);
        i += a.text.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    // Longest spelling is 3 bytes of UTF-8.
    for (int len = 1; len <= 3 && i + len <= text.size(); ++len) {
      if (auto s = SymbolFromText(text.substr(i, len))) {
        out.push_back(*s);
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      int len = 1;
      if (c >= 0xF0) len = 4;
      else if (c >= 0xE0) len = 3;
      else if (c >= 0xC0) len = 2;
      throw UnknownSymbolError(i, out.size(),
                               std::string(text.substr(i, len)));
    }
  }
  return out;
}

std::string ToText(const SymbolString& s) {
  std::string out;
  out.reserve(s.size());
  for (Symbol x : s) out += x.text();
  return out;
}

}  // namespace selfgraph
