#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfgraph {

// The 47-symbol alphabet. Canonical order: a..z, 0..9, ( ) + · − / ^ = Π _ ∞.
inline constexpr int kAlphabetSize = 47;

class Symbol {
 public:
  constexpr Symbol() = default;
  static constexpr Symbol FromIndex(int index) { return Symbol(index); }

  constexpr int index() const { return index_; }
  // UTF-8 spelling used on output.
  std::string_view text() const;

  bool is_letter() const { return index_ < 26; }
  bool is_digit() const { return index_ >= 26 && index_ < 36; }
  char letter() const { return static_cast<char>('a' + index_); }
  int digit_value() const { return index_ - 26; }

  friend constexpr bool operator==(Symbol, Symbol) = default;
  friend constexpr auto operator<=>(Symbol, Symbol) = default;

 private:
  constexpr explicit Symbol(int index) : index_(index) {}
  int index_ = 0;
};

namespace sym {
constexpr Symbol Letter(char c) { return Symbol::FromIndex(c - 'a'); }
constexpr Symbol Digit(int d) { return Symbol::FromIndex(26 + d); }
inline constexpr Symbol kLParen = Symbol::FromIndex(36);
inline constexpr Symbol kRParen = Symbol::FromIndex(37);
inline constexpr Symbol kPlus = Symbol::FromIndex(38);
inline constexpr Symbol kTimes = Symbol::FromIndex(39);
inline constexpr Symbol kMinus = Symbol::FromIndex(40);
inline constexpr Symbol kSlash = Symbol::FromIndex(41);
inline constexpr Symbol kCaret = Symbol::FromIndex(42);
inline constexpr Symbol kEquals = Symbol::FromIndex(43);
inline constexpr Symbol kPi = Symbol::FromIndex(44);
inline constexpr Symbol kUnderscore = Symbol::FromIndex(45);
inline constexpr Symbol kInfinity = Symbol::FromIndex(46);
}  // namespace sym

using SymbolString = std::vector<Symbol>;

// Raised when text contains something outside the alphabet.
class UnknownSymbolError : public std::runtime_error {
 public:
  UnknownSymbolError(std::size_t byte_offset, std::size_t symbol_position,
                     std::string found);
  std::size_t byte_offset() const { return byte_offset_; }
  std::size_t symbol_position() const { return symbol_position_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t byte_offset_;
  std::size_t symbol_position_;
  std::string found_;
};

// Splits UTF-8 text into symbols. ASCII aliases are accepted: `*` for ·,
// `-` for −, `PROD` for Π, and `inf` for ∞ when it directly follows ^.
// Whitespace is skipped. Throws UnknownSymbolError.
SymbolString ParseSymbols(std::string_view text);

std::string ToText(const SymbolString& s);

// Looks up a symbol by its UTF-8 spelling (exactly one symbol).
std::optional<Symbol> SymbolFromText(std::string_view text);

const std::array<Symbol, kAlphabetSize>& AllSymbols();

}  // namespace selfgraph
