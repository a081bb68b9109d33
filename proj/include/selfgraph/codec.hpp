#pragma once

#include <gmpxx.h>

#include "selfgraph/alphabet.hpp"

namespace selfgraph::codec {

// Goedel numbering of symbol strings: the position of a string in the
// length-then-alphabetical listing, counting from 0. Equivalently the
// bijective base-47 numeral whose digit for symbol s is s.index() + 1.
mpz_class Encode(const SymbolString& s);
SymbolString Decode(const mpz_class& n);

// Number of symbols in Decode(n), without materializing the string.
std::size_t DecodedLength(const mpz_class& n);

// Encode(s ++ t) == Encode(s) * 47^|t| + Encode(t).
mpz_class Concat(const mpz_class& s_code, const mpz_class& t_code,
                 std::size_t t_length);

}  // namespace selfgraph::codec
