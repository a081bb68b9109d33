#include <gtest/gtest.h>

#include <random>
#include <set>

#include "selfgraph/codec.hpp"

using namespace selfgraph;

namespace {

// Listing by length, then by canonical symbol order.
std::vector<SymbolString> Enumerate(std::size_t max_len) {
  std::vector<SymbolString> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (Symbol s : AllSymbols()) {
        SymbolString t = out[i];
        t.push_back(s);
        out.push_back(t);
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace

TEST(Codec, MatchesEnumeration) {
  auto all = Enumerate(2);
  ASSERT_EQ(all.size(), 1u + 47 + 47 * 47);
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(codec::Encode(all[i]), i);
    EXPECT_EQ(codec::Decode(i), all[i]);
  }
  EXPECT_EQ(codec::Encode({}), 0);
  EXPECT_EQ(codec::Encode({AllSymbols()[0]}), 1);
  EXPECT_TRUE(codec::Decode(0).empty());
}

TEST(Codec, LengthTwoRange) {
  std::set<mpz_class> codes;
  for (Symbol a : AllSymbols()) {
    for (Symbol b : AllSymbols()) codes.insert(codec::Encode({a, b}));
  }
  EXPECT_EQ(codes.size(), 47u * 47);
  EXPECT_EQ(*codes.begin(), 48);
  EXPECT_EQ(*codes.rbegin(), 48 + 47 * 47 - 1);
}

TEST(Codec, RoundTrips) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    SymbolString s(rng() % 13);
    for (auto& c : s) c = AllSymbols()[rng() % 47];
    EXPECT_EQ(codec::Decode(codec::Encode(s)), s);
    EXPECT_EQ(codec::DecodedLength(codec::Encode(s)), s.size());
  }
  for (int n = 0; n <= 10000; ++n) {
    EXPECT_EQ(codec::Encode(codec::Decode(n)), n);
  }
}

TEST(Codec, Concat) {
  SymbolString s = ParseSymbols("x^2+");
  SymbolString t = ParseSymbols("y=1");
  SymbolString st = s;
  st.insert(st.end(), t.begin(), t.end());
  EXPECT_EQ(codec::Concat(codec::Encode(s), codec::Encode(t), t.size()),
            codec::Encode(st));
}

TEST(Alphabet, UnknownSymbolPosition) {
  try {
    ParseSymbols("x+§");
    FAIL();
  } catch (const UnknownSymbolError& e) {
    EXPECT_EQ(e.symbol_position(), 2u);
    EXPECT_EQ(e.byte_offset(), 2u);
  }
  EXPECT_EQ(ToText(ParseSymbols("x*y-PROD")), "x·y−Π");
}
