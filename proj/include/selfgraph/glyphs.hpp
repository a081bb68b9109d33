#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfgraph/alphabet.hpp"

namespace selfgraph {

// A pixel (col, row) is the closed square [col/G,(col+1)/G] x [row/G,(row+1)/G].
// Rows increase upward.
struct Pixel {
  std::int64_t col = 0;
  std::int64_t row = 0;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Finite set of grid-aligned pixels at resolution G (pixels per unit).
// Stored sorted by (col, row) without duplicates; equality is cell equality.
class PixelSet {
 public:
  explicit PixelSet(int resolution = 1) : resolution_(resolution) {}
  PixelSet(int resolution, std::vector<Pixel> pixels);

  int resolution() const { return resolution_; }
  const std::vector<Pixel>& pixels() const { return pixels_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }
  bool contains(Pixel p) const;

  PixelSet Union(const PixelSet& other) const;

  friend bool operator==(const PixelSet&, const PixelSet&) = default;

 private:
  int resolution_;
  std::vector<Pixel> pixels_;
};

// S^{->r}: every column moves right by r * G.
PixelSet ShiftRight(const PixelSet& s, std::int64_t units);

struct Point {
  mpq_class x;
  mpq_class y;
  friend bool operator==(const Point&, const Point&) = default;
};
std::vector<Point> ShiftRight(const std::vector<Point>& points,
                              std::int64_t units);

class FontError : public std::runtime_error {
 public:
  FontError(std::string message, int line, std::string symbol = {});
  int line() const { return line_; }
  const std::string& symbol() const { return symbol_; }

 private:
  int line_;
  std::string symbol_;
};

class Font {
 public:
  // Validates: every glyph nonempty and inside [0,1]^2. Throws FontError.
  Font(int resolution, std::array<PixelSet, kAlphabetSize> glyphs);

  int resolution() const { return resolution_; }
  const PixelSet& glyph(Symbol s) const { return glyphs_[s.index()]; }

 private:
  int resolution_;
  std::array<PixelSet, kAlphabetSize> glyphs_;
};

// Font file: `G <int>`, then per symbol `sym <symbol> [<col> <row>]` followed
// by rows of `.`/`#` listed top row first, anchored so the last row listed
// sits at the given (col, row). `#` starts a comment only on its own line.
Font LoadFont(std::istream& in);
Font LoadFontFile(const std::string& path);
void WriteFont(std::ostream& out, const Font& font);

// Gl(sigma): union of glyph(s_i) shifted right by i units.
PixelSet GlyphOfString(const SymbolString& s, const Font& font);

// Rectangle in whole units: [x0, x1] x [y0, y1].
struct Window {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t x1 = 1;
  std::int64_t y1 = 1;
};

class Bitmap {
 public:
  Bitmap() = default;
  // Covers pixel columns [col0, col0 + width) and rows [row0, row0 + height).
  Bitmap(std::int64_t col0, std::int64_t row0, std::int64_t width,
         std::int64_t height);

  std::int64_t width() const { return width_; }
  std::int64_t height() const { return height_; }
  std::int64_t col0() const { return col0_; }
  std::int64_t row0() const { return row0_; }

  bool get(std::int64_t col, std::int64_t row) const;
  void set(std::int64_t col, std::int64_t row, bool on = true);
  std::size_t count() const;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::int64_t col0_ = 0;
  std::int64_t row0_ = 0;
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDefaultMaxBitmapPixels = std::int64_t{1} << 32;

Bitmap MakeWindowBitmap(const Window& window, int resolution,
                        std::int64_t max_pixels = kDefaultMaxBitmapPixels);

Bitmap Rasterize(const PixelSet& s, const Window& window,
                 std::int64_t max_pixels = kDefaultMaxBitmapPixels);

// Plain PBM: header, then rows top to bottom as 0/1 digits, lines <= 70 chars.
void WritePbm(std::ostream& out, const Bitmap& bitmap);
std::string ToPbm(const Bitmap& bitmap);
void WritePbmFile(const std::string& path, const Bitmap& bitmap);

// Returns false when PNG support was not compiled in.
bool WritePngFile(const std::string& path, const Bitmap& bitmap);

}  // namespace selfgraph
