#include "selfgraph/glyphs.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#ifdef SELFGRAPH_HAVE_PNG
#include <png.h>
#endif

namespace selfgraph {

PixelSet::PixelSet(int resolution, std::vector<Pixel> pixels)
    : resolution_(resolution), pixels_(std::move(pixels)) {
  std::sort(pixels_.begin(), pixels_.end());
  pixels_.erase(std::unique(pixels_.begin(), pixels_.end()), pixels_.end());
}

bool PixelSet::contains(Pixel p) const {
  return std::binary_search(pixels_.begin(), pixels_.end(), p);
}

PixelSet PixelSet::Union(const PixelSet& other) const {
  if (other.resolution_ != resolution_) {
    throw std::invalid_argument("union of pixel sets at different resolutions");
  }
  std::vector<Pixel> merged;
  merged.reserve(pixels_.size() + other.pixels_.size());
  std::set_union(pixels_.begin(), pixels_.end(), other.pixels_.begin(),
                 other.pixels_.end(), std::back_inserter(merged));
  PixelSet out(resolution_);
  out.pixels_ = std::move(merged);
  return out;
}

PixelSet ShiftRight(const PixelSet& s, std::int64_t units) {
  std::vector<Pixel> moved = s.pixels();
  const std::int64_t dx = units * s.resolution();
  for (Pixel& p : moved) p.col += dx;
  return PixelSet(s.resolution(), std::move(moved));
}

std::vector<Point> ShiftRight(const std::vector<Point>& points,
                              std::int64_t units) {
  std::vector<Point> out = points;
  for (Point& p : out) p.x += units;
  return out;
}

FontError::FontError(std::string message, int line, std::string symbol)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      line_(line),
      symbol_(std::move(symbol)) {}

Font::Font(int resolution, std::array<PixelSet, kAlphabetSize> glyphs)
    : resolution_(resolution), glyphs_(std::move(glyphs)) {
  if (resolution <= 0) throw FontError("resolution must be positive", 0);
  for (Symbol s : AllSymbols()) {
    const PixelSet& g = glyphs_[s.index()];
    std::string name(s.text());
    if (g.resolution() != resolution) {
      throw FontError("glyph resolution mismatch for '" + name + "'", 0, name);
    }
    if (g.empty()) {
      throw FontError("missing or empty glyph for '" + name + "'", 0, name);
    }
    for (Pixel p : g.pixels()) {
      if (p.col < 0 || p.col >= resolution || p.row < 0 ||
          p.row >= resolution) {
        throw FontError("pixel (" + std::to_string(p.col) + "," +
                            std::to_string(p.row) + ") of '" + name +
                            "' lies outside the unit square",
                        0, name);
      }
    }
  }
}

namespace {

std::string Trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct PendingGlyph {
  std::string name;
  int header_line = 0;
  std::int64_t col = 0;
  std::int64_t row = 0;
  std::vector<std::string> rows;
};

}  // namespace

Font LoadFont(std::istream& in) {
  std::string line;
  int line_no = 0;
  int resolution = 0;
  std::array<std::vector<Pixel>, kAlphabetSize> pixels;
  std::array<bool, kAlphabetSize> seen{};
  std::vector<PendingGlyph> glyphs;

  while (std::getline(in, line)) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty()) continue;
    // Rows consist only of '.' and '#'; anything else starting with '#' is a
    // comment.
    if (t[0] == '#' &&
        t.find_first_not_of("#.") != std::string::npos) {
      continue;
    }
    if (t.rfind("G ", 0) == 0) {
      if (resolution != 0) throw FontError("duplicate G line", line_no);
      std::istringstream ss(t.substr(2));
      if (!(ss >> resolution) || resolution <= 0) {
        throw FontError("bad resolution", line_no);
      }
      continue;
    }
    if (t.rfind("sym ", 0) == 0) {
      if (resolution == 0) throw FontError("sym before G line", line_no);
      std::istringstream ss(t.substr(4));
      PendingGlyph g;
      g.header_line = line_no;
      if (!(ss >> g.name)) throw FontError("missing symbol name", line_no);
      if (ss >> g.col) {
        if (!(ss >> g.row)) throw FontError("offset needs col and row", line_no);
      }
      std::string extra;
      if (ss >> extra) throw FontError("trailing text '" + extra + "'", line_no);
      glyphs.push_back(std::move(g));
      continue;
    }
    if (t.find_first_not_of(".#") == std::string::npos) {
      if (glyphs.empty()) throw FontError("bitmap row before sym", line_no);
      glyphs.back().rows.push_back(t);
      continue;
    }
    throw FontError("unrecognized line '" + t + "'", line_no);
  }
  if (resolution == 0) throw FontError("missing G line", line_no);

  for (const PendingGlyph& g : glyphs) {
    auto s = SymbolFromText(g.name);
    if (!s) {
      throw FontError("unknown symbol '" + g.name + "'", g.header_line, g.name);
    }
    if (seen[s->index()]) {
      throw FontError("duplicate glyph for '" + g.name + "'", g.header_line,
                      g.name);
    }
    seen[s->index()] = true;
    const auto height = static_cast<std::int64_t>(g.rows.size());
    if (height > resolution) {
      throw FontError("glyph '" + g.name + "' is taller than G",
                      g.header_line, g.name);
    }
    for (std::int64_t r = 0; r < height; ++r) {
      const std::string& bits = g.rows[r];
      if (static_cast<std::int64_t>(bits.size()) > resolution) {
        throw FontError("glyph '" + g.name + "' is wider than G",
                        g.header_line + 1 + static_cast<int>(r), g.name);
      }
      for (std::size_t c = 0; c < bits.size(); ++c) {
        if (bits[c] == '#') {
          pixels[s->index()].push_back(
              {g.col + static_cast<std::int64_t>(c), g.row + (height - 1 - r)});
        }
      }
    }
  }
  std::array<PixelSet, kAlphabetSize> sets;
  for (int i = 0; i < kAlphabetSize; ++i) {
    sets[i] = PixelSet(resolution, std::move(pixels[i]));
  }
  return Font(resolution, std::move(sets));
}

Font LoadFontFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FontError("cannot open font file " + path, 0);
  return LoadFont(in);
}

void WriteFont(std::ostream& out, const Font& font) {
  const int g = font.resolution();
  out << "G " << g << "\n";
  for (Symbol s : AllSymbols()) {
    const PixelSet& glyph = font.glyph(s);
    std::int64_t cmin = g, cmax = -1, rmin = g, rmax = -1;
    for (Pixel p : glyph.pixels()) {
      cmin = std::min(cmin, p.col);
      cmax = std::max(cmax, p.col);
      rmin = std::min(rmin, p.row);
      rmax = std::max(rmax, p.row);
    }
    out << "sym " << s.text() << " " << cmin << " " << rmin << "\n";
    for (std::int64_t r = rmax; r >= rmin; --r) {
      std::string row(static_cast<std::size_t>(cmax - cmin + 1), '.');
      for (std::int64_t c = cmin; c <= cmax; ++c) {
        if (glyph.contains({c, r})) row[c - cmin] = '#';
      }
      out << row << "\n";
    }
  }
}

PixelSet GlyphOfString(const SymbolString& s, const Font& font) {
  const int g = font.resolution();
  std::vector<Pixel> all;
  std::size_t total = 0;
  for (Symbol x : s) total += font.glyph(x).size();
  all.reserve(total);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t dx = static_cast<std::int64_t>(i) * g;
    for (Pixel p : font.glyph(s[i]).pixels()) {
      all.push_back({p.col + dx, p.row});
    }
  }
  return PixelSet(g, std::move(all));
}

Bitmap::Bitmap(std::int64_t col0, std::int64_t row0, std::int64_t width,
               std::int64_t height)
    : col0_(col0), row0_(row0), width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative bitmap size");
  bits_.assign(static_cast<std::size_t>(width * height), 0);
}

bool Bitmap::get(std::int64_t col, std::int64_t row) const {
  const std::int64_t c = col - col0_, r = row - row0_;
  if (c < 0 || r < 0 || c >= width_ || r >= height_) return false;
  return bits_[static_cast<std::size_t>(r * width_ + c)] != 0;
}

void Bitmap::set(std::int64_t col, std::int64_t row, bool on) {
  const std::int64_t c = col - col0_, r = row - row0_;
  if (c < 0 || r < 0 || c >= width_ || r >= height_) {
    throw std::out_of_range("pixel outside bitmap");
  }
  bits_[static_cast<std::size_t>(r * width_ + c)] = on ? 1 : 0;
}

std::size_t Bitmap::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Bitmap MakeWindowBitmap(const Window& window, int resolution,
                        std::int64_t max_pixels) {
  if (window.x1 < window.x0 || window.y1 <= window.y0) {
    throw std::invalid_argument("empty window");
  }
  const std::int64_t w = (window.x1 - window.x0) * resolution;
  const std::int64_t h = (window.y1 - window.y0) * resolution;
  if (h > 0 && w > max_pixels / h) {
    throw BudgetError("window of " + std::to_string(w) + "x" +
                      std::to_string(h) + " pixels exceeds the cap of " +
                      std::to_string(max_pixels));
  }
  return Bitmap(window.x0 * resolution, window.y0 * resolution, w, h);
}

Bitmap Rasterize(const PixelSet& s, const Window& window,
                 std::int64_t max_pixels) {
  Bitmap bm = MakeWindowBitmap(window, s.resolution(), max_pixels);
  for (Pixel p : s.pixels()) {
    if (p.col >= bm.col0() && p.col < bm.col0() + bm.width() &&
        p.row >= bm.row0() && p.row < bm.row0() + bm.height()) {
      bm.set(p.col, p.row);
    }
  }
  return bm;
}

void WritePbm(std::ostream& out, const Bitmap& bitmap) {
  out << "P1\n" << bitmap.width() << " " << bitmap.height() << "\n";
  std::string line;
  for (std::int64_t r = bitmap.height() - 1; r >= 0; --r) {
    line.clear();
    for (std::int64_t c = 0; c < bitmap.width(); ++c) {
      line.push_back(bitmap.get(bitmap.col0() + c, bitmap.row0() + r) ? '1'
                                                                       : '0');
      if (line.size() == 70) {
        out << line << "\n";
        line.clear();
      }
    }
    if (!line.empty() || bitmap.width() == 0) out << line << "\n";
  }
}

std::string ToPbm(const Bitmap& bitmap) {
  std::ostringstream ss;
  WritePbm(ss, bitmap);
  return ss.str();
}

void WritePbmFile(const std::string& path, const Bitmap& bitmap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  WritePbm(out, bitmap);
}

bool WritePngFile(const std::string& path, const Bitmap& bitmap) {
#ifdef SELFGRAPH_HAVE_PNG
  if (bitmap.width() == 0 || bitmap.height() == 0) return false;
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("PNG write failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(bitmap.width()),
               static_cast<png_uint_32>(bitmap.height()), 1, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>((bitmap.width() + 7) / 8));
  for (std::int64_t r = bitmap.height() - 1; r >= 0; --r) {
    std::fill(row.begin(), row.end(), 0);
    for (std::int64_t c = 0; c < bitmap.width(); ++c) {
      // Lit pixels are drawn black, as in PBM.
      if (!bitmap.get(bitmap.col0() + c, bitmap.row0() + r)) {
        row[static_cast<std::size_t>(c / 8)] |=
            static_cast<png_byte>(0x80 >> (c % 8));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  return true;
#else
  (void)path;
  (void)bitmap;
  return false;
#endif
}

}  // namespace selfgraph
