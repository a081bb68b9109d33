// Writes the G=100 display font: the test font scaled 12x, except "+",
// which is the full-height, full-width cross through column and row 50.
#include <fstream>
#include <iostream>

#include "selfgraph/glyphs.hpp"

using namespace selfgraph;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_display_font <test8.font> <out.font>\n";
    return 2;
  }
  try {
    Font small = LoadFontFile(argv[1]);
    constexpr int kG = 100, kScale = 12, kMargin = 2;
    std::array<PixelSet, kAlphabetSize> glyphs;
    for (Symbol s : AllSymbols()) {
      std::vector<Pixel> px;
      if (s == sym::kPlus) {
        for (int i = 0; i < kG; ++i) {
          px.push_back({50, i});
          px.push_back({i, 50});
        }
      } else {
        for (Pixel p : small.glyph(s).pixels()) {
          for (int dc = 0; dc < kScale; ++dc) {
            for (int dr = 0; dr < kScale; ++dr) {
              px.push_back({kMargin + p.col * kScale + dc,
                            kMargin + p.row * kScale + dr});
            }
          }
        }
      }
      glyphs[s.index()] = PixelSet(kG, std::move(px));
    }
    Font font(kG, glyphs);
    std::ofstream out(argv[2]);
    out << "# Display font, generated from the test font.\n";
    WriteFont(out, font);
    return out ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
