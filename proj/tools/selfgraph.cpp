// selfgraph: build, render, graph and verify self-graphing equations.
//
// Exit codes:
//   0  success
//   1  verification found a mismatch (pixel, text or certificate)
//   2  usage error, or a symbol outside the alphabet
//   3  unreadable or malformed input file (font, certificate, program)
//   4  undecided: some verdict was Unknown within the certificate bounds
//   5  step budget exhausted
//   6  internal consistency check failed during a build

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "selfgraph/arith.hpp"
#include "selfgraph/codec.hpp"
#include "selfgraph/eqlang.hpp"
#include "selfgraph/glyphs.hpp"
#include "selfgraph/logic.hpp"
#include "selfgraph/machine.hpp"
#include "selfgraph/selfgraph.hpp"

#ifndef SELFGRAPH_DEFAULT_FONT
#define SELFGRAPH_DEFAULT_FONT "fonts/test8.font"
#endif

namespace fs = std::filesystem;
using namespace selfgraph;

namespace {

enum Exit {
  kOk = 0,
  kMismatch = 1,
  kUsage = 2,
  kBadInput = 3,
  kUndecided = 4,
  kOutOfBudget = 5,
  kInternal = 6,
};

struct ExitError {
  int code;
  std::string message;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExitError{kBadInput, "cannot read " + path};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFile(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw ExitError{kBadInput, "cannot write " + path.string()};
}

SymbolString Symbols(const std::string& text) {
  try {
    return ParseSymbols(text);
  } catch (const UnknownSymbolError& e) {
    throw ExitError{kUsage, "unknown symbol '" + e.found() + "' at position " +
                                std::to_string(e.symbol_position()) +
                                " (byte " + std::to_string(e.byte_offset()) +
                                ")"};
  }
}

// Text arguments may be given inline or with @file.
std::string TextArg(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') {
    std::string s = ReadFile(arg.substr(1));
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  }
  return arg;
}

struct Common {
  std::string font_path = SELFGRAPH_DEFAULT_FONT;
  int resolution = 0;  // 0: whatever the font says
  int jobs = 1;
  std::uint64_t steps = 50'000'000;
  std::int64_t factors = 64;

  Font LoadFont() const {
    try {
      Font f = LoadFontFile(font_path);
      if (resolution && f.resolution() != resolution) {
        throw ExitError{kUsage, "font resolution " +
                                    std::to_string(f.resolution()) +
                                    " differs from --resolution " +
                                    std::to_string(resolution)};
      }
      return f;
    } catch (const FontError& e) {
      throw ExitError{kBadInput, font_path + ": " + e.what()};
    } catch (const std::runtime_error& e) {
      throw ExitError{kBadInput, font_path + ": " + e.what()};
    }
  }

  EvalBudget Budget() const {
    EvalBudget b;
    b.factor_budget = factors;
    return b;
  }

  void Check() const {
    if (jobs < 1 || steps < 1 || factors < 1) {
      throw ExitError{kUsage, "budgets and --jobs must be positive"};
    }
  }
};

void AddCommon(CLI::App* app, Common& c, bool font = true) {
  if (font) {
    app->add_option("--font", c.font_path, "Font file")->capture_default_str();
    app->add_option("--resolution", c.resolution,
                    "Expected font resolution G (checked against the font)");
  }
  app->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  app->add_option("--steps", c.steps, "Machine step budget")
      ->capture_default_str();
  app->add_option("--factors", c.factors,
                  "Uncertified product factors tried per infinite product")
      ->capture_default_str();
}

void SaveBitmap(const fs::path& pbm, const std::string& png, const Bitmap& b) {
  WritePbmFile(pbm.string(), b);
  if (!png.empty() && !WritePngFile(png, b)) {
    std::cerr << "warning: PNG support not compiled in; skipped " << png << "\n";
  }
}

Window ParseWindow(const std::string& s) {
  Window w;
  char c1, c2, c3;
  std::istringstream in(s);
  if (!(in >> w.x0 >> c1 >> w.y0 >> c2 >> w.x1 >> c3 >> w.y1) || c1 != ',' ||
      c2 != ',' || c3 != ',' || w.x1 <= w.x0 || w.y1 <= w.y0) {
    throw ExitError{kUsage, "window must be x0,y0,x1,y1 with x0<x1, y0<y1"};
  }
  return w;
}

int VerifyExit(const VerifyReport& r) {
  if (r.ok) return kOk;
  if (r.mismatches) return kMismatch;
  if (r.unknown) return kUndecided;
  return kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, render, graph and verify self-graphing equations"};
  app.set_config("--config", "", "Read options from a TOML or INI file");
  app.require_subcommand(1);
  Common common;

  // render
  std::string render_text, render_out = "render.pbm", render_png, render_eq;
  auto* render = app.add_subcommand("render", "Rasterize Gl(text) with a font");
  render->add_option("text", render_text, "Text, or @file")->required();
  render->add_option("-o,--out", render_out, "PBM output")->capture_default_str();
  render->add_option("--png", render_png, "Also write a PNG");
  render->add_option("--emit-equation", render_eq,
                     "Write an equation whose graph is exactly Gl(text)");
  AddCommon(render, common);

  // graph
  std::string graph_text, graph_out = "graph.pbm", graph_unknown, graph_png;
  std::string graph_window = "-2,-2,2,2";
  auto* graph = app.add_subcommand("graph", "Rasterize Gr(text) by pixel centers");
  graph->add_option("equation", graph_text, "Equation, or @file")->required();
  graph->add_option("--window", graph_window, "x0,y0,x1,y1 in whole units")
      ->capture_default_str();
  graph->add_option("-o,--out", graph_out, "PBM output")->capture_default_str();
  graph->add_option("--unknown-out", graph_unknown, "PBM mask of undecided pixels");
  graph->add_option("--png", graph_png, "Also write a PNG");
  AddCommon(graph, common);

  // encode / decode
  std::string encode_text, decode_number;
  auto* encode = app.add_subcommand("encode", "Print the code of a string");
  encode->add_option("text", encode_text, "Text, or @file")->required();
  auto* decode = app.add_subcommand("decode", "Print the string with a code");
  decode->add_option("number", decode_number, "Decimal code, or @file")->required();

  // compile-pred
  std::string pred_text;
  auto* compile = app.add_subcommand(
      "compile-pred", "Compile a predicate, e.g. '(exists v (eq [v-3]))'");
  compile->add_option("predicate", pred_text, "Predicate, or @file")->required();

  // run
  std::string run_asm, run_index, run_input = "0";
  bool run_trace = false;
  auto* run = app.add_subcommand("run", "Run a register-machine program");
  auto* run_src = run->add_option("--asm", run_asm, "Assembly file");
  run->add_option("--index", run_index, "Program code, or @file")->excludes(run_src);
  run->add_option("--input", run_input, "Input (register 0)")->capture_default_str();
  run->add_flag("--print-code", run_trace, "Also print the program's code");
  AddCommon(run, common, false);

  // build-quine
  std::string build_dir = "quine";
  std::string emit_template, emit_predicate, witness = "replay";
  bool dry_run = false, no_verify = false;
  auto* build = app.add_subcommand(
      "build-quine", "Build sigma, its certificate and images, then verify");
  build->add_option("-o,--out-dir", build_dir, "Output directory")
      ->capture_default_str();
  build->add_option("--witness", witness,
                    "Trace witnesses: replay or construct")
      ->check(CLI::IsMember({"replay", "construct"}))
      ->capture_default_str();
  build->add_flag("--dry-run", dry_run, "Print size estimates and stop");
  build->add_option("--emit-template", emit_template,
                    "Write E (with free n) to this file");
  build->add_option("--emit-predicate", emit_predicate,
                    "Write the predicate behind E to this file");
  build->add_flag("--no-verify", no_verify, "Skip verification");
  AddCommon(build, common);

  // verify
  std::string verify_sigma, verify_cert, verify_dir;
  bool no_semantic = false, no_literal = false, exhaustive = false;
  std::size_t exterior = 100, literal_in = 10, literal_out = 10;
  auto* verify = app.add_subcommand("verify", "Check Gr(sigma) = Gl(sigma)");
  verify->add_option("--sigma", verify_sigma, "sigma text file")->required();
  verify->add_option("--cert", verify_cert, "Certificate file")->required();
  verify->add_option("-o,--out-dir", verify_dir,
                     "Write images and the report here");
  verify->add_flag("--no-semantic", no_semantic, "Skip the exhaustive pixel pass");
  verify->add_flag("--no-literal", no_literal, "Skip literal spot evaluation");
  verify->add_flag("--exhaustive", exhaustive,
                   "Keep going after the first bad pixel");
  verify->add_option("--exterior", exterior, "Exterior sample count")
      ->capture_default_str();
  verify->add_option("--literal-in", literal_in, "Lit pixels evaluated literally")
      ->capture_default_str();
  verify->add_option("--literal-out", literal_out,
                     "Unlit pixels evaluated literally")
      ->capture_default_str();
  AddCommon(verify, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto progress = [](const std::string& s) { std::cerr << s << "\n"; };

  try {
    common.Check();
    if (*render) {
      Font font = common.LoadFont();
      SymbolString s = Symbols(TextArg(render_text));
      if (s.empty()) std::cerr << "warning: empty text renders an empty image\n";
      Bitmap b = Rasterize(GlyphOfString(s, font), StringWindow(s.size()));
      SaveBitmap(render_out, render_png, b);
      if (!render_eq.empty()) {
        Equation eq = arith::PixelSetEquation(GlyphOfString(s, font));
        WriteFile(render_eq, SerializeText(eq) + "\n");
      }
      std::cout << "width = " << b.width() << "\nheight = " << b.height()
                << "\nlit = " << b.count() << "\n";
      return kOk;
    }
    if (*graph) {
      Font font = common.LoadFont();
      SymbolString s = Symbols(TextArg(graph_text));
      GraphResult g = Gr(s, ParseWindow(graph_window), font, common.Budget());
      SaveBitmap(graph_out, graph_png, g.bitmap);
      if (!graph_unknown.empty()) WritePbmFile(graph_unknown, g.unknown);
      KeyValues kv;
      kv.Set("valid", g.valid ? "true" : "false");
      if (!g.valid) kv.Set("invalid_reason", g.invalid_reason);
      kv.Set("heuristic", g.heuristic ? "true" : "false");
      kv.Set("lit", static_cast<std::uint64_t>(g.bitmap.count()));
      kv.Set("unknown", static_cast<std::uint64_t>(g.unknown.count()));
      kv.Set("undefined", static_cast<std::uint64_t>(g.undefined_pixels));
      std::cout << kv.ToText();
      return kOk;
    }
    if (*encode) {
      std::cout << codec::Encode(Symbols(TextArg(encode_text))) << "\n";
      return kOk;
    }
    if (*decode) {
      mpz_class n;
      if (n.set_str(TextArg(decode_number), 10) != 0 || n < 0) {
        throw ExitError{kUsage, "expected a natural number"};
      }
      std::cout << ToText(codec::Decode(n)) << "\n";
      return kOk;
    }
    if (*compile) {
      logic::PredPtr p;
      try {
        p = logic::ParsePred(TextArg(pred_text));
      } catch (const std::exception& e) {
        throw ExitError{kUsage, std::string("predicate: ") + e.what()};
      }
      std::cout << SerializeText(Equation{logic::Compile(p), ex::Num(0)}) << "\n";
      return kOk;
    }
    if (*run) {
      machine::Program prog;
      if (!run_asm.empty()) {
        try {
          prog = machine::ParseAssembly(ReadFile(run_asm));
        } catch (const ExitError&) {
          throw;
        } catch (const std::exception& e) {
          throw ExitError{kBadInput, run_asm + ": " + e.what()};
        }
      } else if (!run_index.empty()) {
        mpz_class n;
        if (n.set_str(TextArg(run_index), 10) != 0 || n < 0) {
          throw ExitError{kUsage, "expected a natural number index"};
        }
        prog = machine::DecodeProgram(n);
      } else {
        throw ExitError{kUsage, "give --asm or --index"};
      }
      mpz_class input;
      if (input.set_str(run_input, 10) != 0 || input < 0) {
        throw ExitError{kUsage, "expected a natural number input"};
      }
      if (run_trace) std::cout << "code = " << machine::EncodeProgram(prog) << "\n";
      machine::RunResult r = machine::Run(prog, input, common.steps);
      std::cout << "halted = " << (r.halted ? "true" : "false")
                << "\nsteps = " << r.steps << "\n";
      if (!r.halted) {
        std::cerr << "step budget exhausted after " << r.steps << " steps\n";
        return kOutOfBudget;
      }
      std::cout << "output = " << r.output << "\n";
      return kOk;
    }
    if (*build) {
      Font font = common.LoadFont();
      if (dry_run) {
        for (const auto& e : arith::DryRun(font)) {
          std::cout << e.part << " = " << e.symbols << "\n";
        }
        return kOk;
      }
      auto ctx = std::make_shared<arith::WitnessContext>();
      if (!emit_template.empty() || !emit_predicate.empty()) {
        arith::EquationTemplate t = arith::BuildE(font, ctx);
        if (!emit_template.empty()) {
          std::string text = ToText(t.prefix) + "n" + ToText(t.suffix) + "\n";
          WriteFile(emit_template, text);
        }
        if (!emit_predicate.empty()) {
          WriteFile(emit_predicate, logic::ToText(*t.star) + "\n");
        }
      }
      BuildOptions opts;
      opts.witness = witness == "replay" ? arith::TraceWitness::kReplay
                                         : arith::TraceWitness::kConstruct;
      opts.step_budget = common.steps;
      BuildOutput out;
      try {
        out = BuildSelfGraphing(font, opts);
      } catch (const BuildError& e) {
        const std::string what = e.what();
        throw ExitError{what.find("did not halt") != std::string::npos
                            ? kOutOfBudget
                            : kInternal,
                        what};
      }
      fs::create_directories(build_dir);
      const fs::path dir(build_dir);
      WriteFile(dir / "sigma.txt", ToText(out.sigma) + "\n");
      WriteFile(dir / "certificate.txt", out.certificate.ToKeyValues().ToText());
      WriteFile(dir / "report.txt", out.report.ToText());
      WritePbmFile((dir / "glyphs.pbm").string(),
                   Rasterize(GlyphOfString(out.sigma, font),
                             StringWindow(out.sigma.size())));
      std::cout << out.report.ToText();
      if (no_verify) return kOk;
      VerifyOptions vo;
      vo.jobs = common.jobs;
      vo.fail_fast = true;
      vo.progress = progress;
      VerifyReport rep = VerifySelfGraphing(out.sigma, out.certificate, font, vo);
      WritePbmFile((dir / "semantic.pbm").string(), rep.semantic_bitmap);
      WriteFile(dir / "verify.txt", rep.ToKeyValues().ToText());
      std::cout << rep.ToKeyValues().ToText();
      return VerifyExit(rep);
    }
    if (*verify) {
      Font font = common.LoadFont();
      std::string sigma_text = ReadFile(verify_sigma);
      while (!sigma_text.empty() &&
             (sigma_text.back() == '\n' || sigma_text.back() == '\r')) {
        sigma_text.pop_back();
      }
      SymbolString sigma = Symbols(sigma_text);
      Certificate cert;
      try {
        cert = Certificate::FromKeyValues(KeyValues::Parse(ReadFile(verify_cert)));
      } catch (const ExitError&) {
        throw;
      } catch (const std::exception& e) {
        throw ExitError{kBadInput, verify_cert + ": " + e.what()};
      }
      VerifyOptions vo;
      vo.jobs = common.jobs;
      vo.semantic = !no_semantic;
      vo.literal = !no_literal;
      vo.fail_fast = !exhaustive;
      vo.exterior_samples = exterior;
      vo.literal_in = literal_in;
      vo.literal_out = literal_out;
      vo.progress = progress;
      VerifyReport rep = VerifySelfGraphing(sigma, cert, font, vo);
      if (!verify_dir.empty()) {
        fs::create_directories(verify_dir);
        const fs::path dir(verify_dir);
        WritePbmFile((dir / "semantic.pbm").string(), rep.semantic_bitmap);
        WritePbmFile((dir / "glyphs.pbm").string(), rep.glyph_bitmap);
        WriteFile(dir / "verify.txt", rep.ToKeyValues().ToText());
      }
      std::cout << rep.ToKeyValues().ToText();
      return VerifyExit(rep);
    }
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const machine::OutOfBudget& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOutOfBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
