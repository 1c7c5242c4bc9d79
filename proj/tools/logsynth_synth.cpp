// logsynth-synth: write a random MiniLang program with a fixed seed.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "logsynth/error.hpp"
#include "logsynth/minilang.hpp"
#include "logsynth/synthetic.hpp"
#include "logsynth/text.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random MiniLang program generator", "logsynth-synth"};
  logsynth::SyntheticOptions o;
  std::string out;
  app.add_option("--methods", o.methods, "Number of methods")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--levels", o.levels, "Call depth bands")->check(CLI::PositiveNumber);
  app.add_option("--max-branches", o.max_branches, "if/while statements per method");
  app.add_option("--recursion-rate", o.recursion_rate, "Probability that a call may target any method")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--component", o.components, "Component names, assigned round-robin (repeatable)");
  app.add_option("--out", out, "Output file (default: standard output)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto methods = logsynth::synthetic_program(o);
    const std::string text = logsynth::minilang::print(methods);
    if (out.empty()) {
      std::cout << text;
    } else {
      logsynth::write_file(out, text);
    }
  } catch (const logsynth::Error& e) {
    std::cerr << "logsynth-synth: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
