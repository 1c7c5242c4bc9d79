#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logsynth/labeling.hpp"
#include "logsynth/minilang.hpp"

namespace logsynth {

// Shape of a random MiniLang program. Methods are split into `levels`
// contiguous bands; calls go to a strictly deeper band unless
// `recursion_rate` picks an arbitrary target. Loop bodies never call, which
// keeps walk length polynomial in the number of levels.
struct SyntheticOptions {
  std::size_t methods = 100;
  std::uint64_t seed = 1;
  std::size_t levels = 6;
  std::size_t max_block = 5;     // statements per block
  std::size_t max_depth = 2;     // statement nesting
  std::size_t max_branches = 4;  // if/while per method
  double log_rate = 0.35;
  double call_rate = 0.3;
  double recursion_rate = 0.0;
  double warn_rate = 0.15;  // of log statements; half of them error
  std::vector<std::string> components;  // round-robin over methods
  bool exotic_text = false;  // quotes, backslashes and non-ASCII in literals
};

std::vector<minilang::AstMethod> synthetic_program(const SyntheticOptions& options);

// Marks every warn/error event alerting and picks up to `max_seeds` LogEPs
// containing one as seeds, deterministically from `seed`.
AnnotationSet auto_annotate(const LogEpStore& store, std::size_t max_seeds, std::uint64_t seed);

}  // namespace logsynth
