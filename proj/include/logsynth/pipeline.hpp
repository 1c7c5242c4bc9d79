#pragma once

#include <span>
#include <string>
#include <vector>

#include "logsynth/paths.hpp"
#include "logsynth/probing.hpp"
#include "logsynth/pruning.hpp"

namespace logsynth {

struct LoadedProgram {
  ProgramModel model;
  std::vector<StatementOrigin> origins;  // empty for model files
};

// Accepts one `.model` file, or any mix of `.ml` files and directories
// (searched recursively for `.ml`, in path order). Throws ConfigError when
// nothing is found.
LoadedProgram load_inputs(std::span<const std::string> paths);

// Phase 1 and 2 results. Not copyable: generation keeps references into it.
struct Analysis {
  ProgramModel model;
  std::vector<StatementOrigin> origins;
  CallGraph cg;
  std::vector<MethodId> log_methods;
  PrunedCallGraph pruned;
  LogEpStore store;

  Analysis() = default;
  Analysis(const Analysis&) = delete;
  Analysis& operator=(const Analysis&) = delete;
};

void analyze(LoadedProgram program, Analysis& out, const LoggingApiConfig& config = {}, const PathLimits& limits = {},
             unsigned workers = 1);

// Method, kept, LogMethod, LogEP and event counts, one per line.
std::string summary(const Analysis& analysis);

}  // namespace logsynth
