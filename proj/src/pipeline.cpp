#include "logsynth/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "logsynth/error.hpp"
#include "logsynth/minilang.hpp"
#include "logsynth/model_io.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

namespace fs = std::filesystem;

LoadedProgram load_inputs(std::span<const std::string> paths) {
  if (paths.empty()) throw ConfigError("no input paths given");
  std::vector<std::string> sources;
  std::vector<std::string> models;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (auto it = fs::recursive_directory_iterator(p, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".ml") found.push_back(it->path().string());
      }
      if (ec) throw Error("cannot read directory " + p + ": " + ec.message());
      std::sort(found.begin(), found.end());
      sources.insert(sources.end(), found.begin(), found.end());
    } else if (fs::path(p).extension() == ".model") {
      models.push_back(p);
    } else if (fs::exists(p, ec)) {
      sources.push_back(p);
    } else {
      throw Error("cannot open " + p + ": no such file or directory");
    }
  }
  if (!models.empty()) {
    if (models.size() > 1 || !sources.empty()) {
      throw ConfigError("a .model file must be the only input");
    }
    LoadedProgram out;
    out.model = load_model(models[0]);
    if (out.model.methods.empty()) throw ConfigError("no methods found in " + models[0]);
    return out;
  }
  std::vector<minilang::ParsedUnit> units;
  for (const auto& s : sources) {
    minilang::SourceUnit unit{s, read_file(s)};
    auto methods = minilang::parse_unit(unit);
    units.push_back({std::move(unit), std::move(methods)});
  }
  LoadedProgram out;
  out.model = minilang::lower_units(units, &out.origins);
  if (out.model.methods.empty()) throw ConfigError("no methods found");
  return out;
}

void analyze(LoadedProgram program, Analysis& out, const LoggingApiConfig& config, const PathLimits& limits,
             unsigned workers) {
  out.model = std::move(program.model);
  out.origins = std::move(program.origins);
  out.cg = build_call_graph(out.model);
  out.log_methods = mark_log_methods(out.model, config);
  out.pruned = prune(out.cg, out.log_methods);
  out.store = build_store(out.model, out.pruned, limits, workers);
}

std::string summary(const Analysis& a) {
  const std::size_t methods = a.model.methods.size();
  const std::size_t kept = a.pruned.kept_count();
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.1f", methods ? 100.0 * static_cast<double>(kept) / static_cast<double>(methods) : 0.0);
  std::string out;
  out += "methods: " + std::to_string(methods) + "\n";
  out += "kept: " + std::to_string(kept) + " (" + pct + "%)\n";
  out += "log methods: " + std::to_string(a.log_methods.size()) + "\n";
  out += "logeps: " + std::to_string(a.store.logeps.size()) + " (" + std::to_string(a.store.non_empty_count()) +
         " non-empty)\n";
  out += "events: " + std::to_string(a.store.events.size()) + "\n";
  out += "warnings: " + std::to_string(a.store.warnings.size()) + "\n";
  return out;
}

}  // namespace logsynth
