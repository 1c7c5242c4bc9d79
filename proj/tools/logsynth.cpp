// logsynth: analyze logging-instrumented MiniLang programs and generate
// labeled log-sequence datasets from them.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "logsynth/error.hpp"
#include "logsynth/generation.hpp"
#include "logsynth/labeling.hpp"
#include "logsynth/metrics.hpp"
#include "logsynth/model_io.hpp"
#include "logsynth/parallel.hpp"
#include "logsynth/pipeline.hpp"
#include "logsynth/text.hpp"

namespace {

using namespace logsynth;

struct CommonOptions {
  std::vector<std::string> inputs;
  std::string api_config;
  std::size_t max_paths = PathLimits{}.max_paths_per_method;
  unsigned workers = default_workers();
};

void add_common(CLI::App* cmd, CommonOptions& o, bool inputs_required = true) {
  auto* in = cmd->add_option("inputs", o.inputs, "MiniLang files, directories of .ml files, or one .model file");
  if (inputs_required) in->required();
  cmd->add_option("--api-config", o.api_config, "File listing logging API names, one per line");
  cmd->add_option("--max-paths", o.max_paths, "LogEP cap per method")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "Worker threads (default: available parallelism)")
      ->check(CLI::PositiveNumber);
}

void run_analysis(const CommonOptions& o, Analysis& a) {
  LoggingApiConfig config;
  if (!o.api_config.empty()) config = LoggingApiConfig::load(o.api_config);
  PathLimits limits;
  limits.max_paths_per_method = o.max_paths;
  analyze(load_inputs(o.inputs), a, config, limits, o.workers);
  for (const auto& w : a.store.warnings) std::cerr << "logsynth: warning: " << w << "\n";
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::string prune_dump(const Analysis& a) {
  std::string out;
  for (const auto& m : a.model.methods) {
    out += m.name + " " + std::string(to_string(a.pruned.classification[m.id]));
    if (a.pruned.kept(m.id)) out += " in=" + std::to_string(a.pruned.in_degree[m.id]);
    if (m.in_cycle) out += " cycle";
    out += '\n';
  }
  return out;
}

std::string format_double(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static log-dataset generator for MiniLang programs", "logsynth"};
  app.set_version_flag("--version", std::string(LOGSYNTH_VERSION));
  app.require_subcommand(1);

  CommonOptions common;

  auto* analyze_cmd = app.add_subcommand("analyze", "Probe, prune and enumerate LogEPs; print a summary");
  add_common(analyze_cmd, common);
  std::string model_out, logeps_out;
  analyze_cmd->add_option("--model-out", model_out, "Write the program model here");
  analyze_cmd->add_option("--logeps-out", logeps_out, "Write the LogEP dump here");

  auto* prune_cmd = app.add_subcommand("prune", "Classify methods of the call graph");
  add_common(prune_cmd, common);
  bool prune_dump_flag = false;
  prune_cmd->add_flag("--dump", prune_dump_flag, "Print one classification line per method");

  auto* paths_cmd = app.add_subcommand("paths", "Enumerate log-related execution paths");
  add_common(paths_cmd, common);
  bool paths_dump_flag = false;
  paths_cmd->add_flag("--dump", paths_dump_flag, "Print events and LogEPs");

  auto* sheet_cmd = app.add_subcommand("worksheet", "Write an annotation worksheet");
  add_common(sheet_cmd, common);
  std::string sheet_out;
  sheet_cmd->add_option("--out", sheet_out, "Worksheet file (default: standard output)");

  auto* gen_cmd = app.add_subcommand("generate", "Generate a labeled dataset");
  add_common(gen_cmd, common);
  GenParams params;
  std::string annotations_path, out_dir, component;
  std::vector<std::string> entry_names;
  bool inexact = false;
  gen_cmd->add_option("--annotations", annotations_path, "Annotated worksheet")->check(CLI::ExistingFile);
  gen_cmd->add_option("--size", params.size, "Number of sequences")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--anomaly-rate", params.anomaly_rate, "Fraction of anomaly sequences")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--component", component, "Start walks only in this component");
  gen_cmd->add_option("--entry", entry_names, "Entry method names (repeatable)");
  gen_cmd->add_option("--seed", params.seed, "RNG seed")->envname("LOGSYNTH_SEED");
  gen_cmd->add_option("--max-loop-reps", params.max_loop_reps, "Upper bound of loop repetitions")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max-recursion-depth", params.max_recursion_depth, "Re-entries allowed per method");
  gen_cmd->add_flag("--inexact-rate", inexact, "Draw each label independently");
  gen_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Coverage and detector statistics of a dataset");
  add_common(stats_cmd, common, false);
  std::string dataset_dir, reference_path, curve_path, train_dir;
  bool csv = false, detector = false;
  stats_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  stats_cmd->add_option("--reference", reference_path, "Reference templates for D-coverage")
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--curve", curve_path, "Write the coverage curve as CSV");
  stats_cmd->add_flag("--csv", csv, "Print metric,value rows");
  stats_cmd->add_flag("--detector", detector, "Evaluate the baseline detector");
  stats_cmd->add_option("--train", train_dir, "Training dataset for --detector (default: first half)")
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_cmd->parsed()) {
      const LogDataset ds = read_dataset(dataset_dir);
      std::vector<std::pair<std::string, std::string>> rows;
      std::uint64_t messages = 0;
      for (const auto& s : ds.sequences) messages += s.events.size();
      rows.emplace_back("sequences", std::to_string(ds.sequences.size()));
      rows.emplace_back("anomalies", std::to_string(ds.anomaly_count()));
      rows.emplace_back("messages", std::to_string(messages));
      rows.emplace_back("templates", std::to_string(ds.templates.size()));
      if (!common.inputs.empty()) {
        Analysis a;
        run_analysis(common, a);
        const std::string hash = hex64(fnv1a64(serialize_model(a.model)));
        if (hash != ds.model_hash) std::cerr << "logsynth: warning: dataset was generated from a different model\n";
        const auto cov = logging_coverage(ds, a.model);
        rows.emplace_back("events_discovered", std::to_string(cov.discovered));
        rows.emplace_back("events_total", std::to_string(cov.total));
        rows.emplace_back("logging_coverage", format_double(cov.coverage));
        if (!curve_path.empty()) {
          std::string text = "messages,coverage\n";
          for (const auto& p : cov.curve) text += std::to_string(p.messages) + "," + format_double(p.coverage, 6) + "\n";
          write_file(curve_path, text);
        }
      } else if (!curve_path.empty()) {
        throw ConfigError("--curve needs the analyzed program as input");
      }
      std::vector<std::string> unmatched;
      if (!reference_path.empty()) {
        const auto ref = load_reference_templates(reference_path);
        const auto dc = d_coverage(ds, ref);
        rows.emplace_back("d_coverage", format_double(dc.fraction));
        unmatched = dc.unmatched;
      }
      if (detector) {
        std::vector<LogSequence> train, test;
        if (!train_dir.empty()) {
          for (const auto& s : read_dataset(train_dir).sequences) {
            if (s.label == Label::kNormal) train.push_back(s);
          }
          test = ds.sequences;
        } else {
          const std::size_t half = ds.sequences.size() / 2;
          for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
            if (i >= half) {
              test.push_back(ds.sequences[i]);
            } else if (ds.sequences[i].label == Label::kNormal) {
              train.push_back(ds.sequences[i]);
            }
          }
        }
        const auto model = train_detector(train);
        const auto ev = evaluate(model, test);
        for (const auto& w : ev.warnings) std::cerr << "logsynth: warning: " << w << "\n";
        rows.emplace_back("precision", format_double(ev.precision));
        rows.emplace_back("recall", format_double(ev.recall));
        rows.emplace_back("f1", format_double(ev.f1));
      }
      if (csv) {
        std::cout << "metric,value\n";
        for (const auto& [k, v] : rows) std::cout << k << "," << v << "\n";
      } else {
        for (const auto& [k, v] : rows) std::printf("%-20s %s\n", k.c_str(), v.c_str());
        for (const auto& u : unmatched) std::printf("%-20s %s\n", "unmatched", u.c_str());
      }
      return 0;
    }

    Analysis a;
    run_analysis(common, a);

    if (analyze_cmd->parsed()) {
      if (!model_out.empty()) save_model(a.model, model_out);
      if (!logeps_out.empty()) write_file(logeps_out, a.store.dump(a.model));
      std::cout << summary(a);
    } else if (prune_cmd->parsed()) {
      if (prune_dump_flag) {
        std::cout << prune_dump(a);
      } else {
        std::cout << "methods: " << a.model.methods.size() << "\nkept: " << a.pruned.kept_count()
                  << "\nlog methods: " << a.log_methods.size() << "\n";
      }
    } else if (paths_cmd->parsed()) {
      if (paths_dump_flag) {
        std::cout << a.store.dump(a.model);
      } else {
        for (const auto& m : a.model.methods) {
          if (!a.pruned.kept(m.id)) continue;
          std::cout << m.name << " " << a.store.by_method[m.id].size() << "\n";
        }
      }
    } else if (sheet_cmd->parsed()) {
      emit(render_worksheet(a.store, a.model, a.origins), sheet_out);
    } else if (gen_cmd->parsed()) {
      AnnotationSet annotations;
      if (!annotations_path.empty()) annotations = import_annotations(annotations_path, a.store, a.model);
      if (!component.empty()) params.component = component;
      for (const auto& name : entry_names) {
        const auto id = a.model.find_method(name);
        if (!id) throw ConfigError("unknown entry method '" + name + "'");
        params.entries.push_back(*id);
      }
      params.exact_rate = !inexact;
      const InfectionMap infection = propagate(a.store, annotations);
      const GenerationContext ctx(a.model, a.cg, a.pruned, a.store, infection, annotations);
      const LogDataset ds = generate_dataset(ctx, params, common.workers);
      write_dataset(ds, out_dir);
      std::cerr << "logsynth: wrote " << ds.sequences.size() << " sequences (" << ds.anomaly_count()
                << " anomalies) to " << out_dir << "\n";
    }
  } catch (const logsynth::Error& e) {
    std::cerr << "logsynth: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
