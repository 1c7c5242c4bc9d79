#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "logsynth/labeling.hpp"
#include "logsynth/paths.hpp"
#include "logsynth/probing.hpp"
#include "logsynth/pruning.hpp"

namespace logsynth {

struct GenParams {
  std::size_t size = 1000;
  double anomaly_rate = 0.0;
  std::optional<std::string> component;
  std::vector<MethodId> entries;  // empty: derive from the pruned graph
  std::uint64_t seed = 0;
  std::uint32_t max_loop_reps = 3;
  std::uint32_t max_recursion_depth = 1;
  bool exact_rate = true;
  std::size_t max_events = 1'000'000;  // per sequence

  // Throws ConfigError for out-of-range values.
  void validate() const;
  bool operator==(const GenParams&) const = default;
};

enum class Label : std::uint8_t { kNormal, kAnomaly };

struct LogSequence {
  std::uint32_t seq_id = 0;
  Label label = Label::kNormal;
  MethodId entry = 0;
  std::vector<EventId> events;

  bool operator==(const LogSequence&) const = default;
};

// Walk decisions in the order they were taken. A skipped call (recursion
// bound) is not recorded; it follows from the call stack.
struct Decision {
  enum class Kind : std::uint8_t { kChoose, kReps };
  Kind kind = Kind::kChoose;
  std::uint32_t value = 0;  // LogEpId or repetition count

  bool operator==(const Decision&) const = default;
};

struct WalkTrace {
  std::vector<Decision> decisions;
  std::uint32_t seeds_hit = 0;
};

struct TemplateRow {
  EventId id = 0;
  LogLevel level = LogLevel::kInfo;
  std::string text;

  bool operator==(const TemplateRow&) const = default;
};

struct LogDataset {
  std::vector<LogSequence> sequences;
  std::vector<TemplateRow> templates;
  GenParams params;
  std::string model_hash;
  std::string annotation_hash;
  std::string tool_version;

  std::size_t anomaly_count() const;
  bool operator==(const LogDataset&) const = default;
};

using Rng = std::mt19937_64;

// Independent stream for sequence `stream` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);
// Uniform in [0, n) by rejection; identical on every platform.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);
double uniform_unit(Rng& rng);

// Everything the walker needs that does not change between sequences.
class GenerationContext {
 public:
  GenerationContext(const ProgramModel& model, const CallGraph& cg, const PrunedCallGraph& pruned,
                    const LogEpStore& store, const InfectionMap& infection, AnnotationSet annotations = {});

  const ProgramModel& model() const { return model_; }
  const LogEpStore& store() const { return store_; }
  const InfectionMap& infection() const { return infection_; }
  const PrunedCallGraph& pruned() const { return pruned_; }
  const AnnotationSet& annotations() const { return annotations_; }

  // A NORMAL walk entering `m` can finish without choosing a SEED LogEP.
  bool can_complete_clean(MethodId m) const { return clean_ok_[m]; }
  // Fewest calls from `m` to a method owning a SEED LogEP.
  std::optional<std::uint32_t> seed_distance(MethodId m) const;

  // Kept methods in source components of the pruned graph, ascending.
  std::vector<MethodId> default_entries() const;
  // Entry set after applying the explicit list and the component
  // indicator. Throws ConfigError when it is empty or inconsistent.
  std::vector<MethodId> resolve_entries(const GenParams& params) const;

  struct Choice {
    LogEpId logep = 0;
    std::int32_t route_step = -1;  // call step continuing toward a seed
  };
  struct Plan {
    std::vector<std::int32_t> tokens;  // step index, kOpen or kClose
    std::vector<std::uint32_t> match;  // for kOpen: index of its kClose
  };
  static constexpr std::int32_t kOpen = -1;
  static constexpr std::int32_t kClose = -2;

  const std::vector<LogEpId>& normal_options(MethodId m, bool at_entry) const {
    return at_entry ? normal_entry_[m] : normal_[m];
  }
  const std::vector<Choice>& route_options(MethodId m) const { return route_[m]; }
  const std::vector<LogEpId>& free_options(MethodId m) const { return free_[m]; }
  const Plan& plan(LogEpId id) const { return plans_[id]; }

 private:
  const ProgramModel& model_;
  const CallGraph& cg_;
  const PrunedCallGraph& pruned_;
  const LogEpStore& store_;
  const InfectionMap& infection_;
  AnnotationSet annotations_;
  std::vector<bool> clean_ok_;
  std::vector<std::uint32_t> seed_dist_;
  std::vector<std::vector<LogEpId>> normal_;
  std::vector<std::vector<LogEpId>> normal_entry_;
  std::vector<std::vector<Choice>> route_;
  std::vector<std::vector<LogEpId>> free_;
  std::vector<Plan> plans_;
};

// Loop-region plan of a LogEP's steps. Unbalanced marks are tolerated: a
// stray end is ignored and open regions close after the last step.
GenerationContext::Plan make_plan(const LogEp& logep);

// One top-down walk from `entry`. Throws UnreachableSeedError for an ANOMALY
// walk from an entry that cannot reach a seed, ExhaustionError when a NORMAL
// walk cannot avoid seeds or the event cap is exceeded.
LogSequence generate_sequence(const GenerationContext& ctx, MethodId entry, Label mode, Rng& rng,
                              const GenParams& params, WalkTrace* trace = nullptr);

// Labels are fixed first (exact count or per-sequence draws), then sequence i
// is walked with make_rng(seed, i), so the result does not depend on
// `workers`. Throws ConfigError when the requested rate cannot be served by
// the entry set.
LogDataset generate_dataset(const GenerationContext& ctx, const GenParams& params, unsigned workers = 1,
                            std::vector<WalkTrace>* traces = nullptr);

// Writes sequences.csv, templates.csv and manifest.txt into `dir`, creating
// it if needed.
void write_dataset(const LogDataset& dataset, const std::string& dir);
LogDataset read_dataset(const std::string& dir);

}  // namespace logsynth
