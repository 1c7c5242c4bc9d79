#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logsynth/model.hpp"
#include "logsynth/pruning.hpp"

namespace logsynth {

// A restored logging statement: the dataset vocabulary.
struct LogEvent {
  EventId id = 0;
  LogLevel level = LogLevel::kInfo;
  std::string text;  // template with `<*>` for unresolved parameters
  StatementId origin = 0;
  MethodId method = 0;

  bool operator==(const LogEvent&) const = default;
};

// One element of a LogEP. Loop marks count how many loop iterations open
// before / close after this step; a single non-nested loop yields the usual
// start / end / both marks.
struct Step {
  enum class Kind : std::uint8_t { kLog, kCall };
  Kind kind = Kind::kLog;
  std::uint32_t target = 0;  // EventId for kLog, MethodId for kCall
  std::uint8_t loop_starts = 0;
  std::uint8_t loop_ends = 0;

  static Step log(EventId e) { return {Kind::kLog, e, 0, 0}; }
  static Step call(MethodId m) { return {Kind::kCall, m, 0, 0}; }
  Step& start(std::uint8_t n = 1) {
    loop_starts = n;
    return *this;
  }
  Step& end(std::uint8_t n = 1) {
    loop_ends = n;
    return *this;
  }

  auto operator<=>(const Step&) const = default;
};

struct GuardFact {
  std::string var;
  bool value = true;
  auto operator<=>(const GuardFact&) const = default;
};

// Log-related execution path of one method.
struct LogEp {
  LogEpId id = 0;
  MethodId method = 0;
  std::vector<Step> steps;
  std::vector<GuardFact> constraints;  // facts still live at method exit
  // Skips at least one loop entirely. Stored, but only NORMAL walks pick it.
  bool zero_iteration = false;

  bool operator==(const LogEp&) const = default;
};

struct PathLimits {
  std::size_t max_paths_per_method = 4096;
  std::size_t max_raw_paths = std::size_t{1} << 20;
};

// How a kept method's paths are projected, by its place in the pruned graph.
enum class Strategy : std::uint8_t {
  kLogsAndCalls,  // non-leaf LogMethod
  kLogsOnly,      // leaf LogMethod
  kCallsOnly,     // non-leaf, non-LogMethod
};
Strategy strategy_for(bool is_log_method, bool is_leaf);

// Constraint events recorded along a raw CFG path.
struct GuardEvent {
  enum class Kind : std::uint8_t { kAssert, kLiteral, kKill };
  Kind kind = Kind::kAssert;
  std::string var;
  bool value = true;

  static GuardEvent assert_var(std::string v, bool value) { return {Kind::kAssert, std::move(v), value}; }
  static GuardEvent literal(bool value) { return {Kind::kLiteral, {}, value}; }
  static GuardEvent kill(std::string v) { return {Kind::kKill, std::move(v), true}; }
  bool operator==(const GuardEvent&) const = default;
};

// Conjunction of boolean-variable polarities. A reassignment (or the back
// edge of a loop over the variable) forgets what was known about a variable.
class GuardState {
 public:
  // Returns false when the event contradicts the current facts.
  bool apply(const GuardEvent& event);
  std::vector<GuardFact> facts() const;

 private:
  std::map<std::string, bool, std::less<>> facts_;
};

bool is_feasible(std::span<const GuardEvent> events);

// Entry-to-exit CFG path in which each loop body runs zero times or once.
struct RawPath {
  std::vector<ActivityId> nodes;
  std::vector<GuardEvent> guards;
  bool zero_iteration = false;
};

struct RawPathOptions {
  std::size_t max_paths = std::size_t{1} << 20;
  // Drop prefixes as soon as they become infeasible. Yields exactly the
  // feasible subset of the unpruned enumeration.
  bool prune_infeasible = true;
};

// Depth-first, following out-edges in stored order. Sets *truncated when the
// cap stopped enumeration early.
std::vector<RawPath> enumerate_raw_paths(const ExecutionGraph& graph, const RawPathOptions& options = {},
                                         bool* truncated = nullptr);

std::vector<RawPath> filter_infeasible(std::vector<RawPath> paths);

// Template for a logging statement of `method`: each variable part becomes
// the literal of the one assignment reaching it on every path, or `<*>`.
LogEvent restore_statement(const LoggingStatement& stmt, const MethodNode& method);

struct MethodPaths {
  std::vector<LogEp> logeps;  // ids unassigned
  std::vector<std::string> warnings;
};

// All distinct feasible LogEPs of a kept method, in depth-first order.
// `event_of_statement` maps StatementId to EventId.
MethodPaths enumerate_logeps(const ProgramModel& model, MethodId method, const PrunedCallGraph& pruned,
                             std::span<const std::optional<EventId>> event_of_statement,
                             const PathLimits& limits = {});

struct LogEpStore {
  std::vector<LogEvent> events;  // index == EventId
  std::vector<std::optional<EventId>> event_of_statement;
  std::vector<LogEp> logeps;  // index == LogEpId
  std::vector<std::vector<LogEpId>> by_method;
  std::vector<std::string> warnings;

  std::size_t non_empty_count() const;
  // `EV <event-id> <level> <template>` lines, then
  // `EP <id> <method> <L:<event>|C:<method>>[:S|:E|:SE]...` lines.
  std::string dump(const ProgramModel& model) const;
};

std::string step_token(const Step& step, const ProgramModel& model);

// Restores every statement of the kept methods and enumerates their LogEPs,
// on `workers` threads. The result does not depend on the worker count.
LogEpStore build_store(const ProgramModel& model, const PrunedCallGraph& pruned, const PathLimits& limits = {},
                       unsigned workers = 1);

}  // namespace logsynth
