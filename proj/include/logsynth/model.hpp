#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace logsynth {

using MethodId = std::uint32_t;
using ActivityId = std::uint32_t;
using StatementId = std::uint32_t;
using EventId = std::uint32_t;
using LogEpId = std::uint32_t;

enum class LogLevel : std::uint8_t { kInfo, kWarn, kError };

std::string_view to_string(LogLevel level);
std::optional<LogLevel> parse_level(std::string_view text);

// One operand of a logging call: either literal text or a variable reference.
struct LogPart {
  enum class Kind : std::uint8_t { kLiteral, kVar };
  Kind kind = Kind::kLiteral;
  std::string text;

  static LogPart literal(std::string text) { return {Kind::kLiteral, std::move(text)}; }
  static LogPart var(std::string name) { return {Kind::kVar, std::move(name)}; }

  bool operator==(const LogPart&) const = default;
};

struct LoggingStatement {
  StatementId id = 0;
  LogLevel level = LogLevel::kInfo;
  std::vector<LogPart> parts;

  bool operator==(const LoggingStatement&) const = default;
};

// Branch condition: `true`, `false`, `v` or `!v`.
struct Condition {
  enum class Kind : std::uint8_t { kTrue, kFalse, kVar, kNotVar };
  Kind kind = Kind::kTrue;
  std::string var;

  bool operator==(const Condition&) const = default;
};

// Proposition that must hold for a CFG edge to be taken.
struct Guard {
  enum class Kind : std::uint8_t { kTrue, kFalse, kVarTrue, kVarFalse };
  Kind kind = Kind::kTrue;
  std::string var;

  static Guard literal(bool value) { return {value ? Kind::kTrue : Kind::kFalse, {}}; }
  static Guard on_var(std::string name, bool value) {
    return {value ? Kind::kVarTrue : Kind::kVarFalse, std::move(name)};
  }

  Guard negated() const;
  bool operator==(const Guard&) const = default;
};

// Guards on the (then, else) edges of a branch on `cond`.
std::pair<Guard, Guard> branch_guards(const Condition& cond);

struct EntryActivity {
  bool operator==(const EntryActivity&) const = default;
};
struct ExitActivity {
  bool operator==(const ExitActivity&) const = default;
};
struct LogActivity {
  LoggingStatement stmt;
  bool operator==(const LogActivity&) const = default;
};
// Call site. Resolved callees live in ProgramModel::call_edges; a call without
// edges targets something outside the model (for example a logging API).
struct CallActivity {
  std::string target;
  bool operator==(const CallActivity&) const = default;
};
struct AssignActivity {
  std::string var;
  std::string literal;
  bool operator==(const AssignActivity&) const = default;
};
struct BranchActivity {
  Condition cond;
  bool operator==(const BranchActivity&) const = default;
};

using Activity = std::variant<EntryActivity, ExitActivity, LogActivity, CallActivity,
                              AssignActivity, BranchActivity>;

struct CfgEdge {
  ActivityId from = 0;
  ActivityId to = 0;
  std::optional<Guard> guard;

  bool operator==(const CfgEdge&) const = default;
};

// Per-method control-flow graph. Activity ids are dense indices into `nodes`.
// Edge order is significant: it fixes the depth-first order of path
// enumeration, so it is preserved through save/load.
class ExecutionGraph {
 public:
  ActivityId add_node(Activity activity);
  void add_edge(ActivityId from, ActivityId to, std::optional<Guard> guard = std::nullopt);

  // Recomputes successor lists, entry/exit and loop heads. Must be called
  // after the last mutation and before any query below.
  void finalize();

  const std::vector<Activity>& nodes() const { return nodes_; }
  const std::vector<CfgEdge>& edges() const { return edges_; }
  const Activity& node(ActivityId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  ActivityId entry() const { return entry_; }
  ActivityId exit() const { return exit_; }

  // Indices into edges() leaving `id`, in insertion order.
  const std::vector<std::uint32_t>& out_edges(ActivityId id) const { return out_[id]; }

  // Branch nodes targeted by a back edge reachable from entry, ascending.
  const std::vector<ActivityId>& loop_heads() const { return loop_heads_; }
  bool is_loop_head(ActivityId id) const;
  // For a loop head, the index of the out-edge that leaves the loop, if the
  // two out-edges can be told apart.
  std::optional<std::uint32_t> loop_exit_edge(ActivityId head) const;

  bool operator==(const ExecutionGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<Activity> nodes_;
  std::vector<CfgEdge> edges_;
  std::vector<std::vector<std::uint32_t>> out_;
  std::vector<ActivityId> loop_heads_;
  std::vector<std::optional<std::uint32_t>> loop_exit_;
  ActivityId entry_ = 0;
  ActivityId exit_ = 0;
};

struct MethodNode {
  MethodId id = 0;
  std::string name;
  std::optional<std::string> component;
  ExecutionGraph cfg;
  // Analysis results written by probing. Not part of the model file.
  bool is_log_method = false;
  bool in_cycle = false;

  bool operator==(const MethodNode&) const = default;
};

struct CallEdge {
  MethodId caller = 0;
  ActivityId site = 0;
  MethodId callee = 0;

  auto operator<=>(const CallEdge&) const = default;
};

struct ProgramModel {
  std::vector<MethodNode> methods;  // index == MethodId
  std::vector<CallEdge> call_edges;  // sorted, unique

  std::optional<MethodId> find_method(std::string_view name) const;
  std::size_t statement_count() const;
  // Callees resolved for the call site `site` of `caller`, ascending.
  std::vector<MethodId> callees_at(MethodId caller, ActivityId site) const;

  bool operator==(const ProgramModel&) const = default;
};

// Source location of a logging statement, indexed by StatementId. Only
// available when the model was lowered from MiniLang.
struct StatementOrigin {
  std::string path;
  MethodId method = 0;
  int line = 0;
  std::string snippet;
};

// Checks every structural invariant of the model and finalizes each graph.
// Throws ValidationError naming the first offending method/record.
void validate(ProgramModel& model);

}  // namespace logsynth
