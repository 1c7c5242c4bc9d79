#include "logsynth/model.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "logsynth/error.hpp"

namespace logsynth {

std::string_view to_string(LogLevel level) {
  switch (level) {
    case LogLevel::kInfo:
      return "info";
    case LogLevel::kWarn:
      return "warn";
    case LogLevel::kError:
      return "error";
  }
  return "info";
}

std::optional<LogLevel> parse_level(std::string_view text) {
  if (text == "info") return LogLevel::kInfo;
  if (text == "warn") return LogLevel::kWarn;
  if (text == "error") return LogLevel::kError;
  return std::nullopt;
}

Guard Guard::negated() const {
  switch (kind) {
    case Kind::kTrue:
      return literal(false);
    case Kind::kFalse:
      return literal(true);
    case Kind::kVarTrue:
      return on_var(var, false);
    case Kind::kVarFalse:
      return on_var(var, true);
  }
  return *this;
}

std::pair<Guard, Guard> branch_guards(const Condition& cond) {
  switch (cond.kind) {
    case Condition::Kind::kTrue:
      return {Guard::literal(true), Guard::literal(false)};
    case Condition::Kind::kFalse:
      return {Guard::literal(false), Guard::literal(true)};
    case Condition::Kind::kVar:
      return {Guard::on_var(cond.var, true), Guard::on_var(cond.var, false)};
    case Condition::Kind::kNotVar:
      return {Guard::on_var(cond.var, false), Guard::on_var(cond.var, true)};
  }
  return {Guard::literal(true), Guard::literal(false)};
}

ActivityId ExecutionGraph::add_node(Activity activity) {
  nodes_.push_back(std::move(activity));
  return static_cast<ActivityId>(nodes_.size() - 1);
}

void ExecutionGraph::add_edge(ActivityId from, ActivityId to, std::optional<Guard> guard) {
  edges_.push_back({from, to, std::move(guard)});
}

bool ExecutionGraph::is_loop_head(ActivityId id) const {
  return std::binary_search(loop_heads_.begin(), loop_heads_.end(), id);
}

std::optional<std::uint32_t> ExecutionGraph::loop_exit_edge(ActivityId head) const {
  if (head >= loop_exit_.size()) return std::nullopt;
  return loop_exit_[head];
}

void ExecutionGraph::finalize() {
  const std::size_t n = nodes_.size();
  out_.assign(n, {});
  std::vector<std::vector<ActivityId>> preds(n);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.from < n && e.to < n) {
      out_[e.from].push_back(i);
      preds[e.to].push_back(e.from);
    }
  }
  entry_ = exit_ = 0;
  for (ActivityId i = 0; i < n; ++i) {
    if (std::holds_alternative<EntryActivity>(nodes_[i])) entry_ = i;
    if (std::holds_alternative<ExitActivity>(nodes_[i])) exit_ = i;
  }

  // Iterative DFS from entry; an edge into a node still on the stack is a
  // back edge and its target a loop head.
  loop_heads_.clear();
  loop_exit_.assign(n, std::nullopt);
  if (n == 0) return;
  enum : std::uint8_t { kWhite, kGray, kBlack };
  std::vector<std::uint8_t> color(n, kWhite);
  std::vector<std::pair<ActivityId, ActivityId>> back_edges;
  std::vector<std::pair<ActivityId, std::size_t>> stack;
  stack.emplace_back(entry_, 0);
  color[entry_] = kGray;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < out_[node].size()) {
      const ActivityId succ = edges_[out_[node][next++]].to;
      if (color[succ] == kWhite) {
        color[succ] = kGray;
        stack.emplace_back(succ, 0);
      } else if (color[succ] == kGray) {
        back_edges.emplace_back(node, succ);
      }
    } else {
      color[node] = kBlack;
      stack.pop_back();
    }
  }

  std::set<ActivityId> heads;
  for (const auto& [latch, head] : back_edges) heads.insert(head);
  loop_heads_.assign(heads.begin(), heads.end());

  for (ActivityId head : loop_heads_) {
    // Natural loop body: nodes reaching a latch without passing the head.
    std::vector<bool> in_body(n, false);
    in_body[head] = true;
    std::vector<ActivityId> work;
    for (const auto& [latch, h] : back_edges) {
      if (h == head && !in_body[latch]) {
        in_body[latch] = true;
        work.push_back(latch);
      }
    }
    while (!work.empty()) {
      const ActivityId v = work.back();
      work.pop_back();
      for (ActivityId p : preds[v]) {
        if (color[p] != kWhite && !in_body[p]) {
          in_body[p] = true;
          work.push_back(p);
        }
      }
    }
    std::optional<std::uint32_t> exit_edge;
    int leaving = 0;
    for (std::uint32_t ei : out_[head]) {
      if (!in_body[edges_[ei].to]) {
        exit_edge = ei;
        ++leaving;
      }
    }
    if (leaving == 1) loop_exit_[head] = exit_edge;
  }
}

std::optional<MethodId> ProgramModel::find_method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.name == name) return m.id;
  }
  return std::nullopt;
}

std::size_t ProgramModel::statement_count() const {
  std::size_t count = 0;
  for (const auto& m : methods) {
    for (const auto& a : m.cfg.nodes()) {
      if (std::holds_alternative<LogActivity>(a)) ++count;
    }
  }
  return count;
}

std::vector<MethodId> ProgramModel::callees_at(MethodId caller, ActivityId site) const {
  std::vector<MethodId> out;
  auto it = std::lower_bound(call_edges.begin(), call_edges.end(), CallEdge{caller, site, 0});
  for (; it != call_edges.end() && it->caller == caller && it->site == site; ++it) {
    out.push_back(it->callee);
  }
  return out;
}

namespace {

[[noreturn]] void fail(const MethodNode& m, const std::string& what) {
  throw ValidationError("method " + std::to_string(m.id) + " (" + m.name + "): " + what);
}

std::string activity_label(ActivityId id) { return "activity " + std::to_string(id); }

void validate_graph(MethodNode& m, StatementId& next_statement) {
  ExecutionGraph& g = m.cfg;
  const std::size_t n = g.size();
  int entries = 0;
  int exits = 0;
  for (const auto& a : g.nodes()) {
    if (std::holds_alternative<EntryActivity>(a)) ++entries;
    if (std::holds_alternative<ExitActivity>(a)) ++exits;
  }
  if (entries != 1) fail(m, "expected exactly one ENTRY, found " + std::to_string(entries));
  if (exits != 1) fail(m, "expected exactly one EXIT, found " + std::to_string(exits));

  std::set<std::tuple<ActivityId, ActivityId, int, std::string>> seen;
  for (const auto& e : g.edges()) {
    if (e.from >= n) fail(m, "edge from unknown " + activity_label(e.from));
    if (e.to >= n) fail(m, "edge to unknown " + activity_label(e.to));
    const int gk = e.guard ? static_cast<int>(e.guard->kind) : -1;
    if (!seen.emplace(e.from, e.to, gk, e.guard ? e.guard->var : std::string()).second) {
      fail(m, "duplicate edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
    }
  }
  g.finalize();

  for (ActivityId id = 0; id < n; ++id) {
    const auto& a = g.node(id);
    const auto& outs = g.out_edges(id);
    if (std::holds_alternative<ExitActivity>(a)) {
      if (!outs.empty()) fail(m, "EXIT has outgoing edges");
      continue;
    }
    if (const auto* branch = std::get_if<BranchActivity>(&a)) {
      if ((branch->cond.kind == Condition::Kind::kVar ||
           branch->cond.kind == Condition::Kind::kNotVar) &&
          branch->cond.var.empty()) {
        fail(m, "branch " + activity_label(id) + " has an empty condition variable");
      }
      if (outs.size() != 2) fail(m, "branch " + activity_label(id) + " needs exactly 2 out-edges");
      const auto& e0 = g.edges()[outs[0]];
      const auto& e1 = g.edges()[outs[1]];
      if (!e0.guard || !e1.guard) fail(m, "branch " + activity_label(id) + " has an unguarded edge");
      const auto [then_guard, else_guard] = branch_guards(branch->cond);
      const bool ok = (*e0.guard == then_guard && *e1.guard == else_guard) ||
                      (*e0.guard == else_guard && *e1.guard == then_guard);
      if (!ok) fail(m, "branch " + activity_label(id) + " guards do not match its condition");
      continue;
    }
    if (outs.size() != 1) {
      fail(m, activity_label(id) + " needs exactly 1 out-edge, has " + std::to_string(outs.size()));
    }
    if (g.edges()[outs[0]].guard) fail(m, "guard on edge out of non-branch " + activity_label(id));
    if (const auto* log = std::get_if<LogActivity>(&a)) {
      if (log->stmt.parts.empty()) fail(m, "logging statement with no parts at " + activity_label(id));
      if (log->stmt.id != next_statement) {
        fail(m, "statement id " + std::to_string(log->stmt.id) + " at " + activity_label(id) +
                    " out of order, expected " + std::to_string(next_statement));
      }
      ++next_statement;
    }
  }

  // Exit reachable from entry.
  std::vector<bool> seen_node(n, false);
  std::vector<ActivityId> work{g.entry()};
  seen_node[g.entry()] = true;
  while (!work.empty()) {
    const ActivityId v = work.back();
    work.pop_back();
    for (auto ei : g.out_edges(v)) {
      const ActivityId t = g.edges()[ei].to;
      if (!seen_node[t]) {
        seen_node[t] = true;
        work.push_back(t);
      }
    }
  }
  if (!seen_node[g.exit()]) fail(m, "EXIT is not reachable from ENTRY");
  for (ActivityId head : g.loop_heads()) {
    if (!std::holds_alternative<BranchActivity>(g.node(head))) {
      fail(m, "cycle through non-branch " + activity_label(head));
    }
  }
}

}  // namespace

void validate(ProgramModel& model) {
  std::unordered_set<std::string> names;
  StatementId next_statement = 0;
  for (std::size_t i = 0; i < model.methods.size(); ++i) {
    auto& m = model.methods[i];
    if (m.id != i) {
      throw ValidationError("method id " + std::to_string(m.id) + " at position " +
                            std::to_string(i) + " breaks dense numbering");
    }
    if (m.name.empty()) fail(m, "empty name");
    if (!names.insert(m.name).second) fail(m, "duplicate method name");
    validate_graph(m, next_statement);
  }
  const auto n = static_cast<MethodId>(model.methods.size());
  for (std::size_t i = 0; i < model.call_edges.size(); ++i) {
    const auto& e = model.call_edges[i];
    if (e.caller >= n) throw ValidationError("call edge from unknown method id " + std::to_string(e.caller));
    if (e.callee >= n) throw ValidationError("call edge to unknown method id " + std::to_string(e.callee));
    const auto& caller = model.methods[e.caller];
    if (e.site >= caller.cfg.size() || !std::holds_alternative<CallActivity>(caller.cfg.node(e.site))) {
      fail(caller, "call edge site " + std::to_string(e.site) + " is not a CALL activity");
    }
    if (i > 0 && !(model.call_edges[i - 1] < e)) {
      throw ValidationError("call edges not sorted or duplicated at " + std::to_string(e.caller) + " " +
                            std::to_string(e.site) + " " + std::to_string(e.callee));
    }
  }
}

}  // namespace logsynth
