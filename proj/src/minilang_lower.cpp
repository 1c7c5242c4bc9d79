#include <functional>
#include <algorithm>
#include <map>

#include "logsynth/error.hpp"
#include "logsynth/minilang.hpp"
#include "logsynth/text.hpp"

namespace logsynth::minilang {

namespace {

// A CFG edge whose target is not known yet.
struct Pending {
  ActivityId from;
  std::optional<Guard> guard;
};
using Frontier = std::vector<Pending>;

class MethodLowerer {
 public:
  MethodLowerer(const std::map<std::string, MethodId, std::less<>>& ids, MethodId self,
                std::vector<CallEdge>& calls, StatementId& next_statement)
      : ids_(ids), self_(self), calls_(calls), next_statement_(next_statement) {}

  // Invoked for every lowered logging statement with its id and source line.
  std::function<void(StatementId, int)> on_statement;

  ExecutionGraph lower(const AstMethod& method) {
    g_.add_node(EntryActivity{});
    exit_ = g_.add_node(ExitActivity{});
    Frontier end = lower_block(method.body, {{0, std::nullopt}});
    connect(end, exit_);
    return std::move(g_);
  }

 private:
  void connect(const Frontier& frontier, ActivityId to) {
    for (const auto& p : frontier) g_.add_edge(p.from, to, p.guard);
  }

  Frontier lower_block(const Block& block, Frontier frontier) {
    for (const auto& stmt : block) frontier = lower_stmt(stmt, std::move(frontier));
    return frontier;
  }

  Frontier lower_stmt(const Stmt& stmt, Frontier frontier) {
    if (const auto* log = std::get_if<LogCall>(&stmt.node)) {
      LoggingStatement ls{next_statement_++, log->level, log->parts};
      if (on_statement) on_statement(ls.id, stmt.line);
      return simple(LogActivity{std::move(ls)}, frontier);
    }
    if (const auto* inv = std::get_if<Invoke>(&stmt.node)) {
      const auto it = ids_.find(inv->target);
      if (it == ids_.end()) {
        throw LoweringError("line " + std::to_string(stmt.line) + ": call to undefined method '" +
                            inv->target + "'");
      }
      Frontier next = simple(CallActivity{inv->target}, frontier);
      calls_.push_back({self_, next.front().from, it->second});
      return next;
    }
    if (const auto* as = std::get_if<Assign>(&stmt.node)) {
      return simple(AssignActivity{as->var, as->value}, frontier);
    }
    if (const auto* br = std::get_if<If>(&stmt.node)) {
      const ActivityId b = g_.add_node(BranchActivity{br->cond});
      connect(frontier, b);
      auto [then_guard, else_guard] = branch_guards(br->cond);
      Frontier out = lower_block(br->then_block, {{b, then_guard}});
      Frontier alt = br->else_block ? lower_block(*br->else_block, {{b, else_guard}})
                                    : Frontier{{b, else_guard}};
      out.insert(out.end(), alt.begin(), alt.end());
      return out;
    }
    if (const auto* wh = std::get_if<While>(&stmt.node)) {
      const ActivityId head = g_.add_node(BranchActivity{wh->cond});
      connect(frontier, head);
      auto [body_guard, exit_guard] = branch_guards(wh->cond);
      connect(lower_block(wh->body, {{head, body_guard}}), head);
      return {{head, exit_guard}};
    }
    // return
    connect(frontier, exit_);
    return {};
  }

  Frontier simple(Activity activity, const Frontier& frontier) {
    const ActivityId id = g_.add_node(std::move(activity));
    connect(frontier, id);
    return {{id, std::nullopt}};
  }

  const std::map<std::string, MethodId, std::less<>>& ids_;
  MethodId self_;
  std::vector<CallEdge>& calls_;
  StatementId& next_statement_;
  ExecutionGraph g_;
  ActivityId exit_ = 1;
};

std::string line_text(std::string_view text, int line) {
  int current = 1;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size() && current < line; ++i) {
    if (text[i] == '\n') {
      ++current;
      start = i + 1;
    }
  }
  if (current != line) return {};
  const std::size_t end = text.find('\n', start);
  return std::string(trim(text.substr(start, end == std::string_view::npos ? end : end - start)));
}

}  // namespace

ProgramModel lower_units(std::span<const ParsedUnit> units, std::vector<StatementOrigin>* origins) {
  std::map<std::string, MethodId, std::less<>> ids;
  for (const auto& unit : units) {
    for (const auto& m : unit.methods) {
      const auto id = static_cast<MethodId>(ids.size());
      if (!ids.emplace(m.name, id).second) {
        throw LoweringError(unit.source.path + ":" + std::to_string(m.line) + ": method '" + m.name +
                            "' is defined more than once");
      }
    }
  }

  ProgramModel model;
  StatementId next_statement = 0;
  if (origins) origins->clear();
  for (const auto& unit : units) {
    for (const auto& m : unit.methods) {
      const auto id = static_cast<MethodId>(model.methods.size());
      MethodLowerer lowerer(ids, id, model.call_edges, next_statement);
      if (origins) {
        lowerer.on_statement = [&](StatementId, int line) {
          origins->push_back({unit.source.path, id, line, line_text(unit.source.text, line)});
        };
      }
      MethodNode node;
      node.id = id;
      node.name = m.name;
      node.component = m.component;
      try {
        node.cfg = lowerer.lower(m);
      } catch (const LoweringError& e) {
        throw LoweringError(unit.source.path + ": in method '" + m.name + "': " + e.what());
      }
      model.methods.push_back(std::move(node));
    }
  }
  std::sort(model.call_edges.begin(), model.call_edges.end());
  validate(model);
  return model;
}

ProgramModel lower_to_model(std::span<const AstMethod> methods) {
  std::vector<ParsedUnit> units(1);
  units[0].source.path = "<input>";
  units[0].methods.assign(methods.begin(), methods.end());
  return lower_units(units);
}

}  // namespace logsynth::minilang
