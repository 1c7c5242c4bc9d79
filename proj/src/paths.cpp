#include "logsynth/paths.hpp"

#include <algorithm>
#include <set>

#include "logsynth/parallel.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

Strategy strategy_for(bool is_log_method, bool is_leaf) {
  if (is_log_method) return is_leaf ? Strategy::kLogsOnly : Strategy::kLogsAndCalls;
  return Strategy::kCallsOnly;
}

bool GuardState::apply(const GuardEvent& event) {
  switch (event.kind) {
    case GuardEvent::Kind::kLiteral:
      return event.value;
    case GuardEvent::Kind::kKill:
      facts_.erase(event.var);
      return true;
    case GuardEvent::Kind::kAssert: {
      const auto [it, inserted] = facts_.emplace(event.var, event.value);
      return inserted || it->second == event.value;
    }
  }
  return true;
}

std::vector<GuardFact> GuardState::facts() const {
  std::vector<GuardFact> out;
  for (const auto& [var, value] : facts_) out.push_back({var, value});
  return out;
}

bool is_feasible(std::span<const GuardEvent> events) {
  GuardState state;
  return std::all_of(events.begin(), events.end(), [&](const GuardEvent& e) { return state.apply(e); });
}

std::vector<RawPath> filter_infeasible(std::vector<RawPath> paths) {
  std::erase_if(paths, [](const RawPath& p) { return !is_feasible(p.guards); });
  return paths;
}

namespace {

GuardEvent guard_event(const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::kTrue:
      return GuardEvent::literal(true);
    case Guard::Kind::kFalse:
      return GuardEvent::literal(false);
    case Guard::Kind::kVarTrue:
      return GuardEvent::assert_var(g.var, true);
    case Guard::Kind::kVarFalse:
      return GuardEvent::assert_var(g.var, false);
  }
  return GuardEvent::literal(true);
}

const std::string* cond_var(const Activity& a) {
  const auto* b = std::get_if<BranchActivity>(&a);
  if (!b || b->cond.var.empty()) return nullptr;
  return &b->cond.var;
}

// Depth-first path enumeration. Loop heads may occur twice on a path (entry
// and return along the back edge), every other node once, which admits each
// loop body zero times or once.
class RawPathWalker {
 public:
  RawPathWalker(const ExecutionGraph& g, const RawPathOptions& opt)
      : g_(g), opt_(opt), count_(g.size(), 0) {}

  std::vector<RawPath> run(bool* truncated) {
    if (g_.size() > 0) {
      count_[g_.entry()] = 1;
      nodes_.push_back(g_.entry());
      visit(g_.entry());
    }
    if (truncated) *truncated = truncated_;
    return std::move(out_);
  }

 private:
  struct Mark {
    std::size_t guards;
    std::size_t undo;
  };

  Mark mark() const { return {guards_.size(), undo_.size()}; }

  void rollback(const Mark& m) {
    guards_.resize(m.guards);
    while (undo_.size() > m.undo) {
      auto& [var, prev] = undo_.back();
      if (prev) {
        facts_[var] = *prev;
      } else {
        facts_.erase(var);
      }
      undo_.pop_back();
    }
  }

  bool push(GuardEvent ev) {
    bool ok = true;
    if (ev.kind == GuardEvent::Kind::kLiteral) {
      ok = ev.value;
    } else {
      const auto it = facts_.find(ev.var);
      std::optional<bool> prev;
      if (it != facts_.end()) prev = it->second;
      if (ev.kind == GuardEvent::Kind::kKill) {
        if (prev) {
          undo_.emplace_back(ev.var, prev);
          facts_.erase(it);
        }
      } else if (prev) {
        ok = *prev == ev.value;
      } else {
        undo_.emplace_back(ev.var, std::nullopt);
        facts_.emplace(ev.var, ev.value);
      }
    }
    guards_.push_back(std::move(ev));
    return ok;
  }

  void visit(ActivityId n) {
    if (out_.size() >= opt_.max_paths) {
      truncated_ = true;
      return;
    }
    if (n == g_.exit()) {
      out_.push_back({nodes_, guards_, zero_iterations_ > 0});
      return;
    }
    const Mark at_node = mark();
    bool ok = true;
    if (const auto* assign = std::get_if<AssignActivity>(&g_.node(n))) ok = push(GuardEvent::kill(assign->var));

    for (const std::uint32_t ei : g_.out_edges(n)) {
      if (!ok && opt_.prune_infeasible) break;
      const CfgEdge& e = g_.edges()[ei];
      const ActivityId t = e.to;
      const bool head = g_.is_loop_head(t);
      if (count_[t] != 0 && !(head && count_[t] == 1)) continue;

      const Mark at_edge = mark();
      bool edge_ok = true;
      if (e.guard) edge_ok = push(guard_event(*e.guard));
      const bool skips_loop = count_[n] == 1 && g_.is_loop_head(n) && g_.loop_exit_edge(n) == ei;
      if (head && count_[t] == 1) {
        // Back along the loop: the loop condition must change for the loop
        // to terminate, so its earlier value is forgotten.
        if (const auto* v = cond_var(g_.node(t))) push(GuardEvent::kill(*v));
      }
      if (edge_ok || !opt_.prune_infeasible) {
        zero_iterations_ += skips_loop;
        ++count_[t];
        nodes_.push_back(t);
        visit(t);
        nodes_.pop_back();
        --count_[t];
        zero_iterations_ -= skips_loop;
      }
      rollback(at_edge);
      if (truncated_) break;
    }
    rollback(at_node);
  }

  const ExecutionGraph& g_;
  const RawPathOptions& opt_;
  std::vector<std::uint8_t> count_;
  std::vector<ActivityId> nodes_;
  std::vector<GuardEvent> guards_;
  std::map<std::string, bool, std::less<>> facts_;
  std::vector<std::pair<std::string, std::optional<bool>>> undo_;
  int zero_iterations_ = 0;
  bool truncated_ = false;
  std::vector<RawPath> out_;
};

}  // namespace

std::vector<RawPath> enumerate_raw_paths(const ExecutionGraph& graph, const RawPathOptions& options,
                                         bool* truncated) {
  return RawPathWalker(graph, options).run(truncated);
}

LogEvent restore_statement(const LoggingStatement& stmt, const MethodNode& method) {
  const ExecutionGraph& g = method.cfg;
  const std::size_t n = g.size();
  std::optional<ActivityId> use;
  for (ActivityId a = 0; a < n; ++a) {
    const auto* log = std::get_if<LogActivity>(&g.node(a));
    if (log && log->stmt.id == stmt.id) use = a;
  }

  LogEvent ev;
  ev.id = stmt.id;
  ev.level = stmt.level;
  ev.origin = stmt.id;
  ev.method = method.id;

  std::vector<std::vector<ActivityId>> preds(n);
  for (const auto& e : g.edges()) preds[e.to].push_back(e.from);

  // Reaching definitions of one variable; kUndefined stands for "no
  // assignment on some path from entry".
  constexpr ActivityId kUndefined = UINT32_MAX;
  auto reaching = [&](const std::string& var) {
    std::vector<std::set<ActivityId>> in(n);
    std::vector<std::set<ActivityId>> out(n);
    out[g.entry()] = {kUndefined};
    bool changed = true;
    while (changed) {
      changed = false;
      for (ActivityId a = 0; a < n; ++a) {
        if (a == g.entry()) continue;
        std::set<ActivityId> merged;
        for (ActivityId p : preds[a]) merged.insert(out[p].begin(), out[p].end());
        const auto* assign = std::get_if<AssignActivity>(&g.node(a));
        std::set<ActivityId> next = (assign && assign->var == var && !merged.empty())
                                        ? std::set<ActivityId>{a}
                                        : merged;
        if (merged != in[a] || next != out[a]) {
          in[a] = std::move(merged);
          out[a] = std::move(next);
          changed = true;
        }
      }
    }
    return use ? in[*use] : std::set<ActivityId>{kUndefined};
  };

  for (const auto& part : stmt.parts) {
    if (part.kind == LogPart::Kind::kLiteral) {
      ev.text += part.text;
      continue;
    }
    const auto defs = reaching(part.text);
    if (defs.size() == 1 && *defs.begin() != kUndefined) {
      ev.text += std::get<AssignActivity>(g.node(*defs.begin())).literal;
    } else {
      ev.text += "<*>";
    }
  }
  return ev;
}

namespace {

struct Projected {
  std::vector<Step> steps;
  std::vector<std::size_t> positions;  // index into RawPath::nodes per step
};

std::vector<Projected> project(const ProgramModel& model, MethodId method, const RawPath& path, Strategy strategy,
                               const PrunedCallGraph& pruned,
                               std::span<const std::optional<EventId>> event_of_statement, std::size_t cap) {
  const ExecutionGraph& g = model.methods[method].cfg;
  const bool logs = strategy != Strategy::kCallsOnly;
  const bool calls = strategy != Strategy::kLogsOnly;
  std::vector<Projected> variants(1);
  std::map<ActivityId, std::size_t> first_seen;
  std::vector<std::pair<std::size_t, std::size_t>> iterations;

  for (std::size_t pos = 0; pos < path.nodes.size(); ++pos) {
    const ActivityId node = path.nodes[pos];
    const Activity& act = g.node(node);
    if (g.is_loop_head(node)) {
      const auto [it, fresh] = first_seen.emplace(node, pos);
      if (!fresh) iterations.emplace_back(it->second, pos);
    }
    if (const auto* log = std::get_if<LogActivity>(&act); log && logs) {
      const auto ev = event_of_statement[log->stmt.id];
      if (!ev) continue;
      for (auto& v : variants) {
        v.steps.push_back(Step::log(*ev));
        v.positions.push_back(pos);
      }
    } else if (std::holds_alternative<CallActivity>(act) && calls) {
      std::vector<MethodId> targets;
      for (MethodId c : model.callees_at(method, node)) {
        if (pruned.kept(c)) targets.push_back(c);
      }
      if (targets.empty()) continue;
      std::vector<Projected> next;
      next.reserve(variants.size() * targets.size());
      for (const auto& v : variants) {
        for (MethodId c : targets) {
          if (next.size() >= cap) break;
          Projected p = v;
          p.steps.push_back(Step::call(c));
          p.positions.push_back(pos);
          next.push_back(std::move(p));
        }
      }
      variants = std::move(next);
    }
  }

  for (auto& v : variants) {
    for (const auto& [open, close] : iterations) {
      std::optional<std::size_t> first;
      std::size_t last = 0;
      for (std::size_t k = 0; k < v.steps.size(); ++k) {
        if (v.positions[k] > open && v.positions[k] < close) {
          if (!first) first = k;
          last = k;
        }
      }
      if (!first) continue;
      auto& s = v.steps[*first];
      auto& e = v.steps[last];
      if (s.loop_starts < UINT8_MAX) ++s.loop_starts;
      if (e.loop_ends < UINT8_MAX) ++e.loop_ends;
    }
  }
  return variants;
}

}  // namespace

MethodPaths enumerate_logeps(const ProgramModel& model, MethodId method, const PrunedCallGraph& pruned,
                             std::span<const std::optional<EventId>> event_of_statement,
                             const PathLimits& limits) {
  const MethodNode& m = model.methods[method];
  const Strategy strategy = strategy_for(m.is_log_method, pruned.is_leaf(method));
  MethodPaths result;

  bool truncated = false;
  auto raw = filter_infeasible(enumerate_raw_paths(m.cfg, {limits.max_raw_paths, true}, &truncated));
  if (truncated) {
    result.warnings.push_back("method " + m.name + ": raw path limit " + std::to_string(limits.max_raw_paths) +
                              " reached; enumeration stopped early");
  }

  std::map<std::vector<Step>, std::size_t> seen;
  bool capped = false;
  for (const auto& path : raw) {
    for (auto& variant : project(model, method, path, strategy, pruned, event_of_statement,
                                 limits.max_paths_per_method)) {
      const auto it = seen.find(variant.steps);
      if (it != seen.end()) {
        auto& existing = result.logeps[it->second];
        existing.zero_iteration = existing.zero_iteration && path.zero_iteration;
        continue;
      }
      if (result.logeps.size() >= limits.max_paths_per_method) {
        capped = true;
        break;
      }
      GuardState state;
      for (const auto& g : path.guards) state.apply(g);
      LogEp ep;
      ep.method = method;
      ep.steps = variant.steps;
      ep.constraints = state.facts();
      ep.zero_iteration = path.zero_iteration;
      seen.emplace(std::move(variant.steps), result.logeps.size());
      result.logeps.push_back(std::move(ep));
    }
    if (capped) break;
  }
  if (capped) {
    result.warnings.push_back("method " + m.name + ": path limit " + std::to_string(limits.max_paths_per_method) +
                              " reached; remaining LogEPs dropped");
  }
  if (result.logeps.empty()) {
    result.warnings.push_back("method " + m.name + ": no feasible entry-to-exit path; storing an empty LogEP");
    LogEp ep;
    ep.method = method;
    result.logeps.push_back(std::move(ep));
  }
  return result;
}

std::size_t LogEpStore::non_empty_count() const {
  return static_cast<std::size_t>(
      std::count_if(logeps.begin(), logeps.end(), [](const LogEp& e) { return !e.steps.empty(); }));
}

std::string step_token(const Step& step, const ProgramModel& model) {
  std::string out = step.kind == Step::Kind::kLog ? "L:" + std::to_string(step.target)
                                                  : "C:" + model.methods[step.target].name;
  if (step.loop_starts || step.loop_ends) {
    out += ':';
    out.append(step.loop_starts, 'S');
    out.append(step.loop_ends, 'E');
  }
  return out;
}

std::string LogEpStore::dump(const ProgramModel& model) const {
  std::string out;
  for (const auto& ev : events) {
    out += "EV " + std::to_string(ev.id) + " " + std::string(to_string(ev.level)) + " " +
           escape_field(ev.text, false) + "\n";
  }
  for (const auto& ep : logeps) {
    out += "EP " + std::to_string(ep.id) + " " + model.methods[ep.method].name;
    for (const auto& s : ep.steps) out += " " + step_token(s, model);
    out += '\n';
  }
  return out;
}

LogEpStore build_store(const ProgramModel& model, const PrunedCallGraph& pruned, const PathLimits& limits,
                       unsigned workers) {
  LogEpStore store;
  store.event_of_statement.assign(model.statement_count(), std::nullopt);
  store.by_method.assign(model.methods.size(), {});
  for (const auto& m : model.methods) {
    if (!pruned.kept(m.id)) continue;
    for (const auto& act : m.cfg.nodes()) {
      const auto* log = std::get_if<LogActivity>(&act);
      if (!log) continue;
      LogEvent ev = restore_statement(log->stmt, m);
      ev.id = static_cast<EventId>(store.events.size());
      store.event_of_statement[log->stmt.id] = ev.id;
      store.events.push_back(std::move(ev));
    }
  }

  const auto kept = pruned.kept_methods();
  std::vector<MethodPaths> slots(kept.size());
  parallel_for(kept.size(), workers, [&](std::size_t i) {
    slots[i] = enumerate_logeps(model, kept[i], pruned, store.event_of_statement, limits);
  });
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (auto& ep : slots[i].logeps) {
      ep.id = static_cast<LogEpId>(store.logeps.size());
      store.by_method[kept[i]].push_back(ep.id);
      store.logeps.push_back(std::move(ep));
    }
    for (auto& w : slots[i].warnings) store.warnings.push_back(std::move(w));
  }
  return store;
}

}  // namespace logsynth
