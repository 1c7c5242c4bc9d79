#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "logsynth/error.hpp"

namespace oracle {

using namespace logsynth;
using namespace logsynth::minilang;

std::string fixture(const std::string& name) { return std::string(LOGSYNTH_FIXTURES) + "/" + name; }

void analyze_text(const std::string& text, Analysis& out, const std::string& path) {
  std::vector<ParsedUnit> units;
  SourceUnit unit{path, text};
  auto methods = parse_unit(unit);
  units.push_back({unit, std::move(methods)});
  LoadedProgram p;
  p.model = lower_units(units, &p.origins);
  PathLimits limits;
  limits.max_paths_per_method = std::size_t{1} << 20;
  analyze(std::move(p), out, {}, limits);
}

void analyze_methods(const std::vector<AstMethod>& methods, Analysis& out) {
  LoadedProgram p;
  p.model = lower_to_model(methods);
  PathLimits limits;
  limits.max_paths_per_method = std::size_t{1} << 20;
  analyze(std::move(p), out, {}, limits);
}

// --- call graphs ------------------------------------------------------------

EdgeList random_graph(Rng& rng, std::size_t nodes, std::size_t edges) {
  EdgeList out;
  if (nodes == 0) return out;
  for (std::size_t i = 0; i < edges; ++i) {
    out.emplace_back(static_cast<MethodId>(uniform_below(rng, nodes)), static_cast<MethodId>(uniform_below(rng, nodes)));
  }
  return out;
}

std::vector<std::uint32_t> kosaraju(std::size_t n, const EdgeList& edges) {
  std::vector<std::vector<MethodId>> fwd(n), rev(n);
  for (auto [a, b] : edges) {
    fwd[a].push_back(b);
    rev[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::vector<MethodId> order;
  for (MethodId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    // Iterative post-order.
    std::vector<std::pair<MethodId, std::size_t>> stack{{s, 0}};
    seen[s] = true;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < fwd[v].size()) {
        const MethodId w = fwd[v][i++];
        if (!seen[w]) {
          seen[w] = true;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<std::uint32_t> comp(n, kNone);
  std::uint32_t next = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != kNone) continue;
    std::vector<MethodId> stack{*it};
    comp[*it] = next;
    while (!stack.empty()) {
      const MethodId v = stack.back();
      stack.pop_back();
      for (MethodId w : rev[v]) {
        if (comp[w] == kNone) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::vector<bool> reaches_any(std::size_t n, const EdgeList& edges, const std::vector<MethodId>& targets) {
  std::vector<std::vector<MethodId>> fwd(n);
  for (auto [a, b] : edges) fwd[a].push_back(b);
  const std::set<MethodId> goal(targets.begin(), targets.end());
  std::vector<bool> out(n, false);
  for (MethodId s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::vector<MethodId> stack{s};
    seen[s] = true;
    while (!stack.empty() && !out[s]) {
      const MethodId v = stack.back();
      stack.pop_back();
      if (goal.count(v)) out[s] = true;
      for (MethodId w : fwd[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return out;
}

// --- path finding -------------------------------------------------------------

namespace {

struct Item {
  std::string base;
  int starts = 0;
  int ends = 0;
};

struct PathState {
  std::vector<Item> steps;
  std::map<std::string, bool> facts;
  bool zero = false;
  bool returned = false;
};

// Pre-order numbering of log statements.
void number_logs(const Block& block, std::map<const Stmt*, std::size_t>& ids) {
  for (const auto& s : block) {
    if (std::holds_alternative<LogCall>(s.node)) {
      ids.emplace(&s, ids.size());
    } else if (const auto* i = std::get_if<If>(&s.node)) {
      number_logs(i->then_block, ids);
      if (i->else_block) number_logs(*i->else_block, ids);
    } else if (const auto* w = std::get_if<While>(&s.node)) {
      number_logs(w->body, ids);
    }
  }
}

// Syntactically, control can leave the block at its end.
bool falls_through(const Block& block) {
  for (const auto& s : block) {
    if (std::holds_alternative<Return>(s.node)) return false;
    if (const auto* i = std::get_if<If>(&s.node)) {
      if (i->else_block && !falls_through(i->then_block) && !falls_through(*i->else_block)) return false;
    }
  }
  return true;
}

// Records the fact implied by taking (or not taking) a branch on `cond`.
// False when it contradicts what is known.
bool assume(PathState& st, const Condition& cond, bool taken) {
  switch (cond.kind) {
    case Condition::Kind::kTrue:
      return taken;
    case Condition::Kind::kFalse:
      return !taken;
    case Condition::Kind::kVar:
    case Condition::Kind::kNotVar: {
      const bool value = (cond.kind == Condition::Kind::kVar) == taken;
      auto it = st.facts.find(cond.var);
      if (it != st.facts.end()) return it->second == value;
      st.facts[cond.var] = value;
      return true;
    }
  }
  return false;
}

class AstWalker {
 public:
  AstWalker(const AstMethod& m, const std::set<std::string>& kept) : kept_(kept) { number_logs(m.body, ids_); }

  std::vector<PathState> block(const Block& b, std::vector<PathState> in) {
    for (const auto& s : b) {
      std::vector<PathState> out;
      for (auto& st : in) {
        if (st.returned) {
          out.push_back(std::move(st));
          continue;
        }
        for (auto& r : stmt(s, std::move(st))) out.push_back(std::move(r));
      }
      in = std::move(out);
    }
    return in;
  }

 private:
  std::vector<PathState> stmt(const Stmt& s, PathState st) {
    std::vector<PathState> out;
    if (std::holds_alternative<LogCall>(s.node)) {
      st.steps.push_back({"L" + std::to_string(ids_.at(&s))});
      out.push_back(std::move(st));
    } else if (const auto* call = std::get_if<Invoke>(&s.node)) {
      if (kept_.count(call->target)) st.steps.push_back({"C:" + call->target});
      out.push_back(std::move(st));
    } else if (const auto* a = std::get_if<Assign>(&s.node)) {
      st.facts.erase(a->var);
      out.push_back(std::move(st));
    } else if (const auto* i = std::get_if<If>(&s.node)) {
      PathState t = st;
      if (assume(t, i->cond, true)) {
        for (auto& r : block(i->then_block, {std::move(t)})) out.push_back(std::move(r));
      }
      if (assume(st, i->cond, false)) {
        if (i->else_block) {
          for (auto& r : block(*i->else_block, {std::move(st)})) out.push_back(std::move(r));
        } else {
          out.push_back(std::move(st));
        }
      }
    } else if (const auto* w = std::get_if<While>(&s.node)) {
      PathState skip = st;
      if (assume(skip, w->cond, false)) {
        // A body that always returns has no back edge, so it is no loop.
        skip.zero = skip.zero || falls_through(w->body);
        out.push_back(std::move(skip));
      }
      if (assume(st, w->cond, true)) {
        const std::size_t first = st.steps.size();
        for (auto& r : block(w->body, {std::move(st)})) {
          if (r.returned) {
            out.push_back(std::move(r));
            continue;
          }
          if (!w->cond.var.empty()) r.facts.erase(w->cond.var);
          if (!assume(r, w->cond, false)) continue;
          if (r.steps.size() > first) {
            ++r.steps[first].starts;
            ++r.steps.back().ends;
          }
          out.push_back(std::move(r));
        }
      }
    } else {
      st.returned = true;
      out.push_back(std::move(st));
    }
    return out;
  }

  const std::set<std::string>& kept_;
  std::map<const Stmt*, std::size_t> ids_;
};

std::string render(const Item& it) {
  if (!it.starts && !it.ends) return it.base;
  return it.base + ":" + std::string(static_cast<std::size_t>(it.starts), 'S') +
         std::string(static_cast<std::size_t>(it.ends), 'E');
}

}  // namespace

AstPaths ast_logeps(const AstMethod& method, const std::set<std::string>& kept_callees) {
  AstWalker w(method, kept_callees);
  AstPaths out;
  for (const auto& st : w.block(method.body, {PathState{}})) {
    AstPath p;
    for (const auto& it : st.steps) p.push_back(render(it));
    auto [pos, fresh] = out.paths.emplace(std::move(p), st.zero);
    if (!fresh) pos->second = pos->second && st.zero;
  }
  if (out.paths.empty()) out.paths.emplace(AstPath{}, false);
  return out;
}

AstPaths store_logeps(const Analysis& a, MethodId method) {
  StatementId first = UINT32_MAX;
  for (const auto& act : a.model.methods[method].cfg.nodes()) {
    if (const auto* log = std::get_if<LogActivity>(&act)) first = std::min(first, log->stmt.id);
  }
  AstPaths out;
  for (LogEpId id : a.store.by_method[method]) {
    const LogEp& ep = a.store.logeps[id];
    AstPath p;
    for (const auto& s : ep.steps) {
      Item it;
      it.base = s.kind == Step::Kind::kLog ? "L" + std::to_string(a.store.events[s.target].origin - first)
                                           : "C:" + a.model.methods[s.target].name;
      it.starts = s.loop_starts;
      it.ends = s.loop_ends;
      p.push_back(render(it));
    }
    auto [pos, fresh] = out.paths.emplace(std::move(p), ep.zero_iteration);
    if (!fresh) pos->second = pos->second && ep.zero_iteration;
  }
  return out;
}

namespace {

class MethodFuzzer {
 public:
  MethodFuzzer(Rng& rng, std::size_t max_branches) : rng_(rng), budget_(max_branches) {}

  Block block(std::size_t depth) {
    Block b;
    const std::size_t n = uniform_below(rng_, 5);
    for (std::size_t i = 0; i < n; ++i) b.push_back(stmt(depth));
    return b;
  }

 private:
  std::string var() { return std::string(1, static_cast<char>('a' + uniform_below(rng_, 3))); }

  Condition cond() {
    switch (uniform_below(rng_, 8)) {
      case 0:
        return {Condition::Kind::kTrue, {}};
      case 1:
        return {Condition::Kind::kFalse, {}};
      case 2:
      case 3:
      case 4:
        return {Condition::Kind::kNotVar, var()};
      default:
        return {Condition::Kind::kVar, var()};
    }
  }

  Stmt stmt(std::size_t depth) {
    const auto r = uniform_below(rng_, 100);
    if (depth < 3 && budget_ > 0 && r < 40) {
      --budget_;
      if (uniform_below(rng_, 3) == 0) return {While{cond(), block(depth + 1)}, 0, 0};
      If i{cond(), block(depth + 1), std::nullopt};
      if (uniform_below(rng_, 2)) i.else_block = block(depth + 1);
      return {std::move(i), 0, 0};
    }
    if (r < 65) {
      LogCall c;
      c.parts.push_back(LogPart::literal("event "));
      if (uniform_below(rng_, 2)) c.parts.push_back(LogPart::var(var()));
      return {std::move(c), 0, 0};
    }
    if (r < 78) return {Invoke{uniform_below(rng_, 2) ? "kept" : "pruned"}, 0, 0};
    if (r < 95) return {Assign{var(), uniform_below(rng_, 2) ? "one" : "two"}, 0, 0};
    return {Return{}, 0, 0};
  }

  Rng& rng_;
  std::size_t budget_;
};

}  // namespace

AstMethod random_method(Rng& rng, std::size_t max_branches) {
  AstMethod m;
  m.name = "subject";
  MethodFuzzer f(rng, max_branches);
  const std::size_t n = 1 + uniform_below(rng, 5);
  for (std::size_t i = 0; i < n; ++i) {
    auto b = f.block(0);
    m.body.insert(m.body.end(), b.begin(), b.end());
  }
  return m;
}

namespace {

// Reaching assignment per variable; absent = no assignment yet.
using DefState = std::map<std::string, const Stmt*>;

class DefWalker {
 public:
  explicit DefWalker(const AstMethod& m) { number_logs(m.body, ids_); }

  // Observed definitions per (log statement, variable); nullptr = undefined.
  std::map<std::pair<const Stmt*, std::string>, std::set<const Stmt*>> seen;

  std::set<DefState> block(const Block& b, std::set<DefState> in, std::set<DefState>& returned) {
    for (const auto& s : b) {
      std::set<DefState> out;
      for (const auto& st : in) {
        for (auto& r : stmt(s, st, returned)) out.insert(std::move(r));
      }
      in = std::move(out);
    }
    return in;
  }

 private:
  std::set<DefState> stmt(const Stmt& s, DefState st, std::set<DefState>& returned) {
    if (const auto* log = std::get_if<LogCall>(&s.node)) {
      for (const auto& p : log->parts) {
        if (p.kind != LogPart::Kind::kVar) continue;
        auto it = st.find(p.text);
        seen[{&s, p.text}].insert(it == st.end() ? nullptr : it->second);
      }
      return {st};
    }
    if (std::holds_alternative<Invoke>(s.node)) return {st};
    if (const auto* a = std::get_if<Assign>(&s.node)) {
      st[a->var] = &s;
      return {st};
    }
    if (const auto* i = std::get_if<If>(&s.node)) {
      auto out = block(i->then_block, {st}, returned);
      if (i->else_block) {
        auto e = block(*i->else_block, {st}, returned);
        out.insert(e.begin(), e.end());
      } else {
        out.insert(st);
      }
      return out;
    }
    if (const auto* w = std::get_if<While>(&s.node)) {
      // Any number of iterations: iterate the body until no new state shows up.
      std::set<DefState> all{st};
      std::set<DefState> frontier{st};
      while (!frontier.empty()) {
        std::set<DefState> next;
        for (const auto& r : block(w->body, frontier, returned)) {
          if (!all.count(r)) next.insert(r);
        }
        all.insert(next.begin(), next.end());
        frontier = std::move(next);
      }
      return all;
    }
    returned.insert(st);
    return {};
  }

  std::map<const Stmt*, std::size_t> ids_;
};

void collect_logs(const Block& block, std::vector<const Stmt*>& out) {
  for (const auto& s : block) {
    if (std::holds_alternative<LogCall>(s.node)) {
      out.push_back(&s);
    } else if (const auto* i = std::get_if<If>(&s.node)) {
      collect_logs(i->then_block, out);
      if (i->else_block) collect_logs(*i->else_block, out);
    } else if (const auto* w = std::get_if<While>(&s.node)) {
      collect_logs(w->body, out);
    }
  }
}

}  // namespace

std::vector<std::string> restored_templates(const AstMethod& method) {
  DefWalker w(method);
  std::set<DefState> returned;
  w.block(method.body, {DefState{}}, returned);
  std::vector<const Stmt*> logs;
  collect_logs(method.body, logs);
  std::vector<std::string> out;
  for (const Stmt* s : logs) {
    std::string text;
    for (const auto& p : std::get<LogCall>(s->node).parts) {
      if (p.kind == LogPart::Kind::kLiteral) {
        text += p.text;
        continue;
      }
      auto it = w.seen.find({s, p.text});
      if (it != w.seen.end() && it->second.size() == 1 && *it->second.begin() != nullptr) {
        text += std::get<Assign>((*it->second.begin())->node).value;
      } else {
        text += "<*>";
      }
    }
    out.push_back(std::move(text));
  }
  return out;
}

// --- labeling -------------------------------------------------------------

std::vector<Infection> closure_infection(const LogEpStore& store, const AnnotationSet& annotations) {
  const std::size_t n = store.by_method.size();
  EdgeList edges;
  for (const auto& ep : store.logeps) {
    for (const auto& s : ep.steps) {
      if (s.kind == Step::Kind::kCall) edges.emplace_back(ep.method, s.target);
    }
  }
  std::vector<MethodId> owners;
  for (LogEpId id : annotations.seed_anomaly) owners.push_back(store.logeps[id].method);
  const auto reach = reaches_any(n, edges, owners);
  std::vector<Infection> out(store.logeps.size(), Infection::kClean);
  for (const auto& ep : store.logeps) {
    if (annotations.seed_anomaly.count(ep.id)) {
      out[ep.id] = Infection::kSeed;
      continue;
    }
    for (const auto& s : ep.steps) {
      if (s.kind == Step::Kind::kCall && reach[s.target]) out[ep.id] = Infection::kInfected;
    }
  }
  return out;
}

bool clean_closed(const LogEpStore& store, const InfectionMap& map, LogEpId logep) {
  std::set<LogEpId> seen{logep};
  std::vector<LogEpId> stack{logep};
  while (!stack.empty()) {
    const LogEpId id = stack.back();
    stack.pop_back();
    if (map.status[id] == Infection::kSeed) return false;
    for (const auto& s : store.logeps[id].steps) {
      if (s.kind != Step::Kind::kCall) continue;
      for (LogEpId next : store.by_method[s.target]) {
        if (seen.insert(next).second) stack.push_back(next);
      }
    }
  }
  return true;
}

// --- generation -------------------------------------------------------------

namespace {

// Loop-region tree from marks.
struct Node {
  int step = -1;  // -1: region
  std::vector<Node> children;
};

Node region_tree(const LogEp& ep) {
  Node root;
  std::vector<Node*> stack{&root};
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const Step& s = ep.steps[i];
    for (int k = 0; k < s.loop_starts; ++k) {
      stack.back()->children.push_back(Node{});
      stack.push_back(&stack.back()->children.back());
    }
    stack.back()->children.push_back(Node{static_cast<int>(i), {}});
    for (int k = 0; k < s.loop_ends && stack.size() > 1; ++k) stack.pop_back();
  }
  return root;
}

class Language {
 public:
  Language(const LogEpStore& store, const InfectionMap& map, std::uint32_t reps, std::uint32_t rec, std::size_t limit)
      : store_(store), map_(map), reps_(reps), rec_(rec), limit_(limit), active_(store.by_method.size(), 0) {}

  std::set<Walk> method(MethodId m) {
    ++active_[m];
    std::set<Walk> out;
    for (LogEpId id : store_.by_method[m]) {
      const LogEp& ep = store_.logeps[id];
      auto body = seq(ep, region_tree(ep).children);
      for (auto w : body) {
        w.seed = w.seed || map_.status[id] == Infection::kSeed;
        out.insert(std::move(w));
      }
      check(out);
    }
    --active_[m];
    return out;
  }

 private:
  void check(const std::set<Walk>& s) const {
    if (s.size() > limit_) throw std::runtime_error("walk language too large");
  }

  std::set<Walk> concat(const std::set<Walk>& a, const std::set<Walk>& b) const {
    std::set<Walk> out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        Walk w = x;
        w.events.insert(w.events.end(), y.events.begin(), y.events.end());
        w.seed = x.seed || y.seed;
        out.insert(std::move(w));
      }
      check(out);
    }
    return out;
  }

  std::set<Walk> seq(const LogEp& ep, const std::vector<Node>& nodes) {
    std::set<Walk> cur{Walk{}};
    for (const auto& n : nodes) {
      cur = concat(cur, node(ep, n));
      check(cur);
    }
    return cur;
  }

  std::set<Walk> node(const LogEp& ep, const Node& n) {
    if (n.step < 0) {
      // Each repetition re-walks callees, so repetitions are independent.
      std::set<Walk> out;
      std::set<Walk> power{Walk{}};
      for (std::uint32_t k = 1; k <= reps_; ++k) {
        power = concat(power, seq(ep, n.children));
        check(power);
        out.insert(power.begin(), power.end());
      }
      return out;
    }
    const Step& s = ep.steps[static_cast<std::size_t>(n.step)];
    if (s.kind == Step::Kind::kLog) return {Walk{{s.target}, false}};
    if (active_[s.target] > rec_) return {Walk{}};
    return method(s.target);
  }

  const LogEpStore& store_;
  const InfectionMap& map_;
  std::uint32_t reps_;
  std::uint32_t rec_;
  std::size_t limit_;
  std::vector<std::uint32_t> active_;
};

class Replayer {
 public:
  Replayer(const LogEpStore& store, const WalkTrace& trace, const GenParams& params)
      : store_(store), trace_(trace), params_(params), active_(store.by_method.size(), 0) {}

  ReplayResult run(MethodId entry) {
    try {
      method(entry);
      if (pos_ != trace_.decisions.size()) fail("trailing decisions");
      result_.ok = true;
    } catch (const std::runtime_error& e) {
      result_.ok = false;
      result_.error = e.what();
    }
    return result_;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(msg + " at decision " + std::to_string(pos_));
  }

  const Decision& next(Decision::Kind kind) {
    if (pos_ >= trace_.decisions.size()) fail("trace ended early");
    const Decision& d = trace_.decisions[pos_];
    if (d.kind != kind) fail("unexpected decision kind");
    ++pos_;
    return d;
  }

  void method(MethodId m) {
    ++active_[m];
    const LogEpId id = next(Decision::Kind::kChoose).value;
    if (id >= store_.logeps.size() || store_.logeps[id].method != m) fail("chosen LogEP does not belong to callee");
    result_.chosen.push_back(id);
    const LogEp& ep = store_.logeps[id];
    run_nodes(ep, region_tree(ep).children);
    --active_[m];
  }

  void run_nodes(const LogEp& ep, const std::vector<Node>& nodes) {
    for (const auto& n : nodes) {
      if (n.step < 0) {
        const std::uint32_t k = next(Decision::Kind::kReps).value;
        if (k < 1 || k > params_.max_loop_reps) fail("repetition count out of range");
        for (std::uint32_t r = 0; r < k; ++r) run_nodes(ep, n.children);
        continue;
      }
      const Step& s = ep.steps[static_cast<std::size_t>(n.step)];
      if (s.kind == Step::Kind::kLog) {
        result_.events.push_back(s.target);
      } else if (active_[s.target] <= params_.max_recursion_depth) {
        method(s.target);
      }
    }
  }

  const LogEpStore& store_;
  const WalkTrace& trace_;
  const GenParams& params_;
  std::vector<std::uint32_t> active_;
  std::size_t pos_ = 0;
  ReplayResult result_;
};

}  // namespace

std::set<Walk> walk_language(const LogEpStore& store, const InfectionMap& map, MethodId entry, std::uint32_t max_reps,
                             std::uint32_t max_recursion, std::size_t limit) {
  return Language(store, map, max_reps, max_recursion, limit).method(entry);
}

ReplayResult replay(const LogEpStore& store, MethodId entry, const WalkTrace& trace, const GenParams& params) {
  return Replayer(store, trace, params).run(entry);
}

std::string check_sequence(const GenerationContext& ctx, const LogSequence& seq, const WalkTrace& trace,
                           const GenParams& params) {
  const auto& store = ctx.store();
  const auto& status = ctx.infection().status;
  const auto r = replay(store, seq.entry, trace, params);
  if (!r.ok) return "replay failed: " + r.error;
  if (r.events != seq.events) return "replayed events differ";
  std::size_t seeds = 0;
  for (LogEpId id : r.chosen) seeds += status[id] == Infection::kSeed;
  if (seeds != trace.seeds_hit) return "seed count mismatch";
  if (seq.label == Label::kNormal) {
    if (seeds != 0) return "normal sequence chose a seed LogEP";
    return {};
  }
  if (seeds == 0) return "anomaly sequence chose no seed LogEP";
  for (EventId e : seq.events) {
    if (!ctx.annotations().alerting.count(e)) continue;
    for (LogEpId id : ctx.annotations().seed_anomaly) {
      for (const auto& s : store.logeps[id].steps) {
        if (s.kind == Step::Kind::kLog && s.target == e) return {};
      }
    }
  }
  return "anomaly sequence has no alerting event of a seed LogEP";
}

}  // namespace oracle
