#include "logsynth/generation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "logsynth/error.hpp"
#include "logsynth/model_io.hpp"
#include "logsynth/parallel.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

namespace {

constexpr std::uint32_t kNoSeed = std::numeric_limits<std::uint32_t>::max();

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream used to fix the label order; sequence streams use their index.
constexpr std::uint64_t kLabelStream = ~std::uint64_t{0};

}  // namespace

void GenParams::validate() const {
  if (size < 1) throw ConfigError("size must be at least 1");
  if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) {
    throw ConfigError("anomaly rate must be within [0, 1]");
  }
  if (max_loop_reps < 1) throw ConfigError("max loop repetitions must be at least 1");
  if (max_events < 1) throw ConfigError("max events per sequence must be at least 1");
  if (component && component->empty()) throw ConfigError("component name is empty");
}

std::size_t LogDataset::anomaly_count() const {
  return static_cast<std::size_t>(std::count_if(sequences.begin(), sequences.end(),
                                                [](const LogSequence& s) { return s.label == Label::kAnomaly; }));
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= stream * 0xd1342543de82ef95ULL;
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

GenerationContext::Plan make_plan(const LogEp& logep) {
  GenerationContext::Plan plan;
  std::vector<std::uint32_t> open;
  auto close = [&] {
    plan.match[open.back()] = static_cast<std::uint32_t>(plan.tokens.size());
    open.pop_back();
    plan.tokens.push_back(GenerationContext::kClose);
    plan.match.push_back(0);
  };
  for (std::size_t i = 0; i < logep.steps.size(); ++i) {
    const Step& s = logep.steps[i];
    for (int k = 0; k < s.loop_starts; ++k) {
      open.push_back(static_cast<std::uint32_t>(plan.tokens.size()));
      plan.tokens.push_back(GenerationContext::kOpen);
      plan.match.push_back(0);
    }
    plan.tokens.push_back(static_cast<std::int32_t>(i));
    plan.match.push_back(0);
    for (int k = 0; k < s.loop_ends && !open.empty(); ++k) close();
  }
  while (!open.empty()) close();
  return plan;
}

GenerationContext::GenerationContext(const ProgramModel& model, const CallGraph& cg, const PrunedCallGraph& pruned,
                                     const LogEpStore& store, const InfectionMap& infection,
                                     AnnotationSet annotations)
    : model_(model),
      cg_(cg),
      pruned_(pruned),
      store_(store),
      infection_(infection),
      annotations_(std::move(annotations)) {
  const std::size_t n = model.methods.size();
  const auto& by_method = store.by_method;
  auto is_seed = [&](LogEpId id) { return infection.status[id] == Infection::kSeed; };

  // Greatest fixpoint: a method stays clean-completable while some non-seed
  // LogEP only calls clean-completable methods. Recursion is cut off at walk
  // time, so cyclic support is sound.
  clean_ok_.assign(n, false);
  for (MethodId m = 0; m < n; ++m) clean_ok_[m] = pruned.kept(m);
  auto clean_logep = [&](const LogEp& ep) {
    if (is_seed(ep.id)) return false;
    return std::all_of(ep.steps.begin(), ep.steps.end(),
                       [&](const Step& s) { return s.kind != Step::Kind::kCall || clean_ok_[s.target]; });
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (MethodId m = 0; m < n; ++m) {
      if (!clean_ok_[m]) continue;
      const bool ok = std::any_of(by_method[m].begin(), by_method[m].end(),
                                  [&](LogEpId id) { return clean_logep(store.logeps[id]); });
      if (!ok) {
        clean_ok_[m] = false;
        changed = true;
      }
    }
  }

  // Breadth-first distance to the nearest method owning a seed, following
  // call steps backwards.
  seed_dist_.assign(n, kNoSeed);
  std::vector<std::vector<MethodId>> callers(n);
  std::deque<MethodId> queue;
  for (const auto& ep : store.logeps) {
    if (is_seed(ep.id) && seed_dist_[ep.method] != 0) {
      seed_dist_[ep.method] = 0;
      queue.push_back(ep.method);
    }
    for (const auto& s : ep.steps) {
      if (s.kind == Step::Kind::kCall) callers[s.target].push_back(ep.method);
    }
  }
  while (!queue.empty()) {
    const MethodId m = queue.front();
    queue.pop_front();
    for (MethodId c : callers[m]) {
      if (seed_dist_[c] == kNoSeed) {
        seed_dist_[c] = seed_dist_[m] + 1;
        queue.push_back(c);
      }
    }
  }

  normal_.resize(n);
  normal_entry_.resize(n);
  route_.resize(n);
  free_.resize(n);
  // Route choices shorten the distance to the nearest seed by one call, so a
  // route never re-enters a method and the recursion bound cannot block it.
  auto route_choice = [&](const LogEp& ep) -> std::optional<Choice> {
    const std::uint32_t d = seed_dist_[ep.method];
    if (d == 0) return is_seed(ep.id) ? std::optional<Choice>(Choice{ep.id, -1}) : std::nullopt;
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
      const Step& s = ep.steps[i];
      if (s.kind == Step::Kind::kCall && seed_dist_[s.target] + 1 == d) {
        return Choice{ep.id, static_cast<std::int32_t>(i)};
      }
    }
    return std::nullopt;
  };
  for (MethodId m = 0; m < n; ++m) {
    for (LogEpId id : by_method[m]) {
      const LogEp& ep = store.logeps[id];
      if (clean_logep(ep)) normal_[m].push_back(id);
      if (ep.zero_iteration) continue;
      free_[m].push_back(id);
      if (seed_dist_[m] == kNoSeed) continue;
      if (auto c = route_choice(ep)) route_[m].push_back(*c);
    }
    // Zero-iteration paths are only a fallback in ANOMALY walks.
    if (free_[m].empty()) free_[m] = by_method[m];
    if (route_[m].empty() && seed_dist_[m] != kNoSeed) {
      for (LogEpId id : by_method[m]) {
        if (auto c = route_choice(store.logeps[id])) route_[m].push_back(*c);
      }
    }
    // A sequence should not be empty when the entry can log something.
    for (LogEpId id : normal_[m]) {
      if (!store.logeps[id].steps.empty()) normal_entry_[m].push_back(id);
    }
    if (normal_entry_[m].empty()) normal_entry_[m] = normal_[m];
  }

  plans_.reserve(store.logeps.size());
  for (const auto& ep : store.logeps) plans_.push_back(make_plan(ep));
}

std::optional<std::uint32_t> GenerationContext::seed_distance(MethodId m) const {
  if (seed_dist_[m] == kNoSeed) return std::nullopt;
  return seed_dist_[m];
}

std::vector<MethodId> GenerationContext::default_entries() const {
  std::vector<bool> called_from_outside(cg_.scc_count(), false);
  for (MethodId m = 0; m < pruned_.successors.size(); ++m) {
    for (MethodId t : pruned_.successors[m]) {
      if (cg_.scc_of[t] != cg_.scc_of[m]) called_from_outside[cg_.scc_of[t]] = true;
    }
  }
  std::vector<MethodId> out;
  for (MethodId m = 0; m < model_.methods.size(); ++m) {
    if (pruned_.kept(m) && !called_from_outside[cg_.scc_of[m]]) out.push_back(m);
  }
  return out;
}

std::vector<MethodId> GenerationContext::resolve_entries(const GenParams& params) const {
  auto in_component = [&](MethodId m) { return model_.methods[m].component == params.component; };
  std::vector<MethodId> out;
  if (!params.entries.empty()) {
    out = params.entries;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (MethodId m : out) {
      if (m >= model_.methods.size()) throw ConfigError("entry method id " + std::to_string(m) + " does not exist");
      const auto& name = model_.methods[m].name;
      if (!pruned_.kept(m)) throw ConfigError("entry method '" + name + "' was pruned (it cannot reach any log)");
      if (params.component && !in_component(m)) {
        throw ConfigError("entry method '" + name + "' is not in component '" + *params.component + "'");
      }
    }
    return out;
  }
  if (params.component) {
    // Kept members of the component that no other member calls.
    std::vector<bool> called(model_.methods.size(), false);
    bool any_member = false;
    for (MethodId m = 0; m < model_.methods.size(); ++m) {
      if (!pruned_.kept(m) || !in_component(m)) continue;
      any_member = true;
      for (MethodId t : pruned_.successors[m]) {
        if (t != m && in_component(t)) called[t] = true;
      }
    }
    for (MethodId m = 0; m < model_.methods.size(); ++m) {
      if (pruned_.kept(m) && in_component(m) && !called[m]) out.push_back(m);
    }
    if (!any_member) throw ConfigError("component '" + *params.component + "' has no kept methods");
    if (out.empty()) {
      // Every member is called from inside the component (a cycle): all of
      // them are entries.
      for (MethodId m = 0; m < model_.methods.size(); ++m) {
        if (pruned_.kept(m) && in_component(m)) out.push_back(m);
      }
    }
    return out;
  }
  out = default_entries();
  if (out.empty()) throw ConfigError("no entry methods: the pruned call graph is empty");
  return out;
}

namespace {

class Walker {
 public:
  Walker(const GenerationContext& ctx, const GenParams& params, Label mode, Rng& rng, WalkTrace* trace)
      : ctx_(ctx),
        params_(params),
        mode_(mode),
        rng_(rng),
        trace_(trace),
        active_(ctx.model().methods.size(), 0) {}

  std::vector<EventId> run(MethodId entry) {
    walk(entry, mode_ == Label::kAnomaly, true);
    return std::move(events_);
  }

  bool seed_hit() const { return seed_hit_; }

 private:
  void record(Decision::Kind kind, std::uint32_t value) {
    if (trace_) trace_->decisions.push_back({kind, value});
  }

  void walk(MethodId m, bool route, bool at_entry) {
    ++active_[m];
    LogEpId chosen = 0;
    std::int32_t route_step = -1;
    if (route) {
      const auto& opts = ctx_.route_options(m);
      if (opts.empty()) throw ExhaustionError("no LogEP of '" + ctx_.model().methods[m].name + "' leads to a seed");
      const auto& c = opts[uniform_below(rng_, opts.size())];
      chosen = c.logep;
      route_step = c.route_step;
    } else {
      const auto& opts = mode_ == Label::kNormal ? ctx_.normal_options(m, at_entry) : ctx_.free_options(m);
      if (opts.empty()) {
        throw ExhaustionError("no admissible LogEP for '" + ctx_.model().methods[m].name + "'");
      }
      chosen = opts[uniform_below(rng_, opts.size())];
    }
    record(Decision::Kind::kChoose, chosen);
    if (ctx_.infection().status[chosen] == Infection::kSeed) {
      seed_hit_ = true;
      if (trace_) ++trace_->seeds_hit;
    }
    const auto& plan = ctx_.plan(chosen);
    run_tokens(ctx_.store().logeps[chosen], plan, 0, plan.tokens.size(), route_step);
    --active_[m];
  }

  void run_tokens(const LogEp& ep, const GenerationContext::Plan& plan, std::size_t pos, std::size_t end,
                  std::int32_t route_step) {
    while (pos < end) {
      const std::int32_t t = plan.tokens[pos];
      if (t == GenerationContext::kOpen) {
        const std::size_t close = plan.match[pos];
        const auto reps = static_cast<std::uint32_t>(1 + uniform_below(rng_, params_.max_loop_reps));
        record(Decision::Kind::kReps, reps);
        for (std::uint32_t r = 0; r < reps; ++r) run_tokens(ep, plan, pos + 1, close, route_step);
        pos = close + 1;
        continue;
      }
      const Step& s = ep.steps[static_cast<std::size_t>(t)];
      if (s.kind == Step::Kind::kLog) {
        if (events_.size() >= params_.max_events) {
          throw ExhaustionError("sequence exceeds " + std::to_string(params_.max_events) +
                                " events; lower max_loop_reps or max_recursion_depth");
        }
        events_.push_back(s.target);
      } else if (active_[s.target] <= params_.max_recursion_depth) {
        walk(s.target, !seed_hit_ && t == route_step, false);
      }
      ++pos;
    }
  }

  const GenerationContext& ctx_;
  const GenParams& params_;
  Label mode_;
  Rng& rng_;
  WalkTrace* trace_;
  std::vector<std::uint32_t> active_;
  std::vector<EventId> events_;
  bool seed_hit_ = false;
};

}  // namespace

LogSequence generate_sequence(const GenerationContext& ctx, MethodId entry, Label mode, Rng& rng,
                              const GenParams& params, WalkTrace* trace) {
  const auto& model = ctx.model();
  if (entry >= model.methods.size()) throw ConfigError("entry method id " + std::to_string(entry) + " does not exist");
  const auto& name = model.methods[entry].name;
  if (!ctx.pruned().kept(entry)) throw ConfigError("entry method '" + name + "' is not in the pruned call graph");
  if (mode == Label::kAnomaly && !ctx.seed_distance(entry)) {
    throw UnreachableSeedError("no seed anomaly LogEP is reachable from '" + name + "'");
  }
  if (mode == Label::kNormal && !ctx.can_complete_clean(entry)) {
    throw ExhaustionError("every walk from '" + name + "' reaches a seed anomaly LogEP");
  }
  if (trace) *trace = {};
  Walker walker(ctx, params, mode, rng, trace);
  LogSequence seq;
  seq.label = mode;
  seq.entry = entry;
  seq.events = walker.run(entry);
  if (mode == Label::kAnomaly && !walker.seed_hit()) {
    throw ExhaustionError("anomaly walk from '" + name + "' ended without reaching a seed");
  }
  return seq;
}

LogDataset generate_dataset(const GenerationContext& ctx, const GenParams& params, unsigned workers,
                            std::vector<WalkTrace>* traces) {
  params.validate();
  const auto& model = ctx.model();
  const auto entries = ctx.resolve_entries(params);
  std::vector<MethodId> normal_entries;
  std::vector<MethodId> anomaly_entries;
  for (MethodId m : entries) {
    if (ctx.can_complete_clean(m)) normal_entries.push_back(m);
    if (ctx.seed_distance(m)) anomaly_entries.push_back(m);
  }

  std::vector<Label> labels(params.size, Label::kNormal);
  Rng master = make_rng(params.seed, kLabelStream);
  if (params.exact_rate) {
    const auto anomalies = static_cast<std::size_t>(std::llround(static_cast<double>(params.size) * params.anomaly_rate));
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(anomalies), Label::kAnomaly);
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::swap(labels[i - 1], labels[uniform_below(master, i)]);
    }
  } else {
    for (auto& l : labels) l = uniform_unit(master) < params.anomaly_rate ? Label::kAnomaly : Label::kNormal;
  }
  const bool want_normal = std::find(labels.begin(), labels.end(), Label::kNormal) != labels.end();

  if (params.anomaly_rate > 0.0 && anomaly_entries.empty()) {
    throw ConfigError(ctx.annotations().seed_anomaly.empty()
                          ? "anomaly rate > 0 but no seed anomaly LogEPs are annotated"
                          : "anomaly rate > 0 but no entry method can reach a seed anomaly LogEP");
  }
  if (params.anomaly_rate == 1.0 && anomaly_entries.size() != entries.size()) {
    for (MethodId m : entries) {
      if (!ctx.seed_distance(m)) {
        throw ConfigError("anomaly rate 1 but entry '" + model.methods[m].name + "' cannot reach a seed");
      }
    }
  }
  if (want_normal && normal_entries.empty()) {
    throw ConfigError("no entry method can complete a walk without reaching a seed anomaly LogEP");
  }

  LogDataset ds;
  ds.params = params;
  ds.sequences.resize(params.size);
  if (traces) traces->assign(params.size, {});
  parallel_for(params.size, workers, [&](std::size_t i) {
    Rng rng = make_rng(params.seed, i);
    const auto& pool = labels[i] == Label::kAnomaly ? anomaly_entries : normal_entries;
    const MethodId entry = pool[uniform_below(rng, pool.size())];
    ds.sequences[i] = generate_sequence(ctx, entry, labels[i], rng, params, traces ? &(*traces)[i] : nullptr);
    ds.sequences[i].seq_id = static_cast<std::uint32_t>(i);
  });

  for (const auto& ev : ctx.store().events) ds.templates.push_back({ev.id, ev.level, ev.text});
  ds.model_hash = hex64(fnv1a64(serialize_model(model)));
  ds.annotation_hash = hex64(fnv1a64(serialize_annotations(ctx.annotations())));
  ds.tool_version = LOGSYNTH_VERSION;
  return ds;
}

}  // namespace logsynth
