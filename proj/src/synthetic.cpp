#include "logsynth/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "logsynth/generation.hpp"

namespace logsynth {

namespace {

using namespace minilang;

const char* const kCondVars[] = {"ready", "busy", "ok", "retry", "closed"};
const char* const kDataVars[] = {"block", "path", "state", "peer"};
const char* const kWords[] = {"Receiving", "block", "from", "peer", "Failed", "to", "open", "file",
                              "retrying", "done", "closing", "stream", "packet", "ack", "timeout"};
const char* const kExotic[] = {"say \"hi\"", "back\\slash", "\xc3\xa9t\xc3\xa9", "tab\there", "\xe6\x97\xa5\xe5\xbf\x97"};

class Builder {
 public:
  explicit Builder(const SyntheticOptions& o) : o_(o), rng_(make_rng(o.seed, 0x5eed)) {}

  std::vector<AstMethod> run() {
    std::vector<AstMethod> out;
    out.reserve(o_.methods);
    for (std::size_t i = 0; i < o_.methods; ++i) {
      self_ = i;
      branches_ = 0;
      AstMethod m;
      m.name = name(i);
      if (!o_.components.empty()) m.component = o_.components[i % o_.components.size()];
      m.body = block(0, false, true);
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  static std::string name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "m%04zu", i);
    return buf;
  }

  bool chance(double p) { return uniform_unit(rng_) < p; }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(uniform_below(rng_, n)); }

  std::size_t level(std::size_t i) const { return i * std::max<std::size_t>(o_.levels, 1) / o_.methods; }

  std::optional<std::size_t> callee() {
    if (o_.methods == 0) return std::nullopt;
    if (chance(o_.recursion_rate)) return pick(o_.methods);
    // First method of the next band onwards.
    std::size_t lo = self_ + 1;
    while (lo < o_.methods && level(lo) == level(self_)) ++lo;
    if (lo >= o_.methods) return std::nullopt;
    return lo + pick(o_.methods - lo);
  }

  std::string text() {
    if (o_.exotic_text && chance(0.3)) return kExotic[pick(std::size(kExotic))];
    std::string s;
    const std::size_t n = 1 + pick(4);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += kWords[pick(std::size(kWords))];
    }
    return s;
  }

  Condition cond() {
    const std::size_t r = pick(10);
    if (r == 0) return {Condition::Kind::kTrue, {}};
    if (r == 1) return {Condition::Kind::kFalse, {}};
    return {r % 2 ? Condition::Kind::kNotVar : Condition::Kind::kVar, kCondVars[pick(std::size(kCondVars))]};
  }

  Stmt log_stmt() {
    LogCall call;
    const double r = uniform_unit(rng_);
    call.level = r < o_.warn_rate / 2 ? LogLevel::kError : r < o_.warn_rate ? LogLevel::kWarn : LogLevel::kInfo;
    call.parts.push_back(LogPart::literal(text() + " "));
    if (chance(0.5)) call.parts.push_back(LogPart::var(kDataVars[pick(std::size(kDataVars))]));
    if (chance(0.2)) call.parts.push_back(LogPart::literal(" " + text()));
    return {std::move(call), 0, 0};
  }

  Block block(std::size_t depth, bool in_loop, bool top) {
    Block b;
    const std::size_t n = (top ? 1 : 0) + pick(o_.max_block + 1);
    for (std::size_t i = 0; i < n; ++i) b.push_back(stmt(depth, in_loop));
    if (top && o_.methods > 0 && chance(0.5)) b.push_back(log_stmt());
    return b;
  }

  Stmt stmt(std::size_t depth, bool in_loop) {
    const double r = uniform_unit(rng_);
    if (r < o_.log_rate) return log_stmt();
    if (r < o_.log_rate + o_.call_rate && !in_loop) {
      if (auto c = callee()) return {Invoke{name(*c)}, 0, 0};
    }
    if (depth < o_.max_depth && branches_ < o_.max_branches && chance(0.6)) {
      ++branches_;
      if (chance(0.35)) {
        // Constant loop conditions would never exit or never enter.
        Condition c{chance(0.5) ? Condition::Kind::kVar : Condition::Kind::kNotVar,
                    kCondVars[pick(std::size(kCondVars))]};
        return {While{std::move(c), block(depth + 1, true, false)}, 0, 0};
      }
      If s{cond(), block(depth + 1, in_loop, false), std::nullopt};
      if (chance(0.6)) s.else_block = block(depth + 1, in_loop, false);
      if (!in_loop && chance(0.1)) s.then_block.push_back({Return{}, 0, 0});
      return {std::move(s), 0, 0};
    }
    Assign a{kDataVars[pick(std::size(kDataVars))], text()};
    return {std::move(a), 0, 0};
  }

  const SyntheticOptions& o_;
  Rng rng_;
  std::size_t self_ = 0;
  std::size_t branches_ = 0;
};

}  // namespace

std::vector<minilang::AstMethod> synthetic_program(const SyntheticOptions& options) { return Builder(options).run(); }

AnnotationSet auto_annotate(const LogEpStore& store, std::size_t max_seeds, std::uint64_t seed) {
  AnnotationSet out;
  for (const auto& ev : store.events) {
    if (ev.level != LogLevel::kInfo) out.alerting.insert(ev.id);
  }
  std::vector<LogEpId> candidates;
  for (const auto& ep : store.logeps) {
    if (std::any_of(ep.steps.begin(), ep.steps.end(), [&](const Step& s) {
          return s.kind == Step::Kind::kLog && out.alerting.count(s.target);
        })) {
      candidates.push_back(ep.id);
    }
  }
  Rng rng = make_rng(seed, 0xa11e);
  for (std::size_t i = 0; i < candidates.size() && i < max_seeds; ++i) {
    std::swap(candidates[i], candidates[i + uniform_below(rng, candidates.size() - i)]);
    out.seed_anomaly.insert(candidates[i]);
  }
  return out;
}

}  // namespace logsynth
