#include "logsynth/metrics.hpp"

#include <unordered_set>

#include "logsynth/error.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

CoverageReport logging_coverage(const LogDataset& ds, const ProgramModel& model, std::uint64_t step) {
  CoverageReport r;
  r.total = model.statement_count();
  if (step == 0) step = 1;
  std::unordered_set<EventId> seen;
  auto ratio = [&] { return r.total == 0 ? 0.0 : static_cast<double>(seen.size()) / static_cast<double>(r.total); };
  std::uint64_t messages = 0;
  for (const auto& s : ds.sequences) {
    for (EventId e : s.events) {
      seen.insert(e);
      if (++messages % step == 0) r.curve.push_back({messages, ratio()});
    }
  }
  if (r.curve.empty() || r.curve.back().messages != messages) r.curve.push_back({messages, ratio()});
  r.discovered = seen.size();
  r.coverage = ratio();
  return r;
}

DCoverage d_coverage(const LogDataset& ds, std::span<const std::string> reference) {
  DCoverage out;
  std::unordered_set<std::string> have;
  for (const auto& t : ds.templates) have.insert(normalize_ws(t.text));
  std::size_t matched = 0;
  for (const auto& ref : reference) {
    if (have.count(normalize_ws(ref))) {
      ++matched;
    } else {
      out.unmatched.push_back(ref);
    }
  }
  if (!reference.empty()) out.fraction = static_cast<double>(matched) / static_cast<double>(reference.size());
  return out;
}

std::vector<std::string> load_reference_templates(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(line);
  }
  return out;
}

ThroughputReport measure_throughput(const GenerationContext& ctx, const GenParams& params, unsigned workers) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  const LogDataset ds = generate_dataset(ctx, params, workers);
  const auto stop = std::chrono::steady_clock::now();
  ThroughputReport r;
  for (const auto& s : ds.sequences) r.messages += s.events.size();
  r.seconds = std::chrono::duration<double>(stop - start).count();
  r.per_minute = r.seconds > 0 ? static_cast<double>(r.messages) * 60.0 / r.seconds : 0.0;
  return r;
}

DetectorModel train_detector(std::span<const LogSequence> train, double threshold) {
  if (train.empty()) throw ConfigError("detector training set is empty");
  DetectorModel m;
  m.threshold = threshold;
  for (const auto& s : train) {
    if (s.label != Label::kNormal) throw ConfigError("detector training set contains an anomaly sequence");
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      m.known_events.insert(s.events[i]);
      if (i + 1 < s.events.size()) ++m.bigram_counts[{s.events[i], s.events[i + 1]}];
    }
  }
  return m;
}

Label score(const DetectorModel& model, const LogSequence& seq) {
  std::size_t unseen = 0;
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    if (!model.known_events.count(seq.events[i])) return Label::kAnomaly;
    if (i + 1 < seq.events.size() && !model.bigram_counts.count({seq.events[i], seq.events[i + 1]})) ++unseen;
  }
  if (seq.events.size() < 2) return Label::kNormal;
  const double frac = static_cast<double>(unseen) / static_cast<double>(seq.events.size() - 1);
  return frac > model.threshold ? Label::kAnomaly : Label::kNormal;
}

Evaluation evaluate(const DetectorModel& model, std::span<const LogSequence> test) {
  Evaluation e;
  for (const auto& s : test) {
    const bool predicted = score(model, s) == Label::kAnomaly;
    const bool actual = s.label == Label::kAnomaly;
    if (predicted && actual) ++e.tp;
    if (predicted && !actual) ++e.fp;
    if (!predicted && actual) ++e.fn;
    if (!predicted && !actual) ++e.tn;
  }
  if (e.tp + e.fp + e.fn == 0) {
    e.precision = e.recall = e.f1 = 1.0;
    e.warnings.push_back("no anomalies present or predicted; precision, recall and F1 reported as 1.0");
    return e;
  }
  e.precision = e.tp + e.fp ? static_cast<double>(e.tp) / static_cast<double>(e.tp + e.fp) : 0.0;
  e.recall = e.tp + e.fn ? static_cast<double>(e.tp) / static_cast<double>(e.tp + e.fn) : 0.0;
  e.f1 = e.precision + e.recall > 0 ? 2 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
  return e;
}

}  // namespace logsynth
