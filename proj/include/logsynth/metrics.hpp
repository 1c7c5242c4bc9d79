#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logsynth/generation.hpp"

namespace logsynth {

struct CoveragePoint {
  std::uint64_t messages = 0;
  double coverage = 0.0;

  bool operator==(const CoveragePoint&) const = default;
};

struct CoverageReport {
  std::size_t discovered = 0;
  std::size_t total = 0;
  double coverage = 0.0;
  std::vector<CoveragePoint> curve;
};

// Distinct events in the dataset over the logging statements of the model.
// The curve is sampled every `step` messages in sequence order and always
// ends with the final point.
CoverageReport logging_coverage(const LogDataset& ds, const ProgramModel& model, std::uint64_t step = 1000);

struct DCoverage {
  double fraction = 1.0;
  std::vector<std::string> unmatched;  // reference order
};

// Fraction of reference templates that equal some dataset template after
// whitespace normalization. An empty reference is fully covered.
DCoverage d_coverage(const LogDataset& ds, std::span<const std::string> reference);

// One template per line; blank lines and `#` comments are skipped.
std::vector<std::string> load_reference_templates(const std::string& path);

struct ThroughputReport {
  std::uint64_t messages = 0;
  double seconds = 0.0;
  double per_minute = 0.0;
};

ThroughputReport measure_throughput(const GenerationContext& ctx, const GenParams& params, unsigned workers = 1);

struct DetectorModel {
  std::set<EventId> known_events;
  std::map<std::pair<EventId, EventId>, std::uint64_t> bigram_counts;
  double threshold = 0.0;
};

// Throws ConfigError for an empty training set or an ANOMALY sequence.
DetectorModel train_detector(std::span<const LogSequence> train, double threshold = 0.0);

Label score(const DetectorModel& model, const LogSequence& seq);

struct Evaluation {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::string> warnings;
};

// With no actual and no predicted anomalies, P = R = F1 = 1 and a warning is
// attached.
Evaluation evaluate(const DetectorModel& model, std::span<const LogSequence> test);

}  // namespace logsynth
