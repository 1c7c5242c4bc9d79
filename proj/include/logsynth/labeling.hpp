#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logsynth/paths.hpp"

namespace logsynth {

// Human annotations: alerting statements and seed anomaly LogEPs.
struct AnnotationSet {
  std::set<EventId> alerting;
  std::set<LogEpId> seed_anomaly;

  bool empty() const { return alerting.empty() && seed_anomaly.empty(); }
  bool operator==(const AnnotationSet&) const = default;
};

enum class Infection : std::uint8_t { kClean, kInfected, kSeed };

std::string_view to_string(Infection status);

struct InfectionMap {
  std::vector<Infection> status;  // by LogEpId
  std::vector<bool> tainted;      // by MethodId: owns a SEED or INFECTED LogEP

  bool operator==(const InfectionMap&) const = default;
};

// Worksheet for offline annotation:
//   EVT <event-id> <level> <method> <template>     (append " ALERT" to mark)
//   EP <logep-id> <method> <steps...>              (LogEPs with warn/error events)
//   SEED <logep-id>                                (added by the annotator)
// `#` lines carry source context when `origins` is given.
std::string render_worksheet(const LogEpStore& store, const ProgramModel& model,
                             std::span<const StatementOrigin> origins = {});
void export_worksheet(const LogEpStore& store, const ProgramModel& model, const std::string& path,
                      std::span<const StatementOrigin> origins = {});

AnnotationSet parse_annotations(std::string_view text, const LogEpStore& store, const ProgramModel& model,
                                const std::string& path = "<annotations>");
AnnotationSet import_annotations(const std::string& path, const LogEpStore& store, const ProgramModel& model);

// Throws ValidationError for unknown ids or a seed without an alerting step.
void validate_annotations(const AnnotationSet& annotations, const LogEpStore& store);

// Canonical text form, used for hashing.
std::string serialize_annotations(const AnnotationSet& annotations);

// Least fixpoint: seeds are SEED; a LogEP calling into a method that owns a
// SEED or INFECTED LogEP is INFECTED; everything else is CLEAN.
InfectionMap propagate(const LogEpStore& store, const AnnotationSet& annotations);

}  // namespace logsynth
