#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logsynth/model.hpp"

namespace logsynth {

using SccId = std::uint32_t;

// Names of calls treated as logging APIs. MiniLang `log(...)` statements are
// always logging activities; these names additionally match CALL activities,
// which lets model files describe external logging frameworks.
struct LoggingApiConfig {
  std::set<std::string, std::less<>> names{"log"};

  static LoggingApiConfig load(const std::string& path);
};

// Method-level call graph with its strongly connected components.
//
// SCC ids follow Tarjan completion order: every edge between two different
// components goes from a higher id to a lower id, so ascending ids visit
// callees before callers.
struct CallGraph {
  std::vector<std::vector<MethodId>> successors;  // sorted, unique
  std::vector<SccId> scc_of;
  std::vector<std::vector<MethodId>> scc_members;  // members ascending
  std::vector<bool> self_loop;

  std::size_t size() const { return successors.size(); }
  std::size_t scc_count() const { return scc_members.size(); }
  bool cyclic(MethodId m) const { return self_loop[m] || scc_members[scc_of[m]].size() > 1; }

  static CallGraph from_edges(std::size_t node_count, std::span<const std::pair<MethodId, MethodId>> edges);
};

// Collects one edge per distinct (caller, callee) pair, condenses SCCs and
// sets MethodNode::in_cycle.
CallGraph build_call_graph(ProgramModel& model);

// Marks methods containing a logging statement or a call to a configured
// logging API. Sets MethodNode::is_log_method and returns the marked ids,
// ascending.
std::vector<MethodId> mark_log_methods(ProgramModel& model, const LoggingApiConfig& config = {});

}  // namespace logsynth
