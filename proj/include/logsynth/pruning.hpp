#pragma once

#include <span>
#include <string>
#include <vector>

#include "logsynth/probing.hpp"

namespace logsynth {

enum class NodeClass : std::uint8_t { kLogMethod, kLogInducing, kPruned };

std::string_view to_string(NodeClass c);

// The call graph restricted to LogMethods and their ancestors.
struct PrunedCallGraph {
  std::vector<NodeClass> classification;  // by MethodId
  std::vector<std::vector<MethodId>> successors;  // kept -> kept only
  std::vector<std::uint32_t> in_degree;  // within the pruned graph

  bool kept(MethodId m) const { return classification[m] != NodeClass::kPruned; }
  bool is_leaf(MethodId m) const { return successors[m].empty(); }
  std::vector<MethodId> kept_methods() const;
  std::size_t kept_count() const;
};

// Keeps every LogMethod and every method that reaches one, decided per SCC in
// a single sweep over the condensation from callees to callers.
PrunedCallGraph prune(const CallGraph& cg, std::span<const MethodId> log_methods);

}  // namespace logsynth
