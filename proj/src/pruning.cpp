#include "logsynth/pruning.hpp"

namespace logsynth {

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::kLogMethod:
      return "LOG_METHOD";
    case NodeClass::kLogInducing:
      return "LOG_INDUCING";
    case NodeClass::kPruned:
      return "PRUNED";
  }
  return "PRUNED";
}

std::vector<MethodId> PrunedCallGraph::kept_methods() const {
  std::vector<MethodId> out;
  for (MethodId m = 0; m < classification.size(); ++m) {
    if (kept(m)) out.push_back(m);
  }
  return out;
}

std::size_t PrunedCallGraph::kept_count() const {
  std::size_t n = 0;
  for (auto c : classification) n += c != NodeClass::kPruned;
  return n;
}

PrunedCallGraph prune(const CallGraph& cg, std::span<const MethodId> log_methods) {
  const std::size_t n = cg.size();
  std::vector<bool> is_log(n, false);
  for (MethodId m : log_methods) is_log[m] = true;

  // Ascending SCC ids visit callees first, so every successor component is
  // final when its callers are examined.
  std::vector<bool> keep_scc(cg.scc_count(), false);
  for (SccId s = 0; s < cg.scc_count(); ++s) {
    bool keep = false;
    for (MethodId m : cg.scc_members[s]) {
      if (is_log[m]) {
        keep = true;
        break;
      }
      for (MethodId callee : cg.successors[m]) {
        if (cg.scc_of[callee] != s && keep_scc[cg.scc_of[callee]]) {
          keep = true;
          break;
        }
      }
      if (keep) break;
    }
    keep_scc[s] = keep;
  }

  PrunedCallGraph out;
  out.classification.assign(n, NodeClass::kPruned);
  out.successors.assign(n, {});
  out.in_degree.assign(n, 0);
  for (MethodId m = 0; m < n; ++m) {
    if (!keep_scc[cg.scc_of[m]]) continue;
    out.classification[m] = is_log[m] ? NodeClass::kLogMethod : NodeClass::kLogInducing;
  }
  for (MethodId m = 0; m < n; ++m) {
    if (!out.kept(m)) continue;
    for (MethodId callee : cg.successors[m]) {
      if (out.kept(callee)) {
        out.successors[m].push_back(callee);
        ++out.in_degree[callee];
      }
    }
  }
  return out;
}

}  // namespace logsynth
