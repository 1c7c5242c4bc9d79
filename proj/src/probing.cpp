#include "logsynth/probing.hpp"

#include <algorithm>

#include "logsynth/error.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

LoggingApiConfig LoggingApiConfig::load(const std::string& path) {
  const std::string text = read_file(path);
  LoggingApiConfig config;
  config.names.clear();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const auto line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    if (split_ws(line).size() != 1) throw FormatError(path, line_no, "expected one API name per line");
    config.names.emplace(line);
  }
  if (config.names.empty()) throw FormatError(path, 0, "no logging API names");
  return config;
}

CallGraph CallGraph::from_edges(std::size_t node_count, std::span<const std::pair<MethodId, MethodId>> edges) {
  CallGraph cg;
  cg.successors.assign(node_count, {});
  cg.self_loop.assign(node_count, false);
  for (const auto& [from, to] : edges) {
    cg.successors[from].push_back(to);
    if (from == to) cg.self_loop[from] = true;
  }
  for (auto& s : cg.successors) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  // Iterative Tarjan.
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(node_count, kUnvisited);
  std::vector<std::uint32_t> low(node_count, 0);
  std::vector<bool> on_stack(node_count, false);
  std::vector<MethodId> stack;
  std::vector<std::pair<MethodId, std::size_t>> call_stack;
  cg.scc_of.assign(node_count, 0);
  std::uint32_t counter = 0;

  for (MethodId root = 0; root < node_count; ++root) {
    if (index[root] != kUnvisited) continue;
    call_stack.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call_stack.empty()) {
      const MethodId v = call_stack.back().first;
      std::size_t& next = call_stack.back().second;
      if (next < cg.successors[v].size()) {
        const MethodId w = cg.successors[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call_stack.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call_stack.pop_back();
      if (!call_stack.empty()) {
        const MethodId parent = call_stack.back().first;
        low[parent] = std::min(low[parent], low[v]);
      }
      if (low[v] == index[v]) {
        const auto id = static_cast<SccId>(cg.scc_members.size());
        std::vector<MethodId> members;
        MethodId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          cg.scc_of[w] = id;
          members.push_back(w);
        } while (w != v);
        std::sort(members.begin(), members.end());
        cg.scc_members.push_back(std::move(members));
      }
    }
  }
  return cg;
}

CallGraph build_call_graph(ProgramModel& model) {
  std::vector<std::pair<MethodId, MethodId>> edges;
  edges.reserve(model.call_edges.size());
  for (const auto& e : model.call_edges) edges.emplace_back(e.caller, e.callee);
  CallGraph cg = CallGraph::from_edges(model.methods.size(), edges);
  for (auto& m : model.methods) m.in_cycle = cg.cyclic(m.id);
  return cg;
}

std::vector<MethodId> mark_log_methods(ProgramModel& model, const LoggingApiConfig& config) {
  std::vector<MethodId> out;
  for (auto& m : model.methods) {
    m.is_log_method = std::any_of(m.cfg.nodes().begin(), m.cfg.nodes().end(), [&](const Activity& a) {
      if (std::holds_alternative<LogActivity>(a)) return true;
      const auto* call = std::get_if<CallActivity>(&a);
      return call && config.names.count(call->target) > 0;
    });
    if (m.is_log_method) out.push_back(m.id);
  }
  return out;
}

}  // namespace logsynth
