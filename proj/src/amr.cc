#include "amrgen/amr.h"

#include <unordered_set>

#include "amrgen/transforms.h"

namespace amrgen {

std::size_t AmrGraph::add_node(std::string id, std::string label, bool constant, bool quoted) {
  nodes.push_back(AmrNode{std::move(id), std::move(label), constant, quoted});
  if (root == kNoNode) root = nodes.size() - 1;
  return nodes.size() - 1;
}

std::size_t AmrGraph::add_edge(std::size_t source, std::string role, std::size_t target) {
  edges.push_back(AmrEdge{source, std::move(role), target});
  return edges.size() - 1;
}

std::optional<std::size_t> AmrGraph::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> AmrGraph::out_edges() const {
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    if (edge.source < nodes.size() && edge.target < nodes.size()) out[edge.source].push_back(e);
  }
  return out;
}

std::vector<std::size_t> AmrGraph::indegrees() const {
  std::vector<std::size_t> in(nodes.size(), 0);
  for (const auto& edge : edges)
    if (edge.source < nodes.size() && edge.target < nodes.size()) ++in[edge.target];
  return in;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissingRoot: return "missing-root";
    case ViolationKind::DanglingEdge: return "dangling-edge";
    case ViolationKind::UnreachableNode: return "unreachable-node";
    case ViolationKind::DuplicateId: return "duplicate-id";
  }
  return "unknown";
}

std::vector<Violation> validate(const AmrGraph& graph) {
  std::vector<Violation> out;
  const std::size_t n = graph.nodes.size();

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(graph.nodes[i].id).second)
      out.push_back({ViolationKind::DuplicateId, i, "duplicate node id '" + graph.nodes[i].id + "'"});
  }

  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    if (edge.source >= n || edge.target >= n)
      out.push_back({ViolationKind::DanglingEdge, e, "edge " + std::to_string(e) + " (" + edge.role +
                                                         ") references an unknown node"});
  }

  if (graph.root >= n) {
    out.push_back({ViolationKind::MissingRoot, graph.root, "root is not a node of the graph"});
    return out;  // reachability is undefined without a root
  }

  const auto adj = graph.out_edges();
  std::vector<bool> reached(n, false);
  std::vector<std::size_t> stack{graph.root};
  reached[graph.root] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t e : adj[v]) {
      const std::size_t t = graph.edges[e].target;
      if (!reached[t]) {
        reached[t] = true;
        stack.push_back(t);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!reached[i])
      out.push_back({ViolationKind::UnreachableNode, i,
                     "node '" + graph.nodes[i].id + "' is not reachable from the root"});
  return out;
}

std::size_t reentrancy_count(const AmrGraph& graph) {
  std::size_t count = 0;
  for (std::size_t d : graph.indegrees())
    if (d > 1) count += d - 1;
  return count;
}

GraphStats compute_stats(const AmrGraph& graph) {
  GraphStats stats;
  stats.reentrancy_count = reentrancy_count(graph);
  stats.max_dependency_length = max_dependency_length(graph);
  stats.node_count = graph.nodes.size();
  stats.edge_count = graph.edges.size();
  return stats;
}

}  // namespace amrgen
