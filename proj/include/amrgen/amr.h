#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amrgen {

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

// A concept node (PENMAN variable) or a constant occurrence.
struct AmrNode {
  std::string id;
  std::string label;
  bool constant = false;
  bool quoted = false;  // constant was written as a "string"

  bool operator==(const AmrNode&) const = default;
};

// Directed, labeled edge between node indices.
struct AmrEdge {
  std::size_t source = kNoNode;
  std::string role;  // includes the leading ':'
  std::size_t target = kNoNode;

  bool operator==(const AmrEdge&) const = default;
};

// Rooted, directed, edge-labeled graph. Edge order is significant: it is the
// order relations were written in PENMAN and drives every traversal.
struct AmrGraph {
  std::vector<AmrNode> nodes;
  std::vector<AmrEdge> edges;
  std::size_t root = kNoNode;

  std::size_t add_node(std::string id, std::string label, bool constant = false,
                       bool quoted = false);
  std::size_t add_edge(std::size_t source, std::string role, std::size_t target);

  std::optional<std::size_t> find(std::string_view id) const;

  // Outgoing edge indices per node, in edge order. Edges with out-of-range
  // endpoints are skipped.
  std::vector<std::vector<std::size_t>> out_edges() const;
  std::vector<std::size_t> indegrees() const;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
};

struct GraphStats {
  std::size_t reentrancy_count = 0;
  std::size_t max_dependency_length = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;

  bool operator==(const GraphStats&) const = default;
};

enum class ViolationKind { MissingRoot, DanglingEdge, UnreachableNode, DuplicateId };

struct Violation {
  ViolationKind kind;
  std::size_t index;  // node or edge index the violation refers to
  std::string message;
};

std::string to_string(ViolationKind kind);

// Empty iff every AmrGraph invariant holds.
std::vector<Violation> validate(const AmrGraph& graph);

// Sum over nodes of max(0, indegree - 1).
std::size_t reentrancy_count(const AmrGraph& graph);

GraphStats compute_stats(const AmrGraph& graph);

}  // namespace amrgen
