#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amrgen/amr.h"

namespace amrgen {

enum class LeviKind { Concept, Relation };

struct LeviNode {
  std::string token;
  LeviKind kind;
  std::size_t origin;  // source node index (Concept) or source edge index (Relation)
};

// Unlabeled bipartite graph: every labeled edge (i, label, j) becomes a
// relation node r with edges i -> r and r -> j. Concept nodes come first, in
// source node order, followed by one relation node per source edge.
struct LeviGraph {
  std::vector<LeviNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t root = kNoNode;
};

// Reentrancy-free copy of an AmrGraph. Nodes are in depth-first visit order;
// copy_of[i] is the source node a tree node was copied from and
// edge_origin[k] the source edge tree edge k came from.
struct AmrTree {
  AmrGraph graph;
  std::vector<std::size_t> copy_of;
  std::vector<std::size_t> edge_origin;
};

enum class TokenKind { Concept, Relation };

struct TokenOrigin {
  TokenKind kind;
  std::size_t index;  // source node (Concept) or source edge (Relation)

  bool operator==(const TokenOrigin&) const = default;
};

struct AnonymizationEntry {
  std::string placeholder;
  std::string original;

  bool operator==(const AnonymizationEntry&) const = default;
};

using AnonymizationMap = std::vector<AnonymizationEntry>;

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<TokenOrigin> alignment;
  AnonymizationMap anonymization_map;

  std::size_t size() const { return tokens.size(); }
};

struct AnonymizationPolicy {
  // Concept frequencies over the training corpus; concepts below
  // rare_threshold become rare_<k>. A threshold of 0 disables rare-word
  // substitution.
  std::unordered_map<std::string, std::size_t> concept_frequency;
  std::size_t rare_threshold = 5;
  bool names = true;
  bool numbers = true;
  bool dates = true;
};

struct AnonymizedGraph {
  AmrGraph graph;
  AnonymizationMap map;
};

// Surface token for a node: the label with any string quotes dropped.
std::string node_token(const AmrNode& node);

LeviGraph to_levi(const AmrGraph& graph);

// Reentrant nodes keep their subtree at the first depth-first visit; every
// later incoming edge gets its own identically labeled leaf copy. Cycles are
// broken the same way.
AmrTree to_tree(const AmrGraph& graph);

// Depth-first linearization from the root following edge order. A node that
// was already visited is re-emitted as its concept token without descending.
TokenSequence linearize(const AmrGraph& graph);

// Maximum |j - i| over Levi-adjacent token pairs in the linearization: the
// parent concept to the relation token, and the relation token to the child
// concept. Nodes sit at their first occurrence. 0 for a single node.
std::size_t max_dependency_length(const AmrGraph& graph);

// Entity category for a :name-bearing concept (person_name, organization_name,
// location_name, other_name).
std::string name_category(const std::string& concept_label);

// Counts concept (non-constant) labels, the input for AnonymizationPolicy.
void count_concepts(const AmrGraph& graph, std::unordered_map<std::string, std::size_t>& counts);

AnonymizedGraph anonymize(const AmrGraph& graph, const AnonymizationPolicy& policy);

// Replaces every case-insensitive occurrence of a mapped surface string in a
// tokenized sentence with its placeholder.
std::vector<std::string> anonymize_sentence(const std::vector<std::string>& sentence,
                                            const AnonymizationMap& map);

std::vector<std::string> deanonymize(const std::vector<std::string>& sentence,
                                     const AnonymizationMap& map);

}  // namespace amrgen
