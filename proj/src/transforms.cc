#include "amrgen/transforms.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace amrgen {
namespace {

// Shared depth-first walk used by linearize and to_tree. on_concept(node,
// parent_edge, first_visit) fires for each node occurrence; parent_edge is
// kNoNode for the root. on_relation(edge) fires before the edge's target.
template <typename ConceptFn, typename RelationFn>
void walk(const AmrGraph& graph, ConceptFn&& on_concept, RelationFn&& on_relation) {
  if (graph.root >= graph.nodes.size()) return;
  const auto adj = graph.out_edges();
  std::vector<bool> visited(graph.nodes.size(), false);

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  std::vector<Frame> stack;

  visited[graph.root] = true;
  on_concept(graph.root, kNoNode, true);
  stack.push_back({graph.root, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_edge == adj[top.node].size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t e = adj[top.node][top.next_edge++];
    on_relation(e);
    const std::size_t t = graph.edges[e].target;
    if (visited[t]) {
      on_concept(t, e, false);
    } else {
      visited[t] = true;
      on_concept(t, e, true);
      stack.push_back({t, 0});
    }
  }
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

bool is_number(const std::string& s) {
  static const std::regex number(R"(^[-+]?[0-9]+(\.[0-9]+)?$)");
  return std::regex_match(s, number);
}

std::string strip_sense(const std::string& label) {
  static const std::regex sense(R"(-[0-9]+$)");
  return std::regex_replace(label, sense, "");
}

bool is_op_role(const std::string& role) {
  return role.size() > 3 && lowercase(role.substr(0, 3)) == ":op" &&
         std::all_of(role.begin() + 3, role.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

std::string node_token(const AmrNode& node) { return node.label; }

LeviGraph to_levi(const AmrGraph& graph) {
  LeviGraph levi;
  const std::size_t n = graph.nodes.size();
  levi.nodes.reserve(n + graph.edges.size());
  for (std::size_t i = 0; i < n; ++i)
    levi.nodes.push_back({node_token(graph.nodes[i]), LeviKind::Concept, i});
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    const std::size_t r = levi.nodes.size();
    levi.nodes.push_back({edge.role, LeviKind::Relation, e});
    levi.edges.emplace_back(edge.source, r);
    levi.edges.emplace_back(r, edge.target);
  }
  levi.root = graph.root;
  return levi;
}

AmrTree to_tree(const AmrGraph& graph) {
  AmrTree tree;
  std::vector<std::size_t> copies(graph.nodes.size(), 0);
  // Tree node currently standing for each source node's first visit.
  std::vector<std::size_t> expanded(graph.nodes.size(), kNoNode);
  std::vector<std::size_t> edge_parent(graph.edges.size(), kNoNode);

  walk(
      graph,
      [&](std::size_t v, std::size_t parent_edge, bool first) {
        const auto& node = graph.nodes[v];
        std::string id = node.id;
        if (copies[v]++ > 0) id += "~" + std::to_string(copies[v] - 1);
        const std::size_t t = tree.graph.add_node(id, node.label, node.constant, node.quoted);
        tree.copy_of.push_back(v);
        if (first) expanded[v] = t;
        if (parent_edge != kNoNode) {
          tree.graph.add_edge(edge_parent[parent_edge], graph.edges[parent_edge].role, t);
          tree.edge_origin.push_back(parent_edge);
        }
      },
      [&](std::size_t e) { edge_parent[e] = expanded[graph.edges[e].source]; });
  return tree;
}

TokenSequence linearize(const AmrGraph& graph) {
  TokenSequence seq;
  walk(
      graph,
      [&](std::size_t v, std::size_t, bool) {
        seq.tokens.push_back(node_token(graph.nodes[v]));
        seq.alignment.push_back({TokenKind::Concept, v});
      },
      [&](std::size_t e) {
        seq.tokens.push_back(graph.edges[e].role);
        seq.alignment.push_back({TokenKind::Relation, e});
      });
  return seq;
}

std::size_t max_dependency_length(const AmrGraph& graph) {
  const TokenSequence seq = linearize(graph);
  std::vector<std::size_t> node_pos(graph.nodes.size(), kNoNode);
  std::vector<std::size_t> edge_pos(graph.edges.size(), kNoNode);
  for (std::size_t p = 0; p < seq.alignment.size(); ++p) {
    const auto& a = seq.alignment[p];
    if (a.kind == TokenKind::Concept) {
      if (node_pos[a.index] == kNoNode) node_pos[a.index] = p;
    } else {
      edge_pos[a.index] = p;
    }
  }
  auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
  std::size_t best = 0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const std::size_t r = edge_pos[e];
    if (r == kNoNode) continue;  // unreachable edge
    best = std::max(best, dist(r, node_pos[graph.edges[e].source]));
    best = std::max(best, dist(r, node_pos[graph.edges[e].target]));
  }
  return best;
}

std::string name_category(const std::string& concept_label) {
  static const std::set<std::string> person{"person", "man", "woman", "boy", "girl", "child"};
  static const std::set<std::string> organization{
      "organization", "company", "government-organization", "political-party", "team",
      "university", "school", "military", "criminal-organization", "research-institute",
      "newspaper", "publication"};
  static const std::set<std::string> location{
      "country", "city", "state", "province", "location", "continent", "world-region", "river",
      "mountain", "island", "lake", "sea", "ocean", "county", "local-region", "country-region",
      "city-district", "street", "road", "planet", "desert"};
  if (person.count(concept_label)) return "person_name";
  if (organization.count(concept_label)) return "organization_name";
  if (location.count(concept_label)) return "location_name";
  return "other_name";
}

void count_concepts(const AmrGraph& graph, std::unordered_map<std::string, std::size_t>& counts) {
  for (const auto& node : graph.nodes)
    if (!node.constant) ++counts[node.label];
}

AnonymizedGraph anonymize(const AmrGraph& graph, const AnonymizationPolicy& policy) {
  AnonymizedGraph result;
  AmrGraph work = graph;
  const auto adj = graph.out_edges();
  const auto indeg = graph.indegrees();
  std::vector<bool> drop_node(graph.nodes.size(), false);
  std::vector<bool> drop_edge(graph.edges.size(), false);

  std::map<std::string, std::size_t> counters;
  std::map<std::pair<std::string, std::string>, std::string> assigned;
  auto placeholder = [&](const std::string& category, const std::string& surface) {
    const auto key = std::make_pair(category, surface);
    if (auto it = assigned.find(key); it != assigned.end()) return it->second;
    std::string ph = category + "_" + std::to_string(counters[category]++);
    assigned.emplace(key, ph);
    result.map.push_back({ph, surface});
    return ph;
  };

  // Children of v that are plain constant leaves, if all of v's children are.
  auto constant_children = [&](std::size_t v, bool ops_only) -> std::optional<std::vector<std::size_t>> {
    std::vector<std::size_t> out;
    for (std::size_t e : adj[v]) {
      const std::size_t t = graph.edges[e].target;
      if (!graph.nodes[t].constant || indeg[t] != 1 || !adj[t].empty()) return std::nullopt;
      if (ops_only && !is_op_role(graph.edges[e].role)) return std::nullopt;
      out.push_back(e);
    }
    if (out.empty()) return std::nullopt;
    return out;
  };

  std::vector<std::size_t> order;
  walk(
      graph, [&](std::size_t v, std::size_t, bool first) { if (first) order.push_back(v); },
      [](std::size_t) {});

  for (std::size_t v : order) {
    if (drop_node[v]) continue;
    const auto& node = graph.nodes[v];

    if (policy.names && !node.constant) {
      bool named = false;
      for (std::size_t e : adj[v]) {
        const std::size_t n = graph.edges[e].target;
        if (lowercase(graph.edges[e].role) != ":name" || graph.nodes[n].label != "name" ||
            indeg[n] != 1)
          continue;
        const auto ops = constant_children(n, true);
        if (!ops) continue;
        std::string surface;
        for (std::size_t oe : *ops) {
          if (!surface.empty()) surface += " ";
          surface += graph.nodes[graph.edges[oe].target].label;
          drop_node[graph.edges[oe].target] = true;
          drop_edge[oe] = true;
        }
        drop_node[n] = true;
        drop_edge[e] = true;
        work.nodes[v].label = placeholder(name_category(node.label), surface);
        work.nodes[v].constant = false;
        named = true;
        break;
      }
      if (named) continue;
    }

    if (policy.dates && !node.constant && node.label == "date-entity") {
      if (const auto parts = constant_children(v, false)) {
        std::string surface;
        for (std::size_t e : *parts) {
          if (!surface.empty()) surface += " ";
          surface += graph.nodes[graph.edges[e].target].label;
          drop_node[graph.edges[e].target] = true;
          drop_edge[e] = true;
        }
        work.nodes[v].label = placeholder("date", surface);
        continue;
      }
    }

    if (policy.numbers && node.constant && is_number(node.label)) {
      work.nodes[v].label = placeholder("number", node.label);
      continue;
    }

    if (policy.rare_threshold > 0 && !node.constant) {
      const auto it = policy.concept_frequency.find(node.label);
      const std::size_t freq = it == policy.concept_frequency.end() ? 0 : it->second;
      if (freq < policy.rare_threshold)
        work.nodes[v].label = placeholder("rare", strip_sense(node.label));
    }
  }

  std::vector<std::size_t> remap(graph.nodes.size(), kNoNode);
  for (std::size_t i = 0; i < work.nodes.size(); ++i) {
    if (drop_node[i]) continue;
    remap[i] = result.graph.nodes.size();
    result.graph.nodes.push_back(work.nodes[i]);
  }
  for (std::size_t e = 0; e < work.edges.size(); ++e) {
    if (drop_edge[e]) continue;
    const auto& edge = work.edges[e];
    result.graph.edges.push_back({remap[edge.source], edge.role, remap[edge.target]});
  }
  result.graph.root = graph.root < remap.size() ? remap[graph.root] : kNoNode;
  return result;
}

std::vector<std::string> anonymize_sentence(const std::vector<std::string>& sentence,
                                            const AnonymizationMap& map) {
  struct Pattern {
    std::vector<std::string> words;
    std::string placeholder;
  };
  std::vector<Pattern> patterns;
  for (const auto& entry : map) {
    auto words = split_ws(lowercase(entry.original));
    if (!words.empty()) patterns.push_back({std::move(words), entry.placeholder});
  }
  // Longer surfaces first so "new york city" wins over "new york".
  std::stable_sort(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
    return a.words.size() > b.words.size();
  });

  std::vector<std::string> lower(sentence.size());
  std::transform(sentence.begin(), sentence.end(), lower.begin(), lowercase);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sentence.size();) {
    bool matched = false;
    for (const auto& p : patterns) {
      if (i + p.words.size() > sentence.size()) continue;
      if (std::equal(p.words.begin(), p.words.end(), lower.begin() + static_cast<long>(i))) {
        out.push_back(p.placeholder);
        i += p.words.size();
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(sentence[i++]);
  }
  return out;
}

std::vector<std::string> deanonymize(const std::vector<std::string>& sentence,
                                     const AnonymizationMap& map) {
  std::unordered_map<std::string, const std::string*> lookup;
  for (const auto& entry : map) lookup.emplace(entry.placeholder, &entry.original);
  std::vector<std::string> out;
  for (const auto& tok : sentence) {
    const auto it = lookup.find(tok);
    if (it == lookup.end()) {
      out.push_back(tok);
      continue;
    }
    auto words = split_ws(*it->second);
    if (words.empty()) words.push_back(*it->second);
    out.insert(out.end(), words.begin(), words.end());
  }
  return out;
}

}  // namespace amrgen
