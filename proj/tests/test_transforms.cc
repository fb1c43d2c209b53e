#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "amrgen/corpus.h"
#include "amrgen/penman.h"
#include "amrgen/transforms.h"
#include "test_util.h"

namespace amrgen {
namespace {

using testing::kFigure1;

const std::vector<std::string> kFigure1Tokens = {"eat-01", ":arg0",    "he",     ":arg1", "pizza",
                                                 ":instrument", "finger", ":part-of", "he"};

TEST(Linearize, Figure1) {
  const AmrGraph g = parse_penman(kFigure1);
  const TokenSequence seq = linearize(g);
  EXPECT_EQ(seq.tokens, kFigure1Tokens);
  ASSERT_EQ(seq.alignment.size(), 9u);
  // Both `he` tokens come from the same node.
  EXPECT_EQ(seq.alignment[2], seq.alignment[8]);
  EXPECT_EQ(seq.alignment[2].kind, TokenKind::Concept);
  EXPECT_EQ(seq.alignment[7], (TokenOrigin{TokenKind::Relation, 3}));
  EXPECT_TRUE(seq.anonymization_map.empty());
}

TEST(Linearize, LengthIsOnePlusTwiceTheEdges) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const AmrGraph g = testing::random_graph(rng, 1 + rng() % 12, rng() % 5);
    const TokenSequence seq = linearize(g);
    EXPECT_EQ(seq.size(), 1 + 2 * g.edge_count());
    for (std::size_t p = 0; p < seq.size(); ++p) {
      const TokenOrigin& o = seq.alignment[p];
      if (o.kind == TokenKind::Concept)
        EXPECT_EQ(seq.tokens[p], node_token(g.nodes[o.index]));
      else
        EXPECT_EQ(seq.tokens[p], g.edges[o.index].role);
    }
  }
}

TEST(Levi, Figure1) {
  const AmrGraph g = parse_penman(kFigure1);
  const LeviGraph levi = to_levi(g);
  EXPECT_EQ(levi.nodes.size(), 8u);
  EXPECT_EQ(levi.edges.size(), 8u);
  std::multiset<std::pair<std::string, std::string>> edges;
  for (const auto& [a, b] : levi.edges) edges.insert({levi.nodes[a].token, levi.nodes[b].token});
  const std::multiset<std::pair<std::string, std::string>> expected = {
      {"eat-01", ":arg0"},      {":arg0", "he"},        {"eat-01", ":arg1"},  {":arg1", "pizza"},
      {"eat-01", ":instrument"}, {":instrument", "finger"}, {"finger", ":part-of"}, {":part-of", "he"}};
  EXPECT_EQ(edges, expected);

  // Both paths end in the same `he` node.
  std::set<std::size_t> he_targets;
  for (const auto& [a, b] : levi.edges)
    if (levi.nodes[b].token == "he") he_targets.insert(b);
  EXPECT_EQ(he_targets.size(), 1u);
  EXPECT_EQ(levi.nodes[levi.root].token, "eat-01");
}

TEST(Levi, StructuralInvariants) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const AmrGraph g = testing::random_graph(rng, 1 + rng() % 12, rng() % 5);
    const LeviGraph levi = to_levi(g);
    ASSERT_EQ(levi.nodes.size(), g.node_count() + g.edge_count());
    ASSERT_EQ(levi.edges.size(), 2 * g.edge_count());
    std::vector<std::size_t> in(levi.nodes.size()), out(levi.nodes.size());
    for (const auto& [a, b] : levi.edges) {
      EXPECT_NE(levi.nodes[a].kind, levi.nodes[b].kind);
      ++out[a];
      ++in[b];
    }
    for (std::size_t v = 0; v < levi.nodes.size(); ++v) {
      if (levi.nodes[v].kind == LeviKind::Relation) {
        EXPECT_EQ(in[v], 1u);
        EXPECT_EQ(out[v], 1u);
        const AmrEdge& e = g.edges[levi.nodes[v].origin];
        EXPECT_EQ(levi.nodes[v].token, e.role);
        EXPECT_EQ(v, g.node_count() + levi.nodes[v].origin);
      } else {
        EXPECT_EQ(v, levi.nodes[v].origin);
      }
    }
    const auto indeg = g.indegrees();
    for (std::size_t v = 0; v < g.node_count(); ++v) EXPECT_EQ(in[v], indeg[v]);
  }
}

TEST(Tree, Figure1DuplicatesHe) {
  const AmrGraph g = parse_penman(kFigure1);
  const AmrTree tree = to_tree(g);
  std::vector<std::string> labels;
  for (const auto& n : tree.graph.nodes) labels.push_back(n.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"eat-01", "he", "pizza", "finger", "he"}));
  EXPECT_EQ(tree.graph.edge_count(), 4u);
  EXPECT_EQ(reentrancy_count(tree.graph), 0u);
  const std::size_t h = *g.find("h");
  EXPECT_EQ(tree.copy_of[1], h);
  EXPECT_EQ(tree.copy_of[4], h);
  // The copy hangs under finger via :part-of.
  const AmrEdge& last = tree.graph.edges[3];
  EXPECT_EQ(tree.graph.nodes[last.source].label, "finger");
  EXPECT_EQ(last.role, ":part-of");
  EXPECT_EQ(last.target, 4u);
  EXPECT_TRUE(validate(tree.graph).empty());
}

TEST(Tree, TwoCycleIsBroken) {
  // a -> b -> a: a, b and a leaf copy of a, enumerated by hand.
  const AmrTree tree = to_tree(parse_penman("(a / a1 :r (b / b1 :s a))"));
  ASSERT_EQ(tree.graph.node_count(), 3u);
  EXPECT_EQ(tree.graph.nodes[2].label, "a1");
  EXPECT_EQ(tree.copy_of, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(tree.graph.edges[1].source, 1u);
  EXPECT_EQ(tree.graph.edges[1].target, 2u);
  EXPECT_TRUE(validate(tree.graph).empty());
}

TEST(Tree, TreeInputIsUnchanged) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const AmrGraph g = testing::random_graph(rng, 1 + rng() % 12, 0);
    const AmrTree tree = to_tree(g);
    ASSERT_EQ(tree.graph.node_count(), g.node_count());
    std::multiset<std::tuple<std::size_t, std::string, std::size_t>> a, b;
    for (const auto& e : g.edges) a.insert({e.source, e.role, e.target});
    for (const auto& e : tree.graph.edges) b.insert({tree.copy_of[e.source], e.role, tree.copy_of[e.target]});
    EXPECT_EQ(a, b);
    std::set<std::size_t> originals(tree.copy_of.begin(), tree.copy_of.end());
    EXPECT_EQ(originals.size(), g.node_count());
    for (std::size_t v = 0; v < tree.graph.node_count(); ++v)
      EXPECT_EQ(tree.graph.nodes[v].label, g.nodes[tree.copy_of[v]].label);
  }
}

TEST(Tree, InvariantsOnDags) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const AmrGraph g = testing::random_graph(rng, 2 + rng() % 12, rng() % 6);
    const AmrTree tree = to_tree(g);
    EXPECT_EQ(reentrancy_count(tree.graph), 0u);
    EXPECT_EQ(tree.graph.node_count(), tree.graph.edge_count() + 1);
    EXPECT_TRUE(validate(tree.graph).empty());
    // Collapsing copies gives back every source edge exactly once.
    ASSERT_EQ(tree.edge_origin.size(), g.edge_count());
    std::vector<std::size_t> origins = tree.edge_origin;
    std::sort(origins.begin(), origins.end());
    for (std::size_t k = 0; k < origins.size(); ++k) EXPECT_EQ(origins[k], k);
    for (std::size_t k = 0; k < tree.graph.edge_count(); ++k) {
      const AmrEdge& te = tree.graph.edges[k];
      const AmrEdge& se = g.edges[tree.edge_origin[k]];
      EXPECT_EQ(tree.copy_of[te.source], se.source);
      EXPECT_EQ(tree.copy_of[te.target], se.target);
      EXPECT_EQ(te.role, se.role);
    }
    // One copy per incoming edge (plus the root's own occurrence).
    const auto indeg = g.indegrees();
    std::vector<std::size_t> copies(g.node_count());
    for (auto c : tree.copy_of) ++copies[c];
    for (std::size_t v = 0; v < g.node_count(); ++v)
      EXPECT_EQ(copies[v], indeg[v] + (v == g.root ? 1 : 0));
    // Tree nodes follow the linearization's concept tokens.
    const TokenSequence seq = linearize(g);
    std::vector<std::string> concept_tokens;
    for (std::size_t p = 0; p < seq.size(); ++p)
      if (seq.alignment[p].kind == TokenKind::Concept) concept_tokens.push_back(seq.tokens[p]);
    std::vector<std::string> tree_tokens;
    for (const auto& n : tree.graph.nodes) tree_tokens.push_back(node_token(n));
    EXPECT_EQ(tree_tokens, concept_tokens);
    EXPECT_EQ(linearize(tree.graph).tokens, seq.tokens);
  }
}

TEST(DependencyLength, Figure1IsFive) {
  const AmrGraph g = parse_penman(kFigure1);
  EXPECT_EQ(max_dependency_length(g), 5u);
  // The eat-01 to :instrument dependency spans five positions.
  const auto& tokens = linearize(g).tokens;
  const auto eat = std::find(tokens.begin(), tokens.end(), "eat-01") - tokens.begin();
  const auto instr = std::find(tokens.begin(), tokens.end(), ":instrument") - tokens.begin();
  EXPECT_EQ(instr - eat, 5);
}

TEST(DependencyLength, HandCountedCases) {
  EXPECT_EQ(max_dependency_length(parse_penman("(a / alpha)")), 0u);
  EXPECT_EQ(max_dependency_length(parse_penman("(a / a1 :x (b / b1 :y (c / c1)))")), 1u);
  // a :x b :y c :z d: the edge a-:z spans positions 0..5.
  EXPECT_EQ(max_dependency_length(parse_penman("(a / a1 :x (b / b1) :y (c / c1) :z (d / d1))")), 5u);
  // a :x ( b :y ( c :w d ) ) :z e: a at 0, :z at 7.
  EXPECT_EQ(max_dependency_length(parse_penman("(a / a1 :x (b / b1 :y (c / c1 :w (d / d1))) :z (e / e1))")),
            7u);
}

// Each edge contributes |pos(source) - pos(relation)| and
// |pos(relation) - pos(target)|, nodes at first occurrence.
TEST(DependencyLength, MatchesPositionOracle) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const AmrGraph g = testing::random_graph(rng, 1 + rng() % 15, rng() % 5);
    const TokenSequence seq = linearize(g);
    std::map<std::size_t, long> node_pos, edge_pos;
    for (std::size_t p = 0; p < seq.size(); ++p) {
      const auto& o = seq.alignment[p];
      if (o.kind == TokenKind::Concept)
        node_pos.emplace(o.index, static_cast<long>(p));
      else
        edge_pos.emplace(o.index, static_cast<long>(p));
    }
    long best = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      best = std::max(best, std::abs(edge_pos[e] - node_pos[g.edges[e].source]));
      best = std::max(best, std::abs(edge_pos[e] - node_pos[g.edges[e].target]));
    }
    EXPECT_EQ(max_dependency_length(g), static_cast<std::size_t>(best));
    EXPECT_EQ(compute_stats(g).max_dependency_length, static_cast<std::size_t>(best));
  }
}

TEST(Anonymize, NamesDatesAndNumbers) {
  const AmrGraph g = parse_penman(
      R"((s / say-01 :ARG0 (p / person :name (n / name :op1 "John" :op2 "Smith"))
          :ARG1 (v / visit-01 :ARG0 p :ARG1 (c / city :name (n2 / name :op1 "Paris"))
                 :time (d / date-entity :year 2015 :month 3) :frequency 4)))");
  AnonymizationPolicy policy;
  policy.rare_threshold = 0;
  const AnonymizedGraph a = anonymize(g, policy);
  const auto tokens = linearize(a.graph).tokens;
  EXPECT_NE(std::find(tokens.begin(), tokens.end(), "person_name_0"), tokens.end());
  EXPECT_NE(std::find(tokens.begin(), tokens.end(), "location_name_0"), tokens.end());
  EXPECT_EQ(std::find(tokens.begin(), tokens.end(), "John"), tokens.end());
  EXPECT_EQ(std::find(tokens.begin(), tokens.end(), "2015"), tokens.end());
  EXPECT_EQ(std::find(tokens.begin(), tokens.end(), "4"), tokens.end());
  std::map<std::string, std::string> m;
  for (const auto& e : a.map) m[e.placeholder] = e.original;
  EXPECT_EQ(m.at("person_name_0"), "John Smith");
  EXPECT_EQ(m.at("location_name_0"), "Paris");
  // The reentrant person keeps its reentrancy through anonymization.
  EXPECT_EQ(reentrancy_count(a.graph), 1u);
  EXPECT_TRUE(validate(a.graph).empty());
}

TEST(Anonymize, RareConcepts) {
  const AmrGraph g = parse_penman("(e / eat-01 :ARG0 (a / aardvark) :ARG1 (p / pizza))");
  AnonymizationPolicy policy;
  policy.concept_frequency = {{"eat-01", 10}, {"aardvark", 1}, {"pizza", 7}};
  policy.rare_threshold = 5;
  const AnonymizedGraph a = anonymize(g, policy);
  const auto tokens = linearize(a.graph).tokens;
  EXPECT_EQ(tokens, (std::vector<std::string>{"eat-01", ":ARG0", "rare_0", ":ARG1", "pizza"}));
  ASSERT_EQ(a.map.size(), 1u);
  EXPECT_EQ(a.map[0], (AnonymizationEntry{"rare_0", "aardvark"}));
}

TEST(Anonymize, NothingToReplace) {
  const AmrGraph g = parse_penman(kFigure1);
  AnonymizationPolicy policy;
  policy.rare_threshold = 0;
  const AnonymizedGraph a = anonymize(g, policy);
  EXPECT_TRUE(a.map.empty());
  EXPECT_EQ(serialize_penman(a.graph), serialize_penman(g));
}

TEST(Anonymize, SentenceRoundTripOnTheToyCorpus) {
  PreprocessOptions opts;
  const auto blocks = read_amr_blocks(testing::toy_data());
  const auto result = preprocess(blocks, opts);
  ASSERT_GE(result.records.size(), 60u);
  std::size_t substituted = 0;
  for (const auto& r : result.records) {
    const auto anon = anonymize_sentence(r.reference, r.anon_map);
    EXPECT_EQ(anon, r.sentence) << r.id;
    const auto back = deanonymize(anon, r.anon_map);
    EXPECT_EQ(tokenize(join(back)), r.reference) << r.id;
    substituted += anon != r.reference;
  }
  EXPECT_GE(substituted, 10u);
}

TEST(Anonymize, UnknownPlaceholdersPassThrough) {
  const AnonymizationMap map = {{"person_name_0", "Mary"}};
  EXPECT_EQ(deanonymize({"person_name_0", "met", "person_name_1"}, map),
            (std::vector<std::string>{"Mary", "met", "person_name_1"}));
}

}  // namespace
}  // namespace amrgen
