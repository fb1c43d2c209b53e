#include <gtest/gtest.h>

#include <random>

#include "amrgen/contrastive.h"
#include "amrgen/corpus.h"
#include "amrgen/errors.h"
#include "amrgen/seq2seq.h"
#include "test_util.h"

namespace amrgen {
namespace {

const std::vector<std::string> kJohn = tokenize("John ate the pizza with his fingers .", false);

Annotation his_to_john(std::optional<PronounFeatures> features = std::nullopt) {
  Mention m;
  m.begin = 5;
  m.end = 6;
  m.antecedent_begin = 0;
  m.antecedent_end = 1;
  m.features = features;
  return {"a", {m}};
}

std::map<ContrastiveCategory, std::string> pairs_by_category(const std::vector<ContrastivePair>& pairs) {
  std::map<ContrastiveCategory, std::string> out;
  for (const auto& p : pairs) {
    EXPECT_FALSE(out.count(p.category));
    out[p.category] = join(p.contrastive);
  }
  return out;
}

TEST(ContrastivePairs, PronounExamples) {
  const auto pairs = make_contrastive_pairs({{"a", kJohn}}, {his_to_john()});
  ASSERT_EQ(pairs.size(), 4u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.id, "a");
    EXPECT_EQ(join(p.reference), "john ate the pizza with his fingers .");
  }
  const auto by = pairs_by_category(pairs);
  EXPECT_EQ(by.at(ContrastiveCategory::Antecedent), "john ate the pizza with john fingers .");
  EXPECT_EQ(by.at(ContrastiveCategory::PronounType), "john ate the pizza with him fingers .");
  EXPECT_EQ(by.at(ContrastiveCategory::Number), "john ate the pizza with their fingers .");
  EXPECT_EQ(by.at(ContrastiveCategory::Gender), "john ate the pizza with her fingers .");
}

TEST(ContrastivePairs, ExplicitFeaturesOverrideTheForm) {
  // Possessive "her": the object form is also "her", so the type swap falls through to "she".
  const auto ref = tokenize("mary lost her keys", false);
  Mention m{2, 3, 0, 1, PronounFeatures{3, false, Gender::Feminine, PronounCase::Possessive}};
  const auto by = pairs_by_category(make_contrastive_pairs({{"m", ref}}, {{"m", {m}}}));
  EXPECT_EQ(by.at(ContrastiveCategory::Gender), "mary lost his keys");
  EXPECT_EQ(by.at(ContrastiveCategory::PronounType), "mary lost she keys");
  EXPECT_EQ(by.at(ContrastiveCategory::Number), "mary lost their keys");
}

TEST(ContrastivePairs, PluralAndFirstPerson) {
  const auto ref = tokenize("they said we left", false);
  Mention they{0, 1, 0, 1, std::nullopt};
  Mention we{2, 3, 0, 1, std::nullopt};
  const auto pairs = make_contrastive_pairs({{"p", ref}}, {{"p", {they, we}}});
  std::vector<std::string> numbers, genders;
  for (const auto& p : pairs) {
    if (p.category == ContrastiveCategory::Number) numbers.push_back(join(p.contrastive));
    if (p.category == ContrastiveCategory::Gender) genders.push_back(join(p.contrastive));
  }
  EXPECT_EQ(numbers, (std::vector<std::string>{"he said we left", "they said i left"}));
  EXPECT_TRUE(genders.empty());
}

TEST(ContrastivePairs, IdenticalPairsAreDropped) {
  // The antecedent of "it" is the token "it" itself, so substitution changes nothing.
  const auto ref = tokenize("it rained and it stopped", false);
  Mention m{3, 4, 0, 1, std::nullopt};
  for (const auto& p : make_contrastive_pairs({{"r", ref}}, {{"r", {m}}})) {
    EXPECT_NE(p.category, ContrastiveCategory::Antecedent);
    EXPECT_NE(p.contrastive, p.reference);
  }
}

TEST(ContrastivePairs, BadSpansAreDataErrors) {
  Mention m{5, 9, 0, 1, std::nullopt};
  EXPECT_THROW(make_contrastive_pairs({{"a", kJohn}}, {{"a", {m}}}), DataError);
  Mention empty{3, 3, 0, 1, std::nullopt};
  EXPECT_THROW(make_contrastive_pairs({{"a", kJohn}}, {{"a", {empty}}}), DataError);
}

TEST(ContrastivePairs, UnknownPronounWithoutFeatures) {
  // "fingers" is no pronoun: only the antecedent substitution applies.
  Mention m{6, 7, 0, 1, std::nullopt};
  const auto pairs = make_contrastive_pairs({{"a", kJohn}}, {{"a", {m}}});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].category, ContrastiveCategory::Antecedent);
}

TEST(ContrastivePairs, ToyAnnotationsCoverEveryCategory) {
  const auto blocks = read_amr_blocks(testing::toy_data() / "train10");
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& b : blocks) refs[b.id] = tokenize(b.sentence);
  const auto annotations = read_annotations(testing::toy_data() / "train10" / "coref.jsonl");
  EXPECT_EQ(annotations.size(), 10u);
  const auto pairs = make_contrastive_pairs(refs, annotations);
  std::map<ContrastiveCategory, std::size_t> counts;
  for (const auto& p : pairs) ++counts[p.category];
  for (auto c : all_contrastive_categories()) EXPECT_GE(counts[c], 5u) << to_string(c);
}

TEST(ContrastivePairs, JsonRoundTrip) {
  const auto pairs = make_contrastive_pairs({{"a", kJohn}}, {his_to_john()});
  const auto dir = testing::fresh_dir("pairs");
  write_pairs(dir / "p.jsonl", pairs);
  const auto back = read_pairs(dir / "p.jsonl");
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].id, pairs[i].id);
    EXPECT_EQ(back[i].reference, pairs[i].reference);
    EXPECT_EQ(back[i].contrastive, pairs[i].contrastive);
    EXPECT_EQ(back[i].category, pairs[i].category);
  }
  EXPECT_EQ(pair_from_json(R"({"id":"x","reference":"a b","contrastive":"a c","category":"type"})").category,
            ContrastiveCategory::PronounType);
  EXPECT_THROW(pair_from_json(R"({"id":"x","reference":"a b","contrastive":"a c","category":"tense"})"),
               DataError);
  EXPECT_THROW(pair_from_json("not json"), DataError);
}

TEST(Pronouns, TableIsConsistent) {
  for (const std::string form : {"i", "me", "my", "he", "him", "his", "she", "it", "its", "we", "us",
                                 "our", "they", "them", "their", "you", "your"}) {
    const auto f = pronoun_features(form);
    ASSERT_TRUE(f.has_value()) << form;
    EXPECT_EQ(pronoun_form(*f), form);
  }
  EXPECT_EQ(pronoun_features("her")->pronoun_case, PronounCase::Object);
  EXPECT_FALSE(pronoun_features("pizza").has_value());
  EXPECT_EQ(pronoun_form({3, false, Gender::Feminine, PronounCase::Possessive}), "her");
}

TEST(ContrastiveEval, TiesAreLosses) {
  const std::vector<ContrastivePair> pairs = {{"a", {"x"}, {"x"}, ContrastiveCategory::Number}};
  const auto r = contrastive_eval(pairs, [](const std::string&, const std::vector<std::string>&) {
    return std::optional<double>(-1.0);
  });
  EXPECT_EQ(r.overall.total, 1u);
  EXPECT_EQ(r.overall.wins, 0u);
}

TEST(ContrastiveEval, UnknownIdsAreSkipped) {
  const std::vector<ContrastivePair> pairs = {{"a", {"x"}, {"y"}, ContrastiveCategory::Number},
                                              {"zz", {"x"}, {"y"}, ContrastiveCategory::Number}};
  const auto r = contrastive_eval(pairs, [](const std::string& id, const std::vector<std::string>& t)
                                             -> std::optional<double> {
    if (id == "zz") return std::nullopt;
    return t[0] == "x" ? -1.0 : -2.0;
  });
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.overall.total, 1u);
  EXPECT_EQ(r.overall.wins, 1u);
  EXPECT_DOUBLE_EQ(r.overall.accuracy(), 100.0);
}

TEST(ContrastiveEval, CategoriesPartitionTheTotal) {
  std::mt19937_64 rng(4);
  std::vector<ContrastivePair> pairs;
  for (int i = 0; i < 300; ++i)
    pairs.push_back({"e", {"r" + std::to_string(i)}, {"c" + std::to_string(i)},
                     all_contrastive_categories()[rng() % 4]});
  const auto r = contrastive_eval(pairs, [&](const std::string&, const std::vector<std::string>& t) {
    return std::optional<double>(static_cast<double>(std::hash<std::string>{}(t[0]) % 1000));
  });
  std::size_t wins = 0, total = 0;
  for (const auto& [c, acc] : r.categories) {
    wins += acc.wins;
    total += acc.total;
  }
  EXPECT_EQ(total, 300u);
  EXPECT_EQ(r.overall.total, total);
  EXPECT_EQ(r.overall.wins, wins);
  const std::string table = render_contrastive({{"M", r}});
  EXPECT_NE(table.find("M"), std::string::npos);
}

// Each pair's roles are assigned by a coin flip, so an untrained model has no
// reason to prefer the reference.
TEST(ContrastiveEval, RandomModelIsAtChance) {
  PreprocessOptions opts;
  opts.rare_threshold = 0;
  const auto records = preprocess(read_amr_blocks(testing::toy_data() / "train10"), opts).records;
  TrainConfig c;
  c.model.encoder.kind = EncoderKind::GCNSeq;
  c.model.encoder.repr = InputRepr::Graph;
  c.model.encoder.embedding_dim = 16;
  c.model.encoder.hidden_dim = 16;
  c.model.target_embedding_dim = 16;
  c.model.decoder_hidden_dim = 16;
  c.target_min_freq = 1;
  Vocab src = build_source_vocab(records, c);
  Vocab tgt = build_target_vocab(records, c);
  c.model.encoder.src_vocab_size = src.size();
  const Seq2Seq model(c.model, std::move(src), std::move(tgt), 77);

  std::map<std::string, Example> examples;
  for (const auto& r : records) {
    Example ex = make_example(r, InputRepr::Graph);
    model.index(ex);
    examples.emplace(r.id, std::move(ex));
  }
  const std::vector<std::string> pronouns = {"he", "she", "it", "they", "his", "her", "its", "their"};
  std::mt19937_64 rng(2024);
  std::vector<ContrastivePair> pairs;
  while (pairs.size() < 1000) {
    const Record& r = records[rng() % records.size()];
    const std::size_t pos = rng() % r.reference.size();
    std::vector<std::string> a = r.reference, b = r.reference;
    a[pos] = pronouns[rng() % pronouns.size()];
    b[pos] = pronouns[rng() % pronouns.size()];
    if (a == b) continue;
    if (rng() % 2) std::swap(a, b);
    pairs.push_back({r.id, a, b, all_contrastive_categories()[pairs.size() % 4]});
  }
  const auto result = contrastive_eval(pairs, [&](const std::string& id, const std::vector<std::string>& t) {
    return std::optional<double>(model.score(examples.at(id), t));
  });
  EXPECT_EQ(result.overall.total, 1000u);
  EXPECT_NEAR(result.overall.accuracy(), 50.0, 5.0);
}

}  // namespace
}  // namespace amrgen
