#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <json.hpp>

#include "amrgen/corpus.h"
#include "amrgen/errors.h"
#include "amrgen/eval.h"
#include "test_util.h"

namespace amrgen {
namespace {

std::vector<Sentence> read_lines(const std::filesystem::path& path) {
  std::vector<Sentence> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) out.push_back(tokenize(line));
  return out;
}

// hyp "the cat sat on mat ." against ref "the cat sat on the mat .", counted by hand:
// 1-grams 6/6, 2-grams 4/5 (on-mat misses), 3-grams 2/4, 4-grams 1/3; c = 6, r = 7.
TEST(Bleu, HandCountedSentence) {
  const Sentence hyp = tokenize("the cat sat on mat .");
  const Sentence ref = tokenize("the cat sat on the mat .");
  const BleuStats s = bleu_stats(hyp, ref);
  EXPECT_EQ(s.matches, (std::array<std::size_t, 4>{6, 4, 2, 1}));
  EXPECT_EQ(s.totals, (std::array<std::size_t, 4>{6, 5, 4, 3}));
  EXPECT_EQ(s.hyp_length, 6u);
  EXPECT_EQ(s.ref_length, 7u);
  // exp(1 - 7/6) * (1 * 4/5 * 2/4 * 1/3)^(1/4)
  EXPECT_NEAR(corpus_bleu({hyp}, {ref}), 51.1508, 5e-5);
  // Smoothed: p1 = 6/6, p2 = 5/6, p3 = 3/5, p4 = 2/4.
  EXPECT_NEAR(sentence_bleu(hyp, ref), 100 * std::exp(1.0 - 7.0 / 6.0) * std::pow(5.0 / 6 * 3.0 / 5 * 0.5, 0.25),
              1e-9);
}

TEST(Bleu, ClipsRepeatedNgrams) {
  const BleuStats s = bleu_stats(tokenize("the the the the"), tokenize("the cat"));
  EXPECT_EQ(s.matches[0], 1u);
  EXPECT_EQ(s.totals[0], 4u);
}

TEST(Bleu, MatchesOracleFixture) {
  const auto dir = testing::test_data() / "bleu";
  const auto hyp = read_lines(dir / "hyp.txt");
  const auto ref = read_lines(dir / "ref.txt");
  ASSERT_EQ(hyp.size(), 5u);
  const auto expected = nlohmann::json::parse(read_file(dir / "expected.json"));
  const double bleu = corpus_bleu(hyp, ref);
  EXPECT_NEAR(bleu, expected["corpus_bleu"].get<double>(), 5e-5);
}

TEST(Bleu, IdenticalInputIsOneHundred) {
  const auto ref = read_lines(testing::test_data() / "bleu" / "ref.txt");
  EXPECT_DOUBLE_EQ(corpus_bleu(ref, ref), 100.0);
  for (const auto& r : ref) EXPECT_DOUBLE_EQ(sentence_bleu(r, r), 100.0);
  EXPECT_DOUBLE_EQ(sentence_bleu(tokenize("hi"), tokenize("hi")), 100.0);
}

TEST(Bleu, CaseInsensitive) {
  EXPECT_DOUBLE_EQ(corpus_bleu({{"John", "Left", "The", "City"}}, {{"john", "left", "the", "city"}}), 100.0);
}

TEST(Bleu, DegenerateCases) {
  EXPECT_EQ(corpus_bleu({tokenize("a b c d")}, {tokenize("w x y z")}), 0.0);
  EXPECT_EQ(sentence_bleu(tokenize("a b c d"), tokenize("w x y z")), 0.0);
  EXPECT_EQ(corpus_bleu({{}}, {tokenize("a b")}), 0.0);
  EXPECT_THROW(corpus_bleu({{"a"}}, {}), DataError);
}

// A prefix of k tokens of an L-token reference matches every n-gram, so its
// smoothed score is 100 * exp(1 - L / k), increasing in k.
TEST(Bleu, SentencePrefixesFollowTheBrevityPenalty) {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 100; ++c) {
    const std::size_t len = 2 + rng() % 15;
    Sentence ref;
    for (std::size_t i = 0; i < len; ++i) ref.push_back("w" + std::to_string(rng() % 6));
    double last = 0.0;
    for (std::size_t k = 1; k <= len; ++k) {
      const Sentence hyp(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(k));
      const double s = sentence_bleu(hyp, ref);
      EXPECT_NEAR(s, 100 * std::exp(1.0 - static_cast<double>(len) / k), 1e-9);
      EXPECT_GT(s, last);
      last = s;
    }
  }
}

TEST(Bleu, CorpusStatsAreSummed) {
  const auto hyp = read_lines(testing::test_data() / "bleu" / "hyp.txt");
  const auto ref = read_lines(testing::test_data() / "bleu" / "ref.txt");
  BleuStats total;
  for (std::size_t i = 0; i < hyp.size(); ++i) total += bleu_stats(hyp[i], ref[i]);
  EXPECT_DOUBLE_EQ(bleu_from_stats(total), corpus_bleu(hyp, ref));
}

TEST(Buckets, DefaultSchemes) {
  std::vector<std::string> labels;
  for (const auto& b : default_buckets(BucketBy::Reentrancies)) labels.push_back(b.label());
  EXPECT_EQ(labels, (std::vector<std::string>{"0", "1-5", "6-20"}));
  labels.clear();
  for (const auto& b : default_buckets(BucketBy::DependencyLength)) labels.push_back(b.label());
  EXPECT_EQ(labels, (std::vector<std::string>{"0-10", "11-50", "51-250"}));
}

TEST(Buckets, Parsing) {
  EXPECT_EQ(parse_buckets("0,1-5,6-20"), default_buckets(BucketBy::Reentrancies));
  EXPECT_EQ(parse_buckets(" 0-10 , 11-50,51-250 "), default_buckets(BucketBy::DependencyLength));
  EXPECT_THROW(parse_buckets("0,0-3"), ConfigError);
  EXPECT_THROW(parse_buckets("5-2"), ConfigError);
  EXPECT_THROW(parse_buckets("a-b"), ConfigError);
  EXPECT_THROW(parse_buckets(""), ConfigError);
  EXPECT_EQ(parse_bucket_by("max_dep_len"), BucketBy::DependencyLength);
  EXPECT_THROW(parse_bucket_by("depth"), ConfigError);
}

std::vector<GraphStats> random_stats(std::mt19937_64& rng, std::size_t n) {
  std::vector<GraphStats> out(n);
  for (auto& s : out) {
    s.reentrancy_count = rng() % 3 == 0 ? 0 : rng() % 25;
    s.max_dependency_length = rng() % 300;
  }
  return out;
}

// Brute-force group-by for one bucket: mean of each system's scores over the
// examples whose statistic falls in [lo, hi].
TEST(BucketReport, MatchesBruteForceGroupBy) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> score(0, 100);
  for (int trial = 0; trial < 20; ++trial) {
    const auto stats = random_stats(rng, 200);
    std::vector<SystemScores> systems = {{"GCNSeq", {}}, {"Seq", {}}, {"TreeLSTMSeq", {}}};
    for (auto& s : systems)
      for (std::size_t i = 0; i < stats.size(); ++i) s.scores.push_back(score(rng));

    for (BucketBy by : {BucketBy::Reentrancies, BucketBy::DependencyLength}) {
      const auto buckets = default_buckets(by);
      const BucketTable table = bucket_report(stats, systems, by, buckets);
      EXPECT_EQ(table.baseline, "Seq");
      EXPECT_EQ(table.systems, (std::vector<std::string>{"GCNSeq", "TreeLSTMSeq"}));
      ASSERT_EQ(table.rows.size(), buckets.size());

      std::size_t filtered = 0, unbucketed = 0;
      for (std::size_t i = 0; i < stats.size(); ++i) {
        if (by == BucketBy::DependencyLength && stats[i].reentrancy_count > 0) {
          ++filtered;
          continue;
        }
        const std::size_t v =
            by == BucketBy::Reentrancies ? stats[i].reentrancy_count : stats[i].max_dependency_length;
        bool any = false;
        for (const auto& b : buckets) any |= v >= b.lo && v <= b.hi;
        if (!any) ++unbucketed;
      }
      EXPECT_EQ(table.filtered, filtered);
      EXPECT_EQ(table.unbucketed, unbucketed);

      for (std::size_t b = 0; b < buckets.size(); ++b) {
        std::map<std::string, double> sum;
        std::size_t count = 0;
        for (std::size_t i = 0; i < stats.size(); ++i) {
          if (by == BucketBy::DependencyLength && stats[i].reentrancy_count > 0) continue;
          const std::size_t v =
              by == BucketBy::Reentrancies ? stats[i].reentrancy_count : stats[i].max_dependency_length;
          if (v < buckets[b].lo || v > buckets[b].hi) continue;
          ++count;
          for (const auto& s : systems) sum[s.name] += s.scores[i];
        }
        const BucketRow& row = table.rows[b];
        EXPECT_EQ(row.label, buckets[b].label());
        ASSERT_EQ(row.count, count);
        if (count == 0) {
          EXPECT_FALSE(row.baseline.has_value());
          continue;
        }
        const double base = sum["Seq"] / count;
        ASSERT_TRUE(row.baseline.has_value());
        EXPECT_NEAR(*row.baseline, base, 1e-9);
        ASSERT_EQ(row.deltas.size(), 2u);
        EXPECT_NEAR(*row.deltas[0], sum["GCNSeq"] / count - base, 1e-9);
        EXPECT_NEAR(*row.deltas[1], sum["TreeLSTMSeq"] / count - base, 1e-9);
      }
    }
  }
}

TEST(BucketReport, SystemAgainstItselfHasZeroDeltas) {
  std::mt19937_64 rng(3);
  const auto stats = random_stats(rng, 50);
  SystemScores seq{"Seq", {}};
  for (std::size_t i = 0; i < stats.size(); ++i) seq.scores.push_back(static_cast<double>(rng() % 100));
  SystemScores copy = seq;
  copy.name = "Copy";
  const BucketTable table =
      bucket_report(stats, {seq, copy}, BucketBy::Reentrancies, default_buckets(BucketBy::Reentrancies));
  for (const auto& row : table.rows)
    if (row.count) EXPECT_EQ(*row.deltas[0], 0.0);
}

TEST(BucketReport, BaselineFallsBackToFirstSystem) {
  const std::vector<GraphStats> stats(3);
  const BucketTable table = bucket_report(stats, {{"A", {1, 2, 3}}, {"B", {2, 3, 4}}},
                                          BucketBy::Reentrancies, default_buckets(BucketBy::Reentrancies));
  EXPECT_EQ(table.baseline, "A");
  EXPECT_NEAR(*table.rows[0].deltas[0], 1.0, 1e-12);
}

TEST(BucketReport, MisalignedScoresAreADataError) {
  const std::vector<GraphStats> stats(3);
  EXPECT_THROW(bucket_report(stats, {{"Seq", {1, 2}}}, BucketBy::Reentrancies,
                             default_buckets(BucketBy::Reentrancies)),
               DataError);
}

TEST(BucketReport, RenderingShowsSignedDeltas) {
  std::vector<GraphStats> stats(2);
  stats[1].reentrancy_count = 2;
  const BucketTable table = bucket_report(stats, {{"Seq", {10, 20}}, {"GCNSeq", {12, 15}}},
                                          BucketBy::Reentrancies, default_buckets(BucketBy::Reentrancies));
  const std::string text = render_table(table);
  EXPECT_NE(text.find("+2.00"), std::string::npos) << text;
  EXPECT_NE(text.find("-5.00"), std::string::npos) << text;
  EXPECT_NE(text.find("6-20"), std::string::npos) << text;
  const auto j = to_json(table);
  EXPECT_EQ(j["baseline"], "Seq");
  EXPECT_EQ(j["rows"].size(), 3u);
}

TEST(Summary, CorpusAndSentenceMeans) {
  const auto hyp = read_lines(testing::test_data() / "bleu" / "hyp.txt");
  const auto ref = read_lines(testing::test_data() / "bleu" / "ref.txt");
  const SystemSummary s = summarize("X", hyp, ref);
  EXPECT_EQ(s.count, 5u);
  EXPECT_DOUBLE_EQ(s.bleu, corpus_bleu(hyp, ref));
  double mean = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) mean += sentence_bleu(hyp[i], ref[i]);
  EXPECT_NEAR(s.sentence_mean, mean / 5, 1e-12);
}

}  // namespace
}  // namespace amrgen
