#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amrgen/amr.h"

namespace amrgen {

using Sentence = std::vector<std::string>;

// Clipped n-gram matches and hypothesis n-gram totals for n = 1..4.
struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

// Tokens are compared lowercased.
BleuStats bleu_stats(const Sentence& hypothesis, const Sentence& reference);
double bleu_from_stats(const BleuStats& stats);

// Corpus-level 4-gram BLEU in percent with brevity penalty. Throws DataError
// when the lists differ in length.
double corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references);

// Sentence-level BLEU in percent ("sBLEU"): unigram precision unsmoothed,
// higher orders smoothed as (m + 1) / (t + 1). 0 when no unigram matches.
double sentence_bleu(const Sentence& hypothesis, const Sentence& reference);

enum class BucketBy { Reentrancies, DependencyLength };

std::string to_string(BucketBy by);
BucketBy parse_bucket_by(const std::string& name);

// Inclusive range.
struct Bucket {
  std::size_t lo = 0;
  std::size_t hi = 0;

  std::string label() const;
  bool contains(std::size_t v) const { return v >= lo && v <= hi; }
  bool operator==(const Bucket&) const = default;
};

// 0 / 1-5 / 6-20 reentrancies; 0-10 / 11-50 / 51-250 dependency lengths.
std::vector<Bucket> default_buckets(BucketBy by);
// "0,1-5,6-20" -> buckets. Throws ConfigError on malformed or overlapping ranges.
std::vector<Bucket> parse_buckets(const std::string& spec);

struct SystemScores {
  std::string name;
  std::vector<double> scores;  // one per example, aligned with the stats list
};

struct BucketRow {
  std::string label;
  std::size_t count = 0;
  std::optional<double> baseline;             // baseline mean over the bucket
  std::vector<std::optional<double>> deltas;  // system mean - baseline mean
};

struct BucketTable {
  BucketBy by = BucketBy::Reentrancies;
  std::string metric = "sBLEU";
  std::string baseline;
  std::vector<std::string> systems;  // every system other than the baseline
  std::vector<BucketRow> rows;
  std::size_t filtered = 0;    // reentrant examples dropped from a dependency analysis
  std::size_t unbucketed = 0;  // values outside every bucket
};

// Groups examples by the chosen statistic and reports, per bucket, the
// baseline's mean score and every other system's difference from it. The
// baseline is the system named `baseline`, or the first one if absent. A
// dependency-length report leaves out examples with reentrancies.
BucketTable bucket_report(const std::vector<GraphStats>& stats,
                          const std::vector<SystemScores>& systems, BucketBy by,
                          const std::vector<Bucket>& buckets, const std::string& baseline = "Seq");

nlohmann::json to_json(const BucketTable& table);
std::string render_table(const BucketTable& table);

struct SystemSummary {
  std::string name;
  std::size_t count = 0;
  double bleu = 0.0;
  double sentence_mean = 0.0;  // mean sBLEU
};

SystemSummary summarize(const std::string& name, const std::vector<Sentence>& hypotheses,
                        const std::vector<Sentence>& references);
nlohmann::json to_json(const SystemSummary& summary);
std::string render_summary(const std::vector<SystemSummary>& rows);

// Left column left-aligned, the rest right-aligned.
std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows);
std::string format_fixed(double v, int precision = 2);

}  // namespace amrgen
