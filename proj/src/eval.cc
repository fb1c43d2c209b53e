#include "amrgen/eval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "amrgen/errors.h"

namespace amrgen {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Sentence& s, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i)
    ++counts[std::vector<std::string>(s.begin() + static_cast<long>(i),
                                      s.begin() + static_cast<long>(i + n))];
  return counts;
}

Sentence lowered(const Sentence& s) {
  Sentence out(s.size());
  std::transform(s.begin(), s.end(), out.begin(), lower);
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& spec) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ConfigError("bad bucket spec '" + spec + "'");
  return static_cast<std::size_t>(std::stoull(s));
}

double mean_of(const std::vector<double>& scores, const std::vector<std::size_t>& members) {
  double sum = 0.0;
  for (std::size_t i : members) sum += scores[i];
  return sum / static_cast<double>(members.size());
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats bleu_stats(const Sentence& hypothesis, const Sentence& reference) {
  const Sentence hyp = lowered(hypothesis);
  const Sentence ref = lowered(reference);
  BleuStats s;
  s.hyp_length = hyp.size();
  s.ref_length = ref.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto h = ngram_counts(hyp, n);
    const auto r = ngram_counts(ref, n);
    for (const auto& [gram, count] : h) {
      s.totals[n - 1] += count;
      const auto it = r.find(gram);
      if (it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (s.matches[n] == 0 || s.totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
  }
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references) {
  if (hypotheses.size() != references.size())
    throw DataError("corpus_bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                    std::to_string(references.size()) + " references");
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += bleu_stats(hypotheses[i], references[i]);
  return bleu_from_stats(total);
}

double sentence_bleu(const Sentence& hypothesis, const Sentence& reference) {
  const BleuStats s = bleu_stats(hypothesis, reference);
  if (s.matches[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(s.matches[0]) / static_cast<double>(s.totals[0]));
  for (std::size_t n = 1; n < 4; ++n)
    log_sum += std::log((static_cast<double>(s.matches[n]) + 1.0) /
                        (static_cast<double>(s.totals[n]) + 1.0));
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

std::string to_string(BucketBy by) {
  return by == BucketBy::Reentrancies ? "reentrancies" : "max_dep_len";
}

BucketBy parse_bucket_by(const std::string& name) {
  if (name == "reentrancies") return BucketBy::Reentrancies;
  if (name == "max_dep_len" || name == "dependency" || name == "dep_len")
    return BucketBy::DependencyLength;
  throw ConfigError("unknown bucketing '" + name + "' (reentrancies, max_dep_len)");
}

std::string Bucket::label() const {
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

std::vector<Bucket> default_buckets(BucketBy by) {
  if (by == BucketBy::Reentrancies) return {{0, 0}, {1, 5}, {6, 20}};
  return {{0, 10}, {11, 50}, {51, 250}};
}

std::vector<Bucket> parse_buckets(const std::string& spec) {
  std::vector<Bucket> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part.erase(std::remove_if(part.begin(), part.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               part.end());
    const auto dash = part.find('-');
    Bucket b;
    if (dash == std::string::npos) {
      b.lo = b.hi = parse_size(part, spec);
    } else {
      b.lo = parse_size(part.substr(0, dash), spec);
      b.hi = parse_size(part.substr(dash + 1), spec);
    }
    if (b.lo > b.hi) throw ConfigError("bucket '" + part + "' is empty");
    for (const auto& other : out)
      if (b.lo <= other.hi && other.lo <= b.hi)
        throw ConfigError("buckets '" + other.label() + "' and '" + b.label() + "' overlap");
    out.push_back(b);
  }
  if (out.empty()) throw ConfigError("no buckets in '" + spec + "'");
  return out;
}

BucketTable bucket_report(const std::vector<GraphStats>& stats,
                          const std::vector<SystemScores>& systems, BucketBy by,
                          const std::vector<Bucket>& buckets, const std::string& baseline) {
  if (systems.empty()) throw DataError("bucket_report needs at least one system");
  for (const auto& s : systems)
    if (s.scores.size() != stats.size())
      throw DataError("system " + s.name + " has " + std::to_string(s.scores.size()) +
                      " scores for " + std::to_string(stats.size()) + " examples");

  std::size_t base = 0;
  for (std::size_t k = 0; k < systems.size(); ++k)
    if (systems[k].name == baseline) {
      base = k;
      break;
    }

  BucketTable table;
  table.by = by;
  table.baseline = systems[base].name;
  for (std::size_t k = 0; k < systems.size(); ++k)
    if (k != base) table.systems.push_back(systems[k].name);

  std::vector<std::vector<std::size_t>> members(buckets.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (by == BucketBy::DependencyLength && stats[i].reentrancy_count > 0) {
      ++table.filtered;
      continue;
    }
    const std::size_t v = by == BucketBy::Reentrancies ? stats[i].reentrancy_count
                                                       : stats[i].max_dependency_length;
    bool placed = false;
    for (std::size_t b = 0; b < buckets.size() && !placed; ++b)
      if (buckets[b].contains(v)) {
        members[b].push_back(i);
        placed = true;
      }
    if (!placed) ++table.unbucketed;
  }

  for (std::size_t b = 0; b < buckets.size(); ++b) {
    BucketRow row;
    row.label = buckets[b].label();
    row.count = members[b].size();
    if (row.count > 0) row.baseline = mean_of(systems[base].scores, members[b]);
    for (std::size_t k = 0; k < systems.size(); ++k) {
      if (k == base) continue;
      if (row.count == 0) {
        row.deltas.emplace_back();
      } else {
        row.deltas.emplace_back(mean_of(systems[k].scores, members[b]) - *row.baseline);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json to_json(const BucketTable& table) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const auto& r : table.rows) {
    json deltas = json::object();
    for (std::size_t k = 0; k < table.systems.size(); ++k) deltas[table.systems[k]] = opt(r.deltas[k]);
    rows.push_back({{"bucket", r.label}, {"count", r.count}, {"baseline", opt(r.baseline)},
                    {"deltas", deltas}});
  }
  return {{"by", to_string(table.by)},       {"metric", table.metric},
          {"baseline", table.baseline},      {"systems", table.systems},
          {"rows", rows},                    {"filtered", table.filtered},
          {"unbucketed", table.unbucketed}};
}

std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], r[c].size());
  };
  widen(header);
  for (const auto& r : rows) widen(r);

  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < r.size() ? r[c] : "";
      const std::string pad(width[c] - cell.size(), ' ');
      if (c) out += "  ";
      out += c == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };

  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string render_table(const BucketTable& table) {
  std::vector<std::string> header{table.by == BucketBy::Reentrancies ? "Reentrancies" : "Max dep. length",
                                  "Count", table.baseline + " (" + table.metric + ")"};
  for (const auto& s : table.systems) header.push_back(s);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) {
    std::vector<std::string> cells{r.label, std::to_string(r.count),
                                   r.baseline ? format_fixed(*r.baseline) : "-"};
    for (const auto& d : r.deltas)
      cells.push_back(d ? (*d >= 0 ? "+" : "") + format_fixed(*d) : "-");
    rows.push_back(std::move(cells));
  }
  std::string out = render_text_table(header, rows);
  if (table.filtered) out += "excluded (reentrant): " + std::to_string(table.filtered) + "\n";
  if (table.unbucketed) out += "outside all buckets: " + std::to_string(table.unbucketed) + "\n";
  return out;
}

SystemSummary summarize(const std::string& name, const std::vector<Sentence>& hypotheses,
                        const std::vector<Sentence>& references) {
  SystemSummary s;
  s.name = name;
  s.count = hypotheses.size();
  s.bleu = corpus_bleu(hypotheses, references);
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) sum += sentence_bleu(hypotheses[i], references[i]);
  s.sentence_mean = hypotheses.empty() ? 0.0 : sum / static_cast<double>(hypotheses.size());
  return s;
}

nlohmann::json to_json(const SystemSummary& s) {
  return {{"system", s.name}, {"count", s.count}, {"corpus_bleu", s.bleu},
          {"sentence_metric", "sBLEU"}, {"sentence_metric_mean", s.sentence_mean}};
}

std::string render_summary(const std::vector<SystemSummary>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.name, std::to_string(r.count), format_fixed(r.bleu), format_fixed(r.sentence_mean)});
  return render_text_table({"Model", "Count", "BLEU", "sBLEU"}, cells);
}

}  // namespace amrgen
