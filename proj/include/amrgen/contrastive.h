#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace amrgen {

enum class ContrastiveCategory { Antecedent, PronounType, Number, Gender };

std::string to_string(ContrastiveCategory c);
ContrastiveCategory parse_contrastive_category(const std::string& name);
const std::array<ContrastiveCategory, 4>& all_contrastive_categories();

struct ContrastivePair {
  std::string id;
  std::vector<std::string> reference;
  std::vector<std::string> contrastive;
  ContrastiveCategory category = ContrastiveCategory::Antecedent;
};

std::string pair_to_json(const ContrastivePair& pair);
ContrastivePair pair_from_json(std::string_view line);
void write_pairs(const std::filesystem::path& path, const std::vector<ContrastivePair>& pairs);
std::vector<ContrastivePair> read_pairs(const std::filesystem::path& path);

enum class PronounCase { Subject, Object, Possessive };
enum class Gender { None, Masculine, Feminine, Neuter };

struct PronounFeatures {
  int person = 3;
  bool plural = false;
  Gender gender = Gender::None;
  PronounCase pronoun_case = PronounCase::Subject;

  bool operator==(const PronounFeatures&) const = default;
};

// English personal pronouns. Returns nullopt for combinations with no form.
std::optional<std::string> pronoun_form(const PronounFeatures& f);
// First table entry for a lowercased form ("her" reads as object).
std::optional<PronounFeatures> pronoun_features(const std::string& form);

// One pronoun mention in a tokenized sentence, with the span of its antecedent.
// Token spans are half-open [begin, end).
struct Mention {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t antecedent_begin = 0;
  std::size_t antecedent_end = 0;
  std::optional<PronounFeatures> features;  // looked up from the form when absent
};

struct Annotation {
  std::string id;
  std::vector<Mention> mentions;
};

// JSONL lines {"id": ..., "mentions": [{"span": [b, e], "antecedent": [b, e],
// "person": 3, "number": "singular", "gender": "masculine", "case": "possessive"}]}
// with the feature keys optional.
std::vector<Annotation> read_annotations(const std::filesystem::path& path);
Annotation annotation_from_json(const nlohmann::json& j);

// Applies antecedent substitution and pronoun type, number and gender swaps to
// every mention, one pair per applicable rule. Pairs equal to their reference
// are dropped. References are lowercased, like preprocessed records. Throws
// DataError for spans outside the sentence.
std::vector<ContrastivePair> make_contrastive_pairs(
    const std::map<std::string, std::vector<std::string>>& references,
    const std::vector<Annotation>& annotations);

struct CategoryAccuracy {
  std::size_t wins = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? 100.0 * static_cast<double>(wins) / static_cast<double>(total) : 0.0; }
};

struct ContrastiveResult {
  std::map<ContrastiveCategory, CategoryAccuracy> categories;
  CategoryAccuracy overall;
  std::size_t skipped = 0;
};

// Scores a sentence for an example id; nullopt when the id is unknown.
using SentenceScorer =
    std::function<std::optional<double>(const std::string& id, const std::vector<std::string>& tokens)>;

// A pair is won only when the reference scores strictly higher.
ContrastiveResult contrastive_eval(const std::vector<ContrastivePair>& pairs,
                                   const SentenceScorer& scorer);

nlohmann::json to_json(const ContrastiveResult& result);
// One row per model: antecedent, type, number, gender accuracies.
std::string render_contrastive(const std::vector<std::pair<std::string, ContrastiveResult>>& rows);

}  // namespace amrgen
