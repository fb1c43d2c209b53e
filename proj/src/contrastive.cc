#include "amrgen/contrastive.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "amrgen/corpus.h"
#include "amrgen/errors.h"
#include "amrgen/eval.h"

namespace amrgen {

using nlohmann::json;

namespace {

struct PronounRow {
  int person;
  bool plural;
  Gender gender;
  const char* subject;
  const char* object;
  const char* possessive;
};

constexpr PronounRow kPronouns[] = {
    {1, false, Gender::None, "i", "me", "my"},
    {2, false, Gender::None, "you", "you", "your"},
    {3, false, Gender::Masculine, "he", "him", "his"},
    {3, false, Gender::Feminine, "she", "her", "her"},
    {3, false, Gender::Neuter, "it", "it", "its"},
    {1, true, Gender::None, "we", "us", "our"},
    {2, true, Gender::None, "you", "you", "your"},
    {3, true, Gender::None, "they", "them", "their"},
};

const char* form_of(const PronounRow& row, PronounCase c) {
  switch (c) {
    case PronounCase::Subject: return row.subject;
    case PronounCase::Object: return row.object;
    case PronounCase::Possessive: return row.possessive;
  }
  return row.subject;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<std::string> swapped_type(const PronounFeatures& f, const std::string& current) {
  std::vector<PronounCase> order;
  switch (f.pronoun_case) {
    case PronounCase::Possessive:
      order = {PronounCase::Object, PronounCase::Subject};
      break;
    case PronounCase::Subject:
      order = {PronounCase::Object, PronounCase::Possessive};
      break;
    case PronounCase::Object:
      order = {PronounCase::Subject, PronounCase::Possessive};
      break;
  }
  for (PronounCase c : order) {
    PronounFeatures g = f;
    g.pronoun_case = c;
    const auto form = pronoun_form(g);
    if (form && *form != current) return form;
  }
  return std::nullopt;
}

std::optional<std::string> swapped_number(const PronounFeatures& f) {
  PronounFeatures g = f;
  g.plural = !f.plural;
  if (f.person == 3) g.gender = g.plural ? Gender::None : Gender::Masculine;
  return pronoun_form(g);
}

std::optional<std::string> swapped_gender(const PronounFeatures& f) {
  if (f.person != 3 || f.plural) return std::nullopt;
  PronounFeatures g = f;
  g.gender = f.gender == Gender::Masculine ? Gender::Feminine : Gender::Masculine;
  return pronoun_form(g);
}

std::pair<std::size_t, std::size_t> read_span(const json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<std::size_t>>();
  if (v.size() != 2) throw DataError(std::string("annotation ") + key + " must be [begin, end]");
  return {v[0], v[1]};
}

}  // namespace

std::string to_string(ContrastiveCategory c) {
  switch (c) {
    case ContrastiveCategory::Antecedent: return "antecedent";
    case ContrastiveCategory::PronounType: return "pronoun_type";
    case ContrastiveCategory::Number: return "number";
    case ContrastiveCategory::Gender: return "gender";
  }
  return "antecedent";
}

ContrastiveCategory parse_contrastive_category(const std::string& name) {
  for (auto c : all_contrastive_categories())
    if (to_string(c) == name) return c;
  if (name == "type") return ContrastiveCategory::PronounType;
  throw DataError("unknown contrastive category '" + name + "'");
}

const std::array<ContrastiveCategory, 4>& all_contrastive_categories() {
  static const std::array<ContrastiveCategory, 4> all{
      ContrastiveCategory::Antecedent, ContrastiveCategory::PronounType,
      ContrastiveCategory::Number, ContrastiveCategory::Gender};
  return all;
}

std::string pair_to_json(const ContrastivePair& p) {
  return json{{"id", p.id},
              {"reference", join(p.reference)},
              {"contrastive", join(p.contrastive)},
              {"category", to_string(p.category)}}
      .dump();
}

ContrastivePair pair_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    ContrastivePair p;
    p.id = j.at("id").get<std::string>();
    p.reference = tokenize(j.at("reference").get<std::string>());
    p.contrastive = tokenize(j.at("contrastive").get<std::string>());
    p.category = parse_contrastive_category(j.at("category").get<std::string>());
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad contrastive pair: ") + e.what());
  }
}

void write_pairs(const std::filesystem::path& path, const std::vector<ContrastivePair>& pairs) {
  std::string text;
  for (const auto& p : pairs) text += pair_to_json(p) + "\n";
  write_file(path, text);
}

std::vector<ContrastivePair> read_pairs(const std::filesystem::path& path) {
  std::vector<ContrastivePair> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(pair_from_json(line));
  return out;
}

std::optional<std::string> pronoun_form(const PronounFeatures& f) {
  for (const auto& row : kPronouns) {
    if (row.person != f.person || row.plural != f.plural) continue;
    if (row.gender != f.gender) continue;
    return std::string(form_of(row, f.pronoun_case));
  }
  return std::nullopt;
}

std::optional<PronounFeatures> pronoun_features(const std::string& form) {
  const std::string w = lower(form);
  for (const auto& row : kPronouns)
    for (PronounCase c : {PronounCase::Subject, PronounCase::Object, PronounCase::Possessive})
      if (w == form_of(row, c)) return PronounFeatures{row.person, row.plural, row.gender, c};
  return std::nullopt;
}

Annotation annotation_from_json(const json& j) {
  try {
    Annotation a;
    a.id = j.at("id").get<std::string>();
    for (const auto& m : j.at("mentions")) {
      Mention mention;
      std::tie(mention.begin, mention.end) = read_span(m, "span");
      std::tie(mention.antecedent_begin, mention.antecedent_end) = read_span(m, "antecedent");
      if (m.contains("case") || m.contains("number") || m.contains("gender") || m.contains("person")) {
        PronounFeatures f;
        f.person = m.value("person", 3);
        f.plural = m.value("number", std::string("singular")) == "plural";
        const std::string gender = m.value("gender", std::string("none"));
        f.gender = gender == "masculine"  ? Gender::Masculine
                   : gender == "feminine" ? Gender::Feminine
                   : gender == "neuter"   ? Gender::Neuter
                                          : Gender::None;
        const std::string c = m.value("case", std::string("subject"));
        f.pronoun_case = c == "possessive" ? PronounCase::Possessive
                         : c == "object"   ? PronounCase::Object
                                           : PronounCase::Subject;
        if (!pronoun_form(f)) throw DataError("annotation " + a.id + ": no pronoun with these features");
        mention.features = f;
      }
      a.mentions.push_back(mention);
    }
    return a;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad annotation: ") + e.what());
  }
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<ContrastivePair> make_contrastive_pairs(
    const std::map<std::string, std::vector<std::string>>& references,
    const std::vector<Annotation>& annotations) {
  std::vector<ContrastivePair> pairs;
  for (const auto& a : annotations) {
    const auto it = references.find(a.id);
    if (it == references.end()) throw DataError("annotation for unknown example " + a.id);
    std::vector<std::string> ref;
    for (const auto& t : it->second) ref.push_back(lower(t));

    for (const auto& m : a.mentions) {
      if (m.begin >= m.end || m.end > ref.size() || m.antecedent_begin >= m.antecedent_end ||
          m.antecedent_end > ref.size())
        throw DataError("annotation " + a.id + ": span out of range for a " +
                        std::to_string(ref.size()) + "-token sentence");
      auto emit = [&](ContrastiveCategory cat, const std::vector<std::string>& replacement) {
        std::vector<std::string> out(ref.begin(), ref.begin() + static_cast<long>(m.begin));
        out.insert(out.end(), replacement.begin(), replacement.end());
        out.insert(out.end(), ref.begin() + static_cast<long>(m.end), ref.end());
        if (out != ref) pairs.push_back({a.id, ref, std::move(out), cat});
      };

      emit(ContrastiveCategory::Antecedent,
           std::vector<std::string>(ref.begin() + static_cast<long>(m.antecedent_begin),
                                    ref.begin() + static_cast<long>(m.antecedent_end)));

      const std::string current = join(std::vector<std::string>(
          ref.begin() + static_cast<long>(m.begin), ref.begin() + static_cast<long>(m.end)));
      const auto features = m.features ? m.features : pronoun_features(current);
      if (!features) continue;
      if (auto form = swapped_type(*features, current)) emit(ContrastiveCategory::PronounType, {*form});
      if (auto form = swapped_number(*features)) emit(ContrastiveCategory::Number, {*form});
      if (auto form = swapped_gender(*features)) emit(ContrastiveCategory::Gender, {*form});
    }
  }
  return pairs;
}

ContrastiveResult contrastive_eval(const std::vector<ContrastivePair>& pairs,
                                   const SentenceScorer& scorer) {
  ContrastiveResult result;
  for (auto c : all_contrastive_categories()) result.categories[c];
  for (const auto& p : pairs) {
    const auto ref = scorer(p.id, p.reference);
    const auto con = ref ? scorer(p.id, p.contrastive) : std::nullopt;
    if (!ref || !con) {
      ++result.skipped;
      continue;
    }
    const bool win = *ref > *con;
    auto& cat = result.categories[p.category];
    ++cat.total;
    ++result.overall.total;
    if (win) {
      ++cat.wins;
      ++result.overall.wins;
    }
  }
  return result;
}

json to_json(const ContrastiveResult& r) {
  json cats = json::object();
  for (const auto& [c, acc] : r.categories)
    cats[to_string(c)] = {{"accuracy", acc.accuracy()}, {"wins", acc.wins}, {"count", acc.total}};
  return {{"categories", cats},
          {"overall", {{"accuracy", r.overall.accuracy()}, {"wins", r.overall.wins}, {"count", r.overall.total}}},
          {"skipped", r.skipped}};
}

std::string render_contrastive(const std::vector<std::pair<std::string, ContrastiveResult>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, r] : rows) {
    std::vector<std::string> line{name};
    for (auto c : all_contrastive_categories()) {
      const auto it = r.categories.find(c);
      line.push_back(it == r.categories.end() || it->second.total == 0
                         ? "-"
                         : format_fixed(it->second.accuracy()) + " (" + std::to_string(it->second.total) + ")");
    }
    line.push_back(std::to_string(r.skipped));
    cells.push_back(std::move(line));
  }
  return render_text_table({"Model", "Antecedent", "Type", "Number", "Gender", "Skipped"}, cells);
}

}  // namespace amrgen
