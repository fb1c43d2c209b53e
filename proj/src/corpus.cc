#include "amrgen/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amrgen/errors.h"
#include "amrgen/penman.h"

namespace amrgen {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// "::id x ::date y" -> {(id, x), (date, y)}
void parse_metadata(std::string_view body, std::vector<std::pair<std::string, std::string>>& out) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + 1 < body.size(); ++i) {
    if (body[i] == ':' && body[i + 1] == ':' &&
        (i == 0 || std::isspace(static_cast<unsigned char>(body[i - 1]))))
      starts.push_back(i);
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t end = k + 1 < starts.size() ? starts[k + 1] : body.size();
    const std::string_view field = body.substr(starts[k] + 2, end - starts[k] - 2);
    const std::size_t sp = field.find_first_of(" \t");
    std::string key(field.substr(0, sp));
    std::string value = sp == std::string_view::npos ? std::string() : trim(field.substr(sp));
    if (!key.empty()) out.emplace_back(std::move(key), std::move(value));
  }
}

json levi_json(const LeviGraph& levi) {
  json nodes = json::array();
  for (const auto& n : levi.nodes)
    nodes.push_back({{"token", n.token}, {"kind", n.kind == LeviKind::Concept ? "concept" : "relation"}});
  json edges = json::array();
  for (const auto& [a, b] : levi.edges) edges.push_back({a, b});
  return {{"nodes", nodes}, {"edges", edges}, {"root", levi.root}};
}

json tree_json(const AmrTree& tree) {
  json nodes = json::array();
  for (std::size_t i = 0; i < tree.graph.nodes.size(); ++i)
    nodes.push_back({{"token", node_token(tree.graph.nodes[i])}, {"copy_of", tree.copy_of[i]}});
  json edges = json::array();
  for (const auto& e : tree.graph.edges) edges.push_back({e.source, e.target, e.role});
  return {{"nodes", nodes}, {"edges", edges}, {"root", tree.graph.root}};
}

json stats_json(const GraphStats& s) {
  return {{"reentrancies", s.reentrancy_count},
          {"max_dep_len", s.max_dependency_length},
          {"nodes", s.node_count},
          {"edges", s.edge_count}};
}

}  // namespace

std::vector<AmrBlock> split_amr_blocks(std::string_view text, const std::string& source_name) {
  std::vector<AmrBlock> blocks;
  AmrBlock current;
  std::string graph_text;
  std::size_t block_line = 0;
  std::size_t counter = 0;

  auto flush = [&] {
    if (!trim(graph_text).empty()) {
      ++counter;
      for (const auto& [k, v] : current.metadata) {
        if (k == "id" && current.id.empty()) current.id = v;
        if (k == "tok") current.sentence = v;
        if (k == "snt" && current.sentence.empty()) current.sentence = v;
      }
      if (current.id.empty()) current.id = source_name + "." + std::to_string(counter);
      current.penman = graph_text;
      current.source = source_name + ":" + std::to_string(block_line);
      blocks.push_back(std::move(current));
    }
    current = AmrBlock{};
    graph_text.clear();
    block_line = 0;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = nl + 1;

    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (block_line == 0) block_line = line_no;
    if (line.front() == '#' && graph_text.empty()) {
      std::string_view body = line.substr(1);
      parse_metadata(trim(body), current.metadata);
      continue;
    }
    graph_text.append(line);
    graph_text.push_back('\n');
  }
  flush();
  return blocks;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<AmrBlock> read_amr_blocks(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".txt" || ext == ".amr")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw DataError("no such corpus path: " + path.string());
  }
  if (files.empty()) throw DataError("no AMR files under " + path.string());

  std::vector<AmrBlock> blocks;
  for (const auto& f : files) {
    auto part = split_amr_blocks(read_file(f), f.filename().string());
    blocks.insert(blocks.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  if (blocks.empty()) throw DataError("no AMR graphs in " + path.string());
  return blocks;
}

std::vector<std::string> tokenize(std::string_view sentence, bool lowercase) {
  std::vector<std::string> out;
  std::istringstream in{std::string(sentence)};
  std::string tok;
  while (in >> tok) {
    if (lowercase)
      std::transform(tok.begin(), tok.end(), tok.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(std::move(tok));
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

PreprocessResult preprocess(const std::vector<AmrBlock>& blocks, const PreprocessOptions& options,
                            const std::unordered_map<std::string, std::size_t>* frequencies) {
  PreprocessResult result;
  std::vector<std::pair<const AmrBlock*, AmrGraph>> parsed;
  for (const auto& block : blocks) {
    auto skip = [&](const std::string& why) {
      ++result.skipped;
      result.skip_messages.push_back(block.source + " (" + block.id + "): " + why);
    };
    try {
      AmrGraph g = parse_penman(block.penman);
      const auto violations = validate(g);
      if (!violations.empty()) {
        skip(violations.front().message);
        continue;
      }
      if (tokenize(block.sentence).empty()) {
        skip("missing ::snt sentence");
        continue;
      }
      parsed.emplace_back(&block, std::move(g));
    } catch (const PenmanError& e) {
      skip(e.what());
    }
  }

  AnonymizationPolicy policy;
  policy.rare_threshold = options.rare_threshold;
  if (frequencies) {
    policy.concept_frequency = *frequencies;
  } else {
    for (const auto& [block, g] : parsed) count_concepts(g, policy.concept_frequency);
  }
  if (!options.anonymize) {
    policy.names = policy.numbers = policy.dates = false;
    policy.rare_threshold = 0;
  }

  for (const auto& [block, g] : parsed) {
    Record r;
    r.id = block->id;
    r.stats = compute_stats(g);
    const auto reference = tokenize(block->sentence);
    AnonymizedGraph anon = anonymize(g, policy);
    r.penman = serialize_penman(anon.graph, false);
    // Reparsed so the stored record and a reloaded one agree on node order.
    const AmrGraph canonical = parse_penman(r.penman);
    r.tokens = linearize(canonical).tokens;
    r.levi = to_levi(canonical);
    r.tree = to_tree(canonical);
    r.anon_map = std::move(anon.map);
    r.sentence = anonymize_sentence(reference, r.anon_map);
    r.reference = reference;
    result.records.push_back(std::move(r));
  }
  return result;
}

std::string record_to_json(const Record& r) {
  json anon = json::array();
  for (const auto& e : r.anon_map) anon.push_back({e.placeholder, e.original});
  json j = {{"id", r.id},
            {"penman", r.penman},
            {"tokens", r.tokens},
            {"levi", levi_json(r.levi)},
            {"tree", tree_json(r.tree)},
            {"sentence", r.sentence},
            {"reference", r.reference},
            {"anon_map", anon},
            {"stats", stats_json(r.stats)}};
  return j.dump();
}

Record record_from_json(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad record JSON: ") + e.what());
  }
  try {
    Record r;
    r.id = j.at("id").get<std::string>();
    r.penman = j.at("penman").get<std::string>();
    const AmrGraph g = parse_penman(r.penman);
    r.tokens = linearize(g).tokens;
    if (j.contains("tokens") && j["tokens"].get<std::vector<std::string>>() != r.tokens)
      throw DataError("record " + r.id + ": tokens disagree with penman");
    r.levi = to_levi(g);
    r.tree = to_tree(g);
    r.sentence = j.at("sentence").get<std::vector<std::string>>();
    r.reference = j.value("reference", r.sentence);
    for (const auto& e : j.value("anon_map", json::array()))
      r.anon_map.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    if (j.contains("stats")) {
      const auto& s = j["stats"];
      r.stats.reentrancy_count = s.at("reentrancies").get<std::size_t>();
      r.stats.max_dependency_length = s.at("max_dep_len").get<std::size_t>();
      r.stats.node_count = s.value("nodes", std::size_t{0});
      r.stats.edge_count = s.value("edges", std::size_t{0});
    } else {
      r.stats = compute_stats(g);
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad record: ") + e.what());
  }
}

void write_records(const fs::path& path, const std::vector<Record>& records) {
  std::string text;
  for (const auto& r : records) {
    text += record_to_json(r);
    text += '\n';
  }
  write_file(path, text);
}

std::vector<Record> read_records(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Record> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::size_t> source_counts(const std::vector<Record>& records) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records)
    for (const auto& t : r.tokens) ++counts[t];
  return counts;
}

std::map<std::string, std::size_t> target_counts(const std::vector<Record>& records) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records)
    for (const auto& t : r.sentence) ++counts[t];
  return counts;
}

void write_counts(const fs::path& path, const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string text;
  for (const auto& [tok, n] : items) text += tok + "\t" + std::to_string(n) + "\n";
  write_file(path, text);
}

Example make_example(const Record& record, InputRepr repr) {
  Example ex;
  ex.id = record.id;
  ex.graph = parse_penman(record.penman);
  ex.input = make_encoder_input(ex.graph, repr);
  ex.target = record.sentence;
  ex.reference = record.reference;
  ex.anon_map = record.anon_map;
  ex.stats = record.stats;
  return ex;
}

std::vector<Example> make_examples(const std::vector<Record>& records, InputRepr repr) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(make_example(r, repr));
  return out;
}

}  // namespace amrgen
