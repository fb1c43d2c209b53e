#include "amrgen/cli.h"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "amrgen/checkpoint.h"
#include "amrgen/contrastive.h"
#include "amrgen/corpus.h"
#include "amrgen/errors.h"
#include "amrgen/eval.h"
#include "amrgen/penman.h"
#include "amrgen/seq2seq.h"

namespace amrgen {

using nlohmann::json;
namespace fs = std::filesystem;

std::string git_blob_sha1(std::string_view content) {
  std::string data = "blob " + std::to_string(content.size());
  data.push_back('\0');
  data.append(content);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

json hash_inputs(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) out.push_back({{"path", f.generic_string()}, {"sha1", git_blob_sha1(read_file(f))}});
  }
  return out;
}

json make_manifest(const std::string& command, const json& config, unsigned long long seed,
                   const std::vector<fs::path>& inputs) {
  return {{"command", command},
          {"config", config},
          {"seed", seed},
          {"inputs", hash_inputs(inputs)},
          {"version", std::string("amrgen ") + kVersion}};
}

namespace {

// Options whose values land in the command's JSON config when given, so that
// flags override a --config file.
class Overlay {
 public:
  explicit Overlay(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file; flags override its keys");
    app_->add_option("--set", sets_, "Override any config key: key=value (value parsed as JSON)");
  }

  template <typename T>
  CLI::Option* option(const std::string& flags, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flags, *value, help);
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
    return opt;
  }

  CLI::Option* flag(const std::string& flags, const std::string& key, bool value,
                    const std::string& help) {
    CLI::Option* opt = app_->add_flag(flags, help);
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = value;
    });
    return opt;
  }

  json resolve() const {
    json j = json::object();
    if (!config_path_.empty()) {
      try {
        j = json::parse(read_file(config_path_));
      } catch (const json::exception& e) {
        throw ConfigError(config_path_ + ": " + e.what());
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      if (!j.is_object()) throw ConfigError(config_path_ + ": config must be a JSON object");
    }
    for (const auto& s : sets_) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      const std::string key = s.substr(0, eq);
      const std::string raw = s.substr(eq + 1);
      json v = json::parse(raw, nullptr, false);
      j[key] = v.is_discarded() ? json(raw) : v;
    }
    for (const auto& f : apply_) f(j);
    return j;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::string> sets_;
  std::vector<std::function<void(json&)>> apply_;
};

template <typename T>
T get(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string require_path(const json& cfg, const char* key, bool must_exist = true) {
  const std::string p = get<std::string>(cfg, key, "");
  if (p.empty()) throw ConfigError(std::string("missing --") + key);
  if (must_exist && !fs::exists(p)) throw DataError(std::string("--") + key + " " + p + " does not exist");
  return p;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<Sentence> read_sentences(const fs::path& path) {
  std::vector<Sentence> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) out.push_back(tokenize(line));
  return out;
}

// References from preprocessed records or from a plain tokenized text file.
std::vector<Sentence> read_references(const fs::path& path) {
  if (path.extension() == ".jsonl") {
    std::vector<Sentence> out;
    for (const auto& r : read_records(path)) out.push_back(r.reference);
    return out;
  }
  return read_sentences(path);
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

json bucket_histogram(const std::vector<std::size_t>& values, const std::vector<Bucket>& buckets) {
  json rows = json::array();
  for (const auto& b : buckets) {
    std::size_t n = 0;
    for (auto v : values) n += b.contains(v);
    rows.push_back({{"bucket", b.label()}, {"count", n}});
  }
  std::map<std::size_t, std::size_t> exact;
  for (auto v : values) ++exact[v];
  json hist = json::object();
  for (const auto& [v, n] : exact) hist[std::to_string(v)] = n;
  return {{"buckets", rows}, {"histogram", hist}};
}

std::vector<std::string> render_histogram(const json& h) {
  std::vector<std::string> cells;
  for (const auto& row : h["buckets"]) cells.push_back(std::to_string(row["count"].get<std::size_t>()));
  return cells;
}

int cmd_preprocess(const json& cfg, std::ostream& out, std::ostream& err) {
  const fs::path input = require_path(cfg, "input");
  const fs::path output = require_path(cfg, "output", false);
  PreprocessOptions options;
  options.anonymize = get<bool>(cfg, "anonymize", true);
  options.rare_threshold = get<std::size_t>(cfg, "rare_threshold", options.rare_threshold);

  const auto blocks = read_amr_blocks(input);
  std::unordered_map<std::string, std::size_t> freq;
  std::vector<fs::path> inputs{input};
  const std::string freq_from = get<std::string>(cfg, "frequencies_from", "");
  if (!freq_from.empty()) {
    inputs.emplace_back(freq_from);
    for (const auto& b : read_amr_blocks(freq_from)) {
      try {
        count_concepts(parse_penman(b.penman), freq);
      } catch (const DataError&) {
      }
    }
  }
  const PreprocessResult result = preprocess(blocks, options, freq_from.empty() ? nullptr : &freq);
  for (const auto& m : result.skip_messages) err << "skipped " << m << "\n";
  if (result.records.empty()) throw DataError("no usable AMR graphs in " + input.string());

  write_records(output, result.records);
  write_counts(with_suffix(output, ".src.vocab"), source_counts(result.records));
  write_counts(with_suffix(output, ".tgt.vocab"), target_counts(result.records));

  std::string stats_text;
  std::vector<std::size_t> reentrancies, dep_lengths;
  for (const auto& r : result.records) {
    stats_text += json{{"id", r.id},
                       {"reentrancies", r.stats.reentrancy_count},
                       {"max_dep_len", r.stats.max_dependency_length},
                       {"nodes", r.stats.node_count},
                       {"edges", r.stats.edge_count}}
                      .dump() +
                  "\n";
    reentrancies.push_back(r.stats.reentrancy_count);
    if (r.stats.reentrancy_count == 0) dep_lengths.push_back(r.stats.max_dependency_length);
  }
  write_file(with_suffix(output, ".stats.jsonl"), stats_text);

  const json re = bucket_histogram(reentrancies, default_buckets(BucketBy::Reentrancies));
  const json dl = bucket_histogram(dep_lengths, default_buckets(BucketBy::DependencyLength));
  write_json(with_suffix(output, ".summary.json"), {{"records", result.records.size()},
                                                    {"skipped", result.skipped},
                                                    {"reentrancies", re},
                                                    {"max_dep_len_without_reentrancies", dl}});
  write_json(with_suffix(output, ".manifest.json"),
             make_manifest("preprocess", cfg, get<unsigned long long>(cfg, "seed", 0), inputs));

  out << "records: " << result.records.size() << "  skipped: " << result.skipped << "\n\n";
  std::vector<std::string> re_row{"Reentrancies"};
  for (auto& c : render_histogram(re)) re_row.push_back(c);
  out << render_text_table({"", "0", "1-5", "6-20"}, {re_row}) << "\n";
  std::vector<std::string> dl_row{"Max dep. length (no reentrancies)"};
  for (auto& c : render_histogram(dl)) dl_row.push_back(c);
  out << render_text_table({"", "0-10", "11-50", "51-250"}, {dl_row});
  return kExitOk;
}

int cmd_train(const json& cfg, std::ostream& out, std::ostream&) {
  const fs::path train_path = require_path(cfg, "train");
  const fs::path dev_path = require_path(cfg, "dev");
  const fs::path out_dir = require_path(cfg, "output", false);
  const TrainConfig config = train_config_from_json(cfg);
  config.model.encoder.validate();

  const auto train_set = read_records(train_path);
  const auto dev_set = read_records(dev_path);
  fs::create_directories(out_dir);
  std::string log_text;
  TrainResult result = train(train_set, dev_set, config, [&](const EpochLog& e) {
    const std::string line = to_json_line(e, config.log_timing);
    log_text += line + "\n";
    out << line << "\n";
    out.flush();
  });
  write_file(out_dir / "train_log.jsonl", log_text);

  CheckpointInfo info;
  info.seed = config.seed;
  info.epoch = result.best_epoch;
  info.dev_bleu = result.best_dev_bleu;
  info.train_config = to_json(config);
  save_checkpoint(out_dir / "model.ckpt", *result.model, info);

  json effective = to_json(config);
  effective["train"] = train_path.generic_string();
  effective["dev"] = dev_path.generic_string();
  effective["output"] = out_dir.generic_string();
  write_json(out_dir / "manifest.json", make_manifest("train", effective, config.seed, {train_path, dev_path}));
  out << "best epoch " << result.best_epoch << ", dev BLEU " << format_fixed(result.best_dev_bleu)
      << "; checkpoint " << (out_dir / "model.ckpt").generic_string() << "\n";
  return kExitOk;
}

std::vector<Example> load_examples(const Seq2Seq& model, const fs::path& path) {
  auto examples = make_examples(read_records(path), model.config().encoder.repr);
  for (auto& ex : examples) model.index(ex);
  return examples;
}

std::vector<Sentence> generate_all(const Seq2Seq& model, const std::vector<Example>& examples,
                                   std::size_t beam, std::size_t max_len, std::ostream& err) {
  std::vector<Sentence> out;
  for (const auto& ex : examples) {
    const Generation g = model.generate(ex, beam, max_len);
    if (g.truncated) err << "warning: " << ex.id << " reached max length without end of sentence\n";
    out.push_back(g.surface);
  }
  return out;
}

int cmd_generate(const json& cfg, std::ostream& out, std::ostream& err) {
  const fs::path ckpt = require_path(cfg, "checkpoint");
  const fs::path input = require_path(cfg, "input");
  const std::string output = get<std::string>(cfg, "output", "");
  const auto beam = get<std::size_t>(cfg, "beam", 5);
  const auto max_len = get<std::size_t>(cfg, "max_len", 0);
  if (beam == 0) throw ConfigError("--beam must be at least 1");

  const auto loaded = load_checkpoint(ckpt);
  const auto sentences = generate_all(*loaded.model, load_examples(*loaded.model, input), beam, max_len, err);
  std::string text;
  for (const auto& s : sentences) text += join(s) + "\n";
  if (output.empty()) {
    out << text;
  } else {
    write_file(output, text);
    write_json(fs::path(output).string() + ".manifest.json",
               make_manifest("generate", cfg, loaded.info.seed, {ckpt, input}));
  }
  return kExitOk;
}

int cmd_evaluate(const json& cfg, std::ostream& out, std::ostream& err) {
  const fs::path refs_path = require_path(cfg, "references");
  const std::string name = get<std::string>(cfg, "name", "system");
  const std::string report = get<std::string>(cfg, "report", "");
  std::vector<fs::path> inputs{refs_path};
  std::vector<Sentence> hyps;
  unsigned long long seed = get<unsigned long long>(cfg, "seed", 0);
  if (cfg.contains("hypotheses")) {
    const fs::path hyp_path = require_path(cfg, "hypotheses");
    inputs.push_back(hyp_path);
    hyps = read_sentences(hyp_path);
  } else if (cfg.contains("checkpoint")) {
    const fs::path ckpt = require_path(cfg, "checkpoint");
    const auto loaded = load_checkpoint(ckpt);
    inputs.push_back(ckpt);
    seed = loaded.info.seed;
    hyps = generate_all(*loaded.model, load_examples(*loaded.model, refs_path),
                        get<std::size_t>(cfg, "beam", 5), get<std::size_t>(cfg, "max_len", 0), err);
  } else {
    throw ConfigError("evaluate needs --hypotheses or --checkpoint");
  }
  const auto refs = read_references(refs_path);
  if (hyps.size() != refs.size())
    throw DataError(std::to_string(hyps.size()) + " hypotheses for " + std::to_string(refs.size()) +
                    " references");
  const SystemSummary summary = summarize(name, hyps, refs);
  out << render_summary({summary});
  if (!report.empty()) {
    write_json(report, to_json(summary));
    write_json(report + ".manifest.json", make_manifest("evaluate", cfg, seed, inputs));
  }
  return kExitOk;
}

int cmd_analyze(const json& cfg, std::ostream& out, std::ostream&) {
  const fs::path refs_path = require_path(cfg, "references");
  const auto systems_spec = get<std::vector<std::string>>(cfg, "systems", {});
  if (systems_spec.empty()) throw ConfigError("analyze needs at least one --system NAME=FILE");
  const std::string baseline = get<std::string>(cfg, "baseline", "Seq");
  const std::string by = get<std::string>(cfg, "by", "both");
  const std::string report = get<std::string>(cfg, "report", "");

  const auto records = read_records(refs_path);
  std::vector<GraphStats> stats;
  std::vector<Sentence> refs;
  for (const auto& r : records) {
    stats.push_back(r.stats);
    refs.push_back(r.reference);
  }

  std::vector<fs::path> inputs{refs_path};
  std::vector<SystemScores> systems;
  std::vector<SystemSummary> summaries;
  for (const auto& spec : systems_spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--system expects NAME=FILE, got '" + spec + "'");
    const std::string name = spec.substr(0, eq);
    const fs::path file = spec.substr(eq + 1);
    if (!fs::exists(file)) throw DataError("system output " + file.string() + " does not exist");
    inputs.push_back(file);
    const auto hyps = read_sentences(file);
    if (hyps.size() != refs.size())
      throw DataError(name + ": " + std::to_string(hyps.size()) + " lines for " +
                      std::to_string(refs.size()) + " references");
    SystemScores s{name, {}};
    for (std::size_t i = 0; i < hyps.size(); ++i) s.scores.push_back(sentence_bleu(hyps[i], refs[i]));
    systems.push_back(std::move(s));
    summaries.push_back(summarize(name, hyps, refs));
  }

  json tables = json::array();
  out << render_summary(summaries) << "\n";
  auto run = [&](BucketBy kind, const char* key) {
    const std::string spec = get<std::string>(cfg, key, "");
    const auto buckets = spec.empty() ? default_buckets(kind) : parse_buckets(spec);
    const BucketTable table = bucket_report(stats, systems, kind, buckets, baseline);
    out << render_table(table) << "\n";
    tables.push_back(to_json(table));
  };
  if (by == "both" || by == "reentrancies") run(BucketBy::Reentrancies, "buckets");
  if (by == "both" || by == "max_dep_len") run(BucketBy::DependencyLength, by == "both" ? "dep_buckets" : "buckets");
  if (tables.empty()) throw ConfigError("--by must be reentrancies, max_dep_len or both");

  if (!report.empty()) {
    json systems_json = json::array();
    for (const auto& s : summaries) systems_json.push_back(to_json(s));
    write_json(report, {{"systems", systems_json}, {"tables", tables}});
    write_json(report + ".manifest.json",
               make_manifest("analyze", cfg, get<unsigned long long>(cfg, "seed", 0), inputs));
  }
  return kExitOk;
}

int cmd_contrastive(const json& cfg, std::ostream& out, std::ostream&) {
  const fs::path ckpt = require_path(cfg, "checkpoint");
  const fs::path input = require_path(cfg, "input");
  const fs::path pairs_path = require_path(cfg, "pairs");
  const std::string report = get<std::string>(cfg, "report", "");
  const std::string name = get<std::string>(cfg, "name", "model");

  const auto loaded = load_checkpoint(ckpt);
  const auto examples = load_examples(*loaded.model, input);
  std::map<std::string, const Example*> by_id;
  for (const auto& ex : examples) by_id.emplace(ex.id, &ex);
  const auto pairs = read_pairs(pairs_path);
  const Seq2Seq& model = *loaded.model;
  const ContrastiveResult result =
      contrastive_eval(pairs, [&](const std::string& id, const std::vector<std::string>& tokens)
                                  -> std::optional<double> {
        const auto it = by_id.find(id);
        if (it == by_id.end()) return std::nullopt;
        return model.score(*it->second, tokens);
      });
  out << render_contrastive({{name, result}});
  if (!report.empty()) {
    write_json(report, to_json(result));
    write_json(report + ".manifest.json",
               make_manifest("contrastive", cfg, loaded.info.seed, {ckpt, input, pairs_path}));
  }
  return kExitOk;
}

int cmd_make_pairs(const json& cfg, std::ostream& out, std::ostream&) {
  const fs::path input = require_path(cfg, "input");
  const fs::path annotations = require_path(cfg, "annotations");
  const fs::path output = require_path(cfg, "output", false);
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& r : read_records(input)) refs.emplace(r.id, r.reference);
  const auto pairs = make_contrastive_pairs(refs, read_annotations(annotations));
  write_pairs(output, pairs);
  write_json(output.string() + ".manifest.json",
             make_manifest("make-pairs", cfg, get<unsigned long long>(cfg, "seed", 0), {input, annotations}));
  std::map<ContrastiveCategory, std::size_t> counts;
  for (const auto& p : pairs) ++counts[p.category];
  out << pairs.size() << " pairs";
  for (const auto& [c, n] : counts) out << "  " << to_string(c) << ": " << n;
  out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AMR-to-text generation with sequential, tree and graph encoders", "amrgen"};
  app.set_version_flag("--version", std::string("amrgen ") + kVersion);
  app.require_subcommand(1);

  using Handler = std::function<int(const json&, std::ostream&, std::ostream&)>;
  std::vector<std::tuple<CLI::App*, std::unique_ptr<Overlay>, Handler>> commands;
  auto command = [&](const std::string& name, const std::string& help, Handler h) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto overlay = std::make_unique<Overlay>(sub);
    overlay->option<unsigned long long>("--seed", "seed", "Random seed");
    Overlay* raw = overlay.get();
    commands.emplace_back(sub, std::move(overlay), std::move(h));
    return raw;
  };

  Overlay* pre = command("preprocess", "Parse a PENMAN corpus into model-ready JSONL", cmd_preprocess);
  pre->option<std::string>("--input,-i", "input", "PENMAN file or directory");
  pre->option<std::string>("--output,-o", "output", "Output JSONL path");
  pre->flag("--no-anonymize", "anonymize", false, "Keep names, numbers, dates and rare concepts");
  pre->option<std::size_t>("--rare-threshold", "rare_threshold", "Concepts seen fewer times become rare_k");
  pre->option<std::string>("--frequencies-from", "frequencies_from",
                           "Count concept frequencies on this corpus (usually the training split)");

  Overlay* tr = command("train", "Train an encoder-decoder model", cmd_train);
  tr->option<std::string>("--train", "train", "Preprocessed training JSONL");
  tr->option<std::string>("--dev", "dev", "Preprocessed development JSONL");
  tr->option<std::string>("--output,-o", "output", "Output directory");
  tr->option<std::string>("--model,-m", "model",
                          "Seq, SeqGCN, GCNSeq, SeqTreeLSTM, TreeLSTMSeq, GCN or TreeLSTM");
  tr->option<std::string>("--repr", "repr", "sequence, tree or graph");
  tr->option<std::size_t>("--epochs", "epochs", "Maximum epochs");
  tr->option<std::size_t>("--batch-size", "batch_size", "Examples per SGD step");
  tr->option<double>("--lr", "learning_rate", "Initial learning rate");
  tr->option<double>("--dropout", "dropout", "Dropout rate");
  tr->option<std::size_t>("--patience", "patience", "Epochs without dev improvement before stopping (0: never)");
  tr->option<std::size_t>("--beam", "eval_beam", "Beam size for dev BLEU");
  tr->flag("--log-timing", "log_timing", true, "Record wall-clock seconds in the training log");

  Overlay* gen = command("generate", "Generate sentences with a trained model", cmd_generate);
  gen->option<std::string>("--checkpoint,-c", "checkpoint", "Model checkpoint");
  gen->option<std::string>("--input,-i", "input", "Preprocessed JSONL");
  gen->option<std::string>("--output,-o", "output", "Output text file (default stdout)");
  gen->option<std::size_t>("--beam", "beam", "Beam size (1 is greedy; default 5)");
  gen->option<std::size_t>("--max-len", "max_len", "Maximum output length (default 2 * source + 10)");

  Overlay* ev = command("evaluate", "Corpus BLEU and mean sBLEU of one system", cmd_evaluate);
  ev->option<std::string>("--references,-r", "references", "Preprocessed JSONL or tokenized text");
  ev->option<std::string>("--hypotheses", "hypotheses", "System output, one sentence per line");
  ev->option<std::string>("--checkpoint,-c", "checkpoint", "Generate from this model instead");
  ev->option<std::size_t>("--beam", "beam", "Beam size when generating");
  ev->option<std::string>("--name", "name", "System name in the report");
  ev->option<std::string>("--report", "report", "Write the report as JSON");

  Overlay* an = command("analyze", "Bucketed comparison against a baseline system", cmd_analyze);
  an->option<std::string>("--references,-r", "references", "Preprocessed JSONL with graph stats");
  an->option<std::vector<std::string>>("--system", "systems", "NAME=FILE, repeatable");
  an->option<std::string>("--baseline", "baseline", "Baseline system name (default Seq)");
  an->option<std::string>("--by", "by", "reentrancies, max_dep_len or both");
  an->option<std::string>("--buckets", "buckets", "Bucket ranges, e.g. 0,1-5,6-20");
  an->option<std::string>("--dep-buckets", "dep_buckets", "Dependency-length ranges when --by both");
  an->option<std::string>("--report", "report", "Write the tables as JSON");

  Overlay* co = command("contrastive", "Contrastive-pair accuracy of a model", cmd_contrastive);
  co->option<std::string>("--checkpoint,-c", "checkpoint", "Model checkpoint");
  co->option<std::string>("--input,-i", "input", "Preprocessed JSONL the pairs refer to");
  co->option<std::string>("--pairs", "pairs", "Contrastive pairs JSONL");
  co->option<std::string>("--name", "name", "Model name in the table");
  co->option<std::string>("--report", "report", "Write accuracies as JSON");

  Overlay* mp = command("make-pairs", "Build contrastive pairs from pronoun annotations", cmd_make_pairs);
  mp->option<std::string>("--input,-i", "input", "Preprocessed JSONL");
  mp->option<std::string>("--annotations", "annotations", "Mention annotation JSONL");
  mp->option<std::string>("--output,-o", "output", "Pairs JSONL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto& [sub, overlay, handler] : commands) {
    if (!sub->parsed()) continue;
    try {
      return handler(overlay->resolve(), out, err);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const NumericError& e) {
      err << "numeric error: " << e.what() << "\n";
      return kExitNumeric;
    } catch (const DataError& e) {
      err << "data error: " << e.what() << "\n";
      return kExitData;
    } catch (const fs::filesystem_error& e) {
      err << "data error: " << e.what() << "\n";
      return kExitData;
    }
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"amrgen"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace amrgen
