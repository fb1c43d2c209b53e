#include "amrgen/seq2seq.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>

#include "amrgen/errors.h"
#include "amrgen/eval.h"
#include "amrgen/transforms.h"

namespace amrgen {

using nlohmann::json;

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t argmax_excluding_bos(std::span<const double> row) {
  std::size_t best = Vocab::kUnk;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k == Vocab::kBos) continue;
    if (row[k] > row[best]) best = k;
  }
  return best;
}

std::vector<std::string> lowercase_all(const std::vector<std::string>& tokens) {
  std::vector<std::string> out = tokens;
  for (auto& t : out)
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

json to_json(const EncoderConfig& c) {
  return {{"model", to_string(c.kind)},
          {"repr", to_string(c.repr)},
          {"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"gcn_layers", c.gcn_layers},
          {"activation", to_string(c.gcn_activation)},
          {"highway", c.highway},
          {"dropout", c.dropout},
          {"edge_dropout", c.edge_dropout},
          {"src_vocab_size", c.src_vocab_size}};
}

EncoderConfig encoder_config_from_json(const json& j, EncoderConfig c) {
  if (j.contains("model")) {
    std::string name;
    read_key(j, "model", name);
    c.kind = parse_encoder_kind(name);
    c.repr = default_repr(c.kind);
  }
  if (j.contains("repr")) {
    std::string name;
    read_key(j, "repr", name);
    c.repr = parse_input_repr(name);
  }
  read_key(j, "embedding_dim", c.embedding_dim);
  read_key(j, "hidden_dim", c.hidden_dim);
  read_key(j, "gcn_layers", c.gcn_layers);
  if (j.contains("activation")) {
    std::string name;
    read_key(j, "activation", name);
    c.gcn_activation = parse_activation(name);
  }
  read_key(j, "highway", c.highway);
  read_key(j, "dropout", c.dropout);
  read_key(j, "edge_dropout", c.edge_dropout);
  read_key(j, "src_vocab_size", c.src_vocab_size);
  return c;
}

json to_json(const ModelConfig& c) {
  json j = to_json(c.encoder);
  j["target_embedding_dim"] = c.target_embedding_dim;
  j["decoder_hidden_dim"] = c.decoder_hidden_dim;
  j["decoder_dropout"] = c.decoder_dropout;
  j["init_bound"] = c.init_bound;
  return j;
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  c.encoder = encoder_config_from_json(j, c.encoder);
  read_key(j, "target_embedding_dim", c.target_embedding_dim);
  read_key(j, "decoder_hidden_dim", c.decoder_hidden_dim);
  if (j.contains("dropout") && !j.contains("decoder_dropout")) c.decoder_dropout = c.encoder.dropout;
  read_key(j, "decoder_dropout", c.decoder_dropout);
  read_key(j, "init_bound", c.init_bound);
  return c;
}

json to_json(const TrainConfig& c) {
  json j = to_json(c.model);
  j.erase("src_vocab_size");
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["decay"] = c.decay;
  j["decay_start"] = c.decay_start;
  j["patience"] = c.patience;
  j["clip_norm"] = c.clip_norm;
  j["source_min_freq"] = c.source_min_freq;
  j["target_min_freq"] = c.target_min_freq;
  j["max_vocab"] = c.max_vocab;
  j["eval_beam"] = c.eval_beam;
  j["stop_bleu"] = c.stop_bleu;
  j["seed"] = c.seed;
  j["log_timing"] = c.log_timing;
  return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  c.model = model_config_from_json(j, c.model);
  read_key(j, "epochs", c.epochs);
  read_key(j, "batch_size", c.batch_size);
  read_key(j, "learning_rate", c.learning_rate);
  read_key(j, "decay", c.decay);
  read_key(j, "decay_start", c.decay_start);
  read_key(j, "patience", c.patience);
  read_key(j, "clip_norm", c.clip_norm);
  read_key(j, "source_min_freq", c.source_min_freq);
  read_key(j, "target_min_freq", c.target_min_freq);
  read_key(j, "max_vocab", c.max_vocab);
  read_key(j, "eval_beam", c.eval_beam);
  read_key(j, "stop_bleu", c.stop_bleu);
  read_key(j, "seed", c.seed);
  read_key(j, "log_timing", c.log_timing);
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (c.eval_beam == 0) throw ConfigError("eval_beam must be positive");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  return c;
}

Seq2Seq::Seq2Seq(const ModelConfig& config, Vocab source, Vocab target, std::uint64_t seed)
    : config_(config),
      source_(std::move(source)),
      target_(std::move(target)),
      init_rng_(std::make_unique<Rng>(seed)),
      params_(std::make_unique<ParameterSet>(*init_rng_, config.init_bound)) {
  if (config_.decoder_dropout < 0.0 || config_.decoder_dropout >= 1.0)
    throw ConfigError("decoder_dropout must be in [0, 1)");
  if (config_.target_embedding_dim == 0 || config_.decoder_hidden_dim == 0)
    throw ConfigError("decoder sizes must be positive");
  config_.encoder.src_vocab_size = source_.size();
  ParameterSet& p = *params_;
  encoder_ = StackedEncoder(p, config_.encoder);
  const std::size_t enc = config_.encoder.output_dim();
  const std::size_t e = config_.target_embedding_dim;
  const std::size_t h = config_.decoder_hidden_dim;
  target_embed_ = p.weight("decoder.embed", target_.size(), e);
  lstm_ = LstmCell(p, "decoder.lstm", e + h, h);
  bridge_ = Linear(p, "decoder.bridge", enc, h);
  key_ = Linear(p, "decoder.attention.key", enc, h);
  query_ = Linear(p, "decoder.attention.query", h, h, false);
  attention_v_ = p.weight("decoder.attention.v", h, 1);
  combine_ = Linear(p, "decoder.combine", enc + h, h);
  output_ = Linear(p, "decoder.output", h, target_.size());
}

void Seq2Seq::index(Example& example) const {
  example.input.token_ids = source_.ids(example.input.tokens);
  example.input.node_ids = source_.ids(example.input.node_tokens);
}

EncodedSource Seq2Seq::encode(Tape& tape, const Example& example, const EncodeMode& mode) const {
  EncodedSource src;
  src.states = encoder_.encode(tape, example.input, mode);
  src.keys = key_(tape, src.states);
  const double n = static_cast<double>(src.states.rows());
  const Tensor mean = scale(tape, sum_rows(tape, src.states), 1.0 / n);
  src.init.h = tanh(tape, bridge_(tape, mean));
  src.init.c = Tensor::zeros(1, config_.decoder_hidden_dim);
  src.feed = Tensor::zeros(1, config_.decoder_hidden_dim);
  return src;
}

DecoderOutput Seq2Seq::step(Tape& tape, const EncodedSource& src, std::size_t previous,
                            const LstmState& state, const Tensor& feed,
                            const EncodeMode& mode) const {
  const std::array<std::size_t, 1> prev{previous};
  Tensor emb = embedding_lookup(tape, target_embed_, prev);
  if (mode.training && mode.rng && config_.decoder_dropout > 0.0)
    emb = dropout(tape, emb, 1.0 - config_.decoder_dropout, *mode.rng);
  const std::array<Tensor, 2> input{emb, feed};
  DecoderOutput out;
  out.state = lstm_.step(tape, concat(tape, input, 1), state);

  const Tensor energy = tanh(tape, add(tape, src.keys, query_(tape, out.state.h)));
  const Tensor scores = transpose(tape, matmul(tape, energy, attention_v_));
  out.attention = softmax(tape, scores);
  const Tensor context = matmul(tape, out.attention, src.states);
  const std::array<Tensor, 2> joined{context, out.state.h};
  out.feed = tanh(tape, combine_(tape, concat(tape, joined, 1)));
  out.log_probs = log_softmax(tape, output_(tape, out.feed));
  return out;
}

Tensor Seq2Seq::loss(Tape& tape, const Example& example, const std::vector<std::size_t>& target,
                     const EncodeMode& mode) const {
  const EncodedSource src = encode(tape, example, mode);
  LstmState state = src.init;
  Tensor feed = src.feed;
  std::size_t prev = Vocab::kBos;
  std::vector<Tensor> picks;
  picks.reserve(target.size() + 1);
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const std::size_t gold = t < target.size() ? target[t] : Vocab::kEos;
    DecoderOutput out = step(tape, src, prev, state, feed, mode);
    picks.push_back(pick(tape, out.log_probs, 0, gold));
    state = out.state;
    feed = out.feed;
    prev = gold;
  }
  return scale(tape, sum_all(tape, picks), -1.0);
}

Tensor Seq2Seq::loss(Tape& tape, const Example& example, const EncodeMode& mode) const {
  return loss(tape, example, target_.ids(example.target), mode);
}

double Seq2Seq::score(const Example& example, const std::vector<std::string>& sentence,
                      bool include_eos) const {
  const auto ids = target_.ids(anonymize_sentence(lowercase_all(sentence), example.anon_map));
  Tape tape(false);
  const EncodeMode mode;
  const EncodedSource src = encode(tape, example, mode);
  LstmState state = src.init;
  Tensor feed = src.feed;
  std::size_t prev = Vocab::kBos;
  double total = 0.0;
  const std::size_t steps = ids.size() + (include_eos ? 1 : 0);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t gold = t < ids.size() ? ids[t] : Vocab::kEos;
    const DecoderOutput out = step(tape, src, prev, state, feed, mode);
    total += out.log_probs.at(0, gold);
    state = out.state;
    feed = out.feed;
    prev = gold;
  }
  return total;
}

Generation Seq2Seq::finish(const Example& example, std::vector<std::size_t> ids, double log_prob,
                           bool ended) const {
  Generation g;
  for (std::size_t id : ids) g.tokens.push_back(target_.token(id));
  g.surface = deanonymize(g.tokens, example.anon_map);
  g.log_prob = log_prob;
  const std::size_t scored = ids.size() + (ended ? 1 : 0);
  g.score = scored ? log_prob / static_cast<double>(scored) : 0.0;
  g.truncated = !ended;
  return g;
}

Generation Seq2Seq::greedy(const Example& example, const EncodedSource& src,
                           std::size_t max_len) const {
  Tape tape(false);
  const EncodeMode mode;
  LstmState state = src.init;
  Tensor feed = src.feed;
  std::size_t prev = Vocab::kBos;
  std::vector<std::size_t> ids;
  double lp = 0.0;
  for (std::size_t t = 0; t < max_len; ++t) {
    const DecoderOutput out = step(tape, src, prev, state, feed, mode);
    const std::size_t best = argmax_excluding_bos(out.log_probs.data());
    lp += out.log_probs.at(0, best);
    if (best == Vocab::kEos) return finish(example, ids, lp, true);
    ids.push_back(best);
    state = out.state;
    feed = out.feed;
    prev = best;
  }
  return finish(example, ids, lp, false);
}

Generation Seq2Seq::generate(const Example& example, std::size_t beam, std::size_t max_len) const {
  if (beam == 0) throw ConfigError("beam must be at least 1");
  if (max_len == 0) max_len = 2 * example.input.length() + 10;
  Tape tape(false);
  const EncodeMode mode;
  const EncodedSource src = encode(tape, example, mode);
  Generation best_greedy = greedy(example, src, max_len);
  if (beam == 1) return best_greedy;

  struct Hyp {
    std::vector<std::size_t> ids;
    LstmState state;
    Tensor feed;
    double lp = 0.0;
  };
  struct Candidate {
    double lp;
    std::size_t hyp;
    std::size_t token;
  };
  std::vector<Hyp> beams{{{}, src.init, src.feed, 0.0}};
  std::vector<std::pair<std::vector<std::size_t>, double>> finished;

  for (std::size_t t = 0; t < max_len && !beams.empty() && finished.size() < beam; ++t) {
    std::vector<DecoderOutput> outs;
    std::vector<Candidate> cands;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const Hyp& h = beams[b];
      outs.push_back(step(tape, src, h.ids.empty() ? Vocab::kBos : h.ids.back(), h.state, h.feed,
                          mode));
      const auto row = outs.back().log_probs.data();
      for (std::size_t k = 0; k < row.size(); ++k)
        if (k != Vocab::kBos) cands.push_back({h.lp + row[k], b, k});
    }
    const std::size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.lp != b.lp) return a.lp > b.lp;
                        if (a.hyp != b.hyp) return a.hyp < b.hyp;
                        return a.token < b.token;
                      });
    std::vector<Hyp> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = cands[c];
      const Hyp& parent = beams[cand.hyp];
      if (cand.token == Vocab::kEos) {
        finished.emplace_back(parent.ids, cand.lp);
        continue;
      }
      Hyp h{parent.ids, outs[cand.hyp].state, outs[cand.hyp].feed, cand.lp};
      h.ids.push_back(cand.token);
      next.push_back(std::move(h));
    }
    beams = std::move(next);
  }

  Generation best;
  bool have = false;
  for (const auto& [ids, lp] : finished) {
    Generation g = finish(example, ids, lp, true);
    if (!have || g.score > best.score) {
      best = std::move(g);
      have = true;
    }
  }
  if (!have) {
    for (const auto& h : beams) {
      Generation g = finish(example, h.ids, h.lp, false);
      if (!have || g.score > best.score) {
        best = std::move(g);
        have = true;
      }
    }
  }
  if (!have || best_greedy.score > best.score) return best_greedy;
  return best;
}

Vocab build_source_vocab(const std::vector<Record>& records, const TrainConfig& config) {
  Vocab v = Vocab::build(source_counts(records), config.source_min_freq);
  if (v.size() > config.max_vocab)
    throw ConfigError("source vocabulary has " + std::to_string(v.size()) +
                      " entries, above max_vocab " + std::to_string(config.max_vocab));
  return v;
}

Vocab build_target_vocab(const std::vector<Record>& records, const TrainConfig& config) {
  Vocab v = Vocab::build(target_counts(records), config.target_min_freq);
  if (v.size() > config.max_vocab)
    throw ConfigError("target vocabulary has " + std::to_string(v.size()) +
                      " entries, above max_vocab " + std::to_string(config.max_vocab));
  return v;
}

double evaluate_bleu(const Seq2Seq& model, const std::vector<Example>& examples, std::size_t beam) {
  std::vector<Sentence> hyps, refs;
  for (const auto& ex : examples) {
    hyps.push_back(model.generate(ex, beam).surface);
    refs.push_back(ex.reference);
  }
  return corpus_bleu(hyps, refs);
}

std::string to_json_line(const EpochLog& log, bool with_seconds) {
  json j = {{"epoch", log.epoch},
            {"train_loss", log.train_loss},
            {"dev_bleu", log.dev_bleu},
            {"lr", log.lr}};
  if (with_seconds) j["seconds"] = log.seconds;
  return j.dump();
}

TrainResult train(const std::vector<Record>& train_set, const std::vector<Record>& dev_set,
                  const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_set.empty()) throw DataError("training corpus is empty");
  if (dev_set.empty()) throw DataError("development corpus is empty");
  config.model.encoder.validate();

  TrainResult result;
  result.model = std::make_unique<Seq2Seq>(config.model, build_source_vocab(train_set, config),
                                           build_target_vocab(train_set, config), config.seed);
  Seq2Seq& model = *result.model;
  const InputRepr repr = config.model.encoder.repr;
  std::vector<Example> examples = make_examples(train_set, repr);
  std::vector<Example> dev = make_examples(dev_set, repr);
  std::vector<std::vector<std::size_t>> targets;
  for (auto& ex : examples) {
    model.index(ex);
    targets.push_back(model.target_vocab().ids(ex.target));
  }
  for (auto& ex : dev) model.index(ex);

  Rng rng(config.seed + 1);
  std::vector<Tensor> params = model.params().tensors();
  model.params().ensure_grads();
  model.params().zero_grads();
  LrSchedule schedule(config.learning_rate, config.decay);
  schedule.set_start_epoch(config.decay_start);

  std::vector<std::vector<double>> best_values;
  auto snapshot = [&] {
    best_values.clear();
    for (const auto& t : params) best_values.emplace_back(t.data().begin(), t.data().end());
  };

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  const EncodeMode mode{true, &rng};

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = schedule.lr();
    double loss_sum = 0.0;
    std::size_t token_count = 0;
    std::size_t batch_id = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_id) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Tape tape;
        const Tensor loss = model.loss(tape, examples[i], targets[i], mode);
        const double value = loss.item();
        if (!std::isfinite(value))
          throw NumericError("non-finite loss in batch " + std::to_string(batch_id) + " of epoch " +
                             std::to_string(epoch) + " (example " + examples[i].id + ")");
        loss_sum += value;
        token_count += targets[i].size() + 1;
        tape.backward(scale(tape, loss, inv));
      }
      const double norm = clip_grad_norm(params, config.clip_norm);
      if (!std::isfinite(norm))
        throw NumericError("non-finite gradient in batch " + std::to_string(batch_id) +
                           " of epoch " + std::to_string(epoch));
      sgd_step(params, lr);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(token_count);
    entry.dev_bleu = evaluate_bleu(model, dev, config.eval_beam);
    entry.lr = lr;
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (best_values.empty() || entry.dev_bleu > result.best_dev_bleu) {
      snapshot();
      result.best_epoch = epoch;
      result.best_dev_bleu = entry.dev_bleu;
    }
    schedule.update(epoch, entry.dev_bleu);
    if (config.stop_bleu > 0.0 && entry.dev_bleu >= config.stop_bleu) break;
    if (config.patience > 0 && schedule.epochs_since_improvement() >= config.patience) break;
  }

  for (std::size_t k = 0; k < params.size(); ++k)
    std::copy(best_values[k].begin(), best_values[k].end(), params[k].data().begin());
  model.params().zero_grads();
  return result;
}

}  // namespace amrgen
