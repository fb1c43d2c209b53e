#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amrgen/corpus.h"
#include "amrgen/encoders.h"
#include "amrgen/nn.h"
#include "amrgen/tensor.h"
#include "amrgen/vocab.h"

namespace amrgen {

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t target_embedding_dim = 32;
  std::size_t decoder_hidden_dim = 64;
  double decoder_dropout = 0.3;  // on decoder input embeddings
  double init_bound = 0.1;
};

nlohmann::json to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j, EncoderConfig base = {});
nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

// Encoder rows plus everything the decoder precomputes from them.
struct EncodedSource {
  Tensor states;  // N x enc
  Tensor keys;    // N x attention
  LstmState init;
  Tensor feed;    // 1 x decoder hidden, zeros
};

struct DecoderOutput {
  LstmState state;
  Tensor feed;       // attentional hidden state, fed to the next step
  Tensor attention;  // 1 x N
  Tensor log_probs;  // 1 x |target vocab|
};

struct Generation {
  std::vector<std::string> tokens;   // target-side tokens, placeholders intact
  std::vector<std::string> surface;  // de-anonymized
  double log_prob = 0.0;             // including end of sentence when reached
  double score = 0.0;                // log_prob / number of scored tokens
  bool truncated = false;            // max length reached without end of sentence
};

// Encoder stack with an attentional LSTM decoder. The decoder uses additive
// attention over encoder rows and input feeding; its first state is
// tanh(mean(encoder rows) W + b).
class Seq2Seq {
 public:
  Seq2Seq(const ModelConfig& config, Vocab source, Vocab target, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocab& source_vocab() const { return source_; }
  const Vocab& target_vocab() const { return target_; }
  ParameterSet& params() { return *params_; }
  const ParameterSet& params() const { return *params_; }
  const StackedEncoder& encoder() const { return encoder_; }

  // Fills the encoder input's vocabulary ids.
  void index(Example& example) const;

  EncodedSource encode(Tape& tape, const Example& example, const EncodeMode& mode) const;
  DecoderOutput step(Tape& tape, const EncodedSource& source, std::size_t previous,
                     const LstmState& state, const Tensor& feed, const EncodeMode& mode) const;

  // Summed negative log-likelihood of `target` (ids, no end marker) plus the
  // end marker, teacher-forced.
  Tensor loss(Tape& tape, const Example& example, const std::vector<std::size_t>& target,
              const EncodeMode& mode) const;
  Tensor loss(Tape& tape, const Example& example, const EncodeMode& mode) const;

  // Total log-probability of a sentence given the example, dropout off. The
  // tokens are lowercased and anonymized with the example's map first.
  double score(const Example& example, const std::vector<std::string>& sentence,
               bool include_eos = true) const;

  // beam == 1 is greedy. max_len == 0 means 2 * source length + 10.
  Generation generate(const Example& example, std::size_t beam = 1, std::size_t max_len = 0) const;

 private:
  Generation greedy(const Example& example, const EncodedSource& src, std::size_t max_len) const;
  Generation finish(const Example& example, std::vector<std::size_t> ids, double log_prob,
                    bool ended) const;

  ModelConfig config_;
  Vocab source_;
  Vocab target_;
  std::unique_ptr<Rng> init_rng_;
  std::unique_ptr<ParameterSet> params_;
  StackedEncoder encoder_;
  Tensor target_embed_;
  LstmCell lstm_;
  Linear bridge_;
  Linear key_;
  Linear query_;
  Tensor attention_v_;
  Linear combine_;
  Linear output_;
};

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 30;
  std::size_t batch_size = 100;
  double learning_rate = 1.0;
  double decay = 0.8;
  std::size_t decay_start = 1;  // first epoch at which decay may apply
  std::size_t patience = 5;     // 0 disables early stopping
  double clip_norm = 5.0;
  std::size_t source_min_freq = 1;
  std::size_t target_min_freq = 2;
  std::size_t max_vocab = 50000;
  std::size_t eval_beam = 1;     // beam used for dev BLEU
  double stop_bleu = 0.0;        // stop once dev BLEU reaches this; 0 disables
  std::uint64_t seed = 1;
  bool log_timing = false;       // adds wall-clock seconds to the log
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per target token
  double dev_bleu = 0.0;
  double lr = 0.0;          // rate used during the epoch
  double seconds = 0.0;
};

std::string to_json_line(const EpochLog& log, bool with_seconds);

struct TrainResult {
  std::unique_ptr<Seq2Seq> model;  // best-dev parameters
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_dev_bleu = 0.0;
};

// Teacher-forced SGD with gradient clipping, learning-rate decay on stalled
// dev BLEU and early stopping. The returned model holds the best-dev weights.
// `on_epoch`, if set, sees each log entry as it is produced.
TrainResult train(const std::vector<Record>& train_set, const std::vector<Record>& dev_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Builds both vocabularies from training records.
Vocab build_source_vocab(const std::vector<Record>& records, const TrainConfig& config);
Vocab build_target_vocab(const std::vector<Record>& records, const TrainConfig& config);

// Corpus BLEU of de-anonymized generations against the references.
double evaluate_bleu(const Seq2Seq& model, const std::vector<Example>& examples, std::size_t beam);

}  // namespace amrgen
