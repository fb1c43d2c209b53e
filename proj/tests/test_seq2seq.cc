#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "amrgen/checkpoint.h"
#include "amrgen/corpus.h"
#include "amrgen/errors.h"
#include "amrgen/seq2seq.h"
#include "test_util.h"

namespace amrgen {
namespace {

using testing::grad_check;

std::vector<Record> records_from(const std::string& text) {
  PreprocessOptions opts;
  opts.rare_threshold = 0;
  return preprocess(split_amr_blocks(text, "inline"), opts).records;
}

const std::vector<Record>& toy10() {
  static const std::vector<Record> records = [] {
    PreprocessOptions opts;
    opts.rare_threshold = 0;
    return preprocess(read_amr_blocks(testing::toy_data() / "train10"), opts).records;
  }();
  return records;
}

constexpr const char* kTwo =
    "# ::id a\n# ::snt John ate the pizza with his fingers .\n"
    "(e / eat-01 :ARG0 (p / person :name (n / name :op1 \"John\")) :ARG1 (z / pizza)"
    " :instrument (f / finger :part-of p))\n\n"
    "# ::id b\n# ::snt The boy wants to go .\n"
    "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))\n";

TrainConfig tiny(EncoderKind kind) {
  TrainConfig c;
  c.model.encoder.kind = kind;
  c.model.encoder.repr = default_repr(kind);
  c.model.encoder.embedding_dim = 4;
  c.model.encoder.hidden_dim = 6;
  c.model.encoder.dropout = 0.0;
  c.model.encoder.edge_dropout = 0.0;
  c.model.target_embedding_dim = 4;
  c.model.decoder_hidden_dim = 6;
  c.model.decoder_dropout = 0.0;
  c.model.init_bound = 0.5;
  c.target_min_freq = 1;
  return c;
}

std::unique_ptr<Seq2Seq> build(const std::vector<Record>& records, TrainConfig c,
                               std::uint64_t seed = 1) {
  Vocab src = build_source_vocab(records, c);
  Vocab tgt = build_target_vocab(records, c);
  c.model.encoder.src_vocab_size = src.size();
  return std::make_unique<Seq2Seq>(c.model, std::move(src), std::move(tgt), seed);
}

Example example_for(const Seq2Seq& model, const Record& r) {
  Example ex = make_example(r, model.config().encoder.repr);
  model.index(ex);
  return ex;
}

std::vector<double> snapshot(const Seq2Seq& model) {
  std::vector<double> out;
  for (const auto& [name, t] : model.params().entries()) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

TEST(Seq2SeqConfig, JsonRoundTrip) {
  TrainConfig c = tiny(EncoderKind::SeqTreeLSTM);
  c.model.encoder.gcn_layers = 3;
  c.model.encoder.highway = false;
  c.epochs = 7;
  c.stop_bleu = 90;
  const TrainConfig back = train_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Seq2SeqConfig, ModelNameSelectsDefaultRepr) {
  const ModelConfig m = model_config_from_json({{"model", "TreeLSTMSeq"}});
  EXPECT_EQ(m.encoder.kind, EncoderKind::TreeLSTMSeq);
  EXPECT_EQ(m.encoder.repr, InputRepr::Tree);
  const ModelConfig g = model_config_from_json({{"model", "GCN"}, {"repr", "tree"}});
  EXPECT_EQ(g.encoder.repr, InputRepr::Tree);
  EXPECT_THROW(model_config_from_json({{"hidden_dim", "big"}}), ConfigError);
  EXPECT_THROW(model_config_from_json({{"model", "RNN"}}), ConfigError);
}

TEST(Seq2SeqConfig, DropoutKeyCoversDecoder) {
  const ModelConfig m = model_config_from_json({{"dropout", 0.1}});
  EXPECT_DOUBLE_EQ(m.decoder_dropout, 0.1);
  const ModelConfig n = model_config_from_json({{"dropout", 0.1}, {"decoder_dropout", 0.2}});
  EXPECT_DOUBLE_EQ(n.decoder_dropout, 0.2);
}

TEST(Seq2SeqGrad, FullModelForEveryEncoder) {
  const auto records = records_from(kTwo);
  ASSERT_EQ(records.size(), 2u);
  for (auto kind : all_encoder_kinds()) {
    auto model = build(records, tiny(kind));
    const Example ex = example_for(*model, records[0]);
    const auto r = grad_check([&](Tape& tape) { return model->loss(tape, ex, {}); },
                              model->params().tensors(), 1e-4);
    EXPECT_LE(r.max_relative_error, 1e-4)
        << to_string(kind) << " at " << model->params().entries()[r.worst_tensor].first << "["
        << r.worst_element << "] analytic " << r.worst_analytic << " numeric " << r.worst_numeric;
  }
}

TEST(Seq2Seq, ScoreIsNegativeLoss) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::GCNSeq));
  for (const Record& r : records) {
    const Example ex = example_for(*model, r);
    Tape tape(false);
    const double loss = model->loss(tape, ex, {}).item();
    EXPECT_NEAR(model->score(ex, ex.reference), -loss, 1e-9);
  }
}

TEST(Seq2Seq, ScoreAnonymizesAndLowercases) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::Seq));
  const Example ex = example_for(*model, records[0]);
  ASSERT_FALSE(ex.anon_map.empty());
  const std::vector<std::string> surface = {"John", "ate", "the", "pizza", "with", "his", "fingers", "."};
  EXPECT_DOUBLE_EQ(model->score(ex, surface), model->score(ex, ex.reference));
}

TEST(Seq2Seq, ScoreIsPure) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::SeqTreeLSTM));
  const Example ex = example_for(*model, records[1]);
  const auto before = snapshot(*model);
  const double a = model->score(ex, ex.reference);
  const double b = model->score(ex, ex.reference);
  EXPECT_EQ(a, b);
  EXPECT_EQ(snapshot(*model), before);
  EXPECT_LT(a, 0.0);
}

TEST(Seq2Seq, AppendingATokenLowersThePrefixScore) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::TreeLSTMSeq));
  const Example ex = example_for(*model, records[1]);
  std::vector<std::string> prefix;
  double last = model->score(ex, prefix, false);
  EXPECT_EQ(last, 0.0);
  for (const auto& tok : ex.reference) {
    prefix.push_back(tok);
    const double s = model->score(ex, prefix, false);
    EXPECT_LT(s, last);
    last = s;
  }
  EXPECT_LT(model->score(ex, prefix, true), last);
}

TEST(Seq2Seq, AttentionIsADistribution) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::GCN));
  const Example ex = example_for(*model, records[0]);
  Tape tape(false);
  const EncodedSource src = model->encode(tape, ex, {});
  LstmState state = src.init;
  Tensor feed = src.feed;
  std::size_t prev = Vocab::kBos;
  for (int t = 0; t < 5; ++t) {
    const DecoderOutput out = model->step(tape, src, prev, state, feed, {});
    ASSERT_EQ(out.attention.cols(), ex.input.length());
    double sum = 0.0;
    for (std::size_t k = 0; k < out.attention.cols(); ++k) {
      EXPECT_GE(out.attention.at(0, k), 0.0);
      sum += out.attention.at(0, k);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    double mass = 0.0;
    for (std::size_t k = 0; k < out.log_probs.cols(); ++k) mass += std::exp(out.log_probs.at(0, k));
    EXPECT_NEAR(mass, 1.0, 1e-12);
    state = out.state;
    feed = out.feed;
    prev = Vocab::kUnk;
  }
}

// Greedy decoding by hand through step(): pick the best non-BOS id until EOS.
std::vector<std::string> manual_greedy(const Seq2Seq& model, const Example& ex, std::size_t max_len) {
  Tape tape(false);
  const EncodedSource src = model.encode(tape, ex, {});
  LstmState state = src.init;
  Tensor feed = src.feed;
  std::size_t prev = Vocab::kBos;
  std::vector<std::string> out;
  for (std::size_t t = 0; t < max_len; ++t) {
    const DecoderOutput step = model.step(tape, src, prev, state, feed, {});
    std::size_t best = Vocab::kUnk;
    for (std::size_t k = 0; k < step.log_probs.cols(); ++k) {
      if (k == Vocab::kBos) continue;
      if (step.log_probs.at(0, k) > step.log_probs.at(0, best)) best = k;
    }
    if (best == Vocab::kEos) break;
    out.push_back(model.target_vocab().token(best));
    prev = best;
    state = step.state;
    feed = step.feed;
  }
  return out;
}

TEST(Decoding, BeamOneIsGreedy) {
  const auto& records = toy10();
  for (auto kind : {EncoderKind::Seq, EncoderKind::GCNSeq, EncoderKind::TreeLSTMSeq}) {
    auto model = build(records, tiny(kind), 3);
    for (const Record& r : records) {
      const Example ex = example_for(*model, r);
      const Generation g = model->generate(ex, 1, 12);
      EXPECT_EQ(g.tokens, manual_greedy(*model, ex, 12)) << r.id;
      if (!g.truncated) EXPECT_NEAR(g.log_prob, model->score(ex, g.tokens), 1e-9);
    }
  }
}

TEST(Decoding, WiderBeamNeverScoresBelowGreedy) {
  const auto& records = toy10();
  auto model = build(records, tiny(EncoderKind::GCNSeq), 4);
  for (const Record& r : records) {
    const Example ex = example_for(*model, r);
    const Generation greedy = model->generate(ex, 1);
    const Generation beam = model->generate(ex, 5);
    EXPECT_GE(beam.score, greedy.score - 1e-12) << r.id;
    if (!beam.truncated) {
      const double n = static_cast<double>(beam.tokens.size() + 1);
      EXPECT_NEAR(beam.score, beam.log_prob / n, 1e-12);
    }
  }
}

TEST(Decoding, SurfaceIsDeanonymized) {
  const auto records = records_from(kTwo);
  auto model = build(records, tiny(EncoderKind::Seq));
  Example ex = example_for(*model, records[0]);
  const Generation g = model->generate(ex, 1, 30);
  ASSERT_EQ(g.tokens.size(), g.surface.size());
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    if (g.tokens[i] == "person_name_0")
      EXPECT_EQ(g.surface[i], "John");
    else
      EXPECT_EQ(g.surface[i], g.tokens[i]);
  }
}

TEST(Training, MemorizesTheToySplit) {
  TrainConfig c;
  c.model.encoder.kind = EncoderKind::Seq;
  c.model.encoder.repr = InputRepr::Sequence;
  c.model.encoder.dropout = 0.0;
  c.model.decoder_dropout = 0.0;
  c.target_min_freq = 1;
  c.batch_size = 1;
  c.learning_rate = 0.5;
  c.model.init_bound = 0.2;
  c.decay_start = 1000000;
  c.patience = 0;
  c.epochs = 200;
  const TrainResult result = train(toy10(), toy10(), c);
  ASSERT_EQ(result.log.size(), 200u);
  EXPECT_LT(result.log.back().train_loss, 0.1);
  EXPECT_GE(result.best_dev_bleu, 95.0);
}

TEST(Training, DecaysOnStallAndStopsEarly) {
  TrainConfig c = tiny(EncoderKind::Seq);
  c.batch_size = 5;
  c.learning_rate = 0.01;
  c.decay = 0.5;
  c.patience = 2;
  c.epochs = 40;
  const TrainResult result = train(toy10(), toy10(), c);
  ASSERT_GE(result.log.size(), 2u);
  EXPECT_LT(result.log.size(), 40u);
  for (std::size_t i = 1; i < result.log.size(); ++i)
    EXPECT_LE(result.log[i].lr, result.log[i - 1].lr);
  EXPECT_LT(result.log.back().lr, 0.01);
}

TEST(Training, StopsAtTargetBleu) {
  TrainConfig c = tiny(EncoderKind::Seq);
  c.stop_bleu = 1e-9;
  c.epochs = 50;
  c.patience = 0;
  // Any positive dev BLEU stops training; with BLEU 0 every epoch runs.
  const TrainResult result = train(toy10(), toy10(), c);
  if (result.log.size() < 50u) EXPECT_GE(result.log.back().dev_bleu, c.stop_bleu);
  EXPECT_DOUBLE_EQ(result.best_dev_bleu,
                   std::max_element(result.log.begin(), result.log.end(), [](auto& a, auto& b) {
                     return a.dev_bleu < b.dev_bleu;
                   })->dev_bleu);
}

TEST(Training, EmptyCorpusIsADataError) {
  EXPECT_THROW(train({}, toy10(), tiny(EncoderKind::Seq)), DataError);
}

TEST(Training, SameSeedSameRun) {
  TrainConfig c = tiny(EncoderKind::GCNSeq);
  c.model.encoder.dropout = 0.2;
  c.model.encoder.edge_dropout = 0.2;
  c.model.decoder_dropout = 0.2;
  c.epochs = 3;
  c.batch_size = 3;
  const TrainResult a = train(toy10(), toy10(), c);
  const TrainResult b = train(toy10(), toy10(), c);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i)
    EXPECT_EQ(to_json_line(a.log[i], false), to_json_line(b.log[i], false));
  EXPECT_EQ(snapshot(*a.model), snapshot(*b.model));
  c.seed = 2;
  const TrainResult d = train(toy10(), toy10(), c);
  EXPECT_NE(snapshot(*a.model), snapshot(*d.model));
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto& records = toy10();
  auto model = build(records, tiny(EncoderKind::SeqTreeLSTM), 9);
  CheckpointInfo info;
  info.seed = 9;
  info.epoch = 4;
  info.dev_bleu = 12.5;
  const std::string bytes = serialize_checkpoint(*model, info);
  const LoadedCheckpoint loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(*loaded.model, loaded.info), bytes);
  EXPECT_EQ(snapshot(*loaded.model), snapshot(*model));
  EXPECT_EQ(loaded.info.epoch, 4u);
  EXPECT_EQ(loaded.model->target_vocab().tokens(), model->target_vocab().tokens());
  const Example a = example_for(*model, records[2]);
  const Example b = example_for(*loaded.model, records[2]);
  EXPECT_EQ(model->generate(a, 3).tokens, loaded.model->generate(b, 3).tokens);

  const auto dir = testing::fresh_dir("ckpt");
  save_checkpoint(dir / "m.ckpt", *model, info);
  EXPECT_EQ(read_file(dir / "m.ckpt"), bytes);
  EXPECT_EQ(snapshot(*load_checkpoint(dir / "m.ckpt").model), snapshot(*model));
}

TEST(Checkpoint, CorruptionIsDetected) {
  auto model = build(records_from(kTwo), tiny(EncoderKind::Seq));
  const std::string bytes = serialize_checkpoint(*model, {});
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), DataError);
  EXPECT_THROW(deserialize_checkpoint("not a checkpoint"), DataError);
  std::string tampered = bytes;
  const auto pos = tampered.find("\"hidden_dim\":6");
  ASSERT_NE(pos, std::string::npos);
  tampered[pos + 13] = '8';
  EXPECT_THROW(deserialize_checkpoint(tampered), DataError);
  EXPECT_THROW(load_checkpoint(testing::fresh_dir("nockpt") / "missing.ckpt"), DataError);
}

}  // namespace
}  // namespace amrgen
