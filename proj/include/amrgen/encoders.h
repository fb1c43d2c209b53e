#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "amrgen/amr.h"
#include "amrgen/nn.h"
#include "amrgen/tensor.h"

namespace amrgen {

enum class EncoderKind { Seq, SeqGCN, GCNSeq, SeqTreeLSTM, TreeLSTMSeq, GCN, TreeLSTM };
enum class InputRepr { Sequence, Tree, Graph };

EncoderKind parse_encoder_kind(const std::string& name);
std::string to_string(EncoderKind kind);
InputRepr parse_input_repr(const std::string& name);
std::string to_string(InputRepr repr);
const std::vector<EncoderKind>& all_encoder_kinds();

bool uses_gcn(EncoderKind kind);
bool uses_treelstm(EncoderKind kind);
bool uses_bilstm(EncoderKind kind);
// The representation a kind runs on when none is given: sequence for Seq,
// tree for TreeLSTM kinds, graph for GCN kinds.
InputRepr default_repr(EncoderKind kind);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Seq;
  InputRepr repr = InputRepr::Sequence;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;  // BiLSTM / TreeLSTM output width, split evenly over directions
  std::size_t gcn_layers = 2;
  Activation gcn_activation = Activation::Relu;
  bool highway = true;
  double dropout = 0.3;
  double edge_dropout = 0.1;
  std::size_t src_vocab_size = 0;

  // Throws ConfigError when kind and repr disagree or sizes are unusable.
  void validate() const;
  std::size_t output_dim() const;
};

// Everything an encoder needs about one example. The structure is the Levi
// graph of the AMR (graph repr) or of its tree conversion (tree/sequence);
// position_node maps each linearization position to the structure node it
// stands for and node_position each structure node to its first position.
struct EncoderInput {
  InputRepr repr = InputRepr::Sequence;
  std::vector<std::string> tokens;
  std::vector<std::string> node_tokens;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> position_node;
  std::vector<std::size_t> node_position;
  std::vector<std::size_t> token_ids;  // filled from a vocabulary
  std::vector<std::size_t> node_ids;

  std::size_t length() const { return tokens.size(); }
  std::size_t node_count() const { return node_tokens.size(); }
};

EncoderInput make_encoder_input(const AmrGraph& graph, InputRepr repr);

// Per-call behavior. Dropout and edge dropout apply only when training.
struct EncodeMode {
  bool training = false;
  Rng* rng = nullptr;
};

class BiLstmEncoder {
 public:
  BiLstmEncoder() = default;
  BiLstmEncoder(ParameterSet& params, const std::string& name, std::size_t input_dim,
                std::size_t output_dim);

  // N x input_dim -> N x output_dim; row i is [forward_i ; backward_i].
  Tensor encode(Tape& tape, const Tensor& inputs) const;

 private:
  LstmCell forward_;
  LstmCell backward_;
};

struct TreeStates {
  Tensor up;    // M x h, bottom-up Child-Sum states
  Tensor down;  // M x h, top-down states
  Tensor out;   // M x 2h, [down ; up]
};

// Bidirectional Child-Sum TreeLSTM. The bottom-up pass sums children's hidden
// states into the gates (one forget gate per child); the top-down pass starts
// from tanh(W_r h_root_up + b) and runs an LSTM step at every other node with
// input h_i_up and previous state taken from the parent's bottom-up pass.
class TreeLstmEncoder {
 public:
  TreeLstmEncoder() = default;
  TreeLstmEncoder(ParameterSet& params, const std::string& name, std::size_t input_dim,
                  std::size_t output_dim);

  // Throws DataError if the structure is not a single rooted tree.
  TreeStates encode(Tape& tape, std::size_t node_count,
                    const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                    const Tensor& inputs) const;

 private:
  std::size_t hidden_ = 0;
  Linear w_iou_;
  Linear u_iou_;
  Linear w_f_;
  Linear u_f_;
  Linear root_;
  LstmCell down_;
};

// Directed GCN: h_i' = act(sum_{j->i} h_j W_in + sum_{i->j} h_j W_out + b),
// followed by a highway gate t = sigmoid(h_i W_t + b_t) mixing the layer
// output with its input: t * h_i' + (1 - t) * h_i.
class GcnEncoder {
 public:
  GcnEncoder() = default;
  GcnEncoder(ParameterSet& params, const std::string& name, std::size_t dim, std::size_t layers,
             Activation activation, bool highway);

  Tensor encode(Tape& tape, std::size_t node_count,
                const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                const Tensor& inputs, double edge_dropout, const EncodeMode& mode) const;

  struct Layer {
    Linear w_in;
    Linear w_out;  // carries the layer bias
    Linear gate;
  };
  std::vector<Layer>& layers() { return layers_; }

 private:
  std::vector<Layer> layers_;
  Activation activation_ = Activation::Relu;
  bool highway_ = true;
};

// One of the seven encoder stackings. Output rows are always in
// linearization order.
class StackedEncoder {
 public:
  StackedEncoder() = default;
  StackedEncoder(ParameterSet& params, const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }

  // Looks up token/node embeddings from input.token_ids / node_ids.
  Tensor encode(Tape& tape, const EncoderInput& input, const EncodeMode& mode) const;

  // Same as encode but with caller-supplied embeddings (N x d for the
  // linearization, M x d for structure nodes). Either may be undefined when the
  // kind does not read it.
  Tensor encode_embeddings(Tape& tape, const EncoderInput& input, const Tensor& token_embeddings,
                           const Tensor& node_embeddings, const EncodeMode& mode) const;

  const Tensor& embeddings() const { return embed_; }

 private:
  Tensor structural(Tape& tape, const EncoderInput& input, const Tensor& node_states,
                    const EncodeMode& mode) const;

  EncoderConfig config_;
  Tensor embed_;
  BiLstmEncoder bilstm_;
  TreeLstmEncoder tree_;
  GcnEncoder gcn_;
};

}  // namespace amrgen
