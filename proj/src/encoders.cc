#include "amrgen/encoders.h"

#include <algorithm>
#include <array>

#include "amrgen/errors.h"
#include "amrgen/transforms.h"

namespace amrgen {

namespace {

constexpr std::array<std::pair<EncoderKind, const char*>, 7> kKindNames{{
    {EncoderKind::Seq, "Seq"},
    {EncoderKind::SeqGCN, "SeqGCN"},
    {EncoderKind::GCNSeq, "GCNSeq"},
    {EncoderKind::SeqTreeLSTM, "SeqTreeLSTM"},
    {EncoderKind::TreeLSTMSeq, "TreeLSTMSeq"},
    {EncoderKind::GCN, "GCN"},
    {EncoderKind::TreeLSTM, "TreeLSTM"},
}};

}  // namespace

EncoderKind parse_encoder_kind(const std::string& name) {
  for (const auto& [kind, n] : kKindNames)
    if (name == n) return kind;
  throw ConfigError("unknown model '" + name +
                    "' (expected Seq, SeqGCN, GCNSeq, SeqTreeLSTM, TreeLSTMSeq, GCN, TreeLSTM)");
}

std::string to_string(EncoderKind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "Seq";
}

const std::vector<EncoderKind>& all_encoder_kinds() {
  static const std::vector<EncoderKind> kinds = [] {
    std::vector<EncoderKind> out;
    for (const auto& [k, n] : kKindNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

InputRepr parse_input_repr(const std::string& name) {
  if (name == "sequence") return InputRepr::Sequence;
  if (name == "tree") return InputRepr::Tree;
  if (name == "graph") return InputRepr::Graph;
  throw ConfigError("unknown representation '" + name + "' (expected sequence, tree, graph)");
}

std::string to_string(InputRepr repr) {
  switch (repr) {
    case InputRepr::Sequence: return "sequence";
    case InputRepr::Tree: return "tree";
    case InputRepr::Graph: return "graph";
  }
  return "sequence";
}

bool uses_gcn(EncoderKind kind) {
  return kind == EncoderKind::SeqGCN || kind == EncoderKind::GCNSeq || kind == EncoderKind::GCN;
}

bool uses_treelstm(EncoderKind kind) {
  return kind == EncoderKind::SeqTreeLSTM || kind == EncoderKind::TreeLSTMSeq ||
         kind == EncoderKind::TreeLSTM;
}

bool uses_bilstm(EncoderKind kind) { return kind != EncoderKind::GCN && kind != EncoderKind::TreeLSTM; }

InputRepr default_repr(EncoderKind kind) {
  if (kind == EncoderKind::Seq) return InputRepr::Sequence;
  if (uses_treelstm(kind)) return InputRepr::Tree;
  return InputRepr::Graph;
}

void EncoderConfig::validate() const {
  if (kind == EncoderKind::Seq && repr != InputRepr::Sequence)
    throw ConfigError("Seq requires the sequence representation");
  if (uses_treelstm(kind) && repr != InputRepr::Tree)
    throw ConfigError(to_string(kind) + " requires the tree representation");
  if (uses_gcn(kind) && repr == InputRepr::Sequence)
    throw ConfigError(to_string(kind) + " requires the tree or graph representation");
  if (embedding_dim == 0 || hidden_dim == 0) throw ConfigError("dimensions must be positive");
  if (hidden_dim % 2 != 0) throw ConfigError("hidden_dim must be even (split over two directions)");
  if (uses_gcn(kind) && gcn_layers == 0) throw ConfigError("gcn_layers must be at least 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (edge_dropout < 0.0 || edge_dropout >= 1.0) throw ConfigError("edge_dropout must be in [0, 1)");
}

std::size_t EncoderConfig::output_dim() const {
  return kind == EncoderKind::GCN ? embedding_dim : hidden_dim;
}

EncoderInput make_encoder_input(const AmrGraph& graph, InputRepr repr) {
  EncoderInput in;
  in.repr = repr;
  AmrTree tree;
  const AmrGraph* source = &graph;
  if (repr != InputRepr::Graph) {
    tree = to_tree(graph);
    source = &tree.graph;
  }
  const LeviGraph levi = to_levi(*source);
  const TokenSequence seq = linearize(*source);

  in.tokens = seq.tokens;
  for (const auto& n : levi.nodes) in.node_tokens.push_back(n.token);
  in.edges = levi.edges;
  const std::size_t concepts = source->nodes.size();
  in.node_position.assign(levi.nodes.size(), kNoNode);
  for (std::size_t p = 0; p < seq.alignment.size(); ++p) {
    const auto& a = seq.alignment[p];
    const std::size_t node = a.kind == TokenKind::Concept ? a.index : concepts + a.index;
    in.position_node.push_back(node);
    if (in.node_position[node] == kNoNode) in.node_position[node] = p;
  }
  // Nodes outside the linearization (unreachable) read position 0.
  for (auto& p : in.node_position)
    if (p == kNoNode) p = 0;
  return in;
}

BiLstmEncoder::BiLstmEncoder(ParameterSet& params, const std::string& name, std::size_t input_dim,
                             std::size_t output_dim)
    : forward_(params, name + ".fwd", input_dim, output_dim / 2),
      backward_(params, name + ".bwd", input_dim, output_dim / 2) {}

Tensor BiLstmEncoder::encode(Tape& tape, const Tensor& inputs) const {
  const std::size_t n = inputs.rows();
  std::vector<Tensor> fwd(n), bwd(n);
  LstmState s = forward_.zero_state();
  for (std::size_t i = 0; i < n; ++i) {
    s = forward_.step(tape, slice_rows(tape, inputs, i, 1), s);
    fwd[i] = s.h;
  }
  s = backward_.zero_state();
  for (std::size_t i = n; i-- > 0;) {
    s = backward_.step(tape, slice_rows(tape, inputs, i, 1), s);
    bwd[i] = s.h;
  }
  std::vector<Tensor> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<Tensor, 2> pair{fwd[i], bwd[i]};
    rows[i] = concat(tape, pair, 1);
  }
  return concat(tape, rows, 0);
}

TreeLstmEncoder::TreeLstmEncoder(ParameterSet& params, const std::string& name,
                                 std::size_t input_dim, std::size_t output_dim)
    : hidden_(output_dim / 2),
      w_iou_(params, name + ".up.w_iou", input_dim, 3 * (output_dim / 2)),
      u_iou_(params, name + ".up.u_iou", output_dim / 2, 3 * (output_dim / 2), false),
      w_f_(params, name + ".up.w_f", input_dim, output_dim / 2),
      u_f_(params, name + ".up.u_f", output_dim / 2, output_dim / 2, false),
      root_(params, name + ".down.root", output_dim / 2, output_dim / 2),
      down_(params, name + ".down.lstm", output_dim / 2, output_dim / 2) {}

TreeStates TreeLstmEncoder::encode(Tape& tape, std::size_t node_count,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                   const Tensor& inputs) const {
  std::vector<std::vector<std::size_t>> children(node_count);
  std::vector<std::size_t> parent(node_count, kNoNode);
  for (const auto& [p, c] : edges) {
    if (p >= node_count || c >= node_count) throw DataError("tree edge references an unknown node");
    if (parent[c] != kNoNode)
      throw DataError("TreeLSTM input is not a tree (node " + std::to_string(c) +
                      " has several parents); convert the graph with to_tree first");
    parent[c] = p;
    children[p].push_back(c);
  }
  std::size_t root = kNoNode;
  for (std::size_t i = 0; i < node_count; ++i) {
    if (parent[i] != kNoNode) continue;
    if (root != kNoNode) throw DataError("TreeLSTM input has more than one root");
    root = i;
  }
  if (root == kNoNode) throw DataError("TreeLSTM input has no root (cycle)");

  // Pre-order from the root; reversed it is a valid bottom-up schedule.
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (auto it = children[v].rbegin(); it != children[v].rend(); ++it) stack.push_back(*it);
  }
  if (order.size() != node_count) throw DataError("TreeLSTM input is not connected");

  const std::size_t h = hidden_;
  const Tensor x_iou = w_iou_(tape, inputs);  // M x 3h
  const Tensor x_f = w_f_(tape, inputs);      // M x h

  std::vector<Tensor> up_h(node_count), up_c(node_count);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    Tensor iou = slice_rows(tape, x_iou, v, 1);
    Tensor c;
    if (!children[v].empty()) {
      std::vector<Tensor> hs;
      for (std::size_t k : children[v]) hs.push_back(up_h[k]);
      iou = add(tape, iou, u_iou_(tape, sum_all(tape, hs)));
    }
    const Tensor i = sigmoid(tape, slice_cols(tape, iou, 0, h));
    const Tensor o = sigmoid(tape, slice_cols(tape, iou, h, h));
    const Tensor u = tanh(tape, slice_cols(tape, iou, 2 * h, h));
    c = mul(tape, i, u);
    if (!children[v].empty()) {
      const Tensor xf = slice_rows(tape, x_f, v, 1);
      std::vector<Tensor> terms{c};
      for (std::size_t k : children[v]) {
        const Tensor f = sigmoid(tape, add(tape, xf, u_f_(tape, up_h[k])));
        terms.push_back(mul(tape, f, up_c[k]));
      }
      c = sum_all(tape, terms);
    }
    up_c[v] = c;
    up_h[v] = mul(tape, o, tanh(tape, c));
  }

  std::vector<Tensor> down(node_count);
  for (std::size_t v : order) {
    if (v == root) {
      down[v] = tanh(tape, root_(tape, up_h[v]));
    } else {
      const std::size_t p = parent[v];
      down[v] = down_.step(tape, up_h[v], LstmState{up_h[p], up_c[p]}).h;
    }
  }

  TreeStates states;
  states.up = concat(tape, up_h, 0);
  states.down = concat(tape, down, 0);
  const std::array<Tensor, 2> both{states.down, states.up};
  states.out = concat(tape, both, 1);
  return states;
}

GcnEncoder::GcnEncoder(ParameterSet& params, const std::string& name, std::size_t dim,
                       std::size_t layers, Activation activation, bool highway)
    : activation_(activation), highway_(highway) {
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string prefix = name + "." + std::to_string(k);
    Layer layer;
    layer.w_in = Linear(params, prefix + ".w_in", dim, dim, false);
    layer.w_out = Linear(params, prefix + ".w_out", dim, dim, true);
    if (highway) layer.gate = Linear(params, prefix + ".highway", dim, dim, true);
    layers_.push_back(std::move(layer));
  }
}

Tensor GcnEncoder::encode(Tape& tape, std::size_t node_count,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                          const Tensor& inputs, double edge_dropout, const EncodeMode& mode) const {
  // Adjacency by direction: in_adj(i, j) counts edges j -> i, out_adj(i, j) edges i -> j.
  Tensor in_adj = Tensor::zeros(node_count, node_count);
  Tensor out_adj = Tensor::zeros(node_count, node_count);
  std::bernoulli_distribution drop(edge_dropout);
  const bool dropping = mode.training && edge_dropout > 0.0 && mode.rng != nullptr;
  for (const auto& [s, t] : edges) {
    if (dropping && drop(*mode.rng)) continue;
    in_adj.at(t, s) += 1.0;
    out_adj.at(s, t) += 1.0;
  }

  Tensor h = inputs;
  for (const auto& layer : layers_) {
    const Tensor incoming = layer.w_in(tape, matmul(tape, in_adj, h));
    const Tensor outgoing = layer.w_out(tape, matmul(tape, out_adj, h));
    const Tensor next = activate(tape, add(tape, incoming, outgoing), activation_);
    if (highway_) {
      const Tensor t = sigmoid(tape, layer.gate(tape, h));
      h = add(tape, h, mul(tape, t, sub(tape, next, h)));
    } else {
      h = next;
    }
  }
  return h;
}

StackedEncoder::StackedEncoder(ParameterSet& params, const EncoderConfig& config)
    : config_(config) {
  config_.validate();
  if (config_.src_vocab_size == 0) throw ConfigError("source vocabulary is empty");
  const std::size_t d = config_.embedding_dim, hd = config_.hidden_dim;
  embed_ = params.weight("encoder.embed", config_.src_vocab_size, d);
  switch (config_.kind) {
    case EncoderKind::Seq:
      bilstm_ = BiLstmEncoder(params, "encoder.bilstm", d, hd);
      break;
    case EncoderKind::SeqGCN:
      bilstm_ = BiLstmEncoder(params, "encoder.bilstm", d, hd);
      gcn_ = GcnEncoder(params, "encoder.gcn", hd, config_.gcn_layers, config_.gcn_activation,
                        config_.highway);
      break;
    case EncoderKind::GCNSeq:
      gcn_ = GcnEncoder(params, "encoder.gcn", d, config_.gcn_layers, config_.gcn_activation,
                        config_.highway);
      bilstm_ = BiLstmEncoder(params, "encoder.bilstm", d, hd);
      break;
    case EncoderKind::SeqTreeLSTM:
      bilstm_ = BiLstmEncoder(params, "encoder.bilstm", d, hd);
      tree_ = TreeLstmEncoder(params, "encoder.treelstm", hd, hd);
      break;
    case EncoderKind::TreeLSTMSeq:
      tree_ = TreeLstmEncoder(params, "encoder.treelstm", d, hd);
      bilstm_ = BiLstmEncoder(params, "encoder.bilstm", hd, hd);
      break;
    case EncoderKind::GCN:
      gcn_ = GcnEncoder(params, "encoder.gcn", d, config_.gcn_layers, config_.gcn_activation,
                        config_.highway);
      break;
    case EncoderKind::TreeLSTM:
      tree_ = TreeLstmEncoder(params, "encoder.treelstm", d, hd);
      break;
  }
}

Tensor StackedEncoder::structural(Tape& tape, const EncoderInput& input, const Tensor& node_states,
                                  const EncodeMode& mode) const {
  Tensor nodes;
  if (uses_gcn(config_.kind))
    nodes = gcn_.encode(tape, input.node_count(), input.edges, node_states, config_.edge_dropout,
                        mode);
  else
    nodes = tree_.encode(tape, input.node_count(), input.edges, node_states).out;
  // Back to linearization order; repeated nodes share their state.
  return embedding_lookup(tape, nodes, input.position_node);
}

Tensor StackedEncoder::encode(Tape& tape, const EncoderInput& input, const EncodeMode& mode) const {
  if (input.token_ids.size() != input.length() || input.node_ids.size() != input.node_count())
    throw std::invalid_argument("encoder input has no vocabulary ids");
  if (input.repr != config_.repr)
    throw ConfigError("example representation " + to_string(input.repr) + " does not match " +
                      to_string(config_.kind) + " configured for " + to_string(config_.repr));
  const bool sequence_first = config_.kind == EncoderKind::Seq ||
                              config_.kind == EncoderKind::SeqGCN ||
                              config_.kind == EncoderKind::SeqTreeLSTM;
  Tensor tokens, nodes;
  if (sequence_first)
    tokens = embedding_lookup(tape, embed_, input.token_ids);
  else
    nodes = embedding_lookup(tape, embed_, input.node_ids);
  return encode_embeddings(tape, input, tokens, nodes, mode);
}

Tensor StackedEncoder::encode_embeddings(Tape& tape, const EncoderInput& input,
                                         const Tensor& token_embeddings,
                                         const Tensor& node_embeddings,
                                         const EncodeMode& mode) const {
  const double keep = mode.training && mode.rng ? 1.0 - config_.dropout : 1.0;
  auto drop = [&](const Tensor& t) { return keep < 1.0 ? dropout(tape, t, keep, *mode.rng) : t; };

  Tensor out;
  switch (config_.kind) {
    case EncoderKind::Seq:
      out = bilstm_.encode(tape, drop(token_embeddings));
      break;
    case EncoderKind::SeqGCN:
    case EncoderKind::SeqTreeLSTM: {
      const Tensor seq = bilstm_.encode(tape, drop(token_embeddings));
      // Each structure node starts from the BiLSTM state of its first occurrence.
      const Tensor init = embedding_lookup(tape, seq, input.node_position);
      out = structural(tape, input, init, mode);
      break;
    }
    case EncoderKind::GCNSeq:
    case EncoderKind::TreeLSTMSeq:
      out = bilstm_.encode(tape, structural(tape, input, drop(node_embeddings), mode));
      break;
    case EncoderKind::GCN:
    case EncoderKind::TreeLSTM:
      out = structural(tape, input, drop(node_embeddings), mode);
      break;
  }
  return drop(out);
}

}  // namespace amrgen
