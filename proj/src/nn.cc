#include "amrgen/nn.h"

#include <array>
#include <stdexcept>

#include "amrgen/errors.h"

namespace amrgen {

Tensor ParameterSet::add(const std::string& name, Tensor t) {
  if (find(name)) throw std::logic_error("duplicate parameter name " + name);
  entries_.emplace_back(name, t);
  return t;
}

Tensor ParameterSet::weight(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(name, Tensor::uniform(rows, cols, bound_, *rng_, true));
}

Tensor ParameterSet::bias(const std::string& name, std::size_t cols) {
  return add(name, Tensor::zeros(1, cols, true));
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

const Tensor* ParameterSet::find(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return &t;
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

void ParameterSet::ensure_grads() {
  for (auto& [name, t] : entries_) t.node()->ensure_grad();
}

void ParameterSet::zero_grads() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
               bool bias)
    : w(params.weight(name + ".w", in, out)), has_bias(bias) {
  if (bias) b = params.bias(name + ".b", out);
}

Tensor Linear::operator()(Tape& tape, const Tensor& x) const {
  Tensor y = matmul(tape, x, w);
  return has_bias ? add(tape, y, b) : y;
}

LstmCell::LstmCell(ParameterSet& params, const std::string& name, std::size_t input_dim,
                   std::size_t hidden_dim)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      gates_(params, name + ".gates", input_dim + hidden_dim, 4 * hidden_dim) {}

LstmState LstmCell::zero_state() const {
  return {Tensor::zeros(1, hidden_dim_), Tensor::zeros(1, hidden_dim_)};
}

LstmState LstmCell::step(Tape& tape, const Tensor& x, const LstmState& prev) const {
  const std::array<Tensor, 2> xh{x, prev.h};
  const Tensor z = gates_(tape, concat(tape, xh, 1));
  const std::size_t h = hidden_dim_;
  const Tensor i = sigmoid(tape, slice_cols(tape, z, 0, h));
  const Tensor f = sigmoid(tape, slice_cols(tape, z, h, h));
  const Tensor o = sigmoid(tape, slice_cols(tape, z, 2 * h, h));
  const Tensor g = tanh(tape, slice_cols(tape, z, 3 * h, h));
  const Tensor c = add(tape, mul(tape, f, prev.c), mul(tape, i, g));
  return {mul(tape, o, tanh(tape, c)), c};
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "relu";
}

Tensor activate(Tape& tape, const Tensor& x, Activation a) {
  switch (a) {
    case Activation::Relu: return relu(tape, x);
    case Activation::Tanh: return tanh(tape, x);
    case Activation::Sigmoid: return sigmoid(tape, x);
    case Activation::Identity: return x;
  }
  return x;
}

}  // namespace amrgen
