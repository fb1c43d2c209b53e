#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "amrgen/tensor.h"

namespace amrgen {

// Named, ordered parameter registry. Names are hierarchical ("encoder.gcn.0.w_in").
class ParameterSet {
 public:
  // Weights are drawn from uniform(-init_bound, init_bound); biases start at 0.
  explicit ParameterSet(Rng& rng, double init_bound = 0.1) : rng_(&rng), bound_(init_bound) {}

  Tensor weight(const std::string& name, std::size_t rows, std::size_t cols);
  Tensor bias(const std::string& name, std::size_t cols);

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor* find(const std::string& name) const;
  std::size_t scalar_count() const;

  // Allocates gradient buffers so every parameter takes part in sgd_step.
  void ensure_grads();
  void zero_grads();

 private:
  Tensor add(const std::string& name, Tensor t);
  Rng* rng_;
  double bound_;
  std::vector<std::pair<std::string, Tensor>> entries_;
};

// y = x W + b with x of shape n x in.
struct Linear {
  Tensor w;
  Tensor b;
  bool has_bias = true;

  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
         bool bias = true);
  Tensor operator()(Tape& tape, const Tensor& x) const;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

// Standard LSTM step on 1 x in inputs; gate order i, f, o, g.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterSet& params, const std::string& name, std::size_t input_dim,
           std::size_t hidden_dim);

  LstmState step(Tape& tape, const Tensor& x, const LstmState& prev) const;
  LstmState zero_state() const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  Linear gates_;  // [x, h] -> 4 * hidden
};

enum class Activation { Relu, Tanh, Sigmoid, Identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);
Tensor activate(Tape& tape, const Tensor& x, Activation a);

}  // namespace amrgen
