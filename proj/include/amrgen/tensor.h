#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace amrgen {

using Rng = std::mt19937_64;

namespace detail {
struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient flows in
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};
}  // namespace detail

// Handle to a dense row-major matrix of doubles. Copies share storage; vectors
// are 1 x n rows. Parameters are tensors with requires_grad set.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng,
                        bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  std::vector<std::size_t> shape() const { return {rows(), cols()}; }
  std::string shape_string() const;

  std::span<double> data() { return node_->value; }
  std::span<const double> data() const { return node_->value; }
  double& at(std::size_t r, std::size_t c) { return node_->value[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<double> grad() { return node_->grad; }
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad();

  // Fresh storage with the same values; no gradient history.
  Tensor clone() const;

  detail::Node* node() const { return node_.get(); }
  bool same(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of differentiable operations. Every op appends after its
// inputs were produced, so reverse order is a valid backward schedule.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  bool consumed() const { return consumed_; }
  std::size_t size() const { return entries_.size(); }

  // True when `inputs` demand that the op producing their output be recorded.
  bool needs_record(std::initializer_list<const Tensor*> inputs) const;
  bool needs_record(std::span<const Tensor> inputs) const;

  // Registers `backward`, which reads the output gradient and accumulates into
  // the inputs' gradients. Marks `output` as requiring grad.
  void record(Tensor& output, std::vector<Tensor> keep_alive, std::function<void()> backward);

  // d loss / d tensor for every tensor that requires grad. The loss must be
  // 1 x 1 and produced on this tape. The tape can be consumed only once.
  void backward(const Tensor& loss);

 private:
  struct Entry {
    Tensor output;
    std::vector<Tensor> inputs;
    std::function<void()> backward;
  };
  bool recording_;
  bool consumed_ = false;
  std::vector<Entry> entries_;
};

// Kernels. All throw std::invalid_argument on shape mismatch, naming both shapes.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// Elementwise a + b; b may also be a single row broadcast over a's rows.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);
// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(Tape& tape, std::span<const Tensor> parts, int axis);
Tensor slice_rows(Tape& tape, const Tensor& a, std::size_t begin, std::size_t count);
Tensor slice_cols(Tape& tape, const Tensor& a, std::size_t begin, std::size_t count);
Tensor transpose(Tape& tape, const Tensor& a);
// n x c -> 1 x c
Tensor sum_rows(Tape& tape, const Tensor& a);
// Elementwise sum of equally shaped tensors; an empty list is invalid.
Tensor sum_all(Tape& tape, std::span<const Tensor> parts);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor relu(Tape& tape, const Tensor& a);
// Row-wise.
Tensor softmax(Tape& tape, const Tensor& a);
Tensor log_softmax(Tape& tape, const Tensor& a);
// 1 x 1 holding a(r, c).
Tensor pick(Tape& tape, const Tensor& a, std::size_t r, std::size_t c);
// Rows of `table` in id order.
Tensor embedding_lookup(Tape& tape, const Tensor& table, std::span<const std::size_t> ids);
// Multiplies by a fixed mask (entries 0 or 1/keep).
Tensor dropout_mask_apply(Tape& tape, const Tensor& a, const Tensor& mask);

// Inverted dropout mask; keep == 1 gives all ones.
Tensor make_dropout_mask(std::size_t rows, std::size_t cols, double keep, Rng& rng);
// Identity when keep == 1 or not training.
Tensor dropout(Tape& tape, const Tensor& a, double keep, Rng& rng);

double squared_norm(std::span<const Tensor> params);

// p <- p - lr * grad(p); grads are zeroed afterwards. Throws if a parameter
// has no gradient buffer.
void sgd_step(std::span<Tensor> params, double lr);

// Scales all gradients so their joint L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

// Multiplicative learning rate decay keyed on a development metric.
class LrSchedule {
 public:
  explicit LrSchedule(double initial = 1.0, double decay = 0.8) : lr_(initial), decay_(decay) {}

  // Records the epoch's dev metric (higher is better) and returns the rate for
  // the next epoch. The rate is multiplied by `decay` when the metric fails to
  // improve on the best seen so far, starting from epoch `start_epoch`.
  double update(std::size_t epoch, double dev_metric);

  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t epochs_since_improvement() const { return stale_; }
  void set_start_epoch(std::size_t epoch) { start_epoch_ = epoch; }

 private:
  double lr_;
  double decay_;
  double best_ = -1.0;
  bool seen_ = false;
  std::size_t stale_ = 0;
  std::size_t start_epoch_ = 1;
};

}  // namespace amrgen
