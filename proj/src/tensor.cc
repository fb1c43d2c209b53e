#include "amrgen/tensor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amrgen {

using detail::Node;

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                              b.shape_string());
}

Tensor like(const Tensor& a) { return Tensor::zeros(a.rows(), a.cols()); }

// Records an elementwise unary op given dy/dx as a function of (x, y).
template <typename Forward, typename Deriv>
Tensor unary(Tape& tape, const Tensor& a, Forward f, Deriv dfdx) {
  Tensor out = like(a);
  auto x = a.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, dfdx] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t i = 0; i < an->value.size(); ++i)
        an->grad[i] += on->grad[i] * dfdx(an->value[i], on->value[i]);
    });
  }
  return out;
}

}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value.assign(rows * cols, 0.0);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols)
    throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                " values for shape [" + std::to_string(rows) + ", " +
                                std::to_string(cols) + "]");
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng,
                       bool requires_grad) {
  Tensor t = zeros(rows, cols, requires_grad);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

std::string Tensor::shape_string() const {
  if (!node_) return "[undefined]";
  return "[" + std::to_string(rows()) + ", " + std::to_string(cols()) + "]";
}

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("item() on tensor of shape " + shape_string());
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  return from(rows(), cols(), node_->value, node_->requires_grad);
}

bool Tape::needs_record(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

bool Tape::needs_record(std::span<const Tensor> inputs) const {
  if (!recording_) return false;
  for (const Tensor& t : inputs)
    if (t.requires_grad()) return true;
  return false;
}

void Tape::record(Tensor& output, std::vector<Tensor> keep_alive, std::function<void()> backward) {
  if (consumed_) throw std::logic_error("tape already consumed");
  output.set_requires_grad(true);
  entries_.push_back({output, std::move(keep_alive), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("backward: tape already consumed");
  if (loss.size() != 1) throw std::invalid_argument("backward: loss must be scalar, got " +
                                                    loss.shape_string());
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.output.same(loss); });
  if (it == entries_.end()) throw std::invalid_argument("backward: loss was not produced on this tape");
  consumed_ = true;

  for (auto& e : entries_) e.output.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  const auto last = static_cast<std::ptrdiff_t>(it - entries_.begin());
  for (std::ptrdiff_t i = last; i >= 0; --i) entries_[static_cast<std::size_t>(i)].backward();
  entries_.clear();
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros(n, m);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = out.data().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = B + p * m;
      double* crow = C + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  if (tape.needs_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = out.node();
    tape.record(out, {a, b}, [an, bn, on, n, k, m] {
      const double* G = on->grad.data();
      if (an->requires_grad) {
        an->ensure_grad();
        // dA = G * B^T
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            const double* brow = bn->value.data() + p * m;
            const double* grow = G + i * m;
            for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
            an->grad[i * k + p] += s;
          }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        // dB = A^T * G
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double av = an->value[i * k + p];
            if (av == 0.0) continue;
            double* brow = bn->grad.data() + p * m;
            const double* grow = G + i * m;
            for (std::size_t j = 0; j < m; ++j) brow[j] += av * grow[j];
          }
      }
    });
  }
  return out;
}

namespace {

// Shared implementation for add/sub: out = a + sign * b with optional row broadcast.
Tensor add_signed(Tape& tape, const Tensor& a, const Tensor& b, double sign, const char* name) {
  const bool broadcast = b.rows() == 1 && a.rows() != 1 && a.cols() == b.cols();
  if (!broadcast && (a.rows() != b.rows() || a.cols() != b.cols())) shape_error(name, a, b);
  Tensor out = like(a);
  const std::size_t rows = a.rows(), cols = a.cols();
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      z[r * cols + c] = x[r * cols + c] + sign * y[broadcast ? c : r * cols + c];
  if (tape.needs_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = out.node();
    tape.record(out, {a, b}, [an, bn, on, rows, cols, broadcast, sign] {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c)
            bn->grad[broadcast ? c : r * cols + c] += sign * on->grad[r * cols + c];
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) { return add_signed(tape, a, b, 1.0, "add"); }

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) { return add_signed(tape, a, b, -1.0, "sub"); }

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("mul", a, b);
  Tensor out = like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (tape.needs_record({&a, &b})) {
    Node* an = a.node();
    Node* bn = b.node();
    Node* on = out.node();
    tape.record(out, {a, b}, [an, bn, on] {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i] * an->value[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary(
      tape, a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  if (axis == 0) {
    cols = parts[0].cols();
    for (const auto& p : parts) {
      if (p.cols() != cols) shape_error("concat", parts[0], p);
      rows += p.rows();
    }
  } else {
    rows = parts[0].rows();
    for (const auto& p : parts) {
      if (p.rows() != rows) shape_error("concat", parts[0], p);
      cols += p.cols();
    }
  }
  Tensor out = Tensor::zeros(rows, cols);
  // Offsets of each part: row offset (axis 0) or column offset (axis 1).
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    for (std::size_t r = 0; r < p.rows(); ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) {
        const std::size_t orow = axis == 0 ? off + r : r;
        const std::size_t ocol = axis == 0 ? c : off + c;
        out.at(orow, ocol) = p.at(r, c);
      }
    off += axis == 0 ? p.rows() : p.cols();
  }
  if (tape.needs_record(parts)) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    std::vector<Node*> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    Node* on = out.node();
    tape.record(out, inputs, [nodes, offsets, on, axis] {
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        Node* pn = nodes[k];
        if (!pn->requires_grad) continue;
        pn->ensure_grad();
        for (std::size_t r = 0; r < pn->rows; ++r)
          for (std::size_t c = 0; c < pn->cols; ++c) {
            const std::size_t orow = axis == 0 ? offsets[k] + r : r;
            const std::size_t ocol = axis == 0 ? c : offsets[k] + c;
            pn->grad[r * pn->cols + c] += on->grad[orow * on->cols + ocol];
          }
      }
    });
  }
  return out;
}

Tensor slice_rows(Tape& tape, const Tensor& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows())
    throw std::invalid_argument("slice_rows: [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") out of range for " +
                                a.shape_string());
  const std::size_t cols = a.cols();
  Tensor out = Tensor::zeros(count, cols);
  std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(begin * cols), count * cols,
              out.data().begin());
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, begin, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[begin * cols + i] += on->grad[i];
    });
  }
  return out;
}

Tensor slice_cols(Tape& tape, const Tensor& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.cols())
    throw std::invalid_argument("slice_cols: [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") out of range for " +
                                a.shape_string());
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = Tensor::zeros(rows, count);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = a.at(r, begin + c);
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, begin, count, rows, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < count; ++c)
          an->grad[r * cols + begin + c] += on->grad[r * count + c];
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = Tensor::zeros(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.at(c, r) = a.at(r, c);
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, rows, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) an->grad[r * cols + c] += on->grad[c * rows + r];
    });
  }
  return out;
}

Tensor sum_rows(Tape& tape, const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = Tensor::zeros(1, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.at(0, c) += a.at(r, c);
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, rows, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) an->grad[r * cols + c] += on->grad[c];
    });
  }
  return out;
}

Tensor sum_all(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("sum_all: no inputs");
  Tensor out = like(parts[0]);
  for (const auto& p : parts) {
    if (p.rows() != out.rows() || p.cols() != out.cols()) shape_error("sum_all", parts[0], p);
    for (std::size_t i = 0; i < p.size(); ++i) out.data()[i] += p.data()[i];
  }
  if (tape.needs_record(parts)) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    std::vector<Node*> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    Node* on = out.node();
    tape.record(out, inputs, [nodes, on] {
      for (Node* pn : nodes) {
        if (!pn->requires_grad) continue;
        pn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) pn->grad[i] += on->grad[i];
      }
    });
  }
  return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  return unary(
      tape, a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor softmax(Tape& tape, const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = like(a);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = a.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, a.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += (out.at(r, c) = std::exp(a.at(r, c) - mx));
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= z;
  }
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, rows, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += on->grad[r * cols + c] * on->value[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          an->grad[i] += on->value[i] * (on->grad[i] - dot);
        }
      }
    });
  }
  return out;
}

Tensor log_softmax(Tape& tape, const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = like(a);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = a.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, a.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(a.at(r, c) - mx);
    const double lz = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = a.at(r, c) - lz;
  }
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    tape.record(out, {a}, [an, on, rows, cols] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        double gsum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) gsum += on->grad[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          an->grad[i] += on->grad[i] - std::exp(on->value[i]) * gsum;
        }
      }
    });
  }
  return out;
}

Tensor pick(Tape& tape, const Tensor& a, std::size_t r, std::size_t c) {
  if (r >= a.rows() || c >= a.cols())
    throw std::invalid_argument("pick: (" + std::to_string(r) + ", " + std::to_string(c) +
                                ") out of range for " + a.shape_string());
  Tensor out = Tensor::from(1, 1, {a.at(r, c)});
  if (tape.needs_record({&a})) {
    Node* an = a.node();
    Node* on = out.node();
    const std::size_t i = r * a.cols() + c;
    tape.record(out, {a}, [an, on, i] {
      if (!an->requires_grad) return;
      an->ensure_grad();
      an->grad[i] += on->grad[0];
    });
  }
  return out;
}

Tensor embedding_lookup(Tape& tape, const Tensor& table, std::span<const std::size_t> ids) {
  const std::size_t dim = table.cols();
  Tensor out = Tensor::zeros(ids.size(), dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= table.rows())
      throw std::invalid_argument("embedding_lookup: id " + std::to_string(ids[r]) +
                                  " out of range for " + table.shape_string());
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(ids[r] * dim), dim,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  if (tape.needs_record({&table})) {
    Node* tn = table.node();
    Node* on = out.node();
    std::vector<std::size_t> rows(ids.begin(), ids.end());
    tape.record(out, {table}, [tn, on, rows, dim] {
      if (!tn->requires_grad) return;
      tn->ensure_grad();
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < dim; ++c) tn->grad[rows[r] * dim + c] += on->grad[r * dim + c];
    });
  }
  return out;
}

Tensor dropout_mask_apply(Tape& tape, const Tensor& a, const Tensor& mask) {
  if (mask.requires_grad()) throw std::invalid_argument("dropout_mask_apply: mask must be constant");
  return mul(tape, a, mask);
}

Tensor make_dropout_mask(std::size_t rows, std::size_t cols, double keep, Rng& rng) {
  if (!(keep > 0.0 && keep <= 1.0))
    throw std::invalid_argument("dropout keep probability must be in (0, 1], got " +
                                std::to_string(keep));
  Tensor mask = Tensor::zeros(rows, cols);
  if (keep == 1.0) {
    std::fill(mask.data().begin(), mask.data().end(), 1.0);
    return mask;
  }
  std::bernoulli_distribution coin(keep);
  for (double& m : mask.data()) m = coin(rng) ? 1.0 / keep : 0.0;
  return mask;
}

Tensor dropout(Tape& tape, const Tensor& a, double keep, Rng& rng) {
  if (keep == 1.0) return a;
  return dropout_mask_apply(tape, a, make_dropout_mask(a.rows(), a.cols(), keep, rng));
}

double squared_norm(std::span<const Tensor> params) {
  double s = 0.0;
  for (const auto& p : params)
    for (double g : p.grad()) s += g * g;
  return s;
}

void sgd_step(std::span<Tensor> params, double lr) {
  for (auto& p : params) {
    if (!p.has_grad()) throw std::logic_error("sgd_step: parameter of shape " + p.shape_string() +
                                              " has no gradient");
  }
  for (auto& p : params) {
    auto v = p.data();
    auto g = p.grad();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    p.zero_grad();
  }
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
  std::vector<Tensor> view(params.begin(), params.end());
  const double norm = std::sqrt(squared_norm(view));
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& p : params)
      for (double& g : p.grad()) g *= factor;
  }
  return norm;
}

double LrSchedule::update(std::size_t epoch, double dev_metric) {
  if (!seen_ || dev_metric > best_) {
    best_ = dev_metric;
    seen_ = true;
    stale_ = 0;
    return lr_;
  }
  ++stale_;
  if (epoch >= start_epoch_) lr_ *= decay_;
  return lr_;
}

}  // namespace amrgen
