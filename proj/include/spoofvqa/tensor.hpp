#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spoofvqa {

class Tape;

namespace detail {
struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on first accumulation
  bool requires_grad = false;
  Tape* tape = nullptr;        // tape that recorded the producing op
  std::size_t tape_index = 0;  // position of that op on the tape

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};
}  // namespace detail

// Dense 64-bit float tensor, row-major. Values are immutable once produced
// by an op; only gradient buffers accumulate. Leaves (parameters, inputs)
// may be rewritten in place between steps via values_mut().
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double fill,
                     bool requires_grad = false);
  static Tensor from_data(std::vector<std::size_t> shape,
                          std::vector<double> data, bool requires_grad = false);
  static Tensor scalar_value(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t ndim() const { return node_->shape.size(); }
  // 2-D helpers
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return node_->value; }
  std::span<double> values_mut() { return node_->value; }
  double at(std::size_t i) const { return node_->value.at(i); }
  double at(std::size_t r, std::size_t c) const;
  double scalar() const;

  bool requires_grad() const { return node_->requires_grad; }
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  friend class Tape;
  friend struct OpAccess;
  std::shared_ptr<detail::TensorNode> node_;
};

// Ordered record of one forward pass. Ops register themselves on the active
// tape (see TapeScope); backward() replays the recorded rules in reverse.
// Single-writer: one training step owns one tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Seeds d(root)/d(root) = 1 and accumulates gradients into every
  // requires_grad tensor reachable from root. Root must be scalar and must
  // have been recorded on this tape.
  void backward(const Tensor& root);

  std::size_t op_count() const { return entries_.size(); }

 private:
  friend struct OpAccess;
  struct Entry {
    std::shared_ptr<detail::TensorNode> out;
    std::function<void()> backward;
  };
  std::vector<Entry> entries_;
};

// RAII activation of a tape for the current thread. Ops record onto the
// innermost active tape; with no active tape they run pure-eager.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// ---- op set ----
// 2-D matrix product, backward dA = dC B^T, dB = A^T dC.
Tensor matmul(const Tensor& a, const Tensor& b);
// Elementwise add; also accepts b of shape [cols] broadcast over the rows
// of a 2-D a (bias add).
Tensor add(const Tensor& a, const Tensor& b);
// Elementwise product, equal shapes.
Tensor mul(const Tensor& a, const Tensor& b);
// Multiply by a compile-side constant (no gradient w.r.t. c).
Tensor scale(const Tensor& x, double c);
// Row-wise concatenation of 2-D tensors (or 1-D, treated as elements).
Tensor concat_rows(const Tensor& a, const Tensor& b);
// Rows [begin, end) of a 1-D or 2-D tensor.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
// 2-D transpose.
Tensor transpose(const Tensor& x);
// Softmax over the last axis, max-subtracted.
Tensor softmax(const Tensor& x);
// Layer normalization over the last axis, biased variance estimator.
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);
// GELU, tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
// Rows of `table` selected by ids; backward scatter-adds into the table.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
// Per-position cross entropy of logits [T x V] against target ids [T].
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);
// Sum of all elements, scalar output.
Tensor sum(const Tensor& x);

}  // namespace spoofvqa
