#include "spoofvqa/tensor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spoofvqa {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor: zero-sized dimension");
    n *= d;
  }
  return n;
}

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(s[i]);
    if (i + 1 < s.size()) out += "x";
  }
  return out + "]";
}

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x))
      throw std::domain_error(std::string(op) + ": non-finite value produced");
  }
}

}  // namespace

struct OpAccess {
  static std::shared_ptr<detail::TensorNode> node(const Tensor& t) {
    return t.node_;
  }

  static Tensor make(const char* op, std::vector<std::size_t> shape,
                     std::vector<double> value, bool requires_grad) {
    check_finite(value, op);
    Tensor t;
    t.node_ = std::make_shared<detail::TensorNode>();
    t.node_->shape = std::move(shape);
    t.node_->value = std::move(value);
    t.node_->requires_grad = requires_grad;
    return t;
  }

  static void record(const Tensor& out, std::function<void()> backward) {
    Tape* tape = g_active_tape;
    if (tape == nullptr || !out.node_->requires_grad) return;
    out.node_->tape = tape;
    out.node_->tape_index = tape->entries_.size();
    tape->entries_.push_back({out.node_, std::move(backward)});
  }
};

// ---- Tensor ----

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::size_t n = shape_product(shape);
  return OpAccess::make("zeros", std::move(shape), std::vector<double>(n, 0.0),
                        requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double fill,
                    bool requires_grad) {
  std::size_t n = shape_product(shape);
  return OpAccess::make("full", std::move(shape), std::vector<double>(n, fill),
                        requires_grad);
}

Tensor Tensor::from_data(std::vector<std::size_t> shape,
                         std::vector<double> data, bool requires_grad) {
  if (shape_product(shape) != data.size())
    throw std::invalid_argument("tensor: shape " + shape_str(shape) +
                                " does not match data length " +
                                std::to_string(data.size()));
  return OpAccess::make("from_data", std::move(shape), std::move(data),
                        requires_grad);
}

Tensor Tensor::scalar_value(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

std::size_t Tensor::rows() const {
  if (ndim() == 1 || ndim() == 2) return shape()[0];
  throw std::invalid_argument("tensor: rows() needs a 1-D or 2-D tensor");
}

std::size_t Tensor::cols() const {
  if (ndim() == 1) return 1;
  if (ndim() == 2) return shape()[1];
  throw std::invalid_argument("tensor: cols() needs a 1-D or 2-D tensor");
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (ndim() != 2) throw std::invalid_argument("tensor: at(r,c) needs 2-D");
  if (r >= shape()[0] || c >= shape()[1])
    throw std::out_of_range("tensor: index out of range");
  return node_->value[r * shape()[1] + c];
}

double Tensor::scalar() const {
  if (size() != 1)
    throw std::invalid_argument("tensor: scalar() on tensor of size " +
                                std::to_string(size()));
  return node_->value[0];
}

std::span<const double> Tensor::grad() const {
  if (!node_->requires_grad)
    throw std::logic_error("tensor: grad() on a tensor without requires_grad");
  node_->ensure_grad();
  return node_->grad;
}

std::span<double> Tensor::grad_mut() {
  if (!node_->requires_grad)
    throw std::logic_error("tensor: grad() on a tensor without requires_grad");
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
}

// ---- Tape ----

void Tape::backward(const Tensor& root) {
  auto root_node = OpAccess::node(root);
  if (root_node->size() != 1)
    throw std::invalid_argument("backward: root must be scalar, got size " +
                                std::to_string(root_node->size()));
  if (root_node->tape != this)
    throw std::logic_error("backward: root was not recorded on this tape");
  root_node->ensure_grad();
  root_node->grad[0] += 1.0;
  for (std::size_t i = root_node->tape_index + 1; i-- > 0;) {
    entries_[i].backward();
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

// ---- ops ----

namespace {

using Node = detail::TensorNode;
using NodePtr = std::shared_ptr<Node>;

NodePtr node_of(const Tensor& t) { return OpAccess::node(t); }

void require_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2)
    throw std::invalid_argument(std::string(op) +
                                ": expected 2-D tensor, got " +
                                shape_str(t.shape()));
}

// d(out) of a recorded node, allocating so closures can read zeros
std::span<const double> out_grad(const NodePtr& n) {
  n->ensure_grad();
  return n->grad;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  std::vector<double> c(m * n, 0.0);
  {
    const double* A = a.values().data();
    const double* B = b.values().data();
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c.data() + i * n;
      const double* arow = A + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double aik = arow[kk];
        const double* brow = B + kk * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
      }
    }
  }
  NodePtr na = node_of(a), nb = node_of(b);
  bool track = na->requires_grad || nb->requires_grad;
  Tensor out = OpAccess::make("matmul", {m, n}, std::move(c), track);
  NodePtr no = node_of(out);
  OpAccess::record(out, [na, nb, no, m, k, n]() {
    auto dC = out_grad(no);
    if (na->requires_grad) {
      na->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* dcrow = dC.data() + i * n;
        double* darow = na->grad.data() + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double* brow = nb->value.data() + kk * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
          darow[kk] += acc;
        }
      }
    }
    if (nb->requires_grad) {
      nb->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* arow = na->value.data() + i * k;
        const double* dcrow = dC.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double aik = arow[kk];
          double* dbrow = nb->grad.data() + kk * n;
          for (std::size_t j = 0; j < n; ++j) dbrow[j] += aik * dcrow[j];
        }
      }
    }
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool broadcast =
      a.ndim() == 2 && b.ndim() == 1 && b.shape()[0] == a.shape()[1];
  if (!broadcast && a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  std::vector<double> c(a.size());
  if (broadcast) {
    const std::size_t rows = a.shape()[0], cols = a.shape()[1];
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        c[i * cols + j] = a.values()[i * cols + j] + b.values()[j];
  } else {
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = a.values()[i] + b.values()[i];
  }
  NodePtr na = node_of(a), nb = node_of(b);
  bool track = na->requires_grad || nb->requires_grad;
  Tensor out = OpAccess::make("add", a.shape(), std::move(c), track);
  NodePtr no = node_of(out);
  OpAccess::record(out, [na, nb, no, broadcast]() {
    auto dC = out_grad(no);
    if (na->requires_grad) {
      na->ensure_grad();
      for (std::size_t i = 0; i < dC.size(); ++i) na->grad[i] += dC[i];
    }
    if (nb->requires_grad) {
      nb->ensure_grad();
      if (broadcast) {
        const std::size_t cols = nb->value.size();
        const std::size_t rows = no->value.size() / cols;
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < cols; ++j)
            nb->grad[j] += dC[i * cols + j];
      } else {
        for (std::size_t i = 0; i < dC.size(); ++i) nb->grad[i] += dC[i];
      }
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = a.values()[i] * b.values()[i];
  NodePtr na = node_of(a), nb = node_of(b);
  bool track = na->requires_grad || nb->requires_grad;
  Tensor out = OpAccess::make("mul", a.shape(), std::move(c), track);
  NodePtr no = node_of(out);
  OpAccess::record(out, [na, nb, no]() {
    auto dC = out_grad(no);
    if (na->requires_grad) {
      na->ensure_grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        na->grad[i] += dC[i] * nb->value[i];
    }
    if (nb->requires_grad) {
      nb->ensure_grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        nb->grad[i] += dC[i] * na->value[i];
    }
  });
  return out;
}

Tensor scale(const Tensor& x, double c) {
  if (!std::isfinite(c)) throw std::domain_error("scale: non-finite factor");
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.values()[i] * c;
  NodePtr nx = node_of(x);
  Tensor out =
      OpAccess::make("scale", x.shape(), std::move(v), nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no, c]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < dC.size(); ++i) nx->grad[i] += dC[i] * c;
  });
  return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.ndim() != b.ndim() || a.ndim() < 1 || a.ndim() > 2)
    throw std::invalid_argument("concat_rows: expects two 1-D or two 2-D tensors");
  if (a.ndim() == 2 && a.shape()[1] != b.shape()[1])
    throw std::invalid_argument("concat_rows: column mismatch " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  std::vector<double> c;
  c.reserve(a.size() + b.size());
  c.insert(c.end(), a.values().begin(), a.values().end());
  c.insert(c.end(), b.values().begin(), b.values().end());
  std::vector<std::size_t> shape = a.shape();
  shape[0] += b.shape()[0];
  NodePtr na = node_of(a), nb = node_of(b);
  bool track = na->requires_grad || nb->requires_grad;
  Tensor out = OpAccess::make("concat_rows", std::move(shape), std::move(c), track);
  NodePtr no = node_of(out);
  OpAccess::record(out, [na, nb, no]() {
    auto dC = out_grad(no);
    const std::size_t na_len = na->value.size();
    if (na->requires_grad) {
      na->ensure_grad();
      for (std::size_t i = 0; i < na_len; ++i) na->grad[i] += dC[i];
    }
    if (nb->requires_grad) {
      nb->ensure_grad();
      for (std::size_t i = 0; i < nb->value.size(); ++i)
        nb->grad[i] += dC[na_len + i];
    }
  });
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  if (x.ndim() < 1 || x.ndim() > 2)
    throw std::invalid_argument("slice_rows: expects a 1-D or 2-D tensor");
  const std::size_t nrows = x.shape()[0];
  if (begin > end || end > nrows)
    throw std::out_of_range("slice_rows: range [" + std::to_string(begin) +
                            ", " + std::to_string(end) + ") out of " +
                            std::to_string(nrows) + " rows");
  if (begin == end)
    throw std::invalid_argument("slice_rows: empty slice");
  const std::size_t width = x.size() / nrows;
  std::vector<double> v(x.values().begin() + begin * width,
                        x.values().begin() + end * width);
  std::vector<std::size_t> shape = x.shape();
  shape[0] = end - begin;
  NodePtr nx = node_of(x);
  Tensor out =
      OpAccess::make("slice_rows", std::move(shape), std::move(v), nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no, begin, width]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < dC.size(); ++i)
      nx->grad[begin * width + i] += dC[i];
  });
  return out;
}

Tensor transpose(const Tensor& x) {
  require_2d(x, "transpose");
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[j * r + i] = x.values()[i * c + j];
  NodePtr nx = node_of(x);
  Tensor out = OpAccess::make("transpose", {c, r}, std::move(v), nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no, r, c]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) nx->grad[i * c + j] += dC[j * r + i];
  });
  return out;
}

Tensor softmax(const Tensor& x) {
  if (x.ndim() < 1)
    throw std::invalid_argument("softmax: expects at least 1-D");
  const std::size_t width = x.shape().back();
  const std::size_t rows = x.size() / width;
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* in = x.values().data() + i * width;
    double* o = v.data() + i * width;
    double mx = in[0];
    for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, in[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < width; ++j) o[j] /= total;
  }
  NodePtr nx = node_of(x);
  Tensor out = OpAccess::make("softmax", x.shape(), std::move(v), nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no, rows, width]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < rows; ++i) {
      const double* y = no->value.data() + i * width;
      const double* dy = dC.data() + i * width;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += dy[j] * y[j];
      double* dx = nx->grad.data() + i * width;
      for (std::size_t j = 0; j < width; ++j) dx[j] += y[j] * (dy[j] - dot);
    }
  });
  return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  if (x.ndim() < 1)
    throw std::invalid_argument("layernorm: expects at least 1-D");
  if (eps <= 0.0) throw std::invalid_argument("layernorm: eps must be > 0");
  const std::size_t width = x.shape().back();
  if (gain.size() != width || bias.size() != width)
    throw std::invalid_argument(
        "layernorm: gain/bias must have the normalized width " +
        std::to_string(width));
  const std::size_t rows = x.size() / width;
  std::vector<double> v(x.size());
  std::vector<double> inv_std(rows), means(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* in = x.values().data() + i * width;
    double mean = 0.0;
    for (std::size_t j = 0; j < width; ++j) mean += in[j];
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = in[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(width);  // biased estimator
    const double is = 1.0 / std::sqrt(var + eps);
    means[i] = mean;
    inv_std[i] = is;
    double* o = v.data() + i * width;
    for (std::size_t j = 0; j < width; ++j)
      o[j] = (in[j] - mean) * is * gain.values()[j] + bias.values()[j];
  }
  NodePtr nx = node_of(x), ng = node_of(gain), nb = node_of(bias);
  bool track = nx->requires_grad || ng->requires_grad || nb->requires_grad;
  Tensor out = OpAccess::make("layernorm", x.shape(), std::move(v), track);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, ng, nb, no, rows, width, means = std::move(means),
                         inv_std = std::move(inv_std)]() {
    auto dC = out_grad(no);
    const double w = static_cast<double>(width);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* in = nx->value.data() + i * width;
      const double* dy = dC.data() + i * width;
      const double mean = means[i], is = inv_std[i];
      if (ng->requires_grad) {
        ng->ensure_grad();
        for (std::size_t j = 0; j < width; ++j)
          ng->grad[j] += dy[j] * (in[j] - mean) * is;
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (std::size_t j = 0; j < width; ++j) nb->grad[j] += dy[j];
      }
      if (nx->requires_grad) {
        nx->ensure_grad();
        double sum_gdy = 0.0, sum_gdy_xhat = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
          const double gdy = dy[j] * ng->value[j];
          const double xhat = (in[j] - mean) * is;
          sum_gdy += gdy;
          sum_gdy_xhat += gdy * xhat;
        }
        double* dx = nx->grad.data() + i * width;
        for (std::size_t j = 0; j < width; ++j) {
          const double gdy = dy[j] * ng->value[j];
          const double xhat = (in[j] - mean) * is;
          dx[j] += is * (gdy - sum_gdy / w - xhat * sum_gdy_xhat / w);
        }
      }
    }
  });
  return out;
}

Tensor gelu(const Tensor& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double xi = x.values()[i];
    const double u = kC * (xi + kA * xi * xi * xi);
    v[i] = 0.5 * xi * (1.0 + std::tanh(u));
  }
  NodePtr nx = node_of(x);
  Tensor out = OpAccess::make("gelu", x.shape(), std::move(v), nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < dC.size(); ++i) {
      const double xi = nx->value[i];
      const double u = kC * (xi + kA * xi * xi * xi);
      const double t = std::tanh(u);
      const double du = kC * (1.0 + 3.0 * kA * xi * xi);
      nx->grad[i] += dC[i] * (0.5 * (1.0 + t) + 0.5 * xi * (1.0 - t * t) * du);
    }
  });
  return out;
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  require_2d(table, "embedding_lookup");
  if (ids.empty())
    throw std::invalid_argument("embedding_lookup: empty id list");
  const std::size_t vocab = table.shape()[0], width = table.shape()[1];
  std::vector<double> v(ids.size() * width);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw std::out_of_range("embedding_lookup: token id " +
                              std::to_string(id) + " outside vocabulary of " +
                              std::to_string(vocab));
    const double* row = table.values().data() + static_cast<std::size_t>(id) * width;
    std::copy(row, row + width, v.data() + i * width);
  }
  NodePtr nt = node_of(table);
  Tensor out = OpAccess::make("embedding_lookup", {ids.size(), width},
                              std::move(v), nt->requires_grad);
  NodePtr no = node_of(out);
  std::vector<int> ids_copy(ids.begin(), ids.end());
  OpAccess::record(out, [nt, no, ids_copy = std::move(ids_copy), width]() {
    auto dC = out_grad(no);
    nt->ensure_grad();
    for (std::size_t i = 0; i < ids_copy.size(); ++i) {
      double* row = nt->grad.data() +
                    static_cast<std::size_t>(ids_copy[i]) * width;
      const double* d = dC.data() + i * width;
      for (std::size_t j = 0; j < width; ++j) row[j] += d[j];
    }
  });
  return out;
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  require_2d(logits, "cross_entropy");
  const std::size_t t = logits.shape()[0], vocab = logits.shape()[1];
  if (targets.size() != t)
    throw std::invalid_argument("cross_entropy: " + std::to_string(t) +
                                " logit rows vs " +
                                std::to_string(targets.size()) + " targets");
  std::vector<double> v(t);
  for (std::size_t i = 0; i < t; ++i) {
    const int y = targets[i];
    if (y < 0 || static_cast<std::size_t>(y) >= vocab)
      throw std::out_of_range("cross_entropy: target id " + std::to_string(y) +
                              " outside vocabulary of " + std::to_string(vocab));
    const double* row = logits.values().data() + i * vocab;
    double mx = row[0];
    for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, row[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) total += std::exp(row[j] - mx);
    v[i] = mx + std::log(total) - row[static_cast<std::size_t>(y)];
  }
  NodePtr nl = node_of(logits);
  Tensor out = OpAccess::make("cross_entropy", {t}, std::move(v),
                              nl->requires_grad);
  NodePtr no = node_of(out);
  std::vector<int> tgt(targets.begin(), targets.end());
  OpAccess::record(out, [nl, no, tgt = std::move(tgt), vocab]() {
    auto dC = out_grad(no);
    nl->ensure_grad();
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      const double* row = nl->value.data() + i * vocab;
      double* drow = nl->grad.data() + i * vocab;
      double mx = row[0];
      for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, row[j]);
      double total = 0.0;
      for (std::size_t j = 0; j < vocab; ++j) total += std::exp(row[j] - mx);
      const double d = dC[i];
      for (std::size_t j = 0; j < vocab; ++j) {
        double p = std::exp(row[j] - mx) / total;
        if (j == static_cast<std::size_t>(tgt[i])) p -= 1.0;
        drow[j] += d * p;
      }
    }
  });
  return out;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  NodePtr nx = node_of(x);
  Tensor out = OpAccess::make("sum", {1}, {total}, nx->requires_grad);
  NodePtr no = node_of(out);
  OpAccess::record(out, [nx, no]() {
    auto dC = out_grad(no);
    nx->ensure_grad();
    for (std::size_t i = 0; i < nx->grad.size(); ++i) nx->grad[i] += dC[0];
  });
  return out;
}

}  // namespace spoofvqa
