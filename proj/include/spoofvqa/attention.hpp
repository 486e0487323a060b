#pragma once

#include <string>
#include <vector>

#include "spoofvqa/rng.hpp"
#include "spoofvqa/tensor.hpp"

namespace spoofvqa {

// Parameter tagged for optimizers/checkpoints. `decay` marks whether weight
// decay applies (matrices yes, biases and layernorm parameters no).
struct NamedParam {
  std::string name;
  Tensor tensor;
  bool decay = true;
};

struct LayerNormParams {
  Tensor gain;  // [d]
  Tensor bias;  // [d]

  static LayerNormParams init(std::size_t d);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

// Multi-head attention with per-head query/key/value/output maps.
// wq/wk/wv: [d_q|d_kv x d_head], wo: [d_head x d_model].
struct AttentionParams {
  std::size_t n_heads = 0;
  std::vector<Tensor> wq, wk, wv, wo;
  std::vector<Tensor> bq, bk, bv;  // per-head [d_head]
  Tensor bo;                       // [d_model]

  static AttentionParams init(std::size_t d_model, std::size_t n_heads,
                              std::size_t d_kv, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

struct MlpParams {
  Tensor w1, b1;  // [d x hidden], [hidden]
  Tensor w2, b2;  // [hidden x d], [d]

  static MlpParams init(std::size_t d, std::size_t hidden, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

// Attention over already-normalized inputs. queries: [Tq x d_model],
// keys_values: [Tk x d_kv]. An optional additive mask [Tq x Tk] is applied
// to the scaled scores (0 = visible, large negative = hidden).
Tensor multi_head_attention(const AttentionParams& p, const Tensor& queries,
                            const Tensor& keys_values,
                            const Tensor* additive_mask = nullptr);

// Additive causal mask: 0 on and below the diagonal, -1e9 above. The
// constant is finite but large enough that exp() underflows to exactly 0,
// so masked positions contribute nothing, bit for bit.
Tensor causal_mask(std::size_t n);

Tensor mlp_forward(const MlpParams& p, const Tensor& x);

// Linear init from N(0, 0.02^2), biases zero.
Tensor init_weight(std::vector<std::size_t> shape, Rng& rng);

}  // namespace spoofvqa
