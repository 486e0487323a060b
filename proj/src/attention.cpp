#include "spoofvqa/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace spoofvqa {

Tensor init_weight(std::vector<std::size_t> shape, Rng& rng) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor::from_data(std::move(shape), rng.normal_vector(n, 0.0, 0.02),
                           true);
}

LayerNormParams LayerNormParams::init(std::size_t d) {
  return {Tensor::full({d}, 1.0, true), Tensor::zeros({d}, true)};
}

void LayerNormParams::collect(const std::string& prefix,
                              std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".gain", gain, false});
  out.push_back({prefix + ".bias", bias, false});
}

AttentionParams AttentionParams::init(std::size_t d_model, std::size_t n_heads,
                                      std::size_t d_kv, Rng& rng) {
  if (n_heads == 0 || d_model % n_heads != 0)
    throw std::invalid_argument(
        "attention: d_model must be divisible by n_heads");
  const std::size_t d_head = d_model / n_heads;
  AttentionParams p;
  p.n_heads = n_heads;
  for (std::size_t h = 0; h < n_heads; ++h) {
    p.wq.push_back(init_weight({d_model, d_head}, rng));
    p.wk.push_back(init_weight({d_kv, d_head}, rng));
    p.wv.push_back(init_weight({d_kv, d_head}, rng));
    p.wo.push_back(init_weight({d_head, d_model}, rng));
    p.bq.push_back(Tensor::zeros({d_head}, true));
    p.bk.push_back(Tensor::zeros({d_head}, true));
    p.bv.push_back(Tensor::zeros({d_head}, true));
  }
  p.bo = Tensor::zeros({d_model}, true);
  return p;
}

void AttentionParams::collect(const std::string& prefix,
                              std::vector<NamedParam>& out) const {
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    out.push_back({hp + ".wq", wq[h], true});
    out.push_back({hp + ".wk", wk[h], true});
    out.push_back({hp + ".wv", wv[h], true});
    out.push_back({hp + ".wo", wo[h], true});
    out.push_back({hp + ".bq", bq[h], false});
    out.push_back({hp + ".bk", bk[h], false});
    out.push_back({hp + ".bv", bv[h], false});
  }
  out.push_back({prefix + ".bo", bo, false});
}

MlpParams MlpParams::init(std::size_t d, std::size_t hidden, Rng& rng) {
  MlpParams p;
  p.w1 = init_weight({d, hidden}, rng);
  p.b1 = Tensor::zeros({hidden}, true);
  p.w2 = init_weight({hidden, d}, rng);
  p.b2 = Tensor::zeros({d}, true);
  return p;
}

void MlpParams::collect(const std::string& prefix,
                        std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".w1", w1, true});
  out.push_back({prefix + ".b1", b1, false});
  out.push_back({prefix + ".w2", w2, true});
  out.push_back({prefix + ".b2", b2, false});
}

Tensor causal_mask(std::size_t n) {
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = -1e9;
  return Tensor::from_data({n, n}, std::move(m));
}

Tensor multi_head_attention(const AttentionParams& p, const Tensor& queries,
                            const Tensor& keys_values,
                            const Tensor* additive_mask) {
  const std::size_t d_head = p.wq[0].shape()[1];
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));
  Tensor out;
  for (std::size_t h = 0; h < p.n_heads; ++h) {
    Tensor q = add(matmul(queries, p.wq[h]), p.bq[h]);
    Tensor k = add(matmul(keys_values, p.wk[h]), p.bk[h]);
    Tensor v = add(matmul(keys_values, p.wv[h]), p.bv[h]);
    Tensor scores = scale(matmul(q, transpose(k)), inv_sqrt);
    if (additive_mask != nullptr) scores = add(scores, *additive_mask);
    Tensor attended = matmul(softmax(scores), v);
    Tensor head_out = matmul(attended, p.wo[h]);
    out = h == 0 ? head_out : add(out, head_out);
  }
  return add(out, p.bo);
}

Tensor mlp_forward(const MlpParams& p, const Tensor& x) {
  return add(matmul(gelu(add(matmul(x, p.w1), p.b1)), p.w2), p.b2);
}

}  // namespace spoofvqa
