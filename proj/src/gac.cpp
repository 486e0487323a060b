#include "spoofvqa/gac.hpp"

#include <stdexcept>

namespace spoofvqa {

void GacConfig::validate() const {
  if (n_heads == 0 || d_model % n_heads != 0)
    throw std::invalid_argument(
        "gac config: d_model (" + std::to_string(d_model) +
        ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
  if (n_learnable < 1)
    throw std::invalid_argument("gac config: n_learnable must be >= 1");
  if (n_layers_vision < 1)
    throw std::invalid_argument("gac config: n_layers_vision must be >= 1");
  if (mlp_hidden == 0)
    throw std::invalid_argument("gac config: mlp_hidden must be >= 1");
  if (d_enc == 0) throw std::invalid_argument("gac config: d_enc must be >= 1");
}

GacParams GacParams::init(const GacConfig& config, Rng& rng) {
  config.validate();
  GacParams p;
  p.config = config;
  Rng r = rng.stream("gac");
  p.learnable_queries =
      init_weight({config.n_learnable, config.d_model}, r);
  p.ablation_queries =
      init_weight({config.n_layers_vision, config.d_model}, r);
  p.global_proj_w = init_weight({config.d_enc, config.d_model}, r);
  p.global_proj_b = Tensor::zeros({config.d_model}, true);
  p.local_proj_w = init_weight({config.d_enc, config.d_model}, r);
  p.local_proj_b = Tensor::zeros({config.d_model}, true);
  Rng r_msa = r.stream("msa");
  Rng r_mca = r.stream("mca");
  Rng r_mlp = r.stream("mlp");
  p.msa = AttentionParams::init(config.d_model, config.n_heads, config.d_model,
                                r_msa);
  p.mca = AttentionParams::init(config.d_model, config.n_heads, config.d_model,
                                r_mca);
  p.mlp = MlpParams::init(config.d_model, config.mlp_hidden, r_mlp);
  p.ln_msa = LayerNormParams::init(config.d_model);
  p.ln_mca_q = LayerNormParams::init(config.d_model);
  p.ln_mca_kv = LayerNormParams::init(config.d_model);
  p.ln_mlp = LayerNormParams::init(config.d_model);
  return p;
}

std::vector<NamedParam> GacParams::parameters() const {
  std::vector<NamedParam> out;
  out.push_back({"gac.queries", learnable_queries, true});
  out.push_back({"gac.ablation_queries", ablation_queries, true});
  out.push_back({"gac.global_proj.w", global_proj_w, true});
  out.push_back({"gac.global_proj.b", global_proj_b, false});
  out.push_back({"gac.local_proj.w", local_proj_w, true});
  out.push_back({"gac.local_proj.b", local_proj_b, false});
  msa.collect("gac.msa", out);
  mca.collect("gac.mca", out);
  mlp.collect("gac.mlp", out);
  ln_msa.collect("gac.ln_msa", out);
  ln_mca_q.collect("gac.ln_mca_q", out);
  ln_mca_kv.collect("gac.ln_mca_kv", out);
  ln_mlp.collect("gac.ln_mlp", out);
  return out;
}

namespace {

void check_features(const GacConfig& c, const VisualFeatures& vis) {
  if (vis.globals.ndim() != 2 || vis.globals.shape()[0] != c.n_layers_vision ||
      vis.globals.shape()[1] != c.d_enc)
    throw std::invalid_argument(
        "gac: globals must be [n_layers_vision x d_enc], got [" +
        std::to_string(vis.globals.shape()[0]) + "x" +
        std::to_string(vis.globals.ndim() == 2
                           ? vis.globals.shape()[1]
                           : 0) +
        "]");
  if (vis.local.ndim() != 2 || vis.local.shape()[1] != c.d_enc)
    throw std::invalid_argument("gac: local features must be [N x d_enc]");
}

Tensor residual_stack(const GacParams& p, const Tensor& queries,
                      const Tensor& local) {
  Tensor q_norm = layernorm(queries, p.ln_msa.gain, p.ln_msa.bias);
  Tensor q1 = add(queries, multi_head_attention(p.msa, q_norm, q_norm));

  Tensor local_proj = add(matmul(local, p.local_proj_w), p.local_proj_b);
  Tensor kv = layernorm(local_proj, p.ln_mca_kv.gain, p.ln_mca_kv.bias);
  Tensor q1_norm = layernorm(q1, p.ln_mca_q.gain, p.ln_mca_q.bias);
  Tensor q2 = add(q1, multi_head_attention(p.mca, q1_norm, kv));

  Tensor q2_norm = layernorm(q2, p.ln_mlp.gain, p.ln_mlp.bias);
  return add(q2, mlp_forward(p.mlp, q2_norm));
}

}  // namespace

Tensor project_globals(const GacParams& params, const VisualFeatures& vis) {
  check_features(params.config, vis);
  return add(matmul(vis.globals, params.global_proj_w), params.global_proj_b);
}

Tensor gac_forward(const GacParams& params, const VisualFeatures& vis) {
  Tensor queries =
      concat_rows(params.learnable_queries, project_globals(params, vis));
  return residual_stack(params, queries, vis.local);
}

Tensor gac_ablated_forward(const GacParams& params, const VisualFeatures& vis) {
  check_features(params.config, vis);
  Tensor queries =
      concat_rows(params.learnable_queries, params.ablation_queries);
  return residual_stack(params, queries, vis.local);
}

}  // namespace spoofvqa
