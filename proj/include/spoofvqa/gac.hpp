#pragma once

#include <cstddef>
#include <vector>

#include "spoofvqa/attention.hpp"
#include "spoofvqa/rng.hpp"
#include "spoofvqa/tensor.hpp"

namespace spoofvqa {

struct GacConfig {
  std::size_t d_model = 64;       // width of the produced tokens
  std::size_t n_heads = 4;        // attention heads in MSA and MCA
  std::size_t n_learnable = 2;    // learnable query count M
  std::size_t n_layers_vision = 6;  // encoder layers supplying global tokens L
  std::size_t mlp_hidden = 256;   // MLP expansion width (4x by default)
  std::size_t d_enc = 32;         // encoder feature width (may differ from d_model)

  void validate() const;
  std::size_t n_tokens() const { return n_learnable + n_layers_vision; }
};

// Patch features plus the per-layer global summary tokens of the encoder.
struct VisualFeatures {
  Tensor local;    // [N x d_enc]
  Tensor globals;  // [L x d_enc], row i is the layer-i global token
};

// Connector parameters. The ablation variant carries its own replacement
// queries so both forward paths are available from one parameter set.
struct GacParams {
  GacConfig config;
  Tensor learnable_queries;  // [M x d_model]
  Tensor ablation_queries;   // [L x d_model], used by the ablated forward only
  Tensor global_proj_w, global_proj_b;  // [d_enc x d_model], [d_model]
  Tensor local_proj_w, local_proj_b;
  AttentionParams msa;  // self-attention over the concatenated queries
  AttentionParams mca;  // cross-attention into the projected local features
  MlpParams mlp;
  LayerNormParams ln_msa;     // on Q before MSA
  LayerNormParams ln_mca_q;   // on Q' before MCA
  LayerNormParams ln_mca_kv;  // on the projected local features
  LayerNormParams ln_mlp;     // on Q'' before the MLP

  static GacParams init(const GacConfig& config, Rng& rng);
  std::vector<NamedParam> parameters() const;
};

// Projected per-layer global tokens Q_V = globals * W_g + b_g.
Tensor project_globals(const GacParams& params, const VisualFeatures& vis);

// Residual stack over Q = concat(learnable queries, projected globals):
//   Q'  = Q  + MSA(LN(Q))
//   Q'' = Q' + MCA(LN(Q'), LN(proj(local)))
//   out = Q'' + MLP(LN(Q''))
// Output has M + L rows of width d_model.
Tensor gac_forward(const GacParams& params, const VisualFeatures& vis);

// Same stack with the projected globals replaced by the ablation queries,
// keeping the token count constant.
Tensor gac_ablated_forward(const GacParams& params, const VisualFeatures& vis);

}  // namespace spoofvqa
