#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spoofvqa/attention.hpp"
#include "spoofvqa/gac.hpp"
#include "spoofvqa/rng.hpp"
#include "spoofvqa/tensor.hpp"
#include "spoofvqa/vocab.hpp"

namespace spoofvqa {

// The unified instruction every sample is asked.
inline constexpr const char* kQuestionText = "Is this photo of a real person?";

enum class BinaryLabel { real, fake };

// One training instance: visual features, the tokenized question, and the
// tokenized answer split into its judgment and interpretation spans.
struct VqaSample {
  VisualFeatures vis;
  std::vector<int> question_tokens;
  std::vector<int> answer_tokens;
  std::size_t judgment_begin = 0, judgment_end = 0;            // [begin, end)
  std::size_t interpretation_begin = 0, interpretation_end = 0;
  BinaryLabel label = BinaryLabel::real;
  std::string domain_tag;

  void validate(const Vocabulary& vocab) const;
};

struct DecoderConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_blocks = 2;
  std::size_t context = 64;  // max text positions
  std::size_t mlp_hidden = 256;

  void validate() const;
};

struct DecoderBlockParams {
  LayerNormParams ln_attn, ln_mlp;
  AttentionParams attn;
  MlpParams mlp;
};

struct DecoderParams {
  DecoderConfig config;
  std::size_t vocab_size = 0;
  Tensor token_embedding;  // [V x d_model]
  Tensor pos_embedding;    // [context x d_model], text positions only
  Tensor visual_segment;   // [d_model], added to every visual prefix token
  std::vector<DecoderBlockParams> blocks;
  LayerNormParams ln_final;
  Tensor out_w, out_b;  // [d_model x V], [V]

  static DecoderParams init(const DecoderConfig& config, std::size_t vocab_size,
                            Rng& rng);
  std::vector<NamedParam> parameters() const;
};

// Causal decoder over [visual prefix; BOS; text tokens]. Returns the logit
// rows for every position, [P + 1 + text_len x V].
Tensor decoder_logits(const DecoderParams& params, const Tensor& prefix,
                      std::span<const int> text_ids);

// Logit rows that predict each answer token (teacher forcing); shape
// [answer_len x V]. Used by the training losses.
Tensor answer_logits(const DecoderParams& params, const Tensor& prefix,
                     std::span<const int> question, std::span<const int> answer);

// log p(answer_i | prefix, question, answer_<i) for every i.
std::vector<double> sequence_logprob(const DecoderParams& params,
                                     const Tensor& prefix,
                                     std::span<const int> question,
                                     std::span<const int> answer);

// p(first answer token == "Yes"); the liveness score in [0, 1].
double predict_score(const DecoderParams& params, const Tensor& prefix,
                     std::span<const int> question);

// Hard judgment with ties broken toward "No".
BinaryLabel predict_label(const DecoderParams& params, const Tensor& prefix,
                          std::span<const int> question);

// Greedy decoding until EOS or max_len tokens; EOS is included when emitted.
std::vector<int> generate(const DecoderParams& params, const Tensor& prefix,
                          std::span<const int> question, std::size_t max_len);

}  // namespace spoofvqa
