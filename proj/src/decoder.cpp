#include "spoofvqa/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spoofvqa {

void VqaSample::validate(const Vocabulary& vocab) const {
  if (judgment_begin != 0 || judgment_end <= judgment_begin)
    throw std::invalid_argument("vqa sample: judgment span must start the answer"
                                " and be non-empty");
  if (interpretation_begin != judgment_end ||
      interpretation_end != answer_tokens.size() ||
      interpretation_end < interpretation_begin)
    throw std::invalid_argument(
        "vqa sample: spans must be disjoint, ordered, and cover the answer");
  const int first = answer_tokens.at(judgment_begin);
  if (first != Vocabulary::kYes && first != Vocabulary::kNo)
    throw std::invalid_argument("vqa sample: judgment must open with Yes or No");
  for (int t : answer_tokens) vocab.token(t);
  for (int t : question_tokens) vocab.token(t);
}

void DecoderConfig::validate() const {
  if (n_heads == 0 || d_model % n_heads != 0)
    throw std::invalid_argument(
        "decoder config: d_model (" + std::to_string(d_model) +
        ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
  if (n_blocks == 0)
    throw std::invalid_argument("decoder config: n_blocks must be >= 1");
  if (context == 0)
    throw std::invalid_argument("decoder config: context must be >= 1");
  if (mlp_hidden == 0)
    throw std::invalid_argument("decoder config: mlp_hidden must be >= 1");
}

DecoderParams DecoderParams::init(const DecoderConfig& config,
                                  std::size_t vocab_size, Rng& rng) {
  config.validate();
  if (vocab_size < 5)
    throw std::invalid_argument("decoder: vocabulary must include the reserved tokens");
  DecoderParams p;
  p.config = config;
  p.vocab_size = vocab_size;
  Rng r = rng.stream("decoder");
  p.token_embedding = init_weight({vocab_size, config.d_model}, r);
  p.pos_embedding = init_weight({config.context, config.d_model}, r);
  p.visual_segment = init_weight({config.d_model}, r);
  for (std::size_t b = 0; b < config.n_blocks; ++b) {
    Rng rb = r.stream("block" + std::to_string(b));
    DecoderBlockParams blk;
    blk.ln_attn = LayerNormParams::init(config.d_model);
    blk.ln_mlp = LayerNormParams::init(config.d_model);
    blk.attn = AttentionParams::init(config.d_model, config.n_heads,
                                     config.d_model, rb);
    Rng rm = rb.stream("mlp");
    blk.mlp = MlpParams::init(config.d_model, config.mlp_hidden, rm);
    p.blocks.push_back(std::move(blk));
  }
  p.ln_final = LayerNormParams::init(config.d_model);
  // zero-initialized head: an untrained model scores every sample 1/V
  p.out_w = Tensor::zeros({config.d_model, vocab_size}, true);
  p.out_b = Tensor::zeros({vocab_size}, true);
  return p;
}

std::vector<NamedParam> DecoderParams::parameters() const {
  std::vector<NamedParam> out;
  out.push_back({"dec.token_embedding", token_embedding, true});
  out.push_back({"dec.pos_embedding", pos_embedding, true});
  out.push_back({"dec.visual_segment", visual_segment, false});
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string prefix = "dec.block" + std::to_string(b);
    blocks[b].ln_attn.collect(prefix + ".ln_attn", out);
    blocks[b].ln_mlp.collect(prefix + ".ln_mlp", out);
    blocks[b].attn.collect(prefix + ".attn", out);
    blocks[b].mlp.collect(prefix + ".mlp", out);
  }
  ln_final.collect("dec.ln_final", out);
  out.push_back({"dec.out_w", out_w, true});
  out.push_back({"dec.out_b", out_b, false});
  return out;
}

namespace {

// [visual prefix + segment offset; embeddings of BOS + text + positions]
Tensor embed_sequence(const DecoderParams& p, const Tensor& prefix,
                      std::span<const int> text_ids) {
  if (prefix.ndim() != 2 || prefix.shape()[1] != p.config.d_model)
    throw std::invalid_argument("decoder: prefix width must equal d_model");
  const std::size_t text_len = text_ids.size() + 1;  // BOS first
  if (text_len > p.config.context)
    throw std::invalid_argument("decoder: text length " +
                                std::to_string(text_len) +
                                " exceeds context " +
                                std::to_string(p.config.context));
  std::vector<int> ids(text_len);
  ids[0] = Vocabulary::kBos;
  std::copy(text_ids.begin(), text_ids.end(), ids.begin() + 1);
  Tensor tok = embedding_lookup(p.token_embedding, ids);
  Tensor pos = slice_rows(p.pos_embedding, 0, text_len);
  Tensor text = add(tok, pos);
  Tensor vis = add(prefix, p.visual_segment);
  return concat_rows(vis, text);
}

}  // namespace

Tensor decoder_logits(const DecoderParams& p, const Tensor& prefix,
                      std::span<const int> text_ids) {
  Tensor x = embed_sequence(p, prefix, text_ids);
  Tensor mask = causal_mask(x.rows());
  for (const auto& blk : p.blocks) {
    Tensor normed = layernorm(x, blk.ln_attn.gain, blk.ln_attn.bias);
    x = add(x, multi_head_attention(blk.attn, normed, normed, &mask));
    Tensor normed2 = layernorm(x, blk.ln_mlp.gain, blk.ln_mlp.bias);
    x = add(x, mlp_forward(blk.mlp, normed2));
  }
  Tensor final_norm = layernorm(x, p.ln_final.gain, p.ln_final.bias);
  return add(matmul(final_norm, p.out_w), p.out_b);
}

Tensor answer_logits(const DecoderParams& p, const Tensor& prefix,
                     std::span<const int> question, std::span<const int> answer) {
  if (answer.empty())
    throw std::invalid_argument("decoder: empty answer");
  std::vector<int> text(question.begin(), question.end());
  text.insert(text.end(), answer.begin(), answer.end());
  Tensor logits = decoder_logits(p, prefix, text);
  // token text[k] sits at sequence position P + 1 + k; the row predicting
  // answer[i] = text[Q + i] is P + Q + i
  const std::size_t p_len = prefix.rows();
  const std::size_t q_len = question.size();
  return slice_rows(logits, p_len + q_len, p_len + q_len + answer.size());
}

std::vector<double> sequence_logprob(const DecoderParams& p,
                                     const Tensor& prefix,
                                     std::span<const int> question,
                                     std::span<const int> answer) {
  if (answer.empty())
    throw std::invalid_argument("decoder: empty answer");
  Tensor logits = answer_logits(p, prefix, question, answer);
  Tensor ce = cross_entropy(logits, answer);
  std::vector<double> out(ce.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -ce.values()[i];
  return out;
}

namespace {

std::vector<double> next_token_distribution(const DecoderParams& p,
                                            const Tensor& prefix,
                                            std::span<const int> text) {
  Tensor logits = decoder_logits(p, prefix, text);
  Tensor probs = softmax(slice_rows(logits, logits.rows() - 1, logits.rows()));
  return {probs.values().begin(), probs.values().end()};
}

}  // namespace

double predict_score(const DecoderParams& p, const Tensor& prefix,
                     std::span<const int> question) {
  auto probs = next_token_distribution(p, prefix, question);
  return probs[Vocabulary::kYes];
}

BinaryLabel predict_label(const DecoderParams& p, const Tensor& prefix,
                          std::span<const int> question) {
  auto probs = next_token_distribution(p, prefix, question);
  // ties go to "No": rejecting a spoof is the safe failure
  return probs[Vocabulary::kYes] > probs[Vocabulary::kNo] ? BinaryLabel::real
                                                          : BinaryLabel::fake;
}

std::vector<int> generate(const DecoderParams& p, const Tensor& prefix,
                          std::span<const int> question, std::size_t max_len) {
  if (max_len < 1)
    throw std::invalid_argument("decoder: max_len must be >= 1");
  std::vector<int> text(question.begin(), question.end());
  std::vector<int> out;
  while (out.size() < max_len) {
    auto probs = next_token_distribution(p, prefix, text);
    int best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = static_cast<int>(i);
    out.push_back(best);
    if (best == Vocabulary::kEos) break;
    text.push_back(best);
  }
  return out;
}

}  // namespace spoofvqa
