#pragma once

#include <cstddef>
#include <span>

#include "spoofvqa/tensor.hpp"

namespace spoofvqa {

struct SpanRange {
  std::size_t begin = 0, end = 0;  // [begin, end)
  std::size_t length() const { return end - begin; }
};

struct LossBreakdown {
  double judgment_loss = 0.0;        // mean CE over the judgment span
  double interpretation_loss = 0.0;  // mean CE over the interpretation span
  double total = 0.0;                // alpha * judgment + (1 - alpha) * interpretation
  double alpha = 0.0;
};

// Split cross-entropy of Eq-style answer supervision: each component is the
// per-token mean over its own span, mixed by alpha. The returned tensor is
// the scalar total (gradients flow through both spans, scaled by their
// weights); the optional breakdown reports the component values.
// An empty interpretation span is only legal at alpha == 1.
Tensor lopsided_loss(const Tensor& logits, std::span<const int> targets,
                     SpanRange judgment, SpanRange interpretation, double alpha,
                     LossBreakdown* breakdown = nullptr);

// Uniform mean cross entropy over all answer tokens (the ablation arm).
Tensor standard_lm_loss(const Tensor& logits, std::span<const int> targets);

// Breakdown-only convenience for analysis paths that do not need gradients.
LossBreakdown lopsided_loss_value(const Tensor& logits,
                                  std::span<const int> targets,
                                  SpanRange judgment, SpanRange interpretation,
                                  double alpha);

}  // namespace spoofvqa
