#include "spoofvqa/loss.hpp"

#include <stdexcept>
#include <string>

namespace spoofvqa {

namespace {

void check_spans(std::size_t n_targets, SpanRange judgment,
                 SpanRange interpretation, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("lopsided loss: alpha must lie in [0, 1], got " +
                                std::to_string(alpha));
  if (judgment.begin != 0 || judgment.end <= judgment.begin)
    throw std::invalid_argument(
        "lopsided loss: judgment span must be non-empty and open the answer");
  if (interpretation.begin != judgment.end ||
      interpretation.end != n_targets)
    throw std::invalid_argument(
        "lopsided loss: spans must be adjacent and cover all targets");
  if (interpretation.length() == 0 && alpha < 1.0)
    throw std::invalid_argument(
        "lopsided loss: empty interpretation span requires alpha == 1");
}

}  // namespace

Tensor lopsided_loss(const Tensor& logits, std::span<const int> targets,
                     SpanRange judgment, SpanRange interpretation, double alpha,
                     LossBreakdown* breakdown) {
  if (logits.ndim() != 2 || logits.shape()[0] != targets.size())
    throw std::invalid_argument(
        "lopsided loss: logits must be [n_targets x vocab]");
  check_spans(targets.size(), judgment, interpretation, alpha);

  Tensor ce = cross_entropy(logits, targets);
  Tensor judgment_ce = slice_rows(ce, judgment.begin, judgment.end);
  Tensor judgment_mean =
      scale(sum(judgment_ce), 1.0 / static_cast<double>(judgment.length()));

  Tensor total;
  double interp_value = 0.0;
  if (interpretation.length() > 0) {
    Tensor interp_ce = slice_rows(ce, interpretation.begin, interpretation.end);
    Tensor interp_mean = scale(
        sum(interp_ce), 1.0 / static_cast<double>(interpretation.length()));
    interp_value = interp_mean.scalar();
    total = add(scale(judgment_mean, alpha), scale(interp_mean, 1.0 - alpha));
  } else {
    total = scale(judgment_mean, alpha);  // alpha == 1 by the span check
  }

  if (breakdown != nullptr) {
    breakdown->judgment_loss = judgment_mean.scalar();
    breakdown->interpretation_loss = interp_value;
    breakdown->alpha = alpha;
    breakdown->total = total.scalar();
  }
  return total;
}

Tensor standard_lm_loss(const Tensor& logits, std::span<const int> targets) {
  if (targets.empty())
    throw std::invalid_argument("standard lm loss: empty targets");
  if (logits.ndim() != 2 || logits.shape()[0] != targets.size())
    throw std::invalid_argument(
        "standard lm loss: logits must be [n_targets x vocab]");
  Tensor ce = cross_entropy(logits, targets);
  return scale(sum(ce), 1.0 / static_cast<double>(targets.size()));
}

LossBreakdown lopsided_loss_value(const Tensor& logits,
                                  std::span<const int> targets,
                                  SpanRange judgment, SpanRange interpretation,
                                  double alpha) {
  LossBreakdown b;
  lopsided_loss(logits, targets, judgment, interpretation, alpha, &b);
  return b;
}

}  // namespace spoofvqa
