#pragma once

#include <span>
#include <string>
#include <vector>

namespace spoofvqa {

// Scored evaluation sample; higher score = more likely real.
struct ScoredSample {
  double score = 0.0;  // liveness in [0, 1]
  bool is_real = false;
  std::string domain_tag;
};

// Mann-Whitney AUC in percent: P(score_real > score_fake) + P(tie)/2.
// Requires both classes; computed via midranks, ties handled exactly.
double compute_auc(std::span<const ScoredSample> samples);

// (FAR + FRR)/2 in percent. FAR counts fakes with score >= threshold as
// accepted; FRR counts reals with score < threshold as rejected.
double compute_hter(std::span<const ScoredSample> samples, double threshold);

// HTER-minimizing threshold on a development split. Candidates are the
// observed unique scores plus one value above the maximum (one
// representative per HTER equivalence class, since HTER is constant on
// (s_{k-1}, s_k]); ties break toward the smallest candidate.
double select_threshold(std::span<const ScoredSample> dev_samples);

}  // namespace spoofvqa
