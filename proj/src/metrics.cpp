#include "spoofvqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spoofvqa {

namespace {

void check_two_classes(std::span<const ScoredSample> samples, const char* op) {
  std::size_t reals = 0, fakes = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score) || s.score < 0.0 || s.score > 1.0)
      throw std::invalid_argument(std::string(op) +
                                  ": scores must be finite and in [0, 1]");
    (s.is_real ? reals : fakes) += 1;
  }
  if (reals == 0 || fakes == 0)
    throw std::invalid_argument(std::string(op) +
                                ": need at least one real and one fake sample");
}

}  // namespace

double compute_auc(std::span<const ScoredSample> samples) {
  check_two_classes(samples, "compute_auc");
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].score < samples[b].score;
  });

  // midranks over tie groups
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           samples[order[j + 1]].score == samples[order[i]].score)
      ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 +
                       1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double real_rank_sum = 0.0;
  std::size_t n_real = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (samples[k].is_real) {
      real_rank_sum += rank[k];
      ++n_real;
    }
  }
  const std::size_t n_fake = n - n_real;
  const double u = real_rank_sum -
                   static_cast<double>(n_real) *
                       (static_cast<double>(n_real) + 1.0) / 2.0;
  return 100.0 * u / (static_cast<double>(n_real) * static_cast<double>(n_fake));
}

double compute_hter(std::span<const ScoredSample> samples, double threshold) {
  check_two_classes(samples, "compute_hter");
  std::size_t reals = 0, fakes = 0, false_accepts = 0, false_rejects = 0;
  for (const auto& s : samples) {
    if (s.is_real) {
      ++reals;
      if (s.score < threshold) ++false_rejects;
    } else {
      ++fakes;
      if (s.score >= threshold) ++false_accepts;
    }
  }
  const double far = 100.0 * static_cast<double>(false_accepts) /
                     static_cast<double>(fakes);
  const double frr = 100.0 * static_cast<double>(false_rejects) /
                     static_cast<double>(reals);
  return (far + frr) / 2.0;
}

double select_threshold(std::span<const ScoredSample> dev_samples) {
  check_two_classes(dev_samples, "select_threshold");
  std::vector<double> candidates;
  candidates.reserve(dev_samples.size() + 1);
  for (const auto& s : dev_samples) candidates.push_back(s.score);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  candidates.push_back(candidates.back() + 1.0);

  double best_threshold = candidates.front();
  double best_hter = compute_hter(dev_samples, candidates.front());
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double h = compute_hter(dev_samples, candidates[i]);
    if (h < best_hter) {
      best_hter = h;
      best_threshold = candidates[i];
    }
  }
  return best_threshold;
}

}  // namespace spoofvqa
