#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spoofvqa/metrics.hpp"
#include "spoofvqa/synth.hpp"

namespace spoofvqa {

struct ProtocolConfig {
  std::vector<std::string> source_domains;
  std::vector<std::string> target_domains;
  double dev_fraction = 0.2;  // source share held out for thresholding

  void validate() const;  // at least one of each, disjoint
};

// What a trained model must expose to the protocol runner.
struct Scorer {
  std::function<double(const SynthSample&)> score;    // liveness in [0, 1]
  std::function<bool(const SynthSample&)> judge_real;  // hard judgment
};

// Per seed: trains on the given source samples, returns the scorer.
using TrainerFn =
    std::function<Scorer(const std::vector<const SynthSample*>& train,
                         std::uint64_t seed)>;

struct DomainMetrics {
  std::string domain;
  double hter = 0.0;         // at the dev-selected threshold
  double hter_oracle = 0.0;  // HTER minimized on the target itself (optimistic)
  double auc = 0.0;
  double judgment_accuracy = 0.0;
};

struct SeedReport {
  std::uint64_t seed = 0;
  double threshold = 0.0;  // selected on the source dev split
  std::vector<DomainMetrics> domains;
  double mean_hter = 0.0, mean_hter_oracle = 0.0, mean_auc = 0.0;
  double mean_judgment_accuracy = 0.0;
};

struct AggregateStat {
  double mean = 0.0;
  double variance = 0.0;  // population variance over seeds
};

struct EvalReport {
  std::vector<SeedReport> seeds;
  std::vector<std::string> domains;
  std::vector<AggregateStat> domain_hter, domain_hter_oracle, domain_auc;
  AggregateStat hter, hter_oracle, auc, judgment_accuracy;

  std::string to_json() const;
  std::string to_csv() const;
};

// Leave-domains-out orchestration: per seed, trains on the source domains
// (minus the dev split used for threshold selection), scores every target
// domain, and aggregates mean/variance across seeds. Seeds may run on
// parallel workers; per-seed results are deterministic either way.
EvalReport run_protocol(
    const ProtocolConfig& config,
    const std::map<std::string, std::vector<SynthSample>>& domains,
    const TrainerFn& trainer, std::span<const std::uint64_t> seeds);

}  // namespace spoofvqa
