#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spoofvqa/decoder.hpp"
#include "spoofvqa/gac.hpp"
#include "spoofvqa/protocol.hpp"
#include "spoofvqa/scf.hpp"
#include "spoofvqa/synth.hpp"
#include "spoofvqa/vocab.hpp"

namespace spoofvqa {

struct ModelConfig {
  GacConfig gac;
  DecoderConfig decoder;

  void validate() const;  // widths must line up
};

struct TrainSettings {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::size_t max_steps = 0;  // 0 = no cap
  double alpha = 0.7;
  bool ablate_gac = false;
  bool standard_lm = false;  // uniform LM loss ablation arm

  void validate() const;
};

struct ScfSettings {
  double spoof_hit_rate = 1.0;  // the spoof-aware captioner stand-in
  MatchMode match_mode = MatchMode::substring;
};

// One config file drives every subcommand.
struct RunConfig {
  std::uint64_t master_seed = 42;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  FeatureShape features;
  std::vector<DomainSpec> sources, targets;
  ModelConfig model;
  TrainSettings train;
  ScfSettings scf;
  double dev_fraction = 0.2;
  std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  void validate() const;
  std::string to_json() const;
};

struct ScfResult {
  CaptionedDataset dcap;
  ScfStats stats;
  std::size_t retained = 0;  // filter survivors (the would-be tuning set)
};

// Filter the fake records against the dictionary, then assemble the
// captioned dataset: reals keep their general captions, every fake is
// re-captioned by the spoof-aware captioner stand-in.
ScfResult run_scf_pipeline(std::span<const CaptionRecord> records,
                           const KeywordDictionary& dict,
                           const ScfSettings& settings, std::uint64_t seed);

// Question + answer-format tokens + every caption in the dataset.
Vocabulary build_vocabulary(const CaptionedDataset& dcap);

// Answer = [Yes|No] ++ "This is <caption>" ++ EOS; judgment span is the
// single opening token, the interpretation span covers the rest.
VqaSample make_vqa_sample(const CaptionRecord& record,
                          const VisualFeatures& vis, const Vocabulary& vocab);

class TrainedModel {
 public:
  GacParams gac;
  DecoderParams decoder;
  Vocabulary vocab;
  std::vector<int> question_ids;
  bool ablated = false;
  ScfStats scf_stats;
  std::size_t scf_retained = 0;
  std::size_t steps_run = 0;

  double score(const VisualFeatures& vis) const;
  bool judge_real(const VisualFeatures& vis) const;
  std::vector<NamedParam> parameters() const;

 private:
  Tensor prefix(const VisualFeatures& vis) const;
};

TrainedModel train_model(const std::vector<const SynthSample*>& train,
                         const ModelConfig& model, const TrainSettings& train_cfg,
                         const ScfSettings& scf_cfg, std::uint64_t seed);

// Generates every configured domain (sources and targets).
std::map<std::string, std::vector<SynthSample>> generate_domains(
    const RunConfig& config);

// The full per-seed pipeline behind `train-eval`.
EvalReport run_train_eval(const RunConfig& config);

struct SweepRow {
  double alpha = 0.0;
  std::vector<double> hter, auc, judgment_accuracy;  // per seed
  double hter_mean = 0.0, hter_var = 0.0;
  double auc_mean = 0.0, auc_var = 0.0;
  double judgment_mean = 0.0, judgment_var = 0.0;
};

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRow> rows;
  std::string to_csv() const;
};

SweepResult run_alpha_sweep(const RunConfig& config,
                            std::span<const double> alphas);

}  // namespace spoofvqa
