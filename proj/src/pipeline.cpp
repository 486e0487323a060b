#include "spoofvqa/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "spoofvqa/loss.hpp"
#include "spoofvqa/optimizer.hpp"

namespace spoofvqa {

void ModelConfig::validate() const {
  gac.validate();
  decoder.validate();
  if (gac.d_model != decoder.d_model)
    throw std::invalid_argument(
        "model config: gac.d_model and decoder.d_model must agree");
}

void TrainSettings::validate() const {
  if (lr <= 0.0) throw std::invalid_argument("train.lr must be > 0");
  if (weight_decay < 0.0)
    throw std::invalid_argument("train.weight_decay must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("train.batch_size must be >= 1");
  if (epochs == 0) throw std::invalid_argument("train.epochs must be >= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("train.alpha must lie in [0, 1]");
}

// ---- config parsing ----

namespace {

template <typename T>
T fetch(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw std::invalid_argument("config field '" + key + "' has the wrong type");
  }
}

DomainSpec parse_domain(const nlohmann::json& j, const std::string& context,
                        std::uint64_t master_seed) {
  DomainSpec spec;
  if (!j.contains("domain_tag"))
    throw std::invalid_argument("config field '" + context +
                                ".domain_tag' is required");
  spec.domain_tag = j.at("domain_tag").get<std::string>();
  spec.n_samples = fetch<std::size_t>(j, "n_samples", 0);
  spec.cue_strength = fetch<double>(j, "cue_strength", 1.0);
  spec.shift = fetch<double>(j, "shift", 0.0);
  spec.real_fraction = fetch<double>(j, "real_fraction", 0.5);
  spec.caption_hit_rate = fetch<double>(j, "caption_hit_rate", 0.5);
  if (j.contains("seed")) {
    spec.seed = j.at("seed").get<std::uint64_t>();
  } else {
    spec.seed = Rng(master_seed).stream("data/" + spec.domain_tag).next_u64();
  }
  if (j.contains("spoof_mix")) {
    for (const auto& [k, v] : j.at("spoof_mix").items())
      spec.spoof_mix[spoof_type_from_string(k)] = v.get<double>();
  } else {
    spec.spoof_mix = {{SpoofType::print, 0.25},
                      {SpoofType::replay, 0.25},
                      {SpoofType::mask, 0.25},
                      {SpoofType::mannequin, 0.25}};
  }
  return spec;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  RunConfig cfg;
  cfg.master_seed = fetch<std::uint64_t>(j, "seed", 42);
  cfg.seeds = fetch<std::vector<std::uint64_t>>(j, "seeds", {1, 2, 3});
  if (j.contains("features")) {
    const auto& f = j.at("features");
    cfg.features.n_local = fetch<std::size_t>(f, "n_local", 16);
    cfg.features.n_layers = fetch<std::size_t>(f, "n_layers", 6);
    cfg.features.d_enc = fetch<std::size_t>(f, "d_enc", 32);
  }
  if (!j.contains("sources"))
    throw std::invalid_argument("config field 'sources' is required");
  for (const auto& d : j.at("sources"))
    cfg.sources.push_back(parse_domain(d, "sources", cfg.master_seed));
  if (!j.contains("targets"))
    throw std::invalid_argument("config field 'targets' is required");
  for (const auto& d : j.at("targets"))
    cfg.targets.push_back(parse_domain(d, "targets", cfg.master_seed));

  if (j.contains("gac")) {
    const auto& g = j.at("gac");
    cfg.model.gac.d_model = fetch<std::size_t>(g, "d_model", 64);
    cfg.model.gac.n_heads = fetch<std::size_t>(g, "n_heads", 4);
    cfg.model.gac.n_learnable = fetch<std::size_t>(g, "n_learnable", 2);
    cfg.model.gac.mlp_hidden = fetch<std::size_t>(g, "mlp_hidden", 256);
  }
  if (j.contains("decoder")) {
    const auto& d = j.at("decoder");
    cfg.model.decoder.d_model = fetch<std::size_t>(d, "d_model", 64);
    cfg.model.decoder.n_heads = fetch<std::size_t>(d, "n_heads", 4);
    cfg.model.decoder.n_blocks = fetch<std::size_t>(d, "n_blocks", 2);
    cfg.model.decoder.context = fetch<std::size_t>(d, "context", 64);
    cfg.model.decoder.mlp_hidden = fetch<std::size_t>(d, "mlp_hidden", 256);
  }
  // encoder-facing widths always come from the feature shape
  cfg.model.gac.d_enc = cfg.features.d_enc;
  cfg.model.gac.n_layers_vision = cfg.features.n_layers;

  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.lr = fetch<double>(t, "lr", 1e-3);
    cfg.train.weight_decay = fetch<double>(t, "weight_decay", 1e-2);
    cfg.train.batch_size = fetch<std::size_t>(t, "batch_size", 32);
    cfg.train.epochs = fetch<std::size_t>(t, "epochs", 10);
    cfg.train.max_steps = fetch<std::size_t>(t, "max_steps", 0);
    cfg.train.alpha = fetch<double>(t, "alpha", 0.7);
  }
  if (j.contains("scf")) {
    const auto& s = j.at("scf");
    cfg.scf.spoof_hit_rate = fetch<double>(s, "hit_rate", 1.0);
    cfg.scf.match_mode = fetch<bool>(s, "word_boundary", false)
                             ? MatchMode::word_boundary
                             : MatchMode::substring;
  }
  if (j.contains("protocol"))
    cfg.dev_fraction = fetch<double>(j.at("protocol"), "dev_fraction", 0.2);
  cfg.alphas = fetch<std::vector<double>>(j, "alphas",
                                          {0.0, 0.25, 0.5, 0.75, 1.0});
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void RunConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config field 'seeds' is empty");
  features.validate();
  if (sources.empty())
    throw std::invalid_argument("config field 'sources' is empty");
  if (targets.empty())
    throw std::invalid_argument("config field 'targets' is empty");
  for (const auto& d : sources) d.validate();
  for (const auto& d : targets) d.validate();
  model.validate();
  train.validate();
  if (scf.spoof_hit_rate < 0.0 || scf.spoof_hit_rate > 1.0)
    throw std::invalid_argument("config field 'scf.hit_rate' must lie in [0, 1]");
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0)
    throw std::invalid_argument(
        "config field 'protocol.dev_fraction' must lie in (0, 1)");
  ProtocolConfig pc;
  for (const auto& d : sources) pc.source_domains.push_back(d.domain_tag);
  for (const auto& d : targets) pc.target_domains.push_back(d.domain_tag);
  pc.dev_fraction = dev_fraction;
  pc.validate();
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = master_seed;
  j["seeds"] = seeds;
  j["features"] = {{"n_local", features.n_local},
                   {"n_layers", features.n_layers},
                   {"d_enc", features.d_enc}};
  auto dump_domain = [](const DomainSpec& d) {
    nlohmann::json mix;
    for (const auto& [t, p] : d.spoof_mix) mix[to_string(t)] = p;
    return nlohmann::json{{"domain_tag", d.domain_tag},
                          {"n_samples", d.n_samples},
                          {"spoof_mix", mix},
                          {"cue_strength", d.cue_strength},
                          {"shift", d.shift},
                          {"real_fraction", d.real_fraction},
                          {"caption_hit_rate", d.caption_hit_rate},
                          {"seed", d.seed}};
  };
  j["sources"] = nlohmann::json::array();
  for (const auto& d : sources) j["sources"].push_back(dump_domain(d));
  j["targets"] = nlohmann::json::array();
  for (const auto& d : targets) j["targets"].push_back(dump_domain(d));
  j["gac"] = {{"d_model", model.gac.d_model},
              {"n_heads", model.gac.n_heads},
              {"n_learnable", model.gac.n_learnable},
              {"mlp_hidden", model.gac.mlp_hidden}};
  j["decoder"] = {{"d_model", model.decoder.d_model},
                  {"n_heads", model.decoder.n_heads},
                  {"n_blocks", model.decoder.n_blocks},
                  {"context", model.decoder.context},
                  {"mlp_hidden", model.decoder.mlp_hidden}};
  j["train"] = {{"lr", train.lr},
                {"weight_decay", train.weight_decay},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"max_steps", train.max_steps},
                {"alpha", train.alpha}};
  j["scf"] = {{"hit_rate", scf.spoof_hit_rate},
              {"word_boundary", scf.match_mode == MatchMode::word_boundary}};
  j["protocol"] = {{"dev_fraction", dev_fraction}};
  j["alphas"] = alphas;
  return j.dump(2);
}

// ---- SCF stage ----

ScfResult run_scf_pipeline(std::span<const CaptionRecord> records,
                           const KeywordDictionary& dict,
                           const ScfSettings& settings, std::uint64_t seed) {
  std::vector<CaptionRecord> reals, fakes;
  for (const auto& r : records) {
    r.validate();
    (r.label == RecordLabel::real ? reals : fakes).push_back(r);
  }

  ScfResult result;
  const auto survivors =
      filter_spoof_aware(fakes, dict, settings.match_mode, &result.stats);
  result.retained = survivors.size();

  // the filtered set is the captioner-tuning set; its stand-in re-captions
  // every fake with a spoof-aware description
  CaptionerStub spoof_captioner(settings.spoof_hit_rate);
  Rng rng = Rng(seed).stream("scf/recaption");
  for (auto& f : fakes) {
    f.caption = spoof_captioner.caption(f.label, f.spoof_type,
                                        CaptionSource::spoof_aware, rng);
    f.caption_source = CaptionSource::spoof_aware;
  }
  result.dcap = assemble_dcap(reals, fakes);
  return result;
}

Vocabulary build_vocabulary(const CaptionedDataset& dcap) {
  std::vector<std::string> texts;
  texts.emplace_back(kQuestionText);
  texts.emplace_back("This is");
  for (const auto& e : dcap.entries) texts.push_back(e.caption);
  return Vocabulary::build(texts);
}

VqaSample make_vqa_sample(const CaptionRecord& record,
                          const VisualFeatures& vis, const Vocabulary& vocab) {
  VqaSample s;
  s.vis = vis;
  s.question_tokens = vocab.encode(kQuestionText);
  s.answer_tokens.push_back(record.label == RecordLabel::real
                                ? Vocabulary::kYes
                                : Vocabulary::kNo);
  for (int t : vocab.encode("This is " + record.caption))
    s.answer_tokens.push_back(t);
  s.answer_tokens.push_back(Vocabulary::kEos);
  s.judgment_begin = 0;
  s.judgment_end = 1;
  s.interpretation_begin = 1;
  s.interpretation_end = s.answer_tokens.size();
  s.label = record.label == RecordLabel::real ? BinaryLabel::real
                                              : BinaryLabel::fake;
  s.validate(vocab);
  return s;
}

// ---- trained model ----

Tensor TrainedModel::prefix(const VisualFeatures& vis) const {
  return ablated ? gac_ablated_forward(gac, vis) : gac_forward(gac, vis);
}

double TrainedModel::score(const VisualFeatures& vis) const {
  return predict_score(decoder, prefix(vis), question_ids);
}

bool TrainedModel::judge_real(const VisualFeatures& vis) const {
  return predict_label(decoder, prefix(vis), question_ids) == BinaryLabel::real;
}

std::vector<NamedParam> TrainedModel::parameters() const {
  std::vector<NamedParam> out = gac.parameters();
  for (auto& p : decoder.parameters()) out.push_back(std::move(p));
  return out;
}

TrainedModel train_model(const std::vector<const SynthSample*>& train,
                         const ModelConfig& model,
                         const TrainSettings& train_cfg,
                         const ScfSettings& scf_cfg, std::uint64_t seed) {
  model.validate();
  train_cfg.validate();
  if (train.empty()) throw std::invalid_argument("train: no training samples");

  std::vector<CaptionRecord> records;
  records.reserve(train.size());
  std::unordered_map<std::string, const VisualFeatures*> features;
  for (const auto* s : train) {
    records.push_back(s->record);
    features.emplace(s->record.image_id, &s->vis);
  }

  auto scf = run_scf_pipeline(records, KeywordDictionary::defaults(), scf_cfg,
                              seed);

  TrainedModel out;
  out.vocab = build_vocabulary(scf.dcap);
  out.scf_stats = std::move(scf.stats);
  out.scf_retained = scf.retained;
  out.ablated = train_cfg.ablate_gac;
  out.question_ids = out.vocab.encode(kQuestionText);

  std::vector<VqaSample> samples;
  samples.reserve(scf.dcap.entries.size());
  for (const auto& e : scf.dcap.entries)
    samples.push_back(make_vqa_sample(e, *features.at(e.image_id), out.vocab));

  Rng init_rng = Rng(seed).stream("init");
  out.gac = GacParams::init(model.gac, init_rng);
  out.decoder = DecoderParams::init(model.decoder, out.vocab.size(), init_rng);

  // only the active arm's parameters step
  std::vector<NamedParam> trainable;
  for (auto& p : out.gac.parameters()) {
    if (train_cfg.ablate_gac && p.name.starts_with("gac.global_proj")) continue;
    if (!train_cfg.ablate_gac && p.name == "gac.ablation_queries") continue;
    trainable.push_back(std::move(p));
  }
  for (auto& p : out.decoder.parameters()) trainable.push_back(std::move(p));

  AdamW opt(std::move(trainable),
            {.lr = train_cfg.lr, .weight_decay = train_cfg.weight_decay});

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = Rng(seed).stream("shuffle");

  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += train_cfg.batch_size) {
      if (train_cfg.max_steps > 0 && steps >= train_cfg.max_steps) {
        out.steps_run = steps;
        return out;
      }
      const std::size_t stop =
          std::min(order.size(), start + train_cfg.batch_size);
      opt.zero_grad();
      Tape tape;
      TapeScope scope(tape);
      Tensor loss;
      for (std::size_t i = start; i < stop; ++i) {
        const VqaSample& s = samples[order[i]];
        Tensor prefix = train_cfg.ablate_gac
                            ? gac_ablated_forward(out.gac, s.vis)
                            : gac_forward(out.gac, s.vis);
        Tensor logits =
            answer_logits(out.decoder, prefix, s.question_tokens,
                          s.answer_tokens);
        Tensor sample_loss =
            train_cfg.standard_lm
                ? standard_lm_loss(logits, s.answer_tokens)
                : lopsided_loss(logits, s.answer_tokens,
                                {s.judgment_begin, s.judgment_end},
                                {s.interpretation_begin, s.interpretation_end},
                                train_cfg.alpha);
        loss = loss.defined() ? add(loss, sample_loss) : sample_loss;
      }
      loss = scale(loss, 1.0 / static_cast<double>(stop - start));
      tape.backward(loss);
      opt.step();
      ++steps;
    }
  }
  out.steps_run = steps;
  return out;
}

// ---- end-to-end runs ----

std::map<std::string, std::vector<SynthSample>> generate_domains(
    const RunConfig& config) {
  std::map<std::string, std::vector<SynthSample>> out;
  for (const auto& spec : config.sources)
    out.emplace(spec.domain_tag, generate_domain(spec, config.features));
  for (const auto& spec : config.targets)
    out.emplace(spec.domain_tag, generate_domain(spec, config.features));
  return out;
}

EvalReport run_train_eval(const RunConfig& config) {
  config.validate();
  const auto domains = generate_domains(config);

  ProtocolConfig pc;
  for (const auto& d : config.sources) pc.source_domains.push_back(d.domain_tag);
  for (const auto& d : config.targets) pc.target_domains.push_back(d.domain_tag);
  pc.dev_fraction = config.dev_fraction;

  TrainerFn trainer = [&config](const std::vector<const SynthSample*>& train,
                                std::uint64_t seed) {
    auto model = std::make_shared<TrainedModel>(
        train_model(train, config.model, config.train, config.scf, seed));
    Scorer scorer;
    scorer.score = [model](const SynthSample& s) { return model->score(s.vis); };
    scorer.judge_real = [model](const SynthSample& s) {
      return model->judge_real(s.vis);
    };
    return scorer;
  };
  return run_protocol(pc, domains, trainer, config.seeds);
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "# alpha sweep; identical seed list on every row, so per-seed "
         "columns support paired comparisons\n";
  out << "alpha";
  for (auto s : seeds) out << ",hter_seed" << s;
  out << ",hter_mean,hter_var";
  for (auto s : seeds) out << ",auc_seed" << s;
  out << ",auc_mean,auc_var";
  for (auto s : seeds) out << ",judgment_acc_seed" << s;
  out << ",judgment_acc_mean,judgment_acc_var\n";
  for (const auto& row : rows) {
    out << row.alpha;
    for (double v : row.hter) out << "," << v;
    out << "," << row.hter_mean << "," << row.hter_var;
    for (double v : row.auc) out << "," << v;
    out << "," << row.auc_mean << "," << row.auc_var;
    for (double v : row.judgment_accuracy) out << "," << v;
    out << "," << row.judgment_mean << "," << row.judgment_var;
    out << "\n";
  }
  return out.str();
}

SweepResult run_alpha_sweep(const RunConfig& config,
                            std::span<const double> alphas) {
  if (alphas.empty())
    throw std::invalid_argument("alpha sweep: empty alpha grid");
  SweepResult result;
  result.seeds = config.seeds;
  for (double alpha : alphas) {
    RunConfig arm = config;
    arm.train.alpha = alpha;
    EvalReport report = run_train_eval(arm);
    SweepRow row;
    row.alpha = alpha;
    for (const auto& sr : report.seeds) {
      row.hter.push_back(sr.mean_hter);
      row.auc.push_back(sr.mean_auc);
      row.judgment_accuracy.push_back(sr.mean_judgment_accuracy);
    }
    row.hter_mean = report.hter.mean;
    row.hter_var = report.hter.variance;
    row.auc_mean = report.auc.mean;
    row.auc_var = report.auc.variance;
    row.judgment_mean = report.judgment_accuracy.mean;
    row.judgment_var = report.judgment_accuracy.variance;
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace spoofvqa
