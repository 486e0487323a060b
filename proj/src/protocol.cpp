#include "spoofvqa/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spoofvqa/parallel.hpp"
#include "spoofvqa/rng.hpp"

namespace spoofvqa {

void ProtocolConfig::validate() const {
  if (source_domains.empty())
    throw std::invalid_argument("protocol: source_domains is empty");
  if (target_domains.empty())
    throw std::invalid_argument("protocol: target_domains is empty");
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0)
    throw std::invalid_argument("protocol: dev_fraction must lie in (0, 1)");
  std::set<std::string> sources(source_domains.begin(), source_domains.end());
  for (const auto& t : target_domains)
    if (sources.count(t))
      throw std::invalid_argument("protocol: domain '" + t +
                                  "' appears as both source and target");
}

namespace {

AggregateStat aggregate(std::span<const double> values) {
  AggregateStat s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
  s.variance /= static_cast<double>(values.size());
  return s;
}

}  // namespace

EvalReport run_protocol(
    const ProtocolConfig& config,
    const std::map<std::string, std::vector<SynthSample>>& domains,
    const TrainerFn& trainer, std::span<const std::uint64_t> seeds) {
  config.validate();
  if (seeds.empty()) throw std::invalid_argument("protocol: no seeds given");
  for (const auto& tag : config.source_domains)
    if (!domains.count(tag))
      throw std::invalid_argument("protocol: missing source domain '" + tag +
                                  "'");
  for (const auto& tag : config.target_domains)
    if (!domains.count(tag))
      throw std::invalid_argument("protocol: missing target domain '" + tag +
                                  "'");

  // flat source pool in a fixed order
  std::vector<const SynthSample*> pool;
  for (const auto& tag : config.source_domains)
    for (const auto& s : domains.at(tag)) pool.push_back(&s);
  if (pool.size() < 5)
    throw std::invalid_argument("protocol: source pool too small");

  EvalReport report;
  report.seeds.resize(seeds.size());
  report.domains = config.target_domains;

  parallel_for(seeds.size(), [&](std::size_t si) {
    const std::uint64_t seed = seeds[si];
    // deterministic dev split per seed
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng dev_rng = Rng(seed).stream("dev-split");
    dev_rng.shuffle(order);
    std::size_t n_dev = static_cast<std::size_t>(
        std::llround(config.dev_fraction * static_cast<double>(pool.size())));
    n_dev = std::clamp<std::size_t>(n_dev, 1, pool.size() - 1);

    std::vector<const SynthSample*> dev, train;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_dev ? dev : train).push_back(pool[order[i]]);

    Scorer scorer = trainer(train, seed);

    std::vector<ScoredSample> dev_scored;
    for (const auto* s : dev)
      dev_scored.push_back({scorer.score(*s),
                            s->record.label == RecordLabel::real,
                            s->record.image_id});
    const double threshold = select_threshold(dev_scored);

    SeedReport sr;
    sr.seed = seed;
    sr.threshold = threshold;
    for (const auto& tag : config.target_domains) {
      std::vector<ScoredSample> scored;
      std::size_t correct = 0;
      for (const auto& s : domains.at(tag)) {
        const bool is_real = s.record.label == RecordLabel::real;
        scored.push_back({scorer.score(s), is_real, tag});
        if (scorer.judge_real(s) == is_real) ++correct;
      }
      DomainMetrics m;
      m.domain = tag;
      m.auc = compute_auc(scored);
      m.hter = compute_hter(scored, threshold);
      m.hter_oracle = compute_hter(scored, select_threshold(scored));
      m.judgment_accuracy =
          100.0 * static_cast<double>(correct) /
          static_cast<double>(domains.at(tag).size());
      sr.domains.push_back(std::move(m));
    }
    for (const auto& m : sr.domains) {
      sr.mean_hter += m.hter;
      sr.mean_hter_oracle += m.hter_oracle;
      sr.mean_auc += m.auc;
      sr.mean_judgment_accuracy += m.judgment_accuracy;
    }
    const double nd = static_cast<double>(sr.domains.size());
    sr.mean_hter /= nd;
    sr.mean_hter_oracle /= nd;
    sr.mean_auc /= nd;
    sr.mean_judgment_accuracy /= nd;
    report.seeds[si] = std::move(sr);
  });

  // aggregates across seeds
  const std::size_t nd = report.domains.size();
  for (std::size_t di = 0; di < nd; ++di) {
    std::vector<double> h, ho, a;
    for (const auto& sr : report.seeds) {
      h.push_back(sr.domains[di].hter);
      ho.push_back(sr.domains[di].hter_oracle);
      a.push_back(sr.domains[di].auc);
    }
    report.domain_hter.push_back(aggregate(h));
    report.domain_hter_oracle.push_back(aggregate(ho));
    report.domain_auc.push_back(aggregate(a));
  }
  std::vector<double> h, ho, a, j;
  for (const auto& sr : report.seeds) {
    h.push_back(sr.mean_hter);
    ho.push_back(sr.mean_hter_oracle);
    a.push_back(sr.mean_auc);
    j.push_back(sr.mean_judgment_accuracy);
  }
  report.hter = aggregate(h);
  report.hter_oracle = aggregate(ho);
  report.auc = aggregate(a);
  report.judgment_accuracy = aggregate(j);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["domains"] = domains;
  nlohmann::json seeds_json = nlohmann::json::array();
  for (const auto& sr : seeds) {
    nlohmann::json s;
    s["seed"] = sr.seed;
    s["threshold"] = sr.threshold;
    s["mean_hter"] = sr.mean_hter;
    s["mean_hter_oracle"] = sr.mean_hter_oracle;
    s["mean_auc"] = sr.mean_auc;
    s["mean_judgment_accuracy"] = sr.mean_judgment_accuracy;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& m : sr.domains) {
      nlohmann::json d;
      d["domain"] = m.domain;
      d["hter"] = m.hter;
      d["hter_oracle"] = m.hter_oracle;
      d["auc"] = m.auc;
      d["judgment_accuracy"] = m.judgment_accuracy;
      ds.push_back(std::move(d));
    }
    s["per_domain"] = std::move(ds);
    seeds_json.push_back(std::move(s));
  }
  j["per_seed"] = std::move(seeds_json);
  auto agg = [](const AggregateStat& s) {
    return nlohmann::json{{"mean", s.mean}, {"variance", s.variance}};
  };
  nlohmann::json per_domain = nlohmann::json::array();
  for (std::size_t i = 0; i < domains.size(); ++i)
    per_domain.push_back({{"domain", domains[i]},
                          {"hter", agg(domain_hter[i])},
                          {"hter_oracle", agg(domain_hter_oracle[i])},
                          {"auc", agg(domain_auc[i])}});
  j["aggregate"] = {{"per_domain", std::move(per_domain)},
                    {"hter", agg(hter)},
                    {"hter_oracle", agg(hter_oracle)},
                    {"auc", agg(auc)},
                    {"judgment_accuracy", agg(judgment_accuracy)}};
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "scope,seed,domain,hter,hter_oracle,auc,judgment_accuracy,threshold\n";
  for (const auto& sr : seeds) {
    for (const auto& m : sr.domains)
      out << "seed," << sr.seed << "," << m.domain << "," << m.hter << ","
          << m.hter_oracle << "," << m.auc << "," << m.judgment_accuracy << ","
          << sr.threshold << "\n";
    out << "seed_mean," << sr.seed << ",(all)," << sr.mean_hter << ","
        << sr.mean_hter_oracle << "," << sr.mean_auc << ","
        << sr.mean_judgment_accuracy << "," << sr.threshold << "\n";
  }
  for (std::size_t i = 0; i < domains.size(); ++i) {
    out << "domain_mean,(all)," << domains[i] << "," << domain_hter[i].mean
        << "," << domain_hter_oracle[i].mean << "," << domain_auc[i].mean
        << ",,\n";
    out << "domain_variance,(all)," << domains[i] << ","
        << domain_hter[i].variance << "," << domain_hter_oracle[i].variance
        << "," << domain_auc[i].variance << ",,\n";
  }
  out << "overall_mean,(all),(all)," << hter.mean << "," << hter_oracle.mean
      << "," << auc.mean << "," << judgment_accuracy.mean << ",\n";
  out << "overall_variance,(all),(all)," << hter.variance << ","
      << hter_oracle.variance << "," << auc.variance << ","
      << judgment_accuracy.variance << ",\n";
  return out.str();
}

}  // namespace spoofvqa
