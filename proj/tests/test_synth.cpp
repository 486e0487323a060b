#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "spoofvqa/metrics.hpp"
#include "spoofvqa/rng.hpp"
#include "spoofvqa/synth.hpp"

using namespace spoofvqa;

namespace {

DomainSpec base_spec(std::string tag, std::size_t n, double cue,
                     std::uint64_t seed) {
  DomainSpec spec;
  spec.domain_tag = std::move(tag);
  spec.n_samples = n;
  spec.spoof_mix = {{SpoofType::print, 0.3},
                    {SpoofType::replay, 0.3},
                    {SpoofType::mask, 0.2},
                    {SpoofType::mannequin, 0.2}};
  spec.cue_strength = cue;
  spec.seed = seed;
  return spec;
}

// pooled mean feature vector, written independently of the model stack
std::vector<double> pooled(const SynthSample& s) {
  const std::size_t d = s.vis.local.cols();
  std::vector<double> out(d, 0.0);
  const std::size_t rows = s.vis.local.rows() + s.vis.globals.rows();
  for (std::size_t i = 0; i < s.vis.local.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += s.vis.local.at(i, j);
  for (std::size_t i = 0; i < s.vis.globals.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += s.vis.globals.at(i, j);
  for (double& v : out) v /= static_cast<double>(rows);
  return out;
}

// plain logistic-regression probe on pooled features (held-out AUC)
double linear_probe_auc(const std::vector<SynthSample>& samples) {
  const std::size_t split = samples.size() * 7 / 10;
  const std::size_t d = samples[0].vis.local.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  const double lr = 0.5;
  for (int epoch = 0; epoch < 200; ++epoch) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < split; ++i) {
      const auto x = pooled(samples[i]);
      const double y = samples[i].record.label == RecordLabel::real ? 1.0 : 0.0;
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
      const double p = 1.0 / (1.0 + std::exp(-z));
      for (std::size_t j = 0; j < d; ++j) gw[j] += (p - y) * x[j];
      gb += p - y;
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= lr * gw[j] / split;
    b -= lr * gb / split;
  }
  std::vector<ScoredSample> scored;
  for (std::size_t i = split; i < samples.size(); ++i) {
    const auto x = pooled(samples[i]);
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    scored.push_back({1.0 / (1.0 + std::exp(-z)),
                      samples[i].record.label == RecordLabel::real, "d"});
  }
  return compute_auc(scored);
}

}  // namespace

TEST_CASE("identical specs generate bit-identical domains") {
  auto spec = base_spec("alpha", 64, 2.0, 9001);
  spec.shift = 1.5;
  auto a = generate_domain(spec, {});
  auto b = generate_domain(spec, {});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].record.image_id == b[i].record.image_id);
    CHECK(a[i].record.caption == b[i].record.caption);
    CHECK(std::equal(a[i].vis.local.values().begin(),
                     a[i].vis.local.values().end(),
                     b[i].vis.local.values().begin()));
    CHECK(std::equal(a[i].vis.globals.values().begin(),
                     a[i].vis.globals.values().end(),
                     b[i].vis.globals.values().begin()));
  }
}

TEST_CASE("class balance and spoof mix follow the spec") {
  auto spec = base_spec("beta", 1001, 1.0, 7);
  spec.real_fraction = 0.4;
  auto samples = generate_domain(spec, {});
  std::size_t reals = 0;
  std::map<SpoofType, std::size_t> types;
  for (const auto& s : samples) {
    if (s.record.label == RecordLabel::real) ++reals;
    else types[*s.record.spoof_type] += 1;
  }
  CHECK(reals == 400);  // round(0.4 * 1001)
  CHECK(types.size() == 4);
  for (const auto& [t, n] : types) CHECK(n > 60);
}

TEST_CASE("cue placement respects the layer contract") {
  // same seed with and without cues: base draws align, so the diff exposes
  // exactly the planted rows
  auto with = base_spec("gamma", 160, 4.0, 55);
  auto without = base_spec("gamma", 160, 0.0, 55);
  FeatureShape shape;
  auto cued = generate_domain(with, shape);
  auto clean = generate_domain(without, shape);
  const std::size_t early_end = shape.early_end();
  REQUIRE(early_end == 3);

  for (std::size_t i = 0; i < cued.size(); ++i) {
    const auto& r = cued[i].record;
    auto differs_row = [&](const Tensor& a, const Tensor& b, std::size_t row) {
      for (std::size_t j = 0; j < a.cols(); ++j)
        if (a.at(row, j) != b.at(row, j)) return true;
      return false;
    };
    if (r.label == RecordLabel::real) {
      for (std::size_t row = 0; row < shape.n_layers; ++row)
        CHECK_FALSE(differs_row(cued[i].vis.globals, clean[i].vis.globals, row));
      continue;
    }
    const bool low_level = *r.spoof_type == SpoofType::print ||
                           *r.spoof_type == SpoofType::replay;
    for (std::size_t row = 0; row < shape.n_layers; ++row) {
      const bool expect = low_level ? row < early_end : row >= early_end;
      CHECK(differs_row(cued[i].vis.globals, clean[i].vis.globals, row) ==
            expect);
    }
    bool local_diff = false;
    for (std::size_t row = 0; row < shape.n_local && !local_diff; ++row)
      local_diff = differs_row(cued[i].vis.local, clean[i].vis.local, row);
    CHECK(local_diff == !low_level);
  }
}

TEST_CASE("strong cues are linearly separable, absent cues are not") {
  auto strong = base_spec("delta", 600, 5.0, 99);
  CHECK(linear_probe_auc(generate_domain(strong, {})) > 95.0);

  auto null = base_spec("delta", 600, 0.0, 99);
  const double auc = linear_probe_auc(generate_domain(null, {}));
  CHECK(auc > 40.0);
  CHECK(auc < 60.0);
}

TEST_CASE("domain shift moves features but keeps cues transferable") {
  auto near = base_spec("src", 300, 5.0, 123);
  auto far = base_spec("tgt", 300, 5.0, 321);
  far.shift = 3.0;
  auto a = generate_domain(near, {});
  auto b = generate_domain(far, {});
  // mean offset differs between domains
  auto mean_of = [](const std::vector<SynthSample>& v) {
    auto m = pooled(v[0]);
    for (std::size_t i = 1; i < v.size(); ++i) {
      auto p = pooled(v[i]);
      for (std::size_t j = 0; j < m.size(); ++j) m[j] += p[j];
    }
    for (double& x : m) x /= static_cast<double>(v.size());
    return m;
  };
  auto ma = mean_of(a), mb = mean_of(b);
  double dist = 0.0;
  for (std::size_t j = 0; j < ma.size(); ++j)
    dist += (ma[j] - mb[j]) * (ma[j] - mb[j]);
  CHECK(std::sqrt(dist) > 1.0);
}

TEST_CASE("degenerate specs are rejected") {
  auto spec = base_spec("eps", 1, 1.0, 1);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  auto bad_mix = base_spec("eps", 10, 1.0, 1);
  bad_mix.spoof_mix[SpoofType::print] = 0.9;  // sums to 1.6
  CHECK_THROWS_AS(bad_mix.validate(), std::invalid_argument);

  auto one_sided = base_spec("eps", 10, 1.0, 1);
  one_sided.real_fraction = 0.999;  // rounds to 10 reals out of 10
  CHECK_THROWS_AS(one_sided.validate(), std::invalid_argument);

  auto neg = base_spec("eps", 10, -0.5, 1);
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("feature container round-trips bit for bit") {
  auto spec = base_spec("zeta", 12, 2.0, 31);
  FeatureShape shape{.n_local = 4, .n_layers = 3, .d_enc = 5};
  auto samples = generate_domain(spec, shape);

  const std::string path =
      (std::filesystem::temp_directory_path() / "spoofvqa_feat_test.bin")
          .string();
  write_features(path, samples, shape, spec.domain_tag);
  auto file = read_features(path);
  std::remove(path.c_str());

  CHECK(file.domain_tag == "zeta");
  CHECK(file.shape.n_local == 4);
  REQUIRE(file.features.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(file.ids[i] == samples[i].record.image_id);
    CHECK(std::equal(file.features[i].local.values().begin(),
                     file.features[i].local.values().end(),
                     samples[i].vis.local.values().begin()));
    CHECK(std::equal(file.features[i].globals.values().begin(),
                     file.features[i].globals.values().end(),
                     samples[i].vis.globals.values().begin()));
  }
}
