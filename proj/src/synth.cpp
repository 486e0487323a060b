#include "spoofvqa/synth.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace spoofvqa {

void FeatureShape::validate() const {
  if (n_local == 0 || n_layers == 0 || d_enc == 0)
    throw std::invalid_argument("feature shape: all dimensions must be >= 1");
}

void DomainSpec::validate() const {
  if (domain_tag.empty())
    throw std::invalid_argument("domain spec: empty domain_tag");
  if (n_samples < 2)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': n_samples must be >= 2");
  if (cue_strength < 0.0)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': cue_strength must be >= 0");
  if (real_fraction <= 0.0 || real_fraction >= 1.0)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': real_fraction must lie in (0, 1)");
  if (caption_hit_rate < 0.0 || caption_hit_rate > 1.0)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': caption_hit_rate must lie in [0, 1]");
  if (spoof_mix.empty())
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': spoof_mix is empty");
  double total = 0.0;
  for (const auto& [type, p] : spoof_mix) {
    if (p < 0.0)
      throw std::invalid_argument("domain spec '" + domain_tag +
                                  "': spoof_mix has a negative weight");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': spoof_mix sums to " + std::to_string(total) +
                                ", expected 1");
  const std::size_t n_real = static_cast<std::size_t>(
      std::llround(real_fraction * static_cast<double>(n_samples)));
  if (n_real == 0 || n_real == n_samples)
    throw std::invalid_argument("domain spec '" + domain_tag +
                                "': both classes must be present");
}

std::vector<double> cue_direction(SpoofType type, std::size_t d_enc) {
  // fixed across domains so cues transfer between source and target
  Rng rng = Rng(0x5eedc0de).stream("cue/" + to_string(type));
  std::vector<double> v = rng.normal_vector(d_enc);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

namespace {

bool is_low_level(SpoofType t) {
  return t == SpoofType::print || t == SpoofType::replay;
}

struct DomainShift {
  double scale = 1.0;
  std::vector<double> offset;
};

DomainShift domain_shift(const std::string& tag, double shift,
                         std::size_t d_enc) {
  Rng rng = Rng(0xd0844158).stream("domain/" + tag);
  DomainShift s;
  s.scale = 1.0 + 0.1 * shift;
  std::vector<double> dir = rng.normal_vector(d_enc);
  double norm = 0.0;
  for (double x : dir) norm += x * x;
  norm = std::sqrt(norm);
  s.offset.resize(d_enc);
  for (std::size_t i = 0; i < d_enc; ++i) s.offset[i] = shift * dir[i] / norm;
  return s;
}

}  // namespace

std::vector<SynthSample> generate_domain(const DomainSpec& spec,
                                         const FeatureShape& shape) {
  spec.validate();
  shape.validate();

  Rng master(spec.seed);
  Rng label_rng = master.stream("labels/" + spec.domain_tag);
  Rng feature_rng = master.stream("features/" + spec.domain_tag);
  Rng caption_rng = master.stream("captions/" + spec.domain_tag);

  const std::size_t n_real = static_cast<std::size_t>(
      std::llround(spec.real_fraction * static_cast<double>(spec.n_samples)));

  // class and spoof-type assignment, then one shuffle
  struct Slot {
    bool is_real;
    SpoofType type;  // meaningful for fakes
  };
  std::vector<Slot> slots;
  slots.reserve(spec.n_samples);
  for (std::size_t i = 0; i < n_real; ++i)
    slots.push_back({true, SpoofType::print});
  for (std::size_t i = n_real; i < spec.n_samples; ++i) {
    const double u = label_rng.uniform();
    double acc = 0.0;
    SpoofType chosen = spec.spoof_mix.rbegin()->first;
    for (const auto& [type, p] : spec.spoof_mix) {
      acc += p;
      if (u < acc) {
        chosen = type;
        break;
      }
    }
    slots.push_back({false, chosen});
  }
  label_rng.shuffle(slots);

  const DomainShift shift = domain_shift(spec.domain_tag, spec.shift,
                                         shape.d_enc);
  const std::size_t early_end = shape.early_end();
  CaptionerStub corpus_captioner(spec.caption_hit_rate);

  std::vector<SynthSample> out;
  out.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const Slot slot = slots[i];
    std::vector<double> local =
        feature_rng.normal_vector(shape.n_local * shape.d_enc);
    std::vector<double> globals =
        feature_rng.normal_vector(shape.n_layers * shape.d_enc);

    if (!slot.is_real && spec.cue_strength > 0.0) {
      const std::vector<double> cue = cue_direction(slot.type, shape.d_enc);
      if (is_low_level(slot.type)) {
        // low-level cues surface only in the shallow-layer global tokens
        for (std::size_t layer = 0; layer < early_end; ++layer)
          for (std::size_t d = 0; d < shape.d_enc; ++d)
            globals[layer * shape.d_enc + d] += spec.cue_strength * cue[d];
      } else {
        // semantic cues surface in deep-layer globals and the patches
        for (std::size_t layer = early_end; layer < shape.n_layers; ++layer)
          for (std::size_t d = 0; d < shape.d_enc; ++d)
            globals[layer * shape.d_enc + d] += spec.cue_strength * cue[d];
        for (std::size_t p = 0; p < shape.n_local; ++p)
          for (std::size_t d = 0; d < shape.d_enc; ++d)
            local[p * shape.d_enc + d] += spec.cue_strength * cue[d];
      }
    }

    for (std::size_t j = 0; j < local.size(); ++j)
      local[j] = shift.scale * local[j] + shift.offset[j % shape.d_enc];
    for (std::size_t j = 0; j < globals.size(); ++j)
      globals[j] = shift.scale * globals[j] + shift.offset[j % shape.d_enc];

    SynthSample sample;
    sample.vis.local =
        Tensor::from_data({shape.n_local, shape.d_enc}, std::move(local));
    sample.vis.globals =
        Tensor::from_data({shape.n_layers, shape.d_enc}, std::move(globals));
    sample.record.image_id = spec.domain_tag + "_" + std::to_string(i);
    sample.record.label = slot.is_real ? RecordLabel::real : RecordLabel::fake;
    if (!slot.is_real) sample.record.spoof_type = slot.type;
    // corpus captions play the general captioner's role: fakes mention the
    // true cue only at the configured hit rate
    sample.record.caption_source = CaptionSource::general;
    sample.record.caption = corpus_captioner.caption(
        sample.record.label, sample.record.spoof_type,
        slot.is_real ? CaptionSource::general : CaptionSource::spoof_aware,
        caption_rng);
    out.push_back(std::move(sample));
  }
  return out;
}

// ---- feature container ----

namespace {

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void append_doubles_le(std::string& out, std::span<const double> values) {
  // value-level serialization, so host byte order never leaks into the file
  for (double d : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    append_u64_le(out, bits);
  }
}

double read_double_le(const unsigned char* p) {
  std::uint64_t bits = read_u64_le(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void write_features(const std::string& path,
                    const std::vector<SynthSample>& samples,
                    const FeatureShape& shape, const std::string& domain_tag) {
  nlohmann::json header;
  header["format"] = "spoofvqa-features";
  header["version"] = 1;
  header["domain_tag"] = domain_tag;
  header["n_samples"] = samples.size();
  header["n_local"] = shape.n_local;
  header["n_layers"] = shape.n_layers;
  header["d_enc"] = shape.d_enc;
  nlohmann::json ids = nlohmann::json::array();
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& s : samples) {
    ids.push_back(s.record.image_id);
    labels.push_back(s.record.label == RecordLabel::real ? "real" : "fake");
  }
  header["ids"] = std::move(ids);
  header["labels"] = std::move(labels);
  const std::string header_text = header.dump();

  std::string blob;
  append_u64_le(blob, header_text.size());
  blob += header_text;
  for (const auto& s : samples) {
    append_doubles_le(blob, s.vis.local.values());
    append_doubles_le(blob, s.vis.globals.values());
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature file '" + path + "'");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

FeatureFile read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file '" + path + "'");
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < 8)
    throw std::runtime_error("feature file '" + path + "' is truncated");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint64_t header_len = read_u64_le(bytes);
  if (8 + header_len > blob.size())
    throw std::runtime_error("feature file '" + path + "' is truncated");
  nlohmann::json header = nlohmann::json::parse(blob.substr(8, header_len));
  if (header.at("format") != "spoofvqa-features")
    throw std::runtime_error("feature file '" + path + "': unknown format");

  FeatureFile out;
  out.shape.n_local = header.at("n_local").get<std::size_t>();
  out.shape.n_layers = header.at("n_layers").get<std::size_t>();
  out.shape.d_enc = header.at("d_enc").get<std::size_t>();
  out.domain_tag = header.at("domain_tag").get<std::string>();
  out.ids = header.at("ids").get<std::vector<std::string>>();
  const std::size_t n = header.at("n_samples").get<std::size_t>();
  const std::size_t per_sample =
      (out.shape.n_local + out.shape.n_layers) * out.shape.d_enc;
  if (blob.size() != 8 + header_len + n * per_sample * 8)
    throw std::runtime_error("feature file '" + path +
                             "': payload size mismatch");

  const unsigned char* p = bytes + 8 + header_len;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> local(out.shape.n_local * out.shape.d_enc);
    std::vector<double> globals(out.shape.n_layers * out.shape.d_enc);
    for (auto& v : local) {
      v = read_double_le(p);
      p += 8;
    }
    for (auto& v : globals) {
      v = read_double_le(p);
      p += 8;
    }
    VisualFeatures vis;
    vis.local = Tensor::from_data({out.shape.n_local, out.shape.d_enc},
                                  std::move(local));
    vis.globals = Tensor::from_data({out.shape.n_layers, out.shape.d_enc},
                                    std::move(globals));
    out.features.push_back(std::move(vis));
  }
  return out;
}

}  // namespace spoofvqa
