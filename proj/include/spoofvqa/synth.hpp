#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spoofvqa/gac.hpp"
#include "spoofvqa/scf.hpp"

namespace spoofvqa {

struct FeatureShape {
  std::size_t n_local = 16;  // patch tokens per sample
  std::size_t n_layers = 6;  // encoder layers supplying global tokens
  std::size_t d_enc = 32;    // encoder feature width

  void validate() const;
  std::size_t early_end() const { return (n_layers + 1) / 2; }  // ceil(L/2)
};

struct DomainSpec {
  std::string domain_tag;
  std::size_t n_samples = 0;
  std::map<SpoofType, double> spoof_mix;  // must sum to 1
  double cue_strength = 1.0;              // separability of planted cues
  double shift = 0.0;                     // domain-specific affine shift
  double real_fraction = 0.5;
  double caption_hit_rate = 0.5;  // chance a fake's corpus caption names its cue
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthSample {
  VisualFeatures vis;
  CaptionRecord record;
};

// Deterministic synthetic domain. Real samples draw from a base normal
// distribution plus the domain's affine shift; fakes additionally carry a
// type-specific cue: print/replay cues live only in the early-layer global
// tokens, mask/mannequin cues in the late-layer global tokens and the local
// features. Label, feature, and caption randomness run on separate streams
// so toggling cue strength never perturbs the base draws.
std::vector<SynthSample> generate_domain(const DomainSpec& spec,
                                         const FeatureShape& shape);

// The fixed unit cue direction planted for a spoof type.
std::vector<double> cue_direction(SpoofType type, std::size_t d_enc);

// Feature container: u64-LE header length, JSON header (shape, ids,
// labels), then per sample (n_local + n_layers) x d_enc doubles, LE.
void write_features(const std::string& path,
                    const std::vector<SynthSample>& samples,
                    const FeatureShape& shape, const std::string& domain_tag);

struct FeatureFile {
  FeatureShape shape;
  std::string domain_tag;
  std::vector<std::string> ids;
  std::vector<VisualFeatures> features;
};

FeatureFile read_features(const std::string& path);

}  // namespace spoofvqa
