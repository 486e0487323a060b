#pragma once

#include <map>
#include <string>
#include <vector>

#include "spoofvqa/attention.hpp"

namespace spoofvqa {

// Checkpoint file: u64-LE header length, JSON header (tensor names, shapes,
// offsets, plus a caller-supplied config object), then the concatenated
// float64 payload, little-endian.
void save_checkpoint(const std::string& path,
                     const std::vector<NamedParam>& params,
                     const std::string& config_json);

struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  std::string config_json;
};

Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint values into matching parameters; every parameter must
// be present with an identical shape.
void restore_parameters(const Checkpoint& ckpt, std::vector<NamedParam>& params);

}  // namespace spoofvqa
