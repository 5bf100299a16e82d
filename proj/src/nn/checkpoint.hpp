#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace cgmkit::nn {

// Versioned binary checkpoint: a JSON config blob followed by named f32
// tensors, little-endian throughout. Optimizer moments may be appended as
// ordinary entries under an "opt/" prefix.
struct Checkpoint {
  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cgmkit::nn
