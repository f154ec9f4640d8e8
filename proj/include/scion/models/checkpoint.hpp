// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "scion/models/mlp.hpp"

namespace scion {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  MlpModel model;
  std::size_t step = 0;
  std::uint64_t seed = 0;
};

/// Text container described in docs/checkpoint-format.md. Values are written
/// as shortest round-trip decimals, so loading reproduces every bit.
std::string checkpoint_to_string(const Checkpoint& ckpt);
/// Throws std::runtime_error with the line number on malformed input.
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace scion
