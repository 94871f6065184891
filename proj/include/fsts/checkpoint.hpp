#pragma once

#include <string>
#include <utility>

#include "fsts/model.hpp"

namespace fsts {

// Checkpoint = JSON manifest (tensor names, shapes, byte offsets, config,
// format version) plus a raw little-endian float32 payload next to it.
// Round-trips are bitwise lossless.
void save_checkpoint(ModelParams& params, const EmbeddingConfig& config,
                     const std::string& manifest_path);

std::pair<ModelParams, EmbeddingConfig> load_checkpoint(const std::string& manifest_path);

}  // namespace fsts
