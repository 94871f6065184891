#include "fsts/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "fsts/errors.hpp"

namespace fsts {

namespace {

constexpr const char* kFormatName = "fsts-checkpoint";
constexpr int kFormatVersion = 1;

std::string payload_name(const std::string& manifest_path) {
  size_t slash = manifest_path.find_last_of("/\\");
  std::string base =
      slash == std::string::npos ? manifest_path : manifest_path.substr(slash + 1);
  return base + ".bin";
}

std::string sibling_path(const std::string& manifest_path, const std::string& payload) {
  size_t slash = manifest_path.find_last_of("/\\");
  if (slash == std::string::npos) return payload;
  return manifest_path.substr(0, slash + 1) + payload;
}

}  // namespace

void save_checkpoint(ModelParams& params, const EmbeddingConfig& config,
                     const std::string& manifest_path) {
  config.validate();
  nlohmann::json manifest;
  manifest["format"] = kFormatName;
  manifest["version"] = kFormatVersion;

  nlohmann::json cfg;
  cfg["input_length"] = config.input_length;
  cfg["dropout_rate"] = config.dropout_rate;
  auto blocks = nlohmann::json::array();
  for (const ConvBlockSpec& b : config.blocks) {
    blocks.push_back({b.filters, b.filter_length, b.pool_size});
  }
  cfg["blocks"] = blocks;
  manifest["config"] = cfg;

  std::vector<char> payload;
  auto tensors = nlohmann::json::array();
  for (const NamedTensor& nt : params.all_tensors()) {
    nlohmann::json t;
    t["name"] = nt.name;
    t["shape"] = nt.tensor->shape;
    t["offset"] = payload.size();
    tensors.push_back(t);
    for (float v : nt.tensor->values) {
      const uint32_t bits = std::bit_cast<uint32_t>(v);
      for (int i = 0; i < 4; ++i) payload.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  }
  manifest["tensors"] = tensors;
  manifest["payload"] = payload_name(manifest_path);
  manifest["payload_bytes"] = payload.size();

  std::ofstream mf(manifest_path, std::ios::trunc);
  if (!mf) throw InputError("cannot write '" + manifest_path + "'");
  mf << manifest.dump(2) << "\n";
  if (!mf.flush()) throw InputError("write to '" + manifest_path + "' failed");

  const std::string bin_path = sibling_path(manifest_path, payload_name(manifest_path));
  std::ofstream bf(bin_path, std::ios::binary | std::ios::trunc);
  if (!bf) throw InputError("cannot write '" + bin_path + "'");
  bf.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!bf.flush()) throw InputError("write to '" + bin_path + "' failed");
}

std::pair<ModelParams, EmbeddingConfig> load_checkpoint(const std::string& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw InputError("cannot open '" + manifest_path + "'");
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw BadMagicError("'" + manifest_path + "' is not a checkpoint manifest: " + e.what());
  }
  if (!manifest.contains("format") || manifest["format"] != kFormatName) {
    throw BadMagicError("'" + manifest_path + "' is not a checkpoint manifest");
  }
  if (!manifest.contains("version") || manifest["version"].get<int>() != kFormatVersion) {
    throw BadVersionError("'" + manifest_path + "' has unsupported checkpoint version");
  }

  EmbeddingConfig config;
  try {
    const auto& cfg = manifest.at("config");
    config.input_length = cfg.at("input_length").get<int64_t>();
    config.dropout_rate = cfg.at("dropout_rate").get<double>();
    config.blocks.clear();
    for (const auto& b : cfg.at("blocks")) {
      config.blocks.push_back({b.at(0).get<int64_t>(), b.at(1).get<int64_t>(),
                               b.at(2).get<int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + manifest_path + "' has a malformed config: " + e.what());
  }
  config.validate();

  ModelParams params = ModelParams::init(config, 0);
  auto expected = params.all_tensors();
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != expected.size()) {
    throw ShapeError("'" + manifest_path + "' lists " + std::to_string(tensors.size()) +
                     " tensors, model needs " + std::to_string(expected.size()));
  }

  const std::string bin_path =
      sibling_path(manifest_path, manifest.at("payload").get<std::string>());
  std::ifstream bf(bin_path, std::ios::binary);
  if (!bf) throw InputError("cannot open checkpoint payload '" + bin_path + "'");
  std::vector<char> payload((std::istreambuf_iterator<char>(bf)),
                            std::istreambuf_iterator<char>());
  const size_t declared = manifest.at("payload_bytes").get<size_t>();
  if (payload.size() != declared) {
    throw TruncatedFileError("checkpoint payload '" + bin_path + "' has " +
                             std::to_string(payload.size()) + " bytes, manifest declares " +
                             std::to_string(declared));
  }

  for (size_t i = 0; i < expected.size(); ++i) {
    const auto& entry = tensors.at(i);
    const std::string name = entry.at("name").get<std::string>();
    if (name != expected[i].name) {
      throw ShapeError("checkpoint tensor '" + name + "' where '" + expected[i].name +
                       "' was expected");
    }
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    if (shape != expected[i].tensor->shape) {
      throw ShapeError("checkpoint tensor '" + name + "' shape mismatch");
    }
    const size_t offset = entry.at("offset").get<size_t>();
    const size_t bytes = expected[i].tensor->values.size() * 4;
    if (offset + bytes > payload.size()) {
      throw TruncatedFileError("checkpoint payload too short for tensor '" + name + "'");
    }
    for (size_t j = 0; j < expected[i].tensor->values.size(); ++j) {
      uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) {
        bits = (bits << 8) |
               static_cast<unsigned char>(payload[offset + j * 4 + static_cast<size_t>(b)]);
      }
      expected[i].tensor->values[j] = std::bit_cast<float>(bits);
    }
  }
  return {std::move(params), config};
}

}  // namespace fsts
