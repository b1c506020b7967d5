#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dataset/dataset.hpp"
#include "denoiser/network.hpp"
#include "engine/config.hpp"
#include "motion/skeleton.hpp"

namespace speakgen::engine {

// Everything needed to sample: the effective config, the canonical skeleton
// used for decoding, both normalizers and the network weights.
struct Model {
  EngineConfig config;
  std::uint64_t seed = 0;
  motion::Skeleton skeleton;
  dataset::NormStats motion_norm;
  dataset::NormStats audio_norm;
  denoiser::DenoiserParams params;
  nlohmann::json training = nlohmann::json::object();  // free-form training metadata
};

// Container layout:
//   "SGCK" | u32 version | u64 manifest bytes | manifest JSON | FTKT tensors
// Tensors follow in the order listed under "tensors" in the manifest.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_model(const Model& model);
Model decode_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace speakgen::engine
