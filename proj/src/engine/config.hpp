#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conditioning/audio.hpp"
#include "denoiser/network.hpp"
#include "denoiser/trainer.hpp"
#include "doubletake/doubletake.hpp"
#include "motion/bvh.hpp"
#include "motion/features.hpp"

namespace speakgen::engine {

struct EngineConfig {
  double fps = 20.0;
  int frames = 180;            // training window T_M
  int diffusion_steps = 1000;
  double target_height = 1.70;
  double contact_speed = 0.10;
  motion::AxisMap axis_map;
  std::array<std::string, 4> feet{"left_ankle", "right_ankle", "left_foot", "right_foot"};
  conditioning::AudioFeatureLayout audio_layout;

  // Model shape; feature_dim is filled in from the data at training time.
  int hidden_dim = 256;
  int layers = 8;
  int heads = 4;
  int ff_mult = 4;
  int max_len = 1024;
  bool positional_encoding = true;

  int train_steps = 100000;
  int batch_size = 256;
  double learning_rate = 2e-4;
  double mask_probability = 0.1;
  diffusion::LossConfig loss;
  std::vector<double> dataset_weights;  // empty: equal expected draws per source
  int log_every = 100;

  doubletake::HandshakeConfig doubletake;

  void validate() const;

  motion::FeatureOptions feature_options() const;
  denoiser::DenoiserConfig denoiser_config(int feature_dim) const;
  denoiser::TrainConfig train_config() const;
};

nlohmann::json to_json(const EngineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
EngineConfig config_from_json(const nlohmann::json& j);

EngineConfig load_config(const std::filesystem::path& path);

// Applies "dotted.key=value" with a JSON value (bare words are taken as
// strings), e.g. "model.hidden_dim=64" or "doubletake.refine_steps=90".
void apply_override(nlohmann::json& j, const std::string& assignment);

// SHA-256 of the canonical JSON form.
std::string config_digest(const EngineConfig& config);

nlohmann::json skeleton_to_json(const motion::Skeleton& skeleton);
motion::Skeleton skeleton_from_json(const nlohmann::json& j);

}  // namespace speakgen::engine
