#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conditioning/bundle.hpp"
#include "conditioning/wav.hpp"
#include "dataset/dataset.hpp"
#include "doubletake/doubletake.hpp"
#include "engine/checkpoint.hpp"
#include "engine/config.hpp"

namespace speakgen::engine {

namespace fs = std::filesystem;

// Writes <name>.bvh plus <name>.txt (text label) or <name>.wav (speech) for
// every synthetic clip, and synth.json describing the run.
void synthesize_corpus(const fs::path& out_dir, const dataset::SyntheticConfig& corpus, std::uint64_t seed);

struct PreprocessSummary {
  int written = 0;
  int skipped = 0;
};

// Parses every *.bvh under bvh_dir (sorted by name), canonicalizes and
// encodes it, picks up <stem>.txt and <stem>.wav sidecars, assigns 8:1:1
// splits and writes features/, audio/ and manifest.json under out_dir.
PreprocessSummary preprocess(const EngineConfig& config, const fs::path& bvh_dir, const fs::path& out_dir,
                             std::uint64_t seed);

using TrainProgress = std::function<void(int step, double loss)>;

struct TrainOutcome {
  Model model;
  std::vector<double> loss_curve;
};

TrainOutcome train_model(const EngineConfig& config, const fs::path& data_dir, std::uint64_t seed,
                         const TrainProgress& progress = {});

// Checkpoint at `out`, loss curve at <out>.loss.csv.
void write_training_outputs(const fs::path& out, const TrainOutcome& outcome);

// Loads a checkpoint and remembers its digest for provenance records.
struct LoadedModel {
  Model model;
  std::string digest;
};
LoadedModel open_model(const fs::path& path);

// Text and audio resolved into the model's normalized condition space.
conditioning::ConditionBundle make_bundle(const Model& model, const std::string& text,
                                          const conditioning::PcmAudio* audio, int frames);

struct SampleRequest {
  std::string text;
  std::optional<fs::path> audio;
  int frames = 0;  // 0: the model's training window
  double gamma = 1.0;
  std::uint64_t seed = 0;
};

// Normalized-space features x0 for one clip.
Eigen::MatrixXd sample_features(const Model& model, const SampleRequest& request);

// Denormalizes, decodes and renders a BVH document.
std::string features_to_bvh(const Model& model, const Eigen::MatrixXd& normalized);

void run_sample(const LoadedModel& model, const SampleRequest& request, const fs::path& out_bvh);

struct ScriptSegment {
  std::string text;
  std::optional<fs::path> audio;
  int frames = 0;
  double gamma = 1.0;
};

// JSON array of {"text", "audio", "frames", "gamma"}; audio paths are
// resolved against the script's directory.
std::vector<ScriptSegment> load_script(const fs::path& path);

struct ComposeOutcome {
  doubletake::Composition composition;
  std::string bvh;
  nlohmann::json metadata;
};

ComposeOutcome compose(const LoadedModel& model, const std::vector<ScriptSegment>& script, std::uint64_t seed);

// Writes the BVH and its boundary metadata at <out>.json.
void run_compose(const LoadedModel& model, const fs::path& script_path, std::uint64_t seed, const fs::path& out_bvh);

// Largest feature-space L2 step between consecutive frames in [begin, end).
double max_frame_jump(const Eigen::MatrixXd& features, int begin, int end);

nlohmann::json evaluate(const EngineConfig& config, const fs::path& generated_dir, const fs::path& reference_dir);
void run_eval(const EngineConfig& config, const fs::path& generated_dir, const fs::path& reference_dir,
              const fs::path& report);

}  // namespace speakgen::engine
