#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "common/rng.hpp"
#include "conditioning/bundle.hpp"
#include "conditioning/text.hpp"
#include "conditioning/wav.hpp"
#include "motion/features.hpp"
#include "motion/kinematics.hpp"
#include "motion/skeleton.hpp"

namespace speakgen::dataset {

inline constexpr double kStdFloor = 1e-8;

// Per-column standardization fitted on the training split.
struct NormStats {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;  // floored at kStdFloor

  // Pools every row of every matrix. Needs at least two rows in total.
  static NormStats fit(const std::vector<Eigen::MatrixXd>& data);

  int dim() const { return static_cast<int>(mean.size()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
  void validate(int dim) const;
};

struct Window {
  Eigen::MatrixXd data;  // exactly `frames` rows
  int valid_frames = 0;  // rows [0, valid_frames) hold real data
  int start = 0;         // first source row used
};

// Shorter input is zero-padded at the end; longer input is cropped at a
// uniformly drawn start; exact length is returned unchanged.
Window pad_or_crop(const Eigen::MatrixXd& x, int frames, Rng& rng);

// Same placement as `window` applied to another per-frame matrix (audio).
Eigen::MatrixXd follow_window(const Eigen::MatrixXd& x, const Window& window, int frames);

struct SampledIndex {
  int dataset = 0;
  int index = 0;
};

// Picks dataset k with probability w_k / sum(w), then a uniform element.
class WeightedSampler {
 public:
  WeightedSampler(std::vector<int> sizes, std::vector<double> weights);
  SampledIndex next(Rng& rng) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> cumulative_;
};

// Weights giving every non-empty dataset the same expected number of draws.
std::vector<double> balanced_weights(const std::vector<int>& sizes);

enum class Split { kTrain, kValidation, kTest };
const char* split_name(Split s);
Split parse_split(const std::string& name);

// Seeded 8:1:1 assignment by sequence.
std::vector<Split> assign_splits(int count, Rng& rng);

inline constexpr int kMinTextFrames = 40;
inline constexpr int kMaxTextFrames = 180;

struct DatasetEntry {
  std::string name;
  std::string source;             // "text" or "audio" conditioned set
  Eigen::MatrixXd features;       // frames x D, not normalized
  conditioning::ConditionBundle bundle;
  std::string text;
  int original_length = 0;
};

// Synthetic stand-in corpus: a five-joint upper/lower body and three labelled
// motion families plus an audio-driven set.
struct SyntheticConfig {
  int frames = 60;
  double fps = 20.0;
  int per_family = 24;      // text-conditioned clips per family
  int audio_clips = 24;
  double wave_hz = 2.0;
  double walk_hz = 1.0;
  double speech_hz = 1.5;   // arm oscillation driven by the audio envelope
  double phase_spread = 0.5;  // start phase drawn from [0, phase_spread) radians
};

struct SyntheticClip {
  std::string name;
  std::string family;       // wave, walk, still or speech
  std::string text;         // empty for the audio set
  motion::MotionClip clip;
  conditioning::PcmAudio audio;  // empty for the text set
};

motion::Skeleton synthetic_skeleton();
motion::FootJoints synthetic_feet();
std::string family_text(const std::string& family);
// Arm joint whose motion carries the family signature.
inline constexpr const char* kSyntheticArmJoint = "r_hand";

std::vector<SyntheticClip> make_synthetic_clips(const SyntheticConfig& config, Rng& rng);

// Canonicalizes and encodes one clip and resolves its conditions. Audio, when
// given, is aligned to the clip's frame count.
DatasetEntry make_entry(const std::string& name, const motion::Skeleton& skeleton, const motion::MotionClip& clip,
                        const std::string& text, const conditioning::PcmAudio* audio,
                        const motion::FeatureOptions& options, const conditioning::TextEncoder& text_encoder,
                        double target_height = motion::kDefaultTargetHeight);

// Canonicalizes, encodes and conditions synthetic clips.
std::vector<DatasetEntry> make_synthetic_corpus(const SyntheticConfig& config, Rng& rng,
                                                const conditioning::TextEncoder& text_encoder);

}  // namespace speakgen::dataset
