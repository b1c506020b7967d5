#pragma once

#include <span>

#include <Eigen/Core>

#include "conditioning/wav.hpp"

namespace speakgen::conditioning {

// Column widths of the per-frame audio feature vector, in this order.
struct AudioFeatureLayout {
  int mfcc = 40;
  int mel = 85;
  int pitch = 2;  // f0 in Hz, then a voicing flag
  int energy = 1;
  int onsets = 1;
  int external = 1004;  // learned speech embedding; zero-filled without an embedder

  int total() const { return mfcc + mel + pitch + energy + onsets + external; }
  int mfcc_begin() const { return 0; }
  int mel_begin() const { return mfcc; }
  int pitch_begin() const { return mfcc + mel; }
  int energy_begin() const { return pitch_begin() + pitch; }
  int onsets_begin() const { return energy_begin() + energy; }
  int external_begin() const { return onsets_begin() + onsets; }

  void validate() const;
};

inline constexpr int kAudioFeatureDim = 1133;

// Framing: 25 ms Hann analysis window, 50 ms hop (20 frames per second).
inline constexpr int kWindowSamples = 400;
inline constexpr int kHopSamples = 800;
inline constexpr int kFftSize = 512;
inline constexpr double kEnergyFloor = 1e-5;

// Pluggable learned speech embedder (WavLM-style in production).
class AudioEmbedder {
 public:
  virtual ~AudioEmbedder() = default;
  virtual int dim() const = 0;
  // Returns frames x dim().
  virtual Eigen::MatrixXd embed(std::span<const double> samples, int sample_rate, int frames) const = 0;
};

int audio_frame_count(std::size_t samples);

// frames x layout.total(). Deterministic: identical input gives bit-identical
// output.
Eigen::MatrixXd extract_audio_features(const PcmAudio& audio, const AudioFeatureLayout& layout = {},
                                       const AudioEmbedder* embedder = nullptr);

// Linear interpolation along time onto `frames` rows; endpoints are preserved.
Eigen::MatrixXd align_audio_to_frames(const Eigen::MatrixXd& features, int frames);

}  // namespace speakgen::conditioning
