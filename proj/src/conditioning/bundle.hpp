#pragma once

#include <Eigen/Core>

#include "common/rng.hpp"

namespace speakgen::conditioning {

// Denoiser condition c = [d, a]. An absent modality is stored as zeros of
// the right shape; the flags record which inputs were supplied.
struct ConditionBundle {
  Eigen::VectorXd text;   // text_dim
  Eigen::MatrixXd audio;  // frames x audio_dim
  bool has_text = false;
  bool has_audio = false;

  static ConditionBundle empty(int frames, int text_dim, int audio_dim);

  int frames() const { return static_cast<int>(audio.rows()); }

  // Same bundle with the text replaced by the absent condition.
  ConditionBundle without_text() const;

  void validate(int frames, int text_dim, int audio_dim) const;
};

// Replaces the text embedding with the absent condition with probability p.
// Audio is never masked.
ConditionBundle mask_conditions(const ConditionBundle& bundle, Rng& rng, double p);

}  // namespace speakgen::conditioning
