#include "conditioning/bundle.hpp"

#include "common/error.hpp"

namespace speakgen::conditioning {

ConditionBundle ConditionBundle::empty(int frames, int text_dim, int audio_dim) {
  return {Eigen::VectorXd::Zero(text_dim), Eigen::MatrixXd::Zero(frames, audio_dim), false, false};
}

ConditionBundle ConditionBundle::without_text() const {
  ConditionBundle out = *this;
  out.text.setZero();
  out.has_text = false;
  return out;
}

void ConditionBundle::validate(int frames, int text_dim, int audio_dim) const {
  require(text.size() == text_dim, "text embedding has " + std::to_string(text.size()) + " entries, expected " +
                                       std::to_string(text_dim));
  require(audio.rows() == frames && audio.cols() == audio_dim,
          "audio features are " + std::to_string(audio.rows()) + "x" + std::to_string(audio.cols()) + ", expected " +
              std::to_string(frames) + "x" + std::to_string(audio_dim));
  require(text.allFinite() && audio.allFinite(), "condition bundle contains non-finite values");
  require(has_text || text.isZero(0.0), "absent text must be the zero vector");
  require(has_audio || audio.isZero(0.0), "absent audio must be all zeros");
}

ConditionBundle mask_conditions(const ConditionBundle& bundle, Rng& rng, double p) {
  require(p >= 0.0 && p <= 1.0, "mask probability must lie in [0, 1]");
  if (rng.bernoulli(p)) return bundle.without_text();
  return bundle;
}

}  // namespace speakgen::conditioning
