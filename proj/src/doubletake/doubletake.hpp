#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "conditioning/bundle.hpp"
#include "diffusion/sampler.hpp"
#include "diffusion/schedule.hpp"

namespace speakgen::doubletake {

struct HandshakeConfig {
  int handshake = 20;       // overlap between adjacent clips, frames
  int blend = 10;           // mask ramp length on each side of the handshake
  double hard_max = 0.85;   // mask value across the handshake
  double soft_min = 0.15;   // mask value at the outer end of the ramp
  int refine_steps = 900;   // noising depth of the second take
  int context = 80;         // frames of each neighbour included in a sandwich

  void validate(int diffusion_steps) const;
};

// One entry of a composition script after conditioning has been resolved.
// The audio in `bundle` must already be aligned to `frames` rows.
struct Segment {
  conditioning::ConditionBundle bundle;
  double gamma = 1.0;
  int frames = 0;
};

// Row j: (1 - j/h) * prev_tail[j] + (j/h) * next_head[j].
Eigen::MatrixXd blend_handshake(const Eigen::MatrixXd& prev_tail, const Eigen::MatrixXd& next_head);

// Per-frame masks over a sandwich laid out as `lead` frames of the earlier
// clip, the handshake, then `trail` frames of the later clip.
//
// The product is hard_max across the handshake, falls linearly to soft_min
// over the `blend` frames on each side and is 0 everywhere else:
//
//   distance from handshake edge   inside   1 .. blend                          beyond
//   hard * soft                    hmax     hmax + (smin - hmax) * k / blend    0
struct TransitionMasks {
  Eigen::VectorXd hard;
  Eigen::VectorXd soft;

  Eigen::VectorXd product() const { return hard.cwiseProduct(soft); }
};

TransitionMasks build_transition_masks(int lead, int trail, const HandshakeConfig& config);

// Conditioning for every row of a sandwich: frame f is denoised under
// bundles[owner[f]] with gammas[owner[f]]. Bundles span the whole sandwich.
struct SandwichConditions {
  std::vector<conditioning::ConditionBundle> bundles;
  std::vector<double> gammas;
  std::vector<int> owner;
};

// Second take over one sandwich: noise `first_take` to refine_steps, then
// denoise while pulling every iterate back towards the first take,
//   x <- first_take + mask * (x - first_take).
// Rows where the mask is 0 are returned bit-identical to the first take.
Eigen::MatrixXd refine_sandwich(const diffusion::Denoiser& denoiser, const Eigen::MatrixXd& first_take,
                                const Eigen::VectorXd& mask, const SandwichConditions& conditions,
                                const HandshakeConfig& config, const diffusion::NoiseSchedule& schedule, Rng& rng);

struct FrameSource {
  int segment = 0;      // owning segment
  int frame = 0;        // row within that segment's first take
  bool handshake = false;
};

struct Transition {
  int handshake_begin = 0;  // first output frame of the blended overlap
  int window_begin = 0;     // refined sandwich, [window_begin, window_end)
  int window_end = 0;
};

struct Composition {
  Eigen::MatrixXd motion;      // refined, unfolded
  Eigen::MatrixXd first_take;  // unfolded before refinement (handshakes blended)
  std::vector<FrameSource> sources;
  std::vector<Transition> transitions;
  std::vector<int> segment_begin;  // output frame where each segment starts
};

// Sum of segment lengths minus one handshake per seam.
int composed_length(const std::vector<Segment>& segments, int handshake);

// Stream used for segment i; segment 0 uses the seed itself so that a single
// segment reproduces a plain sampling run.
Rng segment_rng(std::uint64_t seed, int segment);

Composition compose_long(const diffusion::Denoiser& denoiser, const std::vector<Segment>& segments,
                         const HandshakeConfig& config, const diffusion::NoiseSchedule& schedule,
                         std::uint64_t seed);

}  // namespace speakgen::doubletake
