#include "doubletake/doubletake.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"

namespace speakgen::doubletake {
namespace {

constexpr std::uint64_t kTransitionTag = 0x7472616e73ULL;

// Applies each row owner's bundle and guidance weight; the bundle handed to
// predict() is ignored.
class OwnedDenoiser final : public diffusion::Denoiser {
 public:
  OwnedDenoiser(const diffusion::Denoiser& base, const SandwichConditions& conditions)
      : base_(base), conditions_(conditions) {}

  int feature_dim() const override { return base_.feature_dim(); }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t, const conditioning::ConditionBundle&) const override {
    Eigen::MatrixXd out(x_t.rows(), x_t.cols());
    for (std::size_t k = 0; k < conditions_.bundles.size(); ++k) {
      bool used = false;
      for (int owner : conditions_.owner) used = used || owner == static_cast<int>(k);
      if (!used) continue;
      const Eigen::MatrixXd part = diffusion::cfg_denoise(base_, x_t, t, conditions_.bundles[k], conditions_.gammas[k]);
      for (Eigen::Index f = 0; f < x_t.rows(); ++f)
        if (conditions_.owner[static_cast<std::size_t>(f)] == static_cast<int>(k)) out.row(f) = part.row(f);
    }
    return out;
  }

 private:
  const diffusion::Denoiser& base_;
  const SandwichConditions& conditions_;
};

void anchor(Eigen::MatrixXd& x, const Eigen::MatrixXd& first_take, const Eigen::VectorXd& mask) {
  for (Eigen::Index f = 0; f < x.rows(); ++f) {
    if (mask(f) == 0.0)
      x.row(f) = first_take.row(f);
    else
      x.row(f) = first_take.row(f) + mask(f) * (x.row(f) - first_take.row(f));
  }
}

}  // namespace

void HandshakeConfig::validate(int diffusion_steps) const {
  require(handshake > 0, "handshake length must be positive");
  require(blend > 0 && blend <= handshake, "blend length must lie in (0, handshake]");
  require(soft_min >= 0.0 && soft_min <= hard_max && hard_max <= 1.0,
          "masks need 0 <= soft_min <= hard_max <= 1");
  require(refine_steps > 0 && refine_steps <= diffusion_steps,
          "refinement steps must lie in (0, " + std::to_string(diffusion_steps) + "]");
  require(context >= blend, "sandwich context must cover the blend ramp");
}

Eigen::MatrixXd blend_handshake(const Eigen::MatrixXd& prev_tail, const Eigen::MatrixXd& next_head) {
  require(prev_tail.rows() == next_head.rows() && prev_tail.cols() == next_head.cols(),
          "handshake halves must have the same shape");
  require(prev_tail.rows() >= 1, "handshake must have at least one frame");
  const Eigen::Index h = prev_tail.rows();
  Eigen::MatrixXd tau(h, prev_tail.cols());
  for (Eigen::Index j = 0; j < h; ++j) {
    const double a = static_cast<double>(j) / static_cast<double>(h);
    tau.row(j) = (1.0 - a) * prev_tail.row(j) + a * next_head.row(j);
  }
  return tau;
}

TransitionMasks build_transition_masks(int lead, int trail, const HandshakeConfig& config) {
  require(lead >= config.blend && trail >= config.blend,
          "sandwich needs at least " + std::to_string(config.blend) + " frames on each side of the handshake");
  const int h = config.handshake;
  const int n = lead + h + trail;
  TransitionMasks m;
  m.hard = Eigen::VectorXd::Zero(n);
  m.soft = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < n; ++f) {
    int k = 0;  // distance outside the handshake
    if (f < lead) k = lead - f;
    if (f >= lead + h) k = f - (lead + h) + 1;
    if (k > config.blend) continue;
    m.hard(f) = config.hard_max;
    const double target = config.hard_max + (config.soft_min - config.hard_max) * k / config.blend;
    m.soft(f) = config.hard_max > 0.0 ? target / config.hard_max : 0.0;
  }
  return m;
}

Eigen::MatrixXd refine_sandwich(const diffusion::Denoiser& denoiser, const Eigen::MatrixXd& first_take,
                                const Eigen::VectorXd& mask, const SandwichConditions& conditions,
                                const HandshakeConfig& config, const diffusion::NoiseSchedule& schedule, Rng& rng) {
  require(config.refine_steps >= 1 && config.refine_steps <= schedule.steps(),
          "refinement steps exceed the schedule length");
  require(mask.size() == first_take.rows(), "mask length does not match the sandwich");
  require(conditions.owner.size() == static_cast<std::size_t>(first_take.rows()),
          "every sandwich frame needs an owning segment");
  require(conditions.gammas.size() == conditions.bundles.size(), "one guidance weight per bundle");
  for (int o : conditions.owner)
    require(o >= 0 && o < static_cast<int>(conditions.bundles.size()), "frame owner out of range");
  for (const auto& b : conditions.bundles)
    require(b.frames() == first_take.rows(), "sandwich bundles must span the sandwich");

  const OwnedDenoiser owned(denoiser, conditions);
  conditioning::ConditionBundle unused;
  const Eigen::MatrixXd noise = rng.normal_matrix(first_take.rows(), first_take.cols());
  Eigen::MatrixXd x = diffusion::q_sample(first_take, config.refine_steps, noise, schedule);
  anchor(x, first_take, mask);
  return diffusion::denoise_from(owned, std::move(x), config.refine_steps, unused, 1.0, schedule, rng,
                                 [&](int, Eigen::MatrixXd& it) { anchor(it, first_take, mask); });
}

int composed_length(const std::vector<Segment>& segments, int handshake) {
  int total = 0;
  for (const auto& s : segments) total += s.frames;
  return total - (static_cast<int>(segments.size()) - 1) * handshake;
}

Rng segment_rng(std::uint64_t seed, int segment) {
  return segment == 0 ? Rng(seed) : Rng(Rng::mix(seed, static_cast<std::uint64_t>(segment)));
}

Composition compose_long(const diffusion::Denoiser& denoiser, const std::vector<Segment>& segments,
                         const HandshakeConfig& config, const diffusion::NoiseSchedule& schedule,
                         std::uint64_t seed) {
  require(!segments.empty(), "composition script is empty");
  config.validate(schedule.steps());
  const int h = config.handshake;
  const int n = static_cast<int>(segments.size());
  for (int i = 0; i < n; ++i) {
    const auto& s = segments[static_cast<std::size_t>(i)];
    if (n > 1)
      require(s.frames >= 2 * h, "segment " + std::to_string(i) + " has " + std::to_string(s.frames) +
                                     " frames, fewer than twice the handshake (" + std::to_string(2 * h) + ")");
    require(s.frames >= 1, "segment " + std::to_string(i) + " has no frames");
    require(s.bundle.frames() == s.frames, "segment " + std::to_string(i) + " audio is not aligned to its frames");
  }

  std::vector<Eigen::MatrixXd> takes;
  for (int i = 0; i < n; ++i) {
    const auto& s = segments[static_cast<std::size_t>(i)];
    Rng rng = segment_rng(seed, i);
    takes.push_back(diffusion::sample_loop(denoiser, s.bundle, s.gamma, s.frames, schedule, rng));
  }

  Composition out;
  const int total = composed_length(segments, h);
  const Eigen::Index dim = denoiser.feature_dim();
  out.first_take = Eigen::MatrixXd(total, dim);
  out.sources.resize(static_cast<std::size_t>(total));
  Eigen::MatrixXd audio(total, segments[0].bundle.audio.cols());
  int begin = 0;
  for (int i = 0; i < n; ++i) {
    const auto& s = segments[static_cast<std::size_t>(i)];
    out.segment_begin.push_back(begin);
    out.first_take.middleRows(begin, s.frames) = takes[static_cast<std::size_t>(i)];
    audio.middleRows(begin, s.frames) = s.bundle.audio;
    for (int f = 0; f < s.frames; ++f) out.sources[static_cast<std::size_t>(begin + f)] = {i, f, false};
    if (i > 0) {
      const auto& prev = takes[static_cast<std::size_t>(i - 1)];
      out.first_take.middleRows(begin, h) =
          blend_handshake(prev.bottomRows(h), takes[static_cast<std::size_t>(i)].topRows(h));
      for (int f = 0; f < h; ++f) out.sources[static_cast<std::size_t>(begin + f)].handshake = true;
    }
    begin += s.frames - h;
  }

  out.motion = out.first_take;
  for (int i = 0; i + 1 < n; ++i) {
    const auto& left = segments[static_cast<std::size_t>(i)];
    const auto& right = segments[static_cast<std::size_t>(i + 1)];
    const int start = out.segment_begin[static_cast<std::size_t>(i + 1)];
    const int lead = std::min(config.context, left.frames - h);
    const int trail = std::min(config.context, right.frames - h);
    const int w0 = start - lead;
    const int len = lead + h + trail;
    const TransitionMasks masks = build_transition_masks(lead, trail, config);

    // The window can reach into a neighbouring handshake owned by a third
    // segment, so every segment gets a bundle; unused ones are never evaluated.
    SandwichConditions cond;
    for (const auto& seg : segments) {
      conditioning::ConditionBundle b = seg.bundle;
      b.audio = audio.middleRows(w0, len);
      b.has_audio = !b.audio.isZero(0.0);
      cond.bundles.push_back(std::move(b));
      cond.gammas.push_back(seg.gamma);
    }
    for (int f = 0; f < len; ++f) cond.owner.push_back(out.sources[static_cast<std::size_t>(w0 + f)].segment);

    Rng rng(Rng::mix(seed, kTransitionTag + static_cast<std::uint64_t>(i)));
    out.motion.middleRows(w0, len) =
        refine_sandwich(denoiser, out.motion.middleRows(w0, len), masks.product(), cond, config, schedule, rng);
    out.transitions.push_back({start, w0, w0 + len});
  }
  return out;
}

}  // namespace speakgen::doubletake
