#include "dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "common/error.hpp"
#include "conditioning/audio.hpp"
#include "motion/kinematics.hpp"

namespace speakgen::dataset {

NormStats NormStats::fit(const std::vector<Eigen::MatrixXd>& data) {
  require(!data.empty(), "cannot fit normalization statistics to an empty set");
  const Eigen::Index dim = data.front().cols();
  Eigen::Index rows = 0;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  for (const auto& m : data) {
    require(m.cols() == dim, "normalization inputs have different widths");
    require(m.allFinite(), "normalization inputs must be finite");
    rows += m.rows();
    sum += m.colwise().sum();
  }
  require(rows >= 2, "normalization needs at least two frames");
  NormStats s;
  s.mean = sum / static_cast<double>(rows);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  for (const auto& m : data) sq += (m.rowwise() - s.mean).array().square().matrix().colwise().sum();
  s.std = (sq / static_cast<double>(rows)).cwiseSqrt().cwiseMax(kStdFloor);
  return s;
}

Eigen::MatrixXd NormStats::apply(const Eigen::MatrixXd& x) const {
  require(x.cols() == mean.size(), "normalization width mismatch");
  return (x.rowwise() - mean).array().rowwise() / std.array();
}

Eigen::MatrixXd NormStats::invert(const Eigen::MatrixXd& z) const {
  require(z.cols() == mean.size(), "normalization width mismatch");
  return (z.array().rowwise() * std.array()).matrix().rowwise() + mean;
}

void NormStats::validate(int dim) const {
  require(mean.size() == dim && std.size() == dim,
          "normalization statistics have width " + std::to_string(mean.size()) + ", expected " + std::to_string(dim));
  require(mean.allFinite() && std.allFinite() && (std.array() > 0.0).all(),
          "normalization statistics must be finite with positive deviations");
}

Window pad_or_crop(const Eigen::MatrixXd& x, int frames, Rng& rng) {
  require(x.rows() >= 1, "cannot window an empty sequence");
  require(frames >= 1, "window length must be positive");
  Window w;
  const auto n = static_cast<int>(x.rows());
  if (n <= frames) {
    w.data = Eigen::MatrixXd::Zero(frames, x.cols());
    w.data.topRows(n) = x;
    w.valid_frames = n;
    return w;
  }
  w.start = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - frames + 1)));
  w.data = x.middleRows(w.start, frames);
  w.valid_frames = frames;
  return w;
}

Eigen::MatrixXd follow_window(const Eigen::MatrixXd& x, const Window& window, int frames) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(frames, x.cols());
  const auto take = static_cast<Eigen::Index>(window.valid_frames);
  require(window.start + take <= x.rows(), "window exceeds the companion sequence");
  out.topRows(take) = x.middleRows(window.start, take);
  return out;
}

WeightedSampler::WeightedSampler(std::vector<int> sizes, std::vector<double> weights) : sizes_(std::move(sizes)) {
  require(!sizes_.empty() && sizes_.size() == weights.size(), "sampler needs one weight per dataset");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    require(std::isfinite(weights[k]) && weights[k] >= 0.0, "sampler weights must be finite and non-negative");
    require(weights[k] == 0.0 || sizes_[k] > 0, "dataset " + std::to_string(k) + " is empty but has positive weight");
    total += weights[k];
    cumulative_.push_back(total);
  }
  require(total > 0.0, "sampler weights are all zero");
  for (double& c : cumulative_) c /= total;
}

SampledIndex WeightedSampler::next(Rng& rng) const {
  const double u = rng.uniform();
  // A zero-weight dataset repeats its predecessor's bound and is never the
  // first bound above u.
  std::size_t k = 0;
  while (k + 1 < cumulative_.size() && u >= cumulative_[k]) ++k;
  return {static_cast<int>(k), static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(sizes_[k])))};
}

std::vector<double> balanced_weights(const std::vector<int>& sizes) {
  std::vector<double> w;
  for (int s : sizes) w.push_back(s > 0 ? 1.0 : 0.0);
  return w;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + name + "'");
}

std::vector<Split> assign_splits(int count, Rng& rng) {
  require(count >= 0, "negative sequence count");
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  for (int i = count - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);
  const int train = static_cast<int>(std::lround(0.8 * count));
  const int val = static_cast<int>(std::lround(0.1 * count));
  std::vector<Split> out(static_cast<std::size_t>(count), Split::kTest);
  for (int i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    out[idx] = i < train ? Split::kTrain : (i < train + val ? Split::kValidation : Split::kTest);
  }
  return out;
}

motion::Skeleton synthetic_skeleton() {
  using motion::Joint;
  return motion::Skeleton({
      {"pelvis", -1, {0, 0, 0}, std::nullopt},
      {"l_leg", 0, {0.1, -0.05, 0}, Eigen::Vector3d(0, -0.85, 0)},
      {"r_leg", 0, {-0.1, -0.05, 0}, Eigen::Vector3d(0, -0.85, 0)},
      {"r_arm", 0, {-0.2, 0.45, 0}, std::nullopt},
      {"r_hand", 3, {-0.5, 0, 0}, Eigen::Vector3d(-0.1, 0, 0)},
  });
}

motion::FootJoints synthetic_feet() { return {{"l_leg", "r_leg", "l_leg", "r_leg"}}; }

std::string family_text(const std::string& family) {
  if (family == "wave") return "a person waves";
  if (family == "walk") return "a person walks forward";
  if (family == "still") return "a person stands still";
  return "";
}

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Quaterniond about(const Eigen::Vector3d& axis, double angle) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
}

// Alternating speech bursts and pauses, 0.3 to 0.9 s each.
std::vector<double> speech_envelope(int samples, Rng& rng) {
  std::vector<double> env(static_cast<std::size_t>(samples), 0.0);
  bool on = rng.bernoulli(0.5);
  int pos = 0;
  while (pos < samples) {
    const int len = static_cast<int>((0.3 + 0.6 * rng.uniform()) * conditioning::kAudioSampleRate);
    for (int i = pos; i < std::min(samples, pos + len); ++i) env[static_cast<std::size_t>(i)] = on ? 1.0 : 0.0;
    pos += len;
    on = !on;
  }
  // 50 ms attack and release.
  const int ramp = conditioning::kAudioSampleRate / 20;
  std::vector<double> smooth(env.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < env.size(); ++i) {
    acc += env[i];
    if (i >= static_cast<std::size_t>(ramp)) acc -= env[i - static_cast<std::size_t>(ramp)];
    smooth[i] = acc / ramp;
  }
  return smooth;
}

}  // namespace

std::vector<SyntheticClip> make_synthetic_clips(const SyntheticConfig& config, Rng& rng) {
  require(config.frames >= 2 && config.fps > 0.0, "synthetic clips need at least two frames");
  require(config.per_family >= 0 && config.audio_clips >= 0, "clip counts must be non-negative");
  const motion::Skeleton skel = synthetic_skeleton();
  const int j_count = skel.joint_count();
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX(), z = Eigen::Vector3d::UnitZ();
  const double hip_height = 0.9;
  std::vector<SyntheticClip> out;

  for (const std::string family : {"wave", "walk", "still"}) {
    for (int i = 0; i < config.per_family; ++i) {
      SyntheticClip c;
      c.name = family + "_" + std::to_string(i);
      c.family = family;
      c.text = family_text(family);
      c.clip = motion::MotionClip::rest(config.frames, j_count, config.fps);
      const double phase = config.phase_spread * rng.uniform();
      const double amp = 0.7 + 0.3 * rng.uniform();
      for (int f = 0; f < config.frames; ++f) {
        const double t = f / config.fps;
        c.clip.root_translation.row(f) << 0.0, hip_height, 0.0;
        if (family == "wave") {
          // Raised arm swinging in the frontal plane.
          c.clip.rotation(f, 3) = about(z, -0.9 + 0.6 * amp * std::sin(2.0 * kPi * config.wave_hz * t + phase));
          c.clip.rotation(f, 4) = about(z, -0.3 * amp * std::sin(2.0 * kPi * config.wave_hz * t + phase));
        } else if (family == "walk") {
          const double s = std::sin(2.0 * kPi * config.walk_hz * t + phase);
          c.clip.root_translation(f, 2) = 1.0 * amp * t;
          c.clip.rotation(f, 1) = about(x, 0.5 * amp * s);
          c.clip.rotation(f, 2) = about(x, -0.5 * amp * s);
          c.clip.rotation(f, 3) = about(x, -0.3 * amp * s);
        }
      }
      out.push_back(std::move(c));
    }
  }

  const int samples = static_cast<int>(std::lround(config.frames / config.fps * conditioning::kAudioSampleRate));
  for (int i = 0; i < config.audio_clips; ++i) {
    SyntheticClip c;
    c.name = "speech_" + std::to_string(i);
    c.family = "speech";
    c.clip = motion::MotionClip::rest(config.frames, j_count, config.fps);
    const std::vector<double> env = speech_envelope(samples, rng);
    const double pitch = 140.0 + 80.0 * rng.uniform();
    c.audio.samples.resize(static_cast<std::size_t>(samples));
    for (int n = 0; n < samples; ++n) {
      const double t = static_cast<double>(n) / conditioning::kAudioSampleRate;
      const double voice = std::sin(2.0 * kPi * pitch * t) + 0.4 * std::sin(4.0 * kPi * pitch * t);
      c.audio.samples[static_cast<std::size_t>(n)] = 0.3 * env[static_cast<std::size_t>(n)] * voice;
    }
    const double phase = 2.0 * kPi * rng.uniform();
    for (int f = 0; f < config.frames; ++f) {
      const double t = f / config.fps;
      const auto centre = std::min<std::size_t>(env.size() - 1, static_cast<std::size_t>(t * conditioning::kAudioSampleRate));
      c.clip.root_translation.row(f) << 0.0, hip_height, 0.0;
      c.clip.rotation(f, 3) = about(z, -0.4 + 0.5 * env[centre] * std::sin(2.0 * kPi * config.speech_hz * t + phase));
    }
    out.push_back(std::move(c));
  }
  return out;
}

DatasetEntry make_entry(const std::string& name, const motion::Skeleton& skeleton, const motion::MotionClip& clip,
                        const std::string& text, const conditioning::PcmAudio* audio,
                        const motion::FeatureOptions& options, const conditioning::TextEncoder& text_encoder,
                        double target_height) {
  const motion::CanonicalMotion canon = motion::canonicalize(skeleton, clip, target_height);
  DatasetEntry e;
  e.name = name;
  e.features = motion::encode_features(canon.skeleton, canon.clip, options).data;
  e.original_length = clip.frames();
  const int frames = static_cast<int>(e.features.rows());
  e.bundle = conditioning::ConditionBundle::empty(frames, text_encoder.dim(), conditioning::kAudioFeatureDim);
  e.text = text;
  e.bundle.text = conditioning::embed_text(text, text_encoder);
  e.bundle.has_text = !e.bundle.text.isZero(0.0);
  if (audio != nullptr && !audio->samples.empty()) {
    e.bundle.audio = conditioning::align_audio_to_frames(conditioning::extract_audio_features(*audio), frames);
    e.bundle.has_audio = true;
  }
  e.source = e.bundle.has_audio ? "audio" : "text";
  return e;
}

std::vector<DatasetEntry> make_synthetic_corpus(const SyntheticConfig& config, Rng& rng,
                                                const conditioning::TextEncoder& text_encoder) {
  const motion::Skeleton skel = synthetic_skeleton();
  motion::FeatureOptions options;
  options.feet = synthetic_feet();
  options.fps = config.fps;
  std::vector<DatasetEntry> out;
  for (const auto& c : make_synthetic_clips(config, rng))
    out.push_back(make_entry(c.name, skel, c.clip, c.text, c.audio.samples.empty() ? nullptr : &c.audio, options,
                             text_encoder));
  return out;
}

}  // namespace speakgen::dataset
