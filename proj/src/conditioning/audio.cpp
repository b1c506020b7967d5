#include "conditioning/audio.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "common/error.hpp"

namespace speakgen::conditioning {
namespace {

constexpr double kMinPitchHz = 60.0;
constexpr double kMaxPitchHz = 500.0;
constexpr double kVoicingThreshold = 0.5;
constexpr double kLogMelFloor = 1e-10;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  RealFft() : in_(fftw_alloc_real(kFftSize)), out_(fftw_alloc_complex(kFftSize / 2 + 1)) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(kFftSize, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Power spectrum (|X|^2) and magnitude of a zero-padded frame.
  void transform(std::span<const double> frame, Eigen::VectorXd& power, Eigen::VectorXd& magnitude) {
    for (int i = 0; i < kFftSize; ++i) in_[i] = i < static_cast<int>(frame.size()) ? frame[static_cast<std::size_t>(i)] : 0.0;
    fftw_execute(plan_);
    power.resize(kFftSize / 2 + 1);
    magnitude.resize(kFftSize / 2 + 1);
    for (int k = 0; k <= kFftSize / 2; ++k) {
      power(k) = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
      magnitude(k) = std::sqrt(power(k));
    }
  }

 private:
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// bands x (kFftSize/2 + 1) triangular filters on the HTK mel scale.
Eigen::MatrixXd mel_filterbank(int bands, int sample_rate) {
  const int bins = kFftSize / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(bands + 2));
  for (int i = 0; i < bands + 2; ++i) edges[static_cast<std::size_t>(i)] = mel_to_hz(top * i / (bands + 1));
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[static_cast<std::size_t>(b)];
    const double mid = edges[static_cast<std::size_t>(b + 1)];
    const double hi = edges[static_cast<std::size_t>(b + 2)];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / kFftSize;
      const double w = std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid));
      fb(b, k) = std::max(0.0, w);
    }
  }
  return fb;
}

// Orthonormal DCT-II, first `count` coefficients of an n-point input.
Eigen::MatrixXd dct_matrix(int count, int n) {
  Eigen::MatrixXd m(count, n);
  for (int k = 0; k < count; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) m(k, i) = scale * std::cos(std::numbers::pi * k * (2 * i + 1) / (2.0 * n));
  }
  return m;
}

struct Pitch {
  double f0 = 0.0;
  bool voiced = false;
};

// Normalized autocorrelation pitch tracker. Picks the shortest lag whose peak
// reaches 90% of the global maximum, refined by parabolic interpolation.
Pitch estimate_pitch(std::span<const double> frame, int sample_rate) {
  const int n = static_cast<int>(frame.size());
  double mean = 0.0;
  for (double v : frame) mean += v;
  mean /= n;
  std::vector<double> x(frame.size());
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = frame[static_cast<std::size_t>(i)] - mean;
    energy += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }
  if (std::sqrt(energy / n) < kEnergyFloor) return {};

  const int min_lag = static_cast<int>(std::floor(sample_rate / kMaxPitchHz));
  const int max_lag = std::min(static_cast<int>(std::ceil(sample_rate / kMinPitchHz)), n / 2);
  std::vector<double> r(static_cast<std::size_t>(max_lag + 2), 0.0);
  for (int lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (int i = 0; i + lag < n; ++i) {
      const double a = x[static_cast<std::size_t>(i)];
      const double b = x[static_cast<std::size_t>(i + lag)];
      xy += a * b;
      xx += a * a;
      yy += b * b;
    }
    if (lag < static_cast<int>(r.size())) r[static_cast<std::size_t>(lag)] = xx > 0 && yy > 0 ? xy / std::sqrt(xx * yy) : 0.0;
  }
  double best = -1.0;
  for (int lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[static_cast<std::size_t>(lag)]);
  if (best < kVoicingThreshold) return {};

  for (int lag = min_lag; lag <= max_lag; ++lag) {
    const double c = r[static_cast<std::size_t>(lag)];
    const double prev = r[static_cast<std::size_t>(lag - 1)];
    const double next = r[static_cast<std::size_t>(lag + 1)];
    if (c >= 0.9 * best && c >= prev && c >= next) {
      const double denom = prev - 2.0 * c + next;
      const double shift = denom < 0.0 ? 0.5 * (prev - next) / denom : 0.0;
      return {sample_rate / (lag + shift), true};
    }
  }
  return {};
}

}  // namespace

void AudioFeatureLayout::validate() const {
  require(mfcc > 0 && mel > 0 && energy == 1 && onsets == 1 && external >= 0,
          "audio layout widths must be positive (energy and onsets exactly 1)");
  require(pitch == 1 || pitch == 2, "audio layout pitch width must be 1 or 2");
  require(mfcc <= mel, "audio layout needs at least as many mel bands as MFCCs");
}

int audio_frame_count(std::size_t samples) {
  if (samples < static_cast<std::size_t>(kWindowSamples)) return 0;
  return 1 + static_cast<int>((samples - kWindowSamples) / kHopSamples);
}

Eigen::MatrixXd extract_audio_features(const PcmAudio& audio, const AudioFeatureLayout& layout,
                                       const AudioEmbedder* embedder) {
  layout.validate();
  require(audio.sample_rate == kAudioSampleRate,
          "audio sample rate " + std::to_string(audio.sample_rate) + " Hz, expected 16000 Hz");
  const int frames = audio_frame_count(audio.samples.size());
  require(frames >= 1, "audio shorter than one 25 ms analysis window");
  if (embedder) require(embedder->dim() == layout.external, "audio embedder width does not match the layout");
  for (double v : audio.samples) require(std::isfinite(v), "audio samples must be finite");

  const Eigen::MatrixXd filters = mel_filterbank(layout.mel, audio.sample_rate);
  const Eigen::MatrixXd dct = dct_matrix(layout.mfcc, layout.mel);
  std::vector<double> hann(kWindowSamples);
  for (int i = 0; i < kWindowSamples; ++i)
    hann[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (kWindowSamples - 1));

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(frames, layout.total());
  RealFft fft;
  Eigen::VectorXd power, magnitude, previous_magnitude;
  std::vector<double> windowed(kWindowSamples);
  for (int f = 0; f < frames; ++f) {
    const std::span<const double> frame(audio.samples.data() + static_cast<std::size_t>(f) * kHopSamples, kWindowSamples);
    double sum_sq = 0.0;
    for (int i = 0; i < kWindowSamples; ++i) {
      const double v = frame[static_cast<std::size_t>(i)];
      sum_sq += v * v;
      windowed[static_cast<std::size_t>(i)] = v * hann[static_cast<std::size_t>(i)];
    }
    fft.transform(windowed, power, magnitude);

    const Eigen::VectorXd log_mel = (filters * power).array().max(kLogMelFloor).log().matrix();
    out.row(f).segment(layout.mel_begin(), layout.mel) = log_mel.transpose();
    out.row(f).segment(layout.mfcc_begin(), layout.mfcc) = (dct * log_mel).transpose();

    const Pitch pitch = estimate_pitch(frame, audio.sample_rate);
    out(f, layout.pitch_begin()) = pitch.f0;
    if (layout.pitch == 2) out(f, layout.pitch_begin() + 1) = pitch.voiced ? 1.0 : 0.0;

    out(f, layout.energy_begin()) = std::log(std::max(std::sqrt(sum_sq / kWindowSamples), kEnergyFloor));

    if (f > 0) out(f, layout.onsets_begin()) = (magnitude - previous_magnitude).cwiseMax(0.0).sum();
    previous_magnitude = magnitude;
  }
  if (embedder && layout.external > 0) {
    const Eigen::MatrixXd e = embedder->embed(audio.samples, audio.sample_rate, frames);
    require(e.rows() == frames && e.cols() == layout.external, "audio embedder returned the wrong shape");
    out.block(0, layout.external_begin(), frames, layout.external) = e;
  }
  return out;
}

Eigen::MatrixXd align_audio_to_frames(const Eigen::MatrixXd& features, int frames) {
  require(frames >= 1, "target frame count must be at least 1");
  require(features.rows() >= 1, "audio features need at least one row");
  const Eigen::Index src = features.rows();
  if (src == frames) return features;
  Eigen::MatrixXd out(frames, features.cols());
  for (int t = 0; t < frames; ++t) {
    if (frames == 1 || src == 1) {
      out.row(t) = features.row(0);
      continue;
    }
    const double pos = static_cast<double>(static_cast<long long>(t) * (src - 1)) / (frames - 1);
    const auto i0 = std::min(static_cast<Eigen::Index>(std::floor(pos)), src - 1);
    const double w = pos - static_cast<double>(i0);
    if (w == 0.0) {
      out.row(t) = features.row(i0);
    } else {
      out.row(t) = (1.0 - w) * features.row(i0) + w * features.row(i0 + 1);
    }
  }
  return out;
}

}  // namespace speakgen::conditioning
