#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace speakgen::conditioning {

inline constexpr int kAudioSampleRate = 16000;

struct PcmAudio {
  int sample_rate = kAudioSampleRate;
  std::vector<double> samples;  // mono, [-1, 1)
};

// Accepts RIFF/WAVE, 16-bit PCM, mono, 16 kHz only.
PcmAudio parse_wav(std::string_view bytes);
PcmAudio read_wav(const std::filesystem::path& path);

std::string encode_wav(const PcmAudio& audio);

}  // namespace speakgen::conditioning
