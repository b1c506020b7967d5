#include "conditioning/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "common/error.hpp"
#include "common/tensor_io.hpp"

namespace speakgen::conditioning {
namespace {

std::uint32_t u32_at(std::string_view b, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + at, 4);
  return v;
}

std::uint16_t u16_at(std::string_view b, std::size_t at) {
  std::uint16_t v;
  std::memcpy(&v, b.data() + at, 2);
  return v;
}

void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
void put_u16(std::string& out, std::uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); }

}  // namespace

PcmAudio parse_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw ValidationError("wav: not a RIFF/WAVE file");
  bool have_fmt = false;
  PcmAudio audio;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string_view id = b.substr(at, 4);
    const std::uint32_t size = u32_at(b, at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) throw ValidationError("wav: chunk '" + std::string(id) + "' overruns the file");
    if (id == "fmt ") {
      if (size < 16) throw ValidationError("wav: fmt chunk too short");
      const auto format = u16_at(b, body);
      const auto channels = u16_at(b, body + 2);
      const auto rate = u32_at(b, body + 4);
      const auto bits = u16_at(b, body + 14);
      if (format != 1 || bits != 16) throw ValidationError("wav: only 16-bit PCM is supported");
      if (channels != 1) throw ValidationError("wav: expected mono, got " + std::to_string(channels) + " channels");
      if (rate != kAudioSampleRate)
        throw ValidationError("wav: sample rate " + std::to_string(rate) + " Hz, expected 16000 Hz");
      audio.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ValidationError("wav: data chunk precedes fmt chunk");
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        std::int16_t s;
        std::memcpy(&s, b.data() + body + 2 * i, 2);
        audio.samples[i] = s / 32768.0;
      }
      return audio;
    }
    at = body + size + (size & 1u);
  }
  throw ValidationError("wav: missing data chunk");
}

PcmAudio read_wav(const std::filesystem::path& path) { return parse_wav(read_file_bytes(path)); }

std::string encode_wav(const PcmAudio& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out = "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double v : audio.samples) {
    const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

}  // namespace speakgen::conditioning
