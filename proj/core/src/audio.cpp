#include "adtk/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "adtk/error.hpp"

namespace adtk {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}
void put16(std::ofstream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

float decode_sample(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      const std::uint32_t u = le32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    double d;
    const std::uint64_t u = std::uint64_t(le32(p)) | std::uint64_t(le32(p + 4)) << 32;
    std::memcpy(&d, &u, 8);
    return static_cast<float>(d);
  }
  switch (bits) {
    case 8: return (static_cast<float>(p[0]) - 128.0f) / 128.0f;
    case 16: return static_cast<float>(static_cast<std::int16_t>(le16(p))) / 32768.0f;
    case 24: {
      std::int32_t v = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<float>(v) / 8388608.0f;
    }
    default: return static_cast<float>(static_cast<std::int32_t>(le32(p))) / 2147483648.0f;
  }
}

}  // namespace

AudioBuffer AudioBuffer::slice(double begin, double end) const {
  const auto n = static_cast<std::int64_t>(samples.size());
  const auto b = std::clamp<std::int64_t>(std::llround(begin * sample_rate), 0, n);
  const auto e = std::clamp<std::int64_t>(std::llround(end * sample_rate), b, n);
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(samples.begin() + b, samples.begin() + e);
  return out;
}

AudioBuffer resample_linear(const AudioBuffer& in, int target_rate) {
  if (target_rate <= 0 || in.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  if (in.sample_rate == target_rate || in.samples.empty()) {
    AudioBuffer out = in;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = static_cast<double>(in.sample_rate) / target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::floor(static_cast<double>(in.samples.size()) / ratio));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(std::max<std::size_t>(n_out, 1));
  const std::size_t last = in.samples.size() - 1;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] =
        static_cast<float>((1.0 - frac) * in.samples[i0] + frac * in.samples[i1]);
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path, int target_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError(name + ": truncated fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_bytes = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (format == 0 || pcm == nullptr) throw FormatError(name + ": missing fmt or data chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    throw FormatError(name + ": unsupported WAV encoding " + std::to_string(format));
  }
  if (channels != 1) {
    throw FormatError(name + ": expected mono audio, got " + std::to_string(channels) +
                      " channels");
  }
  const bool bits_ok = format == kFormatFloat ? (bits == 32 || bits == 64)
                                              : (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  if (!bits_ok || rate == 0) throw FormatError(name + ": unsupported sample layout");

  const std::size_t stride = bits / 8;
  AudioBuffer raw;
  raw.sample_rate = static_cast<int>(rate);
  raw.samples.resize(pcm_bytes / stride);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    raw.samples[i] = decode_sample(pcm + i * stride, format, bits);
  }
  if (raw.samples.empty()) throw FormatError(name + ": no audio samples");
  return resample_linear(raw, target_rate);
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  for (const float s : audio.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lrint(c * 32767.0f))));
  }
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace adtk
