#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace adtk {

inline constexpr int kAnalysisSampleRate = 16000;

// Mono PCM samples, nominally in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kAnalysisSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
  // Samples in [begin, end) seconds, clamped to the buffer.
  AudioBuffer slice(double begin, double end) const;
};

// Linear-interpolation resampling.
AudioBuffer resample_linear(const AudioBuffer& in, int target_rate);

// Reads a mono RIFF/WAVE file (integer PCM 8/16/24/32 bit or IEEE float) and
// resamples it to `target_rate`. Multi-channel files are rejected.
AudioBuffer read_wav(const std::filesystem::path& path, int target_rate = kAnalysisSampleRate);

// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace adtk
