#pragma once

// Mel-spectrogram correlation matching between a movie audio chunk and a clip.
// Produces the weighted (clip frame, movie frame) scatter that the robust line
// fit consumes.

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "adtk/audio.hpp"
#include "adtk/corpus.hpp"

namespace adtk {

// Defaults give 512 / 16000 = 0.032 s per frame.
struct MelConfig {
  int sample_rate = kAnalysisSampleRate;
  int n_fft = 1024;  // also the Hann window length
  int hop = 512;
  int n_mels = 64;
  double f_min = 0.0;
  double f_max = 8000.0;

  double seconds_per_frame() const { return static_cast<double>(hop) / sample_rate; }
  void validate() const;
};

struct MelSpectrogram {
  Eigen::MatrixXd frames;  // n_mels x T, non-negative
  int sample_rate = kAnalysisSampleRate;
  int hop = 512;
  bool normalized = false;

  Eigen::Index n_mels() const { return frames.rows(); }
  Eigen::Index num_frames() const { return frames.cols(); }
  double seconds_per_frame() const { return static_cast<double>(hop) / sample_rate; }
};

// HTK-scale triangular filters without area normalization, shape
// (n_fft/2 + 1) x n_mels.
Eigen::MatrixXd mel_filterbank(const MelConfig& config);

// Power mel spectrogram: periodic Hann window, reflect padding of n_fft/2 on
// both sides, T = floor(N / hop) + 1 frames. Not normalized.
MelSpectrogram mel_power_spectrogram(const AudioBuffer& audio, const MelConfig& config = {});

// Scales every column to unit L2 norm; all-zero columns stay zero.
void normalize_frames(MelSpectrogram& spec);

// mel_power_spectrogram() followed by normalize_frames().
MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& config = {});

// Zeroes frames [floor((start - offset) / spf), floor((end - offset) / spf))
// for every AD segment, clipped to the spectrogram. Boundaries are computed
// in exact sample arithmetic. chunk_offset is the movie time of frame 0.
MelSpectrogram mask_ad_regions(const MelSpectrogram& spec, const TranscriptTrack& ad_track,
                               double chunk_offset);

inline constexpr int kDefaultWindowFrames = 50;
inline constexpr int kScatterSamplesPerMatch = 5;

struct WindowMatch {
  int movie_frame = 0;  // window start in the movie chunk
  int clip_frame = 0;   // best clip offset
  double correlation = 0;
};

struct MatchPoint {
  double x = 0;  // clip frame
  double y = 0;  // movie frame
  double weight = 0;
};

struct MatchPointSet {
  std::vector<MatchPoint> points;
  std::vector<WindowMatch> matches;  // one per surviving movie window
  int window_frames = kDefaultWindowFrames;

  bool empty() const { return points.empty(); }
};

// Cuts the movie spectrogram into non-overlapping windows of window_frames,
// drops any window containing an all-zero frame, and for each remaining
// window finds the clip offset (stride 1, first index on ties) maximizing the
// summed inner product. Every match becomes kScatterSamplesPerMatch points
// along a slope-1 segment of length window_frames with weight
// correlation / window_frames. A fully masked movie yields an empty set.
MatchPointSet correlate_windows(const MelSpectrogram& movie_spec, const MelSpectrogram& clip_spec,
                                int window_frames = kDefaultWindowFrames, unsigned jobs = 1);

// Delimited-text dump of the scatter: header "x,y,weight" then one row per point.
void write_scatter(const std::filesystem::path& path, const MatchPointSet& set);

}  // namespace adtk
