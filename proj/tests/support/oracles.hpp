#pragma once

// Reference implementations used only by tests. They are written for
// clarity, not speed, and share no code with the library.

#include <cstdint>
#include <string>
#include <vector>

#include "adtk/audio_align.hpp"
#include "adtk/corpus.hpp"

namespace adtk::testing {

// Lower-case, ASCII punctuation to spaces, split on whitespace.
std::vector<std::string> oracle_tokens(const std::string& text);

// Full-matrix Levenshtein distance over tokens.
std::size_t oracle_levenshtein(const std::vector<std::string>& a,
                               const std::vector<std::string>& b);

double oracle_wer(const std::string& hypothesis, const std::string& reference);

struct OracleScan {
  std::size_t index = 0;
  double wer = 0;
};

// Exhaustive scan: clip paragraph as reference against every window of n
// consecutive movie subtitles, joined into a paragraph string.
OracleScan oracle_locate(const TranscriptTrack& clip, const TranscriptTrack& movie);

// Brute-force max-correlation match of each unmasked movie window over every
// clip offset, computed frame by frame.
struct OracleMatch {
  long movie_frame = 0;
  long clip_frame = 0;
  double correlation = 0;
};
std::vector<OracleMatch> oracle_correlate(const MelSpectrogram& movie, const MelSpectrogram& clip,
                                          int window);

// Weighted least squares via the normal equations solved with a QR
// decomposition of the sqrt-weighted design matrix.
struct OracleLine {
  double slope = 0;
  double intercept = 0;
};
OracleLine oracle_wls(const std::vector<MatchPoint>& points);

// splitmix64 stream for fixtures that must be identical across platforms.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * n); }

 private:
  std::uint64_t state_;
};

}  // namespace adtk::testing
