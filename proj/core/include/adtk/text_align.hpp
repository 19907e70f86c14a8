#pragma once

// Rough localization of a clip inside a full-movie transcript by sliding a
// window of subtitle entries and minimizing the word error rate.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adtk/corpus.hpp"

namespace adtk {

// (substitutions + deletions + insertions) / |reference| over word tokens.
// Throws InvalidArgument on an empty reference.
double word_error_rate(std::span<const std::string> hypothesis,
                       std::span<const std::string> reference);
// Normalizes both strings with normalize_words() first.
double word_error_rate(std::string_view hypothesis, std::string_view reference);

// Word-level Levenshtein distance.
std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);

inline constexpr double kDefaultWerAcceptThreshold = 0.8;

struct TextAlignResult {
  std::size_t best_index = 0;  // first movie subtitle of the best window
  double best_time = 0;        // its start time, seconds
  double best_wer = 0;
  bool accepted = false;
};

// The clip paragraph (all clip segments joined) is the WER reference; each
// window of n = |clip| consecutive movie subtitles is a hypothesis. Ties go to
// the smallest index.
TextAlignResult locate_clip(const TranscriptTrack& clip, const TranscriptTrack& movie,
                            double wer_accept_threshold = kDefaultWerAcceptThreshold,
                            unsigned jobs = 1);

}  // namespace adtk
