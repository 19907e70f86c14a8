#include "adtk/text_align.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "adtk/error.hpp"
#include "adtk/parallel.hpp"
#include "adtk/text.hpp"

namespace adtk {

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double word_error_rate(std::span<const std::string> hypothesis,
                       std::span<const std::string> reference) {
  if (reference.empty()) throw InvalidArgument("word_error_rate: empty reference");
  return static_cast<double>(edit_distance(hypothesis, reference)) /
         static_cast<double>(reference.size());
}

double word_error_rate(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = normalize_words(hypothesis);
  const auto ref = normalize_words(reference);
  return word_error_rate(hyp, ref);
}

TextAlignResult locate_clip(const TranscriptTrack& clip, const TranscriptTrack& movie,
                            double wer_accept_threshold, unsigned jobs) {
  const std::size_t n = clip.size();
  const std::size_t m = movie.size();
  if (n == 0) throw InvalidArgument("locate_clip: clip transcript is empty");
  if (m < n) {
    throw InvalidArgument("locate_clip: movie has " + std::to_string(m) +
                          " subtitles, fewer than the clip's " + std::to_string(n));
  }

  std::vector<std::string> reference;
  for (const auto& seg : clip.segments()) {
    for (auto& w : normalize_words(seg.text)) reference.push_back(std::move(w));
  }
  if (reference.empty()) throw InvalidArgument("locate_clip: clip transcript has no words");

  // Token offsets of each movie subtitle so windows are contiguous slices.
  std::vector<std::string> movie_words;
  std::vector<std::size_t> offsets{0};
  for (const auto& seg : movie.segments()) {
    for (auto& w : normalize_words(seg.text)) movie_words.push_back(std::move(w));
    offsets.push_back(movie_words.size());
  }

  const std::size_t windows = m - n + 1;
  std::vector<double> wers(windows);
  parallel_for(windows, jobs, [&](std::size_t i) {
    const std::span<const std::string> hyp(movie_words.data() + offsets[i],
                                           offsets[i + n] - offsets[i]);
    wers[i] = word_error_rate(hyp, reference);
  });

  const auto best = std::min_element(wers.begin(), wers.end());
  TextAlignResult out;
  out.best_index = static_cast<std::size_t>(best - wers.begin());
  out.best_time = movie[out.best_index].start();
  out.best_wer = *best;
  out.accepted = out.best_wer <= wer_accept_threshold;
  return out;
}

}  // namespace adtk
