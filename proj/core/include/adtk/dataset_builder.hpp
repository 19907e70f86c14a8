#pragma once

// Two-stage clip alignment (transcript WER localization, then mel correlation
// + robust line fit) and emission of aligned AD datasets.

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adtk/audio.hpp"
#include "adtk/audio_align.hpp"
#include "adtk/corpus.hpp"
#include "adtk/robust_fit.hpp"
#include "adtk/text_align.hpp"

namespace adtk {

struct AlignParams {
  double wer_accept_threshold = kDefaultWerAcceptThreshold;
  double chunk_margin = 120.0;  // seconds on each side of the estimated clip extent
  MelConfig mel;
  int window_frames = kDefaultWindowFrames;
  RansacParams ransac;
  GateParams gates;
  unsigned jobs = 1;

  void validate() const;
};

nlohmann::json to_json(const AlignParams& params);

enum class AlignStatus { aligned, stage1_failed, stage2_rejected };
std::string_view to_string(AlignStatus status);

struct AudioAlignment {
  AlignmentFit fit;
  std::optional<TimeMapping> mapping;  // set iff fit.accepted
  double chunk_begin = 0;
  double chunk_end = 0;
  std::size_t windows_kept = 0;
};

// Stage 2 on an explicit movie chunk [chunk_begin, chunk_end) seconds. AD
// regions are masked on the movie side only. A scatter with fewer than two
// points yields a rejected fit instead of an exception.
AudioAlignment align_audio(const AudioBuffer& movie_audio, const AudioBuffer& clip_audio,
                           const TranscriptTrack& ad_track, double chunk_begin, double chunk_end,
                           const AlignParams& params, MatchPointSet* scatter_out = nullptr);

struct ClipAlignment {
  std::string clip_id;
  std::string movie_id;
  TextAlignResult stage1;
  AlignmentFit fit;
  std::optional<TimeMapping> mapping;
  AlignStatus status = AlignStatus::stage1_failed;
  std::string reason;  // empty when aligned
  double chunk_begin = 0;
  double chunk_end = 0;
  double clip_duration = 0;
};

nlohmann::json to_json(const ClipAlignment& alignment);

struct ClipInputs {
  std::string clip_id;
  std::string movie_id;
  const AudioBuffer* clip_audio = nullptr;
  const TranscriptTrack* clip_transcript = nullptr;
  const AudioBuffer* movie_audio = nullptr;
  const TranscriptTrack* movie_dialogue = nullptr;
  const TranscriptTrack* ad_track = nullptr;
};

// Runs both stages. Sub-stage errors are recorded in status/reason and never
// propagate out of this call.
ClipAlignment align_clip(const ClipInputs& in, const AlignParams& params,
                         MatchPointSet* scatter_out = nullptr);

// Maps AD segments onto the clip timeline. Segments fully outside
// [0, clip_duration] are dropped, partial ones clipped; movie times are kept.
std::vector<ADRecord> project_ad(const TranscriptTrack& ad_track, const TimeMapping& mapping,
                                 double clip_duration, const std::string& movie_id = {},
                                 const std::string& clip_id = {});

struct SplitManifest {
  std::set<std::string> train_movies;
  std::set<std::string> eval_movies;

  // Throws InvalidArgument if a movie is in both splits.
  void validate() const;
};

// Seeded shuffle of the sorted ids; the first eval_count go to eval.
SplitManifest make_split(std::span<const std::string> movie_ids, std::size_t eval_count,
                         std::uint64_t seed);

struct ClipResult {
  ClipAlignment alignment;
  std::vector<ADRecord> records;
};

struct SplitStats {
  std::size_t movies = 0;
  std::size_t clips = 0;
  std::size_t ads = 0;
};

struct DatasetSummary {
  std::size_t clips = 0;
  std::size_t aligned = 0;
  std::size_t stage1_failed = 0;
  std::size_t stage2_rejected = 0;
  std::size_t movies = 0;  // distinct movies with at least one aligned clip
  std::size_t ads = 0;
  double success_rate = 0;  // aligned / clips, 0 for empty input
  SplitStats train;
  SplitStats eval;
};

nlohmann::json to_json(const DatasetSummary& summary);

// Writes train.jsonl, eval.jsonl (AD records) and stats.json into out_dir.
// Records of clips that are not aligned are never written. Throws
// InvalidArgument for overlapping splits or movies missing from the manifest.
DatasetSummary emit_dataset(std::span<const ClipResult> results, const SplitManifest& manifest,
                            const std::filesystem::path& out_dir);

}  // namespace adtk
