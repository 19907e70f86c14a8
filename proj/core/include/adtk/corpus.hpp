#pragma once

// Shared domain types: timed text segments, transcript tracks, cast lists and
// aligned AD records, plus their file ingestion.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace adtk {

// Timestamps are integer milliseconds; APIs expose seconds.
using Millis = std::int64_t;

Millis seconds_to_millis(double seconds);
constexpr double millis_to_seconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

struct TimedSegment {
  std::string text;
  Millis start_ms = 0;
  Millis end_ms = 0;
  std::optional<std::string> speaker;

  static TimedSegment from_seconds(std::string text, double start, double end,
                                   std::optional<std::string> speaker = std::nullopt);

  double start() const { return millis_to_seconds(start_ms); }
  double end() const { return millis_to_seconds(end_ms); }
  double duration() const { return millis_to_seconds(end_ms - start_ms); }

  // start >= 0, start < end, non-blank text.
  bool valid() const;

  friend bool operator==(const TimedSegment&, const TimedSegment&) = default;
};

// Total order used for tracks: start, then end, then text.
bool segment_less(const TimedSegment& a, const TimedSegment& b);

enum class TrackKind { dialogue, ad_narration, mixed };

std::string_view to_string(TrackKind kind);
TrackKind track_kind_from_string(std::string_view s);

// Immutable, sorted sequence of valid segments.
class TranscriptTrack {
 public:
  TranscriptTrack() = default;
  // Throws InvalidArgument if any segment is invalid; sorts the segments.
  TranscriptTrack(std::string source_id, TrackKind kind, std::vector<TimedSegment> segments);

  const std::vector<TimedSegment>& segments() const { return segments_; }
  const std::string& source_id() const { return source_id_; }
  TrackKind kind() const { return kind_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  const TimedSegment& operator[](std::size_t i) const { return segments_[i]; }

  friend bool operator==(const TranscriptTrack&, const TranscriptTrack&) = default;

 private:
  std::string source_id_;
  TrackKind kind_ = TrackKind::mixed;
  std::vector<TimedSegment> segments_;
};

// json: a top-level array of {start, end, text, speaker?} records, or an object
// carrying such an array under "segments" (WhisperX output).
// jsonl: one record per line.
enum class TranscriptFormat { json, jsonl };

TranscriptFormat transcript_format_from_string(std::string_view s);
TranscriptFormat transcript_format_from_path(const std::filesystem::path& path);

struct ParsedTranscript {
  TranscriptTrack track;
  std::size_t dropped = 0;  // entries with end <= start, negative start or blank text
};

ParsedTranscript parse_transcript(const std::filesystem::path& path, TranscriptFormat format,
                                  TrackKind kind = TrackKind::mixed,
                                  std::string source_id = {});
ParsedTranscript parse_transcript_json(const nlohmann::json& doc, TrackKind kind,
                                       std::string source_id);

void write_transcript(const TranscriptTrack& track, const std::filesystem::path& path,
                      TranscriptFormat format);
nlohmann::json transcript_to_json(const TranscriptTrack& track);

struct NarratorSplit {
  TranscriptTrack ad_track;
  TranscriptTrack dialogue_track;
};

// Partitions by speaker label. Unlabelled segments go to the dialogue side.
NarratorSplit split_by_narrator(const TranscriptTrack& track, std::string_view narrator_speaker);

// Experimental: picks the speaker with the largest total speaking time, which
// is usually the narrator on AD-mixed soundtracks. Ties go to the label that
// sorts first.
std::optional<std::string> guess_narrator(const TranscriptTrack& track);

struct CastMember {
  std::string character;
  std::optional<std::string> actor;
  std::optional<std::string> face;
};

class CastList {
 public:
  CastList() = default;
  // Merges members whose canonical names coincide (first one wins) and
  // appends one warning per merge.
  explicit CastList(std::vector<CastMember> members, std::vector<std::string>* warnings = nullptr);
  static CastList from_names(std::span<const std::string> names,
                             std::vector<std::string>* warnings = nullptr);

  const std::vector<CastMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::vector<std::string> names() const;
  // Index of the member whose canonical name equals canonical_name(name).
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<CastMember> members_;
};

struct LoadedCast {
  CastList cast;
  std::vector<std::string> warnings;
};

// Accepts a JSON array of strings or {character, actor?, face?} records, or a
// plain text file with one character name per line.
LoadedCast load_cast_list(const std::filesystem::path& path);
LoadedCast cast_from_json(const nlohmann::json& doc);

struct ADRecord {
  std::string movie_id;
  std::string clip_id;
  std::string text;
  double start_clip = 0;
  double end_clip = 0;
  double start_movie = 0;
  double end_movie = 0;

  friend bool operator==(const ADRecord&, const ADRecord&) = default;
};

nlohmann::json to_json(const ADRecord& record);
ADRecord ad_record_from_json(const nlohmann::json& j);

void write_ad_records(const std::filesystem::path& path, std::span<const ADRecord> records);
std::vector<ADRecord> read_ad_records(const std::filesystem::path& path);

// Reads a JSON-lines file; blank lines are skipped.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace adtk
