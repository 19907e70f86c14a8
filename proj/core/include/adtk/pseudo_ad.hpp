#pragma once

// Turns subject-annotated instructional-video captions into pseudo-AD: one
// sampled character name per video replaces every caption subject, and a
// character bank pairs that name with the instructor portrait plus distractor
// faces from other videos.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace adtk {

struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct CaptionRecord {
  std::string video_id;
  std::string text;
  double start = 0;
  double end = 0;
  std::optional<ByteSpan> subject_span;
  int unique_name_count = 0;
  bool has_face_frame = false;
  std::optional<std::string> category;
};

// Parses one annotation record. subject_start/subject_end may be null or
// absent; the span must be non-empty and inside the text.
CaptionRecord caption_from_json(const nlohmann::json& j);
std::vector<CaptionRecord> read_captions(const std::filesystem::path& path);

// Replaces the subject span with `name`. At the start of the text the first
// letter of the name is uppercased. Throws InvalidArgument without a span.
std::string replace_subject(const CaptionRecord& caption, std::string_view name);

struct CharacterBank {
  std::string video_id;
  std::string name;
  std::string portrait_ref;
  std::vector<std::string> distractor_refs;
};

struct PseudoAD {
  std::string video_id;
  std::string text;
  double start = 0;
  double end = 0;
  std::string name;
};

nlohmann::json to_json(const CharacterBank& bank);
nlohmann::json to_json(const PseudoAD& ad);

struct BankOptions {
  // "{video_id}" is replaced by the video id.
  std::string portrait_pattern = "portraits/{video_id}.jpg";
  std::size_t distractors = 4;
};

std::string portrait_ref(const BankOptions& options, std::string_view video_id);

struct TransformedVideo {
  std::vector<PseudoAD> pseudo_ads;  // captions without a subject are skipped
  CharacterBank bank;
  std::size_t skipped = 0;
};

// Generator seeded from (seed, video_id), so results do not depend on the
// order in which videos are processed. Distractors are portraits of up to
// options.distractors distinct videos drawn from other_video_ids (the video
// itself is excluded).
TransformedVideo transform_video(std::span<const CaptionRecord> captions,
                                 std::span<const std::string> name_pool, std::uint64_t seed,
                                 std::span<const std::string> other_video_ids,
                                 const BankOptions& options = {});

inline constexpr int kMaxUniqueNames = 5;

enum class RejectReason { too_many_names, no_subject, no_face };
std::string_view to_string(RejectReason reason);

struct FilterResult {
  std::vector<std::string> kept;
  std::vector<std::pair<std::string, RejectReason>> rejected;
  std::map<RejectReason, std::size_t> tally;
};

// Videos are filtered in order: more than kMaxUniqueNames names, no caption
// with a subject, no face frame. The first failing filter is the reason.
FilterResult filter_videos(const std::map<std::string, std::vector<CaptionRecord>>& videos);

std::map<std::string, std::vector<CaptionRecord>> group_by_video(
    std::span<const CaptionRecord> records);

std::vector<std::string> load_name_pool(const std::filesystem::path& path);

}  // namespace adtk
