#include "adtk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "adtk/error.hpp"
#include "adtk/text.hpp"

namespace adtk {

using nlohmann::json;

Millis seconds_to_millis(double seconds) {
  if (!std::isfinite(seconds)) throw InvalidArgument("non-finite timestamp");
  return static_cast<Millis>(std::llround(seconds * 1000.0));
}

TimedSegment TimedSegment::from_seconds(std::string text, double start, double end,
                                        std::optional<std::string> speaker) {
  return TimedSegment{std::move(text), seconds_to_millis(start), seconds_to_millis(end),
                      std::move(speaker)};
}

bool TimedSegment::valid() const {
  return start_ms >= 0 && start_ms < end_ms && !trim(text).empty();
}

bool segment_less(const TimedSegment& a, const TimedSegment& b) {
  return std::tie(a.start_ms, a.end_ms, a.text) < std::tie(b.start_ms, b.end_ms, b.text);
}

std::string_view to_string(TrackKind kind) {
  switch (kind) {
    case TrackKind::dialogue: return "dialogue";
    case TrackKind::ad_narration: return "ad_narration";
    case TrackKind::mixed: return "mixed";
  }
  return "mixed";
}

TrackKind track_kind_from_string(std::string_view s) {
  if (s == "dialogue") return TrackKind::dialogue;
  if (s == "ad_narration" || s == "ad") return TrackKind::ad_narration;
  if (s == "mixed") return TrackKind::mixed;
  throw InvalidArgument("unknown track kind '" + std::string(s) + "'");
}

TranscriptTrack::TranscriptTrack(std::string source_id, TrackKind kind,
                                 std::vector<TimedSegment> segments)
    : source_id_(std::move(source_id)), kind_(kind), segments_(std::move(segments)) {
  for (const auto& seg : segments_) {
    if (!seg.valid()) {
      throw InvalidArgument("invalid segment [" + std::to_string(seg.start_ms) + "ms, " +
                            std::to_string(seg.end_ms) + "ms] '" + seg.text + "'");
    }
  }
  std::stable_sort(segments_.begin(), segments_.end(), segment_less);
}

TranscriptFormat transcript_format_from_string(std::string_view s) {
  if (s == "json" || s == "whisperx") return TranscriptFormat::json;
  if (s == "jsonl") return TranscriptFormat::jsonl;
  throw InvalidArgument("unknown transcript format '" + std::string(s) + "'");
}

TranscriptFormat transcript_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl") return TranscriptFormat::jsonl;
  if (ext == ".json") return TranscriptFormat::json;
  throw InvalidArgument("cannot infer transcript format from '" + path.string() + "'");
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

json parse_or_throw(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

}  // namespace

nlohmann::json read_json(const std::filesystem::path& path) {
  return parse_or_throw(slurp(path), path.string());
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(slurp(path));
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    out.push_back(parse_or_throw(line, path.string() + ":" + std::to_string(lineno)));
  }
  return out;
}

ParsedTranscript parse_transcript_json(const nlohmann::json& doc, TrackKind kind,
                                       std::string source_id) {
  const json* records = &doc;
  if (doc.is_object()) {
    auto it = doc.find("segments");
    if (it == doc.end()) throw FormatError("transcript object has no 'segments' array");
    records = &*it;
  }
  if (!records->is_array()) throw FormatError("transcript is not a sequence of records");

  ParsedTranscript out;
  std::vector<TimedSegment> segments;
  for (const auto& rec : *records) {
    if (!rec.is_object()) throw FormatError("transcript entry is not a record");
    const auto start = rec.find("start");
    const auto end = rec.find("end");
    const auto text = rec.find("text");
    // WhisperX can emit segments without timing when alignment fails; those
    // and any other malformed entries are dropped rather than failing the file.
    if (start == rec.end() || end == rec.end() || text == rec.end() || !start->is_number() ||
        !end->is_number() || !text->is_string()) {
      ++out.dropped;
      continue;
    }
    TimedSegment seg = TimedSegment::from_seconds(text->get<std::string>(), start->get<double>(),
                                                  end->get<double>());
    if (auto sp = rec.find("speaker"); sp != rec.end() && sp->is_string()) {
      seg.speaker = sp->get<std::string>();
    }
    if (!seg.valid()) {
      ++out.dropped;
      continue;
    }
    segments.push_back(std::move(seg));
  }
  if (segments.empty()) throw FormatError("transcript has no valid segments");
  out.track = TranscriptTrack(std::move(source_id), kind, std::move(segments));
  return out;
}

ParsedTranscript parse_transcript(const std::filesystem::path& path, TranscriptFormat format,
                                  TrackKind kind, std::string source_id) {
  if (source_id.empty()) source_id = path.stem().string();
  try {
    if (format == TranscriptFormat::json) {
      return parse_transcript_json(read_json(path), kind, std::move(source_id));
    }
    json arr = json::array();
    for (auto& rec : read_jsonl(path)) arr.push_back(std::move(rec));
    return parse_transcript_json(arr, kind, std::move(source_id));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json transcript_to_json(const TranscriptTrack& track) {
  json arr = json::array();
  for (const auto& seg : track.segments()) {
    json rec = {{"start", seg.start()}, {"end", seg.end()}, {"text", seg.text}};
    if (seg.speaker) rec["speaker"] = *seg.speaker;
    arr.push_back(std::move(rec));
  }
  return arr;
}

void write_transcript(const TranscriptTrack& track, const std::filesystem::path& path,
                      TranscriptFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const json arr = transcript_to_json(track);
  if (format == TranscriptFormat::json) {
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& rec : arr) out << rec.dump() << '\n';
  }
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

NarratorSplit split_by_narrator(const TranscriptTrack& track, std::string_view narrator_speaker) {
  std::vector<TimedSegment> ad;
  std::vector<TimedSegment> dialogue;
  for (const auto& seg : track.segments()) {
    if (seg.speaker && *seg.speaker == narrator_speaker) {
      ad.push_back(seg);
    } else {
      dialogue.push_back(seg);
    }
  }
  if (ad.empty()) {
    throw InvalidArgument("narrator speaker '" + std::string(narrator_speaker) +
                          "' does not occur in track '" + track.source_id() + "'");
  }
  return NarratorSplit{TranscriptTrack(track.source_id(), TrackKind::ad_narration, std::move(ad)),
                       TranscriptTrack(track.source_id(), TrackKind::dialogue, std::move(dialogue))};
}

std::optional<std::string> guess_narrator(const TranscriptTrack& track) {
  std::map<std::string, Millis> talk;
  for (const auto& seg : track.segments()) {
    if (seg.speaker) talk[*seg.speaker] += seg.end_ms - seg.start_ms;
  }
  std::optional<std::string> best;
  Millis best_ms = -1;
  for (const auto& [speaker, ms] : talk) {
    if (ms > best_ms) {
      best = speaker;
      best_ms = ms;
    }
  }
  return best;
}

CastList::CastList(std::vector<CastMember> members, std::vector<std::string>* warnings) {
  std::map<std::string, std::size_t> seen;
  for (auto& m : members) {
    const std::string key = canonical_name(m.character);
    if (key.empty()) {
      if (warnings) warnings->push_back("skipping blank character name");
      continue;
    }
    if (auto it = seen.find(key); it != seen.end()) {
      if (warnings) {
        warnings->push_back("duplicate character '" + m.character + "' merged into '" +
                            members_[it->second].character + "'");
      }
      continue;
    }
    m.character = std::string(trim(m.character));
    seen.emplace(key, members_.size());
    members_.push_back(std::move(m));
  }
}

CastList CastList::from_names(std::span<const std::string> names,
                              std::vector<std::string>* warnings) {
  std::vector<CastMember> members;
  members.reserve(names.size());
  for (const auto& n : names) members.push_back(CastMember{n, std::nullopt, std::nullopt});
  return CastList(std::move(members), warnings);
}

std::vector<std::string> CastList::names() const {
  std::vector<std::string> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.character);
  return out;
}

std::optional<std::size_t> CastList::find(std::string_view name) const {
  const std::string key = canonical_name(name);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (canonical_name(members_[i].character) == key) return i;
  }
  return std::nullopt;
}

LoadedCast cast_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw FormatError("cast list must be an array");
  std::vector<CastMember> members;
  for (const auto& rec : doc) {
    if (rec.is_string()) {
      members.push_back(CastMember{rec.get<std::string>(), std::nullopt, std::nullopt});
      continue;
    }
    if (!rec.is_object() || !rec.contains("character") || !rec["character"].is_string()) {
      throw FormatError("cast entry needs a 'character' string");
    }
    CastMember m{rec["character"].get<std::string>(), std::nullopt, std::nullopt};
    if (rec.contains("actor") && rec["actor"].is_string()) m.actor = rec["actor"].get<std::string>();
    if (rec.contains("face") && rec["face"].is_string()) m.face = rec["face"].get<std::string>();
    members.push_back(std::move(m));
  }
  LoadedCast out;
  out.cast = CastList(std::move(members), &out.warnings);
  if (out.cast.empty()) throw FormatError("empty cast list");
  return out;
}

LoadedCast load_cast_list(const std::filesystem::path& path) {
  const std::string content = slurp(path);
  const std::string_view body = trim(content);
  if (body.empty()) throw FormatError(path.string() + ": empty cast list");
  try {
    if (body.front() == '[') return cast_from_json(parse_or_throw(content, path.string()));
    std::istringstream in(content);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) names.emplace_back(trim(line));
    }
    LoadedCast out;
    out.cast = CastList::from_names(names, &out.warnings);
    if (out.cast.empty()) throw FormatError("empty cast list");
    return out;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const ADRecord& r) {
  return json{{"movie_id", r.movie_id},       {"clip_id", r.clip_id},
              {"text", r.text},               {"start_clip", r.start_clip},
              {"end_clip", r.end_clip},       {"start_movie", r.start_movie},
              {"end_movie", r.end_movie}};
}

ADRecord ad_record_from_json(const nlohmann::json& j) {
  try {
    return ADRecord{j.at("movie_id").get<std::string>(), j.at("clip_id").get<std::string>(),
                    j.at("text").get<std::string>(),     j.at("start_clip").get<double>(),
                    j.at("end_clip").get<double>(),      j.at("start_movie").get<double>(),
                    j.at("end_movie").get<double>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad AD record: ") + e.what());
  }
}

void write_ad_records(const std::filesystem::path& path, std::span<const ADRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::vector<ADRecord> read_ad_records(const std::filesystem::path& path) {
  std::vector<ADRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(ad_record_from_json(j));
  return out;
}

}  // namespace adtk
