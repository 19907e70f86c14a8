#include "adtk/pseudo_ad.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "adtk/corpus.hpp"
#include "adtk/error.hpp"
#include "adtk/text.hpp"

namespace adtk {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

template <class T>
T required(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("bad type for field '") + key + "'");
  }
}

}  // namespace

CaptionRecord caption_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("caption annotation is not a record");
  CaptionRecord c;
  c.video_id = required<std::string>(j, "video_id");
  c.text = required<std::string>(j, "text");
  c.start = required<double>(j, "start");
  c.end = required<double>(j, "end");
  c.unique_name_count = required<int>(j, "unique_name_count");
  c.has_face_frame = required<bool>(j, "has_face_frame");
  if (!j.contains("subject_start") || !j.contains("subject_end")) {
    throw FormatError("missing field 'subject_start'/'subject_end' (use null for no subject)");
  }
  const auto& s = j["subject_start"];
  const auto& e = j["subject_end"];
  if (!s.is_null() || !e.is_null()) {
    if (!s.is_number_integer() || !e.is_number_integer()) {
      throw FormatError("subject_start/subject_end must both be integers or both null");
    }
    const auto b = s.get<std::int64_t>();
    const auto en = e.get<std::int64_t>();
    if (b < 0 || en <= b || static_cast<std::size_t>(en) > c.text.size()) {
      throw FormatError("subject span out of bounds for '" + c.text + "'");
    }
    c.subject_span = ByteSpan{static_cast<std::size_t>(b), static_cast<std::size_t>(en)};
  }
  if (auto it = j.find("category"); it != j.end() && it->is_string()) {
    c.category = it->get<std::string>();
  }
  return c;
}

std::vector<CaptionRecord> read_captions(const std::filesystem::path& path) {
  std::vector<CaptionRecord> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(caption_from_json(j));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + " record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

std::string replace_subject(const CaptionRecord& caption, std::string_view name) {
  if (!caption.subject_span) {
    throw InvalidArgument("replace_subject: caption has no subject span: '" + caption.text + "'");
  }
  const ByteSpan span = *caption.subject_span;
  if (span.end <= span.begin || span.end > caption.text.size()) {
    throw InvalidArgument("replace_subject: span out of bounds");
  }
  std::string inserted(name);
  if (span.begin == 0 && !inserted.empty()) {
    inserted[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(inserted[0])));
  }
  std::string out = caption.text.substr(0, span.begin);
  out += inserted;
  out += caption.text.substr(span.end);
  return out;
}

json to_json(const CharacterBank& b) {
  return json{{"video_id", b.video_id},
              {"name", b.name},
              {"portrait", b.portrait_ref},
              {"distractors", b.distractor_refs}};
}

json to_json(const PseudoAD& ad) {
  return json{{"video_id", ad.video_id},
              {"text", ad.text},
              {"start", ad.start},
              {"end", ad.end},
              {"name", ad.name}};
}

std::string portrait_ref(const BankOptions& options, std::string_view video_id) {
  std::string out = options.portrait_pattern;
  const std::string key = "{video_id}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos)) {
    out.replace(pos, key.size(), video_id);
    pos += video_id.size();
  }
  return out;
}

TransformedVideo transform_video(std::span<const CaptionRecord> captions,
                                 std::span<const std::string> name_pool, std::uint64_t seed,
                                 std::span<const std::string> other_video_ids,
                                 const BankOptions& options) {
  if (captions.empty()) throw InvalidArgument("transform_video: no captions");
  if (name_pool.empty()) throw InvalidArgument("transform_video: empty name pool");
  const std::string& video_id = captions.front().video_id;
  for (const auto& c : captions) {
    if (c.video_id != video_id) {
      throw InvalidArgument("transform_video: captions from more than one video");
    }
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(video_id)),
                    static_cast<std::uint32_t>(fnv1a(video_id) >> 32)};
  std::mt19937_64 rng(seq);
  const std::string name =
      name_pool[std::uniform_int_distribution<std::size_t>(0, name_pool.size() - 1)(rng)];

  TransformedVideo out;
  for (const auto& c : captions) {
    if (!c.subject_span) {
      ++out.skipped;
      continue;
    }
    out.pseudo_ads.push_back(PseudoAD{video_id, replace_subject(c, name), c.start, c.end, name});
  }

  out.bank.video_id = video_id;
  out.bank.name = name;
  out.bank.portrait_ref = portrait_ref(options, video_id);
  std::set<std::string> unique(other_video_ids.begin(), other_video_ids.end());
  unique.erase(video_id);
  std::vector<std::string> candidates(unique.begin(), unique.end());
  std::vector<std::string> picked;
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked),
              static_cast<std::ptrdiff_t>(options.distractors), rng);
  for (const auto& v : picked) out.bank.distractor_refs.push_back(portrait_ref(options, v));
  return out;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::too_many_names: return "too_many_names";
    case RejectReason::no_subject: return "no_subject";
    case RejectReason::no_face: return "no_face";
  }
  return "unknown";
}

FilterResult filter_videos(const std::map<std::string, std::vector<CaptionRecord>>& videos) {
  FilterResult out;
  for (const auto& [video_id, captions] : videos) {
    int names = 0;
    bool subject = false, face = false;
    for (const auto& c : captions) {
      names = std::max(names, c.unique_name_count);
      subject = subject || c.subject_span.has_value();
      face = face || c.has_face_frame;
    }
    std::optional<RejectReason> reason;
    if (names > kMaxUniqueNames) {
      reason = RejectReason::too_many_names;
    } else if (!subject) {
      reason = RejectReason::no_subject;
    } else if (!face) {
      reason = RejectReason::no_face;
    }
    if (reason) {
      out.rejected.emplace_back(video_id, *reason);
      ++out.tally[*reason];
    } else {
      out.kept.push_back(video_id);
    }
  }
  return out;
}

std::map<std::string, std::vector<CaptionRecord>> group_by_video(
    std::span<const CaptionRecord> records) {
  std::map<std::string, std::vector<CaptionRecord>> out;
  for (const auto& r : records) out[r.video_id].push_back(r);
  return out;
}

std::vector<std::string> load_name_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!seen.insert(canonical_name(t)).second) {
      spdlog::warn("name pool {}: duplicate name '{}' ignored", path.string(), t);
      continue;
    }
    names.emplace_back(t);
  }
  if (names.empty()) throw FormatError(path.string() + ": empty name pool");
  return names;
}

}  // namespace adtk
