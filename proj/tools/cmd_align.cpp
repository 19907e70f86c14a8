#include <fstream>
#include <map>
#include <ostream>

#include <spdlog/spdlog.h>

#include "adtk/audio.hpp"
#include "adtk/dataset_builder.hpp"
#include "adtk/error.hpp"
#include "adtk/parallel.hpp"
#include "cli.hpp"

namespace adtk::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ClipEntry {
  std::string clip_id;
  fs::path audio;
  fs::path transcript;
};

struct MovieEntry {
  std::string movie_id;
  fs::path audio;
  fs::path transcript;
  std::optional<std::string> narrator;
  std::optional<fs::path> ad_transcript;
  std::optional<std::string> split;
  std::vector<ClipEntry> clips;
};

std::string require_string(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw FormatError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::vector<MovieEntry> load_manifest(const fs::path& path, bool guess_narrator) {
  const json doc = read_json(path);
  const fs::path base = path.parent_path();
  const json& movies = doc.is_array() ? doc : doc.at("movies");
  std::vector<MovieEntry> out;
  std::set<std::string> seen;
  for (const json& m : movies) {
    MovieEntry e;
    e.movie_id = require_string(m, "movie_id", "manifest movie");
    const std::string where = "manifest movie '" + e.movie_id + "'";
    if (!seen.insert(e.movie_id).second) throw FormatError(where + ": duplicate movie_id");
    e.audio = resolve_path(base, require_string(m, "audio", where));
    e.transcript = resolve_path(base, require_string(m, "transcript", where));
    e.narrator = optional_string(m, "narrator");
    if (auto ad = optional_string(m, "ad_transcript")) e.ad_transcript = resolve_path(base, *ad);
    e.split = optional_string(m, "split");
    if (e.split && *e.split != "train" && *e.split != "eval") {
      throw FormatError(where + ": split must be \"train\" or \"eval\"");
    }
    if (!e.narrator && !e.ad_transcript && !guess_narrator) {
      throw FormatError(where + ": needs \"narrator\" or \"ad_transcript\" (or --guess-narrator)");
    }
    std::set<std::string> clip_ids;
    for (const json& c : m.at("clips")) {
      ClipEntry ce;
      ce.clip_id = require_string(c, "clip_id", where + " clip");
      if (!clip_ids.insert(ce.clip_id).second) {
        throw FormatError(where + ": duplicate clip_id '" + ce.clip_id + "'");
      }
      ce.audio = resolve_path(base, require_string(c, "audio", where + " clip " + ce.clip_id));
      ce.transcript =
          resolve_path(base, require_string(c, "transcript", where + " clip " + ce.clip_id));
      e.clips.push_back(std::move(ce));
    }
    out.push_back(std::move(e));
  }
  return out;
}

AlignParams to_params(const AlignOptions& o, const CommonOptions& common) {
  AlignParams p;
  p.wer_accept_threshold = o.wer_threshold;
  p.chunk_margin = o.chunk_margin;
  p.window_frames = o.window_frames;
  p.mel.n_fft = o.n_fft;
  p.mel.n_mels = o.n_mels;
  p.ransac.residual_threshold = o.residual_threshold;
  p.ransac.iterations = o.iterations;
  p.ransac.seed = common.seed;
  p.gates.min_slope = o.min_slope;
  p.gates.max_slope = o.max_slope;
  p.gates.max_mse = o.max_mse;
  p.gates.min_inliers = o.min_inliers;
  p.jobs = 1;
  p.validate();
  return p;
}

struct MovieTracks {
  TranscriptTrack dialogue;
  TranscriptTrack ad;
  std::string narrator;
};

MovieTracks load_movie_tracks(const MovieEntry& m) {
  MovieTracks t;
  const auto fmt = transcript_format_from_path(m.transcript);
  if (m.ad_transcript) {
    t.dialogue = parse_transcript(m.transcript, fmt, TrackKind::dialogue, m.movie_id).track;
    t.ad = parse_transcript(*m.ad_transcript, transcript_format_from_path(*m.ad_transcript),
                            TrackKind::ad_narration, m.movie_id)
               .track;
    return t;
  }
  const TranscriptTrack mixed = parse_transcript(m.transcript, fmt, TrackKind::mixed, m.movie_id).track;
  if (m.narrator) {
    t.narrator = *m.narrator;
  } else {
    const auto g = guess_narrator(mixed);
    if (!g) throw FormatError("no speaker labels to guess the narrator from");
    t.narrator = *g;
    spdlog::warn("movie {}: guessed narrator label '{}'", m.movie_id, t.narrator);
  }
  NarratorSplit split = split_by_narrator(mixed, t.narrator);
  t.dialogue = std::move(split.dialogue_track);
  t.ad = std::move(split.ad_track);
  return t;
}

std::string scatter_name(const std::string& movie_id, const std::string& clip_id) {
  std::string s = movie_id + "__" + clip_id + ".csv";
  for (char& c : s) {
    if (c == '/' || c == '\\') c = '_';
  }
  return s;
}

json dry_run_report(const std::vector<MovieEntry>& movies, const json& config) {
  json missing = json::array();
  json problems = json::array();
  std::size_t clips = 0;
  const auto check = [&](const fs::path& p) {
    if (!fs::exists(p)) missing.push_back(p.string());
  };
  for (const auto& m : movies) {
    check(m.audio);
    check(m.transcript);
    if (m.ad_transcript) check(*m.ad_transcript);
    try {
      if (fs::exists(m.transcript)) load_movie_tracks(m);
    } catch (const Error& e) {
      problems.push_back({{"movie_id", m.movie_id}, {"error", e.what()}});
    }
    for (const auto& c : m.clips) {
      ++clips;
      check(c.audio);
      check(c.transcript);
      try {
        if (fs::exists(c.transcript)) {
          parse_transcript(c.transcript, transcript_format_from_path(c.transcript));
        }
      } catch (const Error& e) {
        problems.push_back({{"movie_id", m.movie_id}, {"clip_id", c.clip_id}, {"error", e.what()}});
      }
    }
  }
  return json{{"config", config},  {"dry_run", true},       {"movies", movies.size()},
              {"clips", clips},    {"missing", missing},    {"problems", problems}};
}

}  // namespace

int run_align(const AlignOptions& opt, const CommonOptions& common, const json& config,
              std::ostream& out) {
  const AlignParams params = to_params(opt, common);
  const std::vector<MovieEntry> movies = load_manifest(opt.manifest, opt.guess_narrator);

  if (common.dry_run) {
    out << dry_run_report(movies, config).dump(2) << '\n';
    return kOk;
  }

  // Split by movie: explicit assignments first, the rest shuffled by seed.
  SplitManifest manifest;
  std::vector<std::string> unassigned;
  for (const auto& m : movies) {
    if (!m.split) {
      unassigned.push_back(m.movie_id);
    } else {
      (*m.split == "eval" ? manifest.eval_movies : manifest.train_movies).insert(m.movie_id);
    }
  }
  const SplitManifest drawn = make_split(unassigned, opt.eval_count, common.seed);
  manifest.train_movies.insert(drawn.train_movies.begin(), drawn.train_movies.end());
  manifest.eval_movies.insert(drawn.eval_movies.begin(), drawn.eval_movies.end());
  manifest.validate();

  fs::create_directories(common.out_dir);
  const fs::path scatter_dir = common.out_dir / "scatter";
  if (opt.dump_scatter) fs::create_directories(scatter_dir);

  std::vector<ClipResult> results;
  for (const auto& m : movies) {
    std::optional<MovieTracks> tracks;
    std::string movie_error;
    try {
      tracks = load_movie_tracks(m);
    } catch (const Error& e) {
      movie_error = std::string("movie transcript: ") + e.what();
    }
    std::optional<AudioBuffer> movie_audio;
    std::string audio_error;
    if (tracks) {
      try {
        movie_audio = read_wav(m.audio);
      } catch (const Error& e) {
        audio_error = std::string("movie audio: ") + e.what();
      }
    }

    std::vector<ClipResult> clip_results(m.clips.size());
    parallel_for(m.clips.size(), common.jobs, [&](std::size_t i) {
      const ClipEntry& c = m.clips[i];
      ClipResult& r = clip_results[i];
      r.alignment.clip_id = c.clip_id;
      r.alignment.movie_id = m.movie_id;
      if (!tracks) {
        r.alignment.status = AlignStatus::stage1_failed;
        r.alignment.reason = movie_error;
        return;
      }
      std::optional<TranscriptTrack> clip_track;
      try {
        clip_track = parse_transcript(c.transcript, transcript_format_from_path(c.transcript),
                                      TrackKind::dialogue, c.clip_id)
                         .track;
      } catch (const Error& e) {
        r.alignment.status = AlignStatus::stage1_failed;
        r.alignment.reason = std::string("clip transcript: ") + e.what();
        return;
      }
      std::optional<AudioBuffer> clip_audio;
      std::string clip_audio_error;
      try {
        clip_audio = read_wav(c.audio);
      } catch (const Error& e) {
        clip_audio_error = std::string("clip audio: ") + e.what();
      }

      ClipInputs in;
      in.clip_id = c.clip_id;
      in.movie_id = m.movie_id;
      in.clip_audio = clip_audio ? &*clip_audio : nullptr;
      in.clip_transcript = &*clip_track;
      in.movie_audio = movie_audio ? &*movie_audio : nullptr;
      in.movie_dialogue = &tracks->dialogue;
      in.ad_track = &tracks->ad;
      MatchPointSet scatter;
      r.alignment = align_clip(in, params, opt.dump_scatter ? &scatter : nullptr);
      if (r.alignment.status == AlignStatus::stage2_rejected) {
        if (!audio_error.empty()) r.alignment.reason = audio_error;
        if (!clip_audio_error.empty()) r.alignment.reason = clip_audio_error;
      }
      if (opt.dump_scatter && !scatter.points.empty()) {
        write_scatter(scatter_dir / scatter_name(m.movie_id, c.clip_id), scatter);
      }
      if (r.alignment.status == AlignStatus::aligned) {
        r.records = project_ad(tracks->ad, *r.alignment.mapping, r.alignment.clip_duration,
                               m.movie_id, c.clip_id);
      }
    });
    for (auto& r : clip_results) results.push_back(std::move(r));
  }

  {
    std::ofstream f(common.out_dir / "alignments.jsonl", std::ios::binary);
    if (!f) throw IoError("cannot write alignments.jsonl in '" + common.out_dir.string() + "'");
    for (const auto& r : results) f << to_json(r.alignment).dump() << '\n';
  }
  const DatasetSummary summary = emit_dataset(results, manifest, common.out_dir);

  json failures = json::array();
  for (const auto& r : results) {
    if (r.alignment.status == AlignStatus::aligned) continue;
    failures.push_back({{"movie_id", r.alignment.movie_id},
                        {"clip_id", r.alignment.clip_id},
                        {"status", to_string(r.alignment.status)},
                        {"reason", r.alignment.reason}});
  }
  const json report{{"config", config},
                    {"params", to_json(params)},
                    {"summary", to_json(summary)},
                    {"splits",
                     {{"train", manifest.train_movies}, {"eval", manifest.eval_movies}}},
                    {"failures", failures}};
  write_json_file(common.out_dir / "summary.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

}  // namespace adtk::cli
