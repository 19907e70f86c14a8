#include <cstdio>
#include <ostream>

#include "adtk/audio.hpp"
#include "adtk/dataset_builder.hpp"
#include "adtk/error.hpp"
#include "adtk/text_metrics.hpp"
#include "cli.hpp"
#include "metrics.hpp"

namespace adtk::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct VersionEntry {
  fs::path transcript;
  std::optional<fs::path> audio;
};

struct PairEntry {
  std::string movie_id;
  VersionEntry a;
  VersionEntry b;
  std::optional<CastList> cast;
};

VersionEntry load_version(const json& j, const fs::path& base, const std::string& where) {
  if (!j.is_object() || !j.contains("transcript")) {
    throw FormatError(where + ": needs a \"transcript\" path");
  }
  VersionEntry v;
  v.transcript = resolve_path(base, j.at("transcript").get<std::string>());
  if (j.contains("audio") && !j.at("audio").is_null()) {
    v.audio = resolve_path(base, j.at("audio").get<std::string>());
  }
  return v;
}

std::vector<PairEntry> load_manifest(const fs::path& path) {
  const json doc = read_json(path);
  const fs::path base = path.parent_path();
  const json& movies = doc.is_array() ? doc : doc.at("movies");
  std::vector<PairEntry> out;
  for (const json& m : movies) {
    if (!m.contains("movie_id")) throw FormatError("interrater manifest: movie without movie_id");
    PairEntry e;
    e.movie_id = m.at("movie_id").get<std::string>();
    const std::string where = "interrater manifest movie '" + e.movie_id + "'";
    if (!m.contains("version_a") || !m.contains("version_b")) {
      throw FormatError(where + ": needs version_a and version_b");
    }
    e.a = load_version(m.at("version_a"), base, where + " version_a");
    e.b = load_version(m.at("version_b"), base, where + " version_b");
    if (m.contains("cast")) e.cast = cast_from_json(m.at("cast")).cast;
    out.push_back(std::move(e));
  }
  return out;
}

TranscriptTrack load_ad_track(const fs::path& path, const std::string& id) {
  return parse_transcript(path, transcript_format_from_path(path), TrackKind::ad_narration, id)
      .track;
}

// Moves every segment of `track` through `mapping`; segments that end before
// time zero are dropped and the rest are clamped at zero.
TranscriptTrack map_track(const TranscriptTrack& track, const TimeMapping& mapping) {
  std::vector<TimedSegment> out;
  for (const auto& seg : track.segments()) {
    const double a = std::max(0.0, mapping.to_movie(seg.start()));
    const double b = mapping.to_movie(seg.end());
    if (b <= a) continue;
    auto mapped = TimedSegment::from_seconds(seg.text, a, b, seg.speaker);
    if (mapped.valid()) out.push_back(std::move(mapped));
  }
  return TranscriptTrack(track.source_id(), track.kind(), std::move(out));
}

std::string file_stem(const std::string& movie_id, double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_tiou%.2f.tsv", t);
  std::string s = movie_id + buf;
  for (char& c : s) {
    if (c == '/' || c == '\\') c = '_';
  }
  return s;
}

AlignParams to_params(const AlignOptions& o, const CommonOptions& common) {
  AlignParams p;
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
  p.jobs = common.jobs;
  p.validate();
  return p;
}

}  // namespace

int run_interrater(const InterraterOptions& opt, const CommonOptions& common, const json& config,
                   std::ostream& out) {
  if (opt.tiou.empty()) throw InvalidArgument("--tiou needs at least one threshold");
  for (double t : opt.tiou) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("--tiou thresholds must lie in [0, 1]");
  }
  const AlignParams params = to_params(opt.align, common);
  const std::vector<PairEntry> movies = load_manifest(opt.manifest);

  CastMap casts;
  if (opt.eval.cast) casts = load_cast_map(*opt.eval.cast);
  for (const auto& m : movies) {
    if (m.cast) casts.insert_or_assign(m.movie_id, *m.cast);
  }
  const bool all_cast = std::all_of(movies.begin(), movies.end(),
                                    [&](const PairEntry& m) { return casts.contains(m.movie_id); });
  validate_metric_options(opt.eval, all_cast);

  if (common.dry_run) {
    json missing = json::array();
    for (const auto& m : movies) {
      for (const VersionEntry* v : {&m.a, &m.b}) {
        if (!fs::exists(v->transcript)) missing.push_back(v->transcript.string());
        if (v->audio && !fs::exists(*v->audio)) missing.push_back(v->audio->string());
      }
    }
    out << json{{"config", config}, {"dry_run", true}, {"movies", movies.size()},
                {"missing", missing}}
               .dump(2)
        << '\n';
    return kOk;
  }

  fs::create_directories(common.out_dir / "pairs");
  json movie_reports = json::array();
  struct Usable {
    std::string movie_id;
    TranscriptTrack a;
    TranscriptTrack b;
  };
  std::vector<Usable> usable;
  for (const auto& m : movies) {
    json rep{{"movie_id", m.movie_id}};
    try {
      const TranscriptTrack a = load_ad_track(m.a.transcript, m.movie_id + "/a");
      TranscriptTrack b = load_ad_track(m.b.transcript, m.movie_id + "/b");
      const DuplicateCheck dup = detect_duplicate_versions(a, b, opt.duplicate_threshold);
      rep["duplicate"] = {{"duplicate", dup.duplicate},
                          {"match_rate", dup.match_rate},
                          {"exact_matches", dup.exact_matches}};
      if (dup.duplicate) {
        rep["status"] = "skipped";
        rep["reason"] = "duplicate version";
        movie_reports.push_back(rep);
        continue;
      }
      if (m.a.audio && m.b.audio) {
        const AudioBuffer audio_a = read_wav(*m.a.audio);
        const AudioBuffer audio_b = read_wav(*m.b.audio);
        const AudioAlignment al = align_audio(audio_a, audio_b, a, 0.0, audio_a.duration(), params);
        rep["alignment"] = to_json(al.fit);
        if (!al.mapping) {
          rep["status"] = "skipped";
          rep["reason"] = "alignment rejected";
          movie_reports.push_back(rep);
          continue;
        }
        rep["mapping"] = to_json(*al.mapping);
        b = map_track(b, *al.mapping);
      }
      rep["status"] = "paired";
      movie_reports.push_back(rep);
      usable.push_back({m.movie_id, a, std::move(b)});
    } catch (const Error& e) {
      rep["status"] = "failed";
      rep["reason"] = e.what();
      movie_reports.push_back(rep);
    }
  }

  json thresholds = json::array();
  for (double t : opt.tiou) {
    std::vector<EvalItem> pred, ref;
    json per_movie = json::object();
    for (const auto& [movie, a, b] : usable) {
      const auto pairs = pair_inter_rater(a, b, t);
      write_pairs(common.out_dir / "pairs" / file_stem(movie, t), pairs);
      per_movie[movie] = pairs.size();
      for (const auto& p : pairs) {
        ref.push_back({movie, p.ad_a.text, p.ad_a.start(), p.ad_a.end()});
        pred.push_back({movie, p.ad_b.text, p.ad_b.start(), p.ad_b.end()});
      }
    }
    json entry{{"tiou", t}, {"pairs", pred.size()}, {"pairs_per_movie", per_movie}};
    entry["metrics"] = compute_metrics(opt.eval, pred, ref, casts, common.jobs);
    thresholds.push_back(entry);
  }

  const json report{{"config", config}, {"movies", movie_reports}, {"thresholds", thresholds}};
  write_json_file(common.out_dir / "interrater_report.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

}  // namespace adtk::cli
