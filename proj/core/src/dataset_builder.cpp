#include "adtk/dataset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "adtk/error.hpp"

namespace adtk {

using nlohmann::json;

void AlignParams::validate() const {
  if (!(wer_accept_threshold >= 0)) throw InvalidArgument("wer_accept_threshold must be >= 0");
  if (!(chunk_margin >= 0)) throw InvalidArgument("chunk_margin must be >= 0");
  mel.validate();
  if (window_frames <= 0) throw InvalidArgument("window_frames must be positive");
  if (ransac.iterations <= 0) throw InvalidArgument("ransac iterations must be positive");
  if (!(ransac.residual_threshold > 0)) throw InvalidArgument("residual_threshold must be positive");
  if (!(gates.min_slope < gates.max_slope)) throw InvalidArgument("min_slope must be < max_slope");
  if (!(gates.max_mse > 0)) throw InvalidArgument("max_mse must be positive");
}

json to_json(const AlignParams& p) {
  return json{{"wer_accept_threshold", p.wer_accept_threshold},
              {"chunk_margin", p.chunk_margin},
              {"mel",
               {{"sample_rate", p.mel.sample_rate},
                {"n_fft", p.mel.n_fft},
                {"hop", p.mel.hop},
                {"n_mels", p.mel.n_mels},
                {"f_min", p.mel.f_min},
                {"f_max", p.mel.f_max}}},
              {"window_frames", p.window_frames},
              {"ransac",
               {{"residual_threshold", p.ransac.residual_threshold},
                {"iterations", p.ransac.iterations},
                {"seed", p.ransac.seed}}},
              {"gates",
               {{"min_slope", p.gates.min_slope},
                {"max_slope", p.gates.max_slope},
                {"max_mse", p.gates.max_mse},
                {"min_inliers", p.gates.min_inliers}}}};
}

std::string_view to_string(AlignStatus status) {
  switch (status) {
    case AlignStatus::aligned: return "aligned";
    case AlignStatus::stage1_failed: return "stage1_failed";
    case AlignStatus::stage2_rejected: return "stage2_rejected";
  }
  return "stage1_failed";
}

AudioAlignment align_audio(const AudioBuffer& movie_audio, const AudioBuffer& clip_audio,
                           const TranscriptTrack& ad_track, double chunk_begin, double chunk_end,
                           const AlignParams& params, MatchPointSet* scatter_out) {
  AudioAlignment out;
  out.chunk_begin = std::max(0.0, chunk_begin);
  out.chunk_end = std::min(movie_audio.duration(), chunk_end);
  if (!(out.chunk_end > out.chunk_begin)) {
    throw InvalidArgument("align_audio: movie chunk is empty");
  }
  // Align the chunk start to a sample so frame arithmetic stays exact.
  out.chunk_begin = std::round(out.chunk_begin * movie_audio.sample_rate) / movie_audio.sample_rate;

  const AudioBuffer chunk = movie_audio.slice(out.chunk_begin, out.chunk_end);
  const MelSpectrogram movie_spec =
      mask_ad_regions(mel_spectrogram(chunk, params.mel), ad_track, out.chunk_begin);
  const MelSpectrogram clip_spec = mel_spectrogram(clip_audio, params.mel);
  MatchPointSet scatter = correlate_windows(movie_spec, clip_spec, params.window_frames, params.jobs);
  out.windows_kept = scatter.matches.size();

  if (scatter.points.size() < 2) {
    out.fit.total_points = scatter.points.size();
    out.fit.rng_seed = params.ransac.seed;
    out.fit.accepted = false;
  } else {
    out.fit = ransac_line_fit(scatter, params.ransac, params.gates);
    if (out.fit.accepted) {
      out.mapping = to_time_mapping(out.fit, params.mel.seconds_per_frame(), out.chunk_begin);
    }
  }
  if (scatter_out) *scatter_out = std::move(scatter);
  return out;
}

json to_json(const ClipAlignment& a) {
  json j{{"clip_id", a.clip_id},
         {"movie_id", a.movie_id},
         {"status", to_string(a.status)},
         {"stage1",
          {{"best_index", a.stage1.best_index},
           {"best_time", a.stage1.best_time},
           {"best_wer", a.stage1.best_wer},
           {"accepted", a.stage1.accepted}}},
         {"fit", to_json(a.fit)},
         {"chunk", {a.chunk_begin, a.chunk_end}},
         {"clip_duration", a.clip_duration}};
  if (a.mapping) j["mapping"] = to_json(*a.mapping);
  if (!a.reason.empty()) j["reason"] = a.reason;
  return j;
}

ClipAlignment align_clip(const ClipInputs& in, const AlignParams& params,
                         MatchPointSet* scatter_out) {
  ClipAlignment out;
  out.clip_id = in.clip_id;
  out.movie_id = in.movie_id;

  try {
    if (!in.clip_transcript || !in.movie_dialogue) throw InvalidArgument("missing transcript");
    out.stage1 = locate_clip(*in.clip_transcript, *in.movie_dialogue,
                             params.wer_accept_threshold, params.jobs);
  } catch (const std::exception& e) {
    out.status = AlignStatus::stage1_failed;
    out.reason = e.what();
    return out;
  }
  if (!out.stage1.accepted) {
    out.status = AlignStatus::stage1_failed;
    out.reason = "best window WER above threshold";
    return out;
  }

  out.status = AlignStatus::stage2_rejected;
  try {
    if (!in.clip_audio || !in.movie_audio) throw InvalidArgument("missing audio");
    out.clip_duration = in.clip_audio->duration();
    // Estimated movie time of the clip start.
    const double anchor = out.stage1.best_time - (*in.clip_transcript)[0].start();
    const TranscriptTrack no_ad(in.movie_id, TrackKind::ad_narration, {});
    const AudioAlignment audio = align_audio(
        *in.movie_audio, *in.clip_audio, in.ad_track ? *in.ad_track : no_ad,
        anchor - params.chunk_margin, anchor + out.clip_duration + params.chunk_margin, params,
        scatter_out);
    out.fit = audio.fit;
    out.mapping = audio.mapping;
    out.chunk_begin = audio.chunk_begin;
    out.chunk_end = audio.chunk_end;
    if (audio.windows_kept == 0) {
      out.reason = "all movie windows masked";
    } else if (!audio.fit.accepted) {
      out.reason = "fit rejected by gates";
    } else {
      out.status = AlignStatus::aligned;
    }
  } catch (const std::exception& e) {
    out.reason = e.what();
  }
  return out;
}

std::vector<ADRecord> project_ad(const TranscriptTrack& ad_track, const TimeMapping& mapping,
                                 double clip_duration, const std::string& movie_id,
                                 const std::string& clip_id) {
  std::vector<ADRecord> out;
  for (const auto& seg : ad_track.segments()) {
    double a = mapping.to_clip(seg.start());
    double b = mapping.to_clip(seg.end());
    if (a > b) std::swap(a, b);
    if (b <= 0.0 || a >= clip_duration) continue;
    a = std::max(a, 0.0);
    b = std::min(b, clip_duration);
    if (!(b > a)) continue;
    out.push_back(ADRecord{movie_id, clip_id, seg.text, a, b, seg.start(), seg.end()});
  }
  return out;
}

void SplitManifest::validate() const {
  for (const auto& m : eval_movies) {
    if (train_movies.contains(m)) {
      throw InvalidArgument("movie '" + m + "' is assigned to both train and eval splits");
    }
  }
}

SplitManifest make_split(std::span<const std::string> movie_ids, std::size_t eval_count,
                         std::uint64_t seed) {
  std::vector<std::string> ids(movie_ids.begin(), movie_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  SplitManifest out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    (i < eval_count ? out.eval_movies : out.train_movies).insert(ids[i]);
  }
  return out;
}

namespace {

json to_json(const SplitStats& s) {
  return json{{"movies", s.movies}, {"clips", s.clips}, {"ads", s.ads}};
}

}  // namespace

json to_json(const DatasetSummary& s) {
  return json{{"clips", s.clips},
              {"aligned", s.aligned},
              {"stage1_failed", s.stage1_failed},
              {"stage2_rejected", s.stage2_rejected},
              {"movies", s.movies},
              {"ads", s.ads},
              {"success_rate", s.success_rate},
              {"train", to_json(s.train)},
              {"eval", to_json(s.eval)}};
}

DatasetSummary emit_dataset(std::span<const ClipResult> results, const SplitManifest& manifest,
                            const std::filesystem::path& out_dir) {
  manifest.validate();
  for (const auto& r : results) {
    const auto& movie = r.alignment.movie_id;
    if (!manifest.train_movies.contains(movie) && !manifest.eval_movies.contains(movie)) {
      throw InvalidArgument("movie '" + movie + "' is not assigned to any split");
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  DatasetSummary summary;
  std::vector<ADRecord> train, eval;
  std::set<std::string> movies, train_movies, eval_movies;
  for (const auto& r : results) {
    const auto& a = r.alignment;
    ++summary.clips;
    switch (a.status) {
      case AlignStatus::aligned: ++summary.aligned; break;
      case AlignStatus::stage1_failed: ++summary.stage1_failed; break;
      case AlignStatus::stage2_rejected: ++summary.stage2_rejected; break;
    }
    if (a.status != AlignStatus::aligned) continue;
    const bool is_eval = manifest.eval_movies.contains(a.movie_id);
    auto& sink = is_eval ? eval : train;
    auto& stats = is_eval ? summary.eval : summary.train;
    movies.insert(a.movie_id);
    (is_eval ? eval_movies : train_movies).insert(a.movie_id);
    ++stats.clips;
    stats.ads += r.records.size();
    sink.insert(sink.end(), r.records.begin(), r.records.end());
  }
  summary.movies = movies.size();
  summary.train.movies = train_movies.size();
  summary.eval.movies = eval_movies.size();
  summary.ads = train.size() + eval.size();
  summary.success_rate =
      summary.clips == 0 ? 0.0 : static_cast<double>(summary.aligned) / summary.clips;

  write_ad_records(out_dir / "train.jsonl", train);
  write_ad_records(out_dir / "eval.jsonl", eval);
  std::ofstream stats(out_dir / "stats.json");
  if (!stats) throw IoError("cannot write '" + (out_dir / "stats.json").string() + "'");
  stats << to_json(summary).dump(2) << '\n';
  if (!stats) throw IoError("error writing stats.json");
  return summary;
}

}  // namespace adtk
