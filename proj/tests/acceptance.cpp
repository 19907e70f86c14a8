// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "adtk/critic.hpp"
#include "adtk/dataset_builder.hpp"
#include "adtk/llm_judge.hpp"
#include "adtk/pseudo_ad.hpp"
#include "adtk/robust_fit.hpp"
#include "adtk/text.hpp"
#include "adtk/text_align.hpp"
#include "adtk/text_metrics.hpp"
#include "support/mock_server.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

using namespace adtk;
using namespace adtk::testing;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

json load_data(const std::string& name) {
  std::ifstream f(std::string(ADTK_TEST_DATA_DIR) + "/" + name);
  if (!f) throw std::runtime_error("missing test data " + name);
  return json::parse(f);
}

// ---------------------------------------------------------------------------

Outcome synthetic_alignment() {
  constexpr double kSlope = 0.959;
  constexpr double kClipStart = 937.25;
  constexpr double kClipSeconds = 120.0;
  AudioBuffer movie = synth_movie(1800.0, 2024);
  const TranscriptTrack ads = overlay_ad_bursts(movie, 40, 2025);
  const TranscriptTrack dialogue = synth_subtitles(1800.0, 2026, "movie");
  const AudioBuffer clip = warp_clip(movie, kClipStart, kClipSeconds, kSlope);
  const TranscriptTrack clip_track = clip_subtitles(dialogue, kClipStart, kClipSeconds, kSlope, "clip");

  ClipInputs in{"clip", "movie", &clip, &clip_track, &movie, &dialogue, &ads};
  AlignParams params;
  params.jobs = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const ClipAlignment r = align_clip(in, params);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (r.status != AlignStatus::aligned) {
    return {false, fmt("status %s (%s)", std::string(to_string(r.status)).c_str(), r.reason.c_str())};
  }
  const double dw = std::abs(r.mapping->slope - kSlope);
  const double db = std::abs(r.mapping->intercept - kClipStart);
  const bool ok = dw <= 0.005 && db <= 0.1 && r.fit.mse < 100.0 && secs < 60.0;
  return {ok, fmt("W=%.5f |dW|=%.5f intercept err=%.4f s mse=%.3f inliers=%zu runtime=%.1f s",
                  r.mapping->slope, dw, db, r.fit.mse, r.fit.inlier_count, secs)};
}

Outcome gate_fidelity() {
  const GateParams g;
  bool ok = true;
  std::string detail;
  const auto expect = [&](bool got, bool want, const std::string& what) {
    if (got != want) {
      ok = false;
      detail += what + " ";
    }
  };
  // Exact boundaries.
  expect(passes_gates(0.5, 1.0, 100, g), false, "slope0.5");
  expect(passes_gates(0.8, 1.0, 100, g), false, "slope0.8");
  expect(passes_gates(1.25, 1.0, 100, g), false, "slope1.25");
  expect(passes_gates(1.0, 100.0, 100, g), false, "mse100");
  expect(passes_gates(1.0, 150.0, 100, g), false, "mse150");
  expect(passes_gates(1.0, 0.68, 100, g), true, "slope1/mse0.68");

  // Through the fitter.
  const auto line = [](double slope, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    std::vector<MatchPoint> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({i * 15.0, slope * i * 15.0 + 200.0 + n(rng), 1.0});
    return pts;
  };
  expect(ransac_line_fit(line(0.5, 0.0, 1)).accepted, false, "fit0.5");
  expect(ransac_line_fit(line(0.79, 0.0, 1)).accepted, false, "fit0.79");
  expect(ransac_line_fit(line(1.26, 0.0, 1)).accepted, false, "fit1.26");
  const auto good = ransac_line_fit(line(1.0, 0.82, 3));
  expect(good.accepted, true, "fit1.0");
  std::vector<MatchPoint> wide;
  for (int i = 0; i < 200; ++i) wide.push_back({i * 15.0, i * 15.0 + (i % 2 ? 11.0 : -11.0), 1.0});
  const auto wide_fit = ransac_line_fit(wide);
  expect(wide_fit.accepted, false, "fit-mse121");
  if (ok) detail = fmt("boundaries strict; slope-1 fixture mse=%.3f accepted; mse=%.1f rejected",
                       good.mse, wide_fit.mse);
  return {ok, detail};
}

Outcome wer_oracle_equivalence() {
  SplitMix rng(31337);
  int matches = 0;
  constexpr int kTrials = 200;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t m = 1 + rng.below(200);
    const std::size_t n = 1 + rng.below(std::min<std::size_t>(20, m));
    const std::size_t vocab = 3 + rng.below(60);
    WordSource words(vocab, rng.next());
    std::vector<TimedSegment> movie_segs, clip_segs;
    for (std::size_t i = 0; i < m; ++i) {
      movie_segs.push_back(TimedSegment::from_seconds(words.sentence(1, 7), 2.0 * i, 2.0 * i + 1));
    }
    const std::size_t at = rng.below(m - n + 1);
    const double noise = rng.uniform();
    for (std::size_t k = 0; k < n; ++k) {
      std::string text;
      for (const auto& w : normalize_words(movie_segs[at + k].text)) {
        if (!text.empty()) text += ' ';
        text += rng.uniform() < noise ? words.word() : w;
      }
      if (rng.uniform() < 0.2) text += " " + words.word();
      clip_segs.push_back(TimedSegment::from_seconds(text, 2.0 * k, 2.0 * k + 1));
    }
    const TranscriptTrack movie("m", TrackKind::dialogue, movie_segs);
    const TranscriptTrack clip("c", TrackKind::dialogue, clip_segs);
    const auto got = locate_clip(clip, movie, 0.8, 1 + t % 4);
    const auto want = oracle_locate(clip, movie);
    if (got.best_index == want.index && got.best_wer == want.wer) ++matches;
  }
  return {matches == kTrials, fmt("%d/%d fixtures match the exhaustive scan", matches, kTrials)};
}

Outcome ransac_robustness() {
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    std::mt19937_64 rng(5000 + t);
    std::normal_distribution<double> noise(0.0, 3.0);
    std::uniform_real_distribution<double> ux(0.0, 3750.0), uy(0.0, 7500.0), uw(0.2, 1.0);
    std::vector<MatchPoint> pts;
    for (int i = 0; i < 140; ++i) {
      const double x = ux(rng);
      pts.push_back({x, 0.959 * x + 3750.0 + noise(rng), uw(rng)});
    }
    for (int i = 0; i < 60; ++i) pts.push_back({ux(rng), uy(rng), uw(rng)});
    RansacParams p;
    p.seed = static_cast<std::uint64_t>(t);
    if (std::abs(ransac_line_fit(pts, p).slope - 0.959) <= 0.01) ++ok;
  }
  return {ok >= 99, fmt("%d/100 trials within +-0.01 at 70%% inliers", ok)};
}

Outcome critic_exactness() {
  const CastList cast = CastList::from_names(std::vector<std::string>{"Jack", "Rose", "Cal"});
  const std::vector<std::string> ref{
      "Jack walks in.",     "Rose follows him.",      "Cal waits.",  "The two men argue.",
      "She smiles.",        "Jack and Rose dance.",   "Cal leaves.", "He returns.",
      "Rose sits.",         "Jack sits beside her.",  "Cal glares.", "Jack laughs."};
  const std::vector<std::string> pred{
      "Jack walks in.", "Rose follows.",         "A man waits.",        "They argue.",
      "Rose smiles.",   "Jack dances.",          "Jack leaves.",        "He returns.",
      "Rose sits.",     "Jack sits beside Rose.", "Cal glares at Jack.", "Jack laughs."};
  const Paragraph pr = build_paragraph(ref, cast);
  const Paragraph pp = build_paragraph(pred, cast);

  // Mentions are located by sentence index and substring.
  const auto at = [](const Paragraph& p, std::size_t sentence, const std::string& word) {
    const std::size_t from = sentence == SIZE_MAX ? p.cast_span.begin : p.sentence_spans[sentence].begin;
    const std::size_t b = p.text.find(word, from);
    return ByteSpan{b, b + word.size()};
  };
  constexpr std::size_t kCast = SIZE_MAX;
  std::map<std::string, std::vector<std::vector<ByteSpan>>> clusters;
  clusters["movie/ref"] = {
      {at(pr, 0, "Jack"), at(pr, 1, "him"), at(pr, 5, "Jack"), at(pr, 9, "Jack"), at(pr, 11, "Jack")},
      {at(pr, 1, "Rose"), at(pr, 4, "She"), at(pr, 5, "Rose"), at(pr, 8, "Rose"), at(pr, 9, "her")},
      {at(pr, 2, "Cal"), at(pr, 6, "Cal"), at(pr, 7, "He"), at(pr, 10, "Cal")},
      {at(pr, 3, "The two men"), at(pr, kCast, "Jack"), at(pr, kCast, "Cal")}};
  clusters["movie/pred"] = {
      {at(pp, 0, "Jack"), at(pp, 5, "Jack"), at(pp, 6, "Jack"), at(pp, 7, "He"), at(pp, 9, "Jack"),
       at(pp, 10, "Jack"), at(pp, 11, "Jack")},
      {at(pp, 1, "Rose"), at(pp, 4, "Rose"), at(pp, 8, "Rose"), at(pp, 9, "Rose")},
      {at(pp, 10, "Cal")},
      {at(pp, 2, "A man")}};
  const ClusterFileResolver resolver(clusters);
  const CriticReport report = critic_for_movie("movie", pred, ref, cast, resolver);

  // Hand-computed: -1 marks the skipped AD (reference cluster discarded).
  const std::vector<double> want{1.0, 0.5, 0.0, -1, 1.0, 0.5, 0.0, 0.0, 1.0, 1.0, 0.5, 1.0};
  bool ok = report.per_ad.size() == want.size();
  bool seen0 = false, seen_half = false, seen1 = false;
  double sum = 0;
  std::size_t scored = 0;
  for (std::size_t i = 0; ok && i < want.size(); ++i) {
    const auto& e = report.per_ad[i];
    if (want[i] < 0) {
      ok = e.skipped;
      continue;
    }
    ok = !e.skipped && e.iou == want[i];
    seen0 |= want[i] == 0.0;
    seen_half |= want[i] == 0.5;
    seen1 |= want[i] == 1.0;
    sum += want[i];
    ++scored;
  }
  const double mean = sum / static_cast<double>(scored);
  ok = ok && seen0 && seen_half && seen1 && report.scored == scored && report.aggregate == mean;
  return {ok, fmt("12 ADs, %zu scored, aggregate %.6f (hand %.6f)", report.scored,
                  report.aggregate, mean)};
}

Outcome cider_cross_oracle() {
  const json f = load_data("cider_oracle.json").at("fixture_20");
  const auto cands = f.at("candidates").get<std::vector<std::string>>();
  const auto refs = f.at("references").get<std::vector<std::vector<std::string>>>();
  const auto want = f.at("per_item").get<std::vector<double>>();
  const auto r = cider(cands, refs);
  const double dc = std::abs(r.corpus - f.at("corpus").get<double>());
  double worst = 0;
  for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(r.per_item[i] - want[i]));
  bool tens = true;
  std::size_t identical = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (refs[i].size() == 1 && refs[i][0] == cands[i]) {
      ++identical;
      tens &= std::abs(r.per_item[i] - 10.0) <= 1e-6;
    }
  }
  return {dc <= 1e-6 && worst <= 1e-6 && tens && identical > 0,
          fmt("corpus %.9f |d|=%.2e, worst item |d|=%.2e, %zu identical items at 10.0", r.corpus,
              dc, worst, identical)};
}

Outcome recall_statistics() {
  constexpr std::size_t kTrials = 10000;
  WordSource words(100, 77);
  std::vector<std::string> refs, preds;
  for (std::size_t i = 0; i < kTrials; ++i) refs.push_back(words.sentence(20, 30));
  for (std::size_t i = 0; i < kTrials; ++i) preds.push_back(words.sentence(20, 30));
  const TfidfScorer scorer(refs);
  const double exact = recall_at_k(refs, refs, 1, 5, scorer).percent;
  const double random = recall_at_k(preds, refs, 1, 5, scorer).percent;
  bool monotone = true;
  double prev = -1;
  std::string ks;
  for (int k = 1; k <= 4; ++k) {
    const double v = recall_at_k(preds, refs, k, 5, scorer).percent;
    monotone &= v >= prev;
    prev = v;
    ks += fmt("%s%.2f", k > 1 ? "/" : "", v);
  }
  return {exact == 100.0 && std::abs(random - 20.0) <= 3.0 && monotone,
          fmt("exact %.1f%%, random k=1 %.2f%% over %zu trials, k=1..4: %s", exact, random, kTrials,
              ks.c_str())};
}

Outcome interrater_protocol() {
  SplitMix rng(404);
  WordSource words(800, 405);
  std::vector<TimedSegment> a, b, near_copy;
  double t = 0;
  for (int i = 0; i < 400; ++i) {
    t += 1.0 + rng.uniform() * 4.0;
    const double len = 1.5 + rng.uniform() * 4.0;
    const std::string text = words.sentence(5, 12);
    a.push_back(TimedSegment::from_seconds(text, t, t + len));
    // An independent describer: new words, boundaries off by up to 0.6 s.
    const double ds = (rng.uniform() - 0.5) * 1.2, de = (rng.uniform() - 0.5) * 1.2;
    b.push_back(TimedSegment::from_seconds(words.sentence(5, 12), std::max(0.0, t + ds),
                                           t + len + de));
    near_copy.push_back(
        TimedSegment::from_seconds(i % 10 == 3 ? text + " again" : text, t + 0.05, t + len));
    t += len;
  }
  const TranscriptTrack ta("a", TrackKind::ad_narration, a);
  const TranscriptTrack tb("b", TrackKind::ad_narration, b);
  const TranscriptTrack tc("c", TrackKind::ad_narration, near_copy);
  const auto p8 = pair_inter_rater(ta, tb, 0.8).size();
  const auto p9 = pair_inter_rater(ta, tb, 0.9).size();
  const auto dup_b = detect_duplicate_versions(ta, tb);
  const auto dup_c = detect_duplicate_versions(ta, tc);
  const bool ok = p9 <= p8 && p8 > 0 && !dup_b.duplicate && dup_c.duplicate;
  return {ok, fmt("pairs at 0.8: %zu, at 0.9: %zu; near-copy match rate %.2f excluded, "
                  "independent version rate %.2f kept",
                  p8, p9, dup_c.match_rate, dup_b.match_rate)};
}

Outcome llm_contract() {
  std::vector<std::string> problems;
  const json g = load_data("llm_prompt_golden.json");
  const auto p = build_prompt(g.at("reference").get<std::string>(), g.at("prediction").get<std::string>());
  if (p.system != g.at("system").get<std::string>() || p.user != g.at("user").get<std::string>()) {
    problems.push_back("prompt bytes");
  }
  std::vector<JudgePair> pairs;
  for (int i = 0; i < 4; ++i) {
    pairs.push_back({"p" + std::to_string(i), "ref " + std::to_string(i), "pred " + std::to_string(i)});
  }
  TempDir dir;
  JudgeConfig cfg;
  cfg.api_key = "k";
  cfg.initial_backoff = std::chrono::milliseconds(1);

  {
    MockChatServer server([](const json&, int) { return MockReply{200, "{'score': 3}"}; });
    cfg.endpoint = server.endpoint();
    cfg.cache_path = dir / "cache.jsonl";
    const auto r1 = judge_corpus(pairs, cfg);
    const auto r2 = judge_corpus(pairs, cfg);
    if (r1.mean != 3.0) problems.push_back("mean");
    if (r2.network_calls != 0 || server.calls() != 4) problems.push_back("cache");
    cfg.cache_path.reset();
  }
  {
    MockChatServer server([](const json&, int call) {
      return call == 0 ? MockReply{503, ""} : MockReply{200, "```\n{'score': 1}\n```"};
    });
    cfg.endpoint = server.endpoint();
    cfg.concurrency_limit = 1;
    const std::vector<JudgePair> one(pairs.begin(), pairs.begin() + 1);
    const auto r = judge_corpus(one, cfg);
    if (r.scores.size() != 1 || r.scores[0].attempts != 2 || r.scores[0].score != 1) {
      problems.push_back("retry");
    }
  }
  {
    MockChatServer server([](const json& req, int) {
      const std::string user = req.at("messages")[1].at("content").get<std::string>();
      return MockReply{200, user.find("pred 2") != std::string::npos ? "five" : "{'score': 4}"};
    });
    cfg.endpoint = server.endpoint();
    cfg.max_retries = 1;
    const auto r = judge_corpus(pairs, cfg);
    if (r.failures.size() != 1 || r.failures[0].pair_id != "p2" || r.mean != 4.0) {
      problems.push_back("parse-failure");
    }
  }
  std::string detail = problems.empty() ? "golden prompt, mean, retry, parse failure, cache" : "";
  for (const auto& s : problems) detail += s + " ";
  return {problems.empty(), detail};
}

Outcome pseudo_ad_contract() {
  CaptionRecord c;
  c.video_id = "v";
  c.text = "a man is pouring wine";
  c.subject_span = ByteSpan{0, 5};
  c.unique_name_count = 1;
  c.has_face_frame = true;
  const std::vector<CaptionRecord> caps{c};
  const std::vector<std::string> pinned{"John"};
  const bool example = transform_video(caps, pinned, 0, {}).pseudo_ads.at(0).text == "John is pouring wine";

  std::map<std::string, std::vector<CaptionRecord>> videos;
  auto crowded = c;
  crowded.video_id = "crowded";
  crowded.unique_name_count = 6;
  videos["crowded"] = {crowded};
  auto fine = c;
  fine.video_id = "fine";
  fine.unique_name_count = 5;
  videos["fine"] = {fine};
  const auto filtered = filter_videos(videos);
  const bool filter_ok = filtered.kept == std::vector<std::string>{"fine"} &&
                         filtered.tally.at(RejectReason::too_many_names) == 1;

  SplitMix rng(1000);
  const std::vector<std::string> pool{"John", "Mary", "Ava", "Liam", "Noah", "Emma", "Zoe"};
  const std::vector<std::string> subjects{"a man", "she", "the woman", "he", "the chef"};
  std::size_t uniform_videos = 0;
  for (int v = 0; v < 1000; ++v) {
    std::vector<CaptionRecord> vc;
    const std::size_t n = 1 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      CaptionRecord r;
      r.video_id = "video" + std::to_string(v);
      const std::string subj = subjects[rng.below(subjects.size())];
      r.text = subj + " does step " + std::to_string(i);
      r.subject_span = ByteSpan{0, subj.size()};
      vc.push_back(r);
    }
    const auto t = transform_video(vc, pool, 99, {});
    bool same = t.pseudo_ads.size() == n;
    for (const auto& ad : t.pseudo_ads) {
      same &= ad.name == t.bank.name && ad.text.rfind(t.bank.name, 0) == 0;
    }
    if (same) ++uniform_videos;
  }
  return {example && filter_ok && uniform_videos == 1000,
          fmt("example %s, >5 names %s, uniform name in %zu/1000 videos", example ? "exact" : "WRONG",
              filter_ok ? "rejected" : "NOT rejected", uniform_videos)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"synthetic alignment recovery", synthetic_alignment},
      {"gate fidelity", gate_fidelity},
      {"WER stage-1 oracle equivalence", wer_oracle_equivalence},
      {"RANSAC robustness", ransac_robustness},
      {"CRITIC exactness", critic_exactness},
      {"CIDEr cross-oracle", cider_cross_oracle},
      {"Recall@k/N statistics", recall_statistics},
      {"inter-rater protocol", interrater_protocol},
      {"LLM-judge contract", llm_contract},
      {"pseudo-AD determinism and filters", pseudo_ad_contract},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-36s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
