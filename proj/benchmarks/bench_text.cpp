#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "adtk/text_align.hpp"
#include "adtk/text_metrics.hpp"

namespace {

std::string sentence(std::mt19937_64& rng, int words) {
  std::uniform_int_distribution<int> w(0, 499);
  std::string s;
  for (int i = 0; i < words; ++i) s += (i ? " w" : "w") + std::to_string(w(rng));
  return s;
}

adtk::TranscriptTrack track(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<adtk::TimedSegment> segs;
  for (std::size_t i = 0; i < n; ++i) {
    segs.push_back(adtk::TimedSegment::from_seconds(sentence(rng, 7), 3.0 * i, 3.0 * i + 2));
  }
  return adtk::TranscriptTrack("t", adtk::TrackKind::dialogue, segs);
}

void BM_LocateClip(benchmark::State& state) {
  const auto movie = track(static_cast<std::size_t>(state.range(0)), 1);
  std::vector<adtk::TimedSegment> clip_segs(movie.segments().begin() + 100,
                                            movie.segments().begin() + 140);
  const adtk::TranscriptTrack clip("c", adtk::TrackKind::dialogue, clip_segs);
  for (auto _ : state) benchmark::DoNotOptimize(adtk::locate_clip(clip, movie));
}
BENCHMARK(BM_LocateClip)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Cider(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<std::string> cands;
  std::vector<std::vector<std::string>> refs;
  for (int i = 0; i < state.range(0); ++i) {
    cands.push_back(sentence(rng, 10));
    refs.push_back({sentence(rng, 10)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(adtk::cider(cands, refs));
}
BENCHMARK(BM_Cider)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
