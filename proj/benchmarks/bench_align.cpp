#include <random>

#include <benchmark/benchmark.h>

#include "adtk/audio_align.hpp"
#include "adtk/robust_fit.hpp"

namespace {

adtk::AudioBuffer noise(double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 0.2f);
  adtk::AudioBuffer a;
  a.samples.resize(static_cast<std::size_t>(seconds * adtk::kAnalysisSampleRate));
  for (auto& s : a.samples) s = n(rng);
  return a;
}

void BM_MelSpectrogram(benchmark::State& state) {
  const auto audio = noise(static_cast<double>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(adtk::mel_spectrogram(audio));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(audio.samples.size()));
}
BENCHMARK(BM_MelSpectrogram)->Arg(10)->Arg(60)->Arg(360)->Unit(benchmark::kMillisecond);

void BM_CorrelateWindows(benchmark::State& state) {
  const auto movie = adtk::mel_spectrogram(noise(static_cast<double>(state.range(0)), 2));
  const auto clip = adtk::mel_spectrogram(noise(120.0, 3));
  for (auto _ : state) benchmark::DoNotOptimize(adtk::correlate_windows(movie, clip));
}
BENCHMARK(BM_CorrelateWindows)->Arg(60)->Arg(360)->Unit(benchmark::kMillisecond);

void BM_Ransac(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3750.0);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<adtk::MatchPoint> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = u(rng);
    pts.push_back({x, i % 3 ? 0.959 * x + 3750.0 + n(rng) : 2.0 * u(rng), 1.0});
  }
  for (auto _ : state) benchmark::DoNotOptimize(adtk::ransac_line_fit(pts));
}
BENCHMARK(BM_Ransac)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
