#include "support/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace adtk::testing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Raised-cosine fade of `ramp` samples at both ends.
double envelope(std::size_t i, std::size_t len, std::size_t ramp) {
  if (len <= 2 * ramp) return 1.0;
  if (i < ramp) return 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
  if (i >= len - ramp) return 0.5 - 0.5 * std::cos(std::numbers::pi * (len - i) / ramp);
  return 1.0;
}

}  // namespace

AudioBuffer synth_movie(double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int sr = kAnalysisSampleRate;
  const auto total = static_cast<std::size_t>(seconds * sr);
  std::vector<double> x(total, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& s : x) s = 0.003 * gauss(rng);

  std::size_t pos = 0;
  while (pos < total) {
    const auto len = static_cast<std::size_t>(uniform(rng, 0.1, 0.4) * sr);
    const auto gap = static_cast<std::size_t>(uniform(rng, 0.0, 0.08) * sr);
    const double amp = uniform(rng, 0.05, 0.3);
    const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
    const std::size_t end = std::min(total, pos + len);
    const std::size_t ramp = sr / 200;
    if (kind == 0) {
      const double f = std::exp(uniform(rng, std::log(120.0), std::log(5000.0)));
      const double phase = uniform(rng, 0, kTwoPi);
      for (std::size_t i = pos; i < end; ++i) {
        x[i] += amp * envelope(i - pos, end - pos, ramp) * std::sin(kTwoPi * f * i / sr + phase);
      }
    } else if (kind == 1) {
      const double f0 = std::exp(uniform(rng, std::log(100.0), std::log(800.0)));
      const double r1 = uniform(rng, 1.2, 2.1), r2 = uniform(rng, 2.3, 3.9);
      for (std::size_t i = pos; i < end; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double v = std::sin(kTwoPi * f0 * t) + 0.6 * std::sin(kTwoPi * f0 * r1 * t) +
                         0.4 * std::sin(kTwoPi * f0 * r2 * t);
        x[i] += amp * 0.5 * envelope(i - pos, end - pos, ramp) * v;
      }
    } else {
      // One-pole filtered noise with a random cutoff.
      const double a = uniform(rng, 0.05, 0.95);
      double state = 0.0;
      for (std::size_t i = pos; i < end; ++i) {
        state = a * state + (1.0 - a) * gauss(rng);
        x[i] += amp * 2.0 * envelope(i - pos, end - pos, ramp) * state;
      }
    }
    pos = end + gap;
  }

  AudioBuffer out;
  out.sample_rate = sr;
  out.samples.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    out.samples[i] = static_cast<float>(std::clamp(x[i], -1.0, 1.0));
  }
  return out;
}

TranscriptTrack overlay_ad_bursts(AudioBuffer& audio, int count, std::uint64_t seed,
                                  const std::string& source_id) {
  std::mt19937_64 rng(seed);
  const int sr = audio.sample_rate;
  const double total = audio.duration();
  std::vector<std::pair<double, double>> placed;
  int guard = 0;
  while (static_cast<int>(placed.size()) < count && guard++ < 100000) {
    const double len = uniform(rng, 1.5, 4.0);
    const double start = uniform(rng, 0.0, total - len);
    const bool clash = std::any_of(placed.begin(), placed.end(), [&](const auto& p) {
      return start < p.second + 0.5 && p.first < start + len + 0.5;
    });
    if (!clash) placed.emplace_back(start, start + len);
  }
  std::sort(placed.begin(), placed.end());

  std::vector<TimedSegment> segs;
  WordSource words(50, seed ^ 0x5eedULL);
  for (const auto& [a, b] : placed) {
    const double f0_base = uniform(rng, 100.0, 220.0);
    const double wobble = uniform(rng, 2.0, 5.0);
    const auto i0 = static_cast<std::size_t>(a * sr);
    const auto i1 = std::min(audio.samples.size(), static_cast<std::size_t>(b * sr));
    double phase = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      const double t = static_cast<double>(i - i0) / sr;
      const double f0 = f0_base * (1.0 + 0.08 * std::sin(kTwoPi * wobble * t));
      phase += kTwoPi * f0 / sr;
      double v = 0.0;
      for (int h = 1; h <= 12; ++h) {
        // Crude formant emphasis around 500 Hz and 1500 Hz.
        const double fh = f0 * h;
        const double g = std::exp(-std::pow((fh - 500.0) / 300.0, 2)) +
                         0.6 * std::exp(-std::pow((fh - 1500.0) / 400.0, 2)) + 0.05;
        v += g * std::sin(h * phase);
      }
      const double syllable = 0.6 + 0.4 * std::sin(kTwoPi * 4.0 * t);
      const double mixed = audio.samples[i] + 0.25 * syllable *
                                                  envelope(i - i0, i1 - i0, sr / 100) * v;
      audio.samples[i] = static_cast<float>(std::clamp(mixed, -1.0, 1.0));
    }
    segs.push_back(TimedSegment::from_seconds(words.sentence(4, 10), a, b, "SPEAKER_00"));
  }
  return TranscriptTrack(source_id, TrackKind::ad_narration, std::move(segs));
}

AudioBuffer warp_clip(const AudioBuffer& movie, double start, double duration, double slope) {
  const int sr = movie.sample_rate;
  const auto n = static_cast<std::size_t>(duration * sr);
  AudioBuffer out;
  out.sample_rate = sr;
  out.samples.resize(n);
  const auto last = static_cast<double>(movie.samples.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = std::clamp((start + slope * static_cast<double>(i) / sr) * sr, 0.0, last);
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    const double a = movie.samples[k];
    const double b = k + 1 < movie.samples.size() ? movie.samples[k + 1] : a;
    out.samples[i] = static_cast<float>(a + frac * (b - a));
  }
  return out;
}

std::string WordSource::word() {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%04zu",
                std::uniform_int_distribution<std::size_t>(0, vocab_ - 1)(rng_));
  return buf;
}

std::string WordSource::sentence(std::size_t min_words, std::size_t max_words) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(min_words, max_words)(rng_);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += word();
  }
  return s;
}

TranscriptTrack synth_subtitles(double seconds, std::uint64_t seed, const std::string& source_id) {
  WordSource words(800, seed);
  std::vector<TimedSegment> segs;
  double t = uniform(words.rng(), 0.2, 2.0);
  while (t + 1.5 < seconds) {
    const double len = uniform(words.rng(), 1.0, 2.5);
    segs.push_back(TimedSegment::from_seconds(words.sentence(4, 9), t, t + len));
    t += len + uniform(words.rng(), 0.5, 1.5);
  }
  return TranscriptTrack(source_id, TrackKind::dialogue, std::move(segs));
}

TranscriptTrack clip_subtitles(const TranscriptTrack& movie, double start, double duration,
                               double slope, const std::string& source_id) {
  std::vector<TimedSegment> segs;
  const double movie_end = start + slope * duration;
  for (const auto& s : movie.segments()) {
    if (s.start() < start || s.end() > movie_end) continue;
    segs.push_back(TimedSegment::from_seconds(s.text, (s.start() - start) / slope,
                                              (s.end() - start) / slope));
  }
  return TranscriptTrack(source_id, TrackKind::dialogue, std::move(segs));
}

}  // namespace adtk::testing
