#include "adtk/audio_align.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "adtk/error.hpp"
#include "adtk/parallel.hpp"

namespace adtk {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Planner calls are not thread-safe in FFTW; execution on new arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  explicit FftwPlan(int n) {
    std::vector<double> in(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(out);
  }
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

// Index into a reflect-padded signal of length n.
std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void MelConfig::validate() const {
  if (sample_rate <= 0) throw InvalidArgument("mel: sample_rate must be positive");
  if (n_fft < 2 || hop <= 0 || n_mels <= 0) throw InvalidArgument("mel: bad frame geometry");
  if (!(f_min >= 0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw InvalidArgument("mel: need 0 <= f_min < f_max <= sample_rate / 2");
  }
}

Eigen::MatrixXd mel_filterbank(const MelConfig& config) {
  config.validate();
  const int n_freqs = config.n_fft / 2 + 1;
  const double m_min = hz_to_mel(config.f_min);
  const double m_max = hz_to_mel(config.f_max);

  std::vector<double> f_pts(static_cast<std::size_t>(config.n_mels + 2));
  for (int i = 0; i < config.n_mels + 2; ++i) {
    f_pts[i] = mel_to_hz(m_min + (m_max - m_min) * i / (config.n_mels + 1));
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_freqs, config.n_mels);
  for (int f = 0; f < n_freqs; ++f) {
    const double hz = (config.sample_rate / 2.0) * f / (n_freqs - 1);
    for (int m = 0; m < config.n_mels; ++m) {
      const double down = (hz - f_pts[m]) / (f_pts[m + 1] - f_pts[m]);
      const double up = (f_pts[m + 2] - hz) / (f_pts[m + 2] - f_pts[m + 1]);
      fb(f, m) = std::max(0.0, std::min(down, up));
    }
  }
  return fb;
}

MelSpectrogram mel_power_spectrogram(const AudioBuffer& audio, const MelConfig& config) {
  config.validate();
  if (audio.sample_rate != config.sample_rate) {
    throw InvalidArgument("mel_spectrogram: expected " + std::to_string(config.sample_rate) +
                          " Hz audio, got " + std::to_string(audio.sample_rate));
  }
  if (audio.samples.empty()) throw InvalidArgument("mel_spectrogram: empty audio");

  const auto n = static_cast<std::int64_t>(audio.samples.size());
  const int n_fft = config.n_fft;
  const int n_freqs = n_fft / 2 + 1;
  const std::int64_t pad = n_fft / 2;
  const Eigen::Index frames = static_cast<Eigen::Index>(n / config.hop + 1);

  std::vector<double> window(static_cast<std::size_t>(n_fft));
  for (int i = 0; i < n_fft; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n_fft);
  }
  const Eigen::MatrixXd fb = mel_filterbank(config);

  // Power spectrum, one column per frame.
  Eigen::MatrixXd power(n_freqs, frames);
  const FftwPlan plan(n_fft);
  std::vector<double> buf(static_cast<std::size_t>(n_fft));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(n_freqs));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::int64_t origin = static_cast<std::int64_t>(t) * config.hop - pad;
    for (int i = 0; i < n_fft; ++i) {
      buf[i] = window[i] * audio.samples[reflect_index(origin + i, n)];
    }
    fftw_execute_dft_r2c(plan.plan, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    for (int f = 0; f < n_freqs; ++f) power(f, t) = std::norm(spec[f]);
  }

  MelSpectrogram out;
  out.frames = fb.transpose() * power;
  out.sample_rate = config.sample_rate;
  out.hop = config.hop;
  out.normalized = false;
  return out;
}

void normalize_frames(MelSpectrogram& spec) {
  for (Eigen::Index t = 0; t < spec.frames.cols(); ++t) {
    const double norm = spec.frames.col(t).norm();
    if (norm > 0) spec.frames.col(t) /= norm;
  }
  spec.normalized = true;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& config) {
  MelSpectrogram spec = mel_power_spectrogram(audio, config);
  normalize_frames(spec);
  return spec;
}

MelSpectrogram mask_ad_regions(const MelSpectrogram& spec, const TranscriptTrack& ad_track,
                               double chunk_offset) {
  if (ad_track.kind() != TrackKind::ad_narration && !ad_track.empty()) {
    throw InvalidArgument("mask_ad_regions: track '" + ad_track.source_id() +
                          "' is not an AD narration track");
  }
  MelSpectrogram out = spec;
  const std::int64_t total = out.frames.cols();
  const auto offset_samples = static_cast<std::int64_t>(std::llround(chunk_offset * spec.sample_rate));
  for (const auto& seg : ad_track.segments()) {
    // ms -> samples is exact whenever the rate is a multiple of 1000.
    const std::int64_t s = seg.start_ms * spec.sample_rate / 1000 - offset_samples;
    const std::int64_t e = seg.end_ms * spec.sample_rate / 1000 - offset_samples;
    const std::int64_t first = std::clamp<std::int64_t>(floor_div(s, spec.hop), 0, total);
    const std::int64_t last = std::clamp<std::int64_t>(floor_div(e, spec.hop), 0, total);
    if (last > first) out.frames.middleCols(first, last - first).setZero();
  }
  return out;
}

MatchPointSet correlate_windows(const MelSpectrogram& movie_spec, const MelSpectrogram& clip_spec,
                                int window_frames, unsigned jobs) {
  if (window_frames <= 0) throw InvalidArgument("correlate_windows: window_frames must be positive");
  if (!movie_spec.normalized || !clip_spec.normalized) {
    throw InvalidArgument("correlate_windows: spectrograms must be normalized");
  }
  if (movie_spec.n_mels() != clip_spec.n_mels()) {
    throw InvalidArgument("correlate_windows: mel bin counts differ");
  }
  const Eigen::Index w = window_frames;
  const Eigen::Index clip_len = clip_spec.num_frames();
  if (clip_len < w) {
    throw InvalidArgument("correlate_windows: clip has " + std::to_string(clip_len) +
                          " frames, shorter than one window of " + std::to_string(w));
  }

  const Eigen::Index num_windows = movie_spec.num_frames() / w;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < num_windows; ++k) {
    const auto block = movie_spec.frames.middleCols(k * w, w);
    bool has_zero_frame = false;
    for (Eigen::Index c = 0; c < w && !has_zero_frame; ++c) {
      has_zero_frame = (block.col(c).array() == 0.0).all();
    }
    if (!has_zero_frame) kept.push_back(k);
  }

  MatchPointSet out;
  out.window_frames = window_frames;
  if (kept.empty()) return out;

  const Eigen::MatrixXd clip_t = clip_spec.frames.transpose();
  const Eigen::Index positions = clip_len - w + 1;
  out.matches.resize(kept.size());
  parallel_for(kept.size(), jobs, [&](std::size_t i) {
    const Eigen::Index y0 = kept[i] * w;
    // sim(x, k) = <clip frame x, movie frame y0 + k>
    const Eigen::MatrixXd sim = clip_t * movie_spec.frames.middleCols(y0, w);
    Eigen::Index best_x = 0;
    double best = -1.0;
    for (Eigen::Index x = 0; x < positions; ++x) {
      double c = 0.0;
      for (Eigen::Index k = 0; k < w; ++k) c += sim(x + k, k);
      if (c > best) {
        best = c;
        best_x = x;
      }
    }
    out.matches[i] = WindowMatch{static_cast<int>(y0), static_cast<int>(best_x), best};
  });

  out.points.reserve(out.matches.size() * kScatterSamplesPerMatch);
  for (const auto& m : out.matches) {
    const double weight = std::clamp(m.correlation / window_frames, 0.0, 1.0);
    for (int s = 0; s < kScatterSamplesPerMatch; ++s) {
      const double offset = static_cast<double>(window_frames) * s / (kScatterSamplesPerMatch - 1);
      out.points.push_back(MatchPoint{m.clip_frame + offset, m.movie_frame + offset, weight});
    }
  }
  return out;
}

void write_scatter(const std::filesystem::path& path, const MatchPointSet& set) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "x,y,weight\n";
  for (const auto& p : set.points) out << p.x << ',' << p.y << ',' << p.weight << '\n';
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace adtk
