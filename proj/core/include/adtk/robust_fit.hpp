#pragma once

// Weighted RANSAC line fitting over the correlation scatter and the gates that
// decide whether a clip alignment is trustworthy.

#include <cstdint>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "adtk/audio_align.hpp"

namespace adtk {

struct RansacParams {
  double residual_threshold = 50.0;  // frames, absolute vertical residual
  int iterations = 2000;
  std::uint64_t seed = 0;
};

// Gates on the fitted line y = slope * x + intercept (movie frame vs clip
// frame). All comparisons are strict.
struct GateParams {
  double min_slope = 0.8;
  double max_slope = 1.25;
  double max_mse = 100.0;  // frames^2
  std::size_t min_inliers = 10;
};

struct AlignmentFit {
  double slope = 0;
  double intercept = 0;  // movie frames
  double mse = 0;        // weighted mean squared residual over inliers, frames^2
  std::size_t inlier_count = 0;
  std::size_t total_points = 0;
  bool accepted = false;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const AlignmentFit&, const AlignmentFit&) = default;
};

bool passes_gates(double slope, double mse, std::size_t inlier_count, const GateParams& gates);

// Each iteration samples two points with distinct x from a generator seeded by
// (seed, iteration), scores the exact line by total inlier weight (ties: lower
// weighted MSE, then earlier iteration), and the winning consensus set is
// refit by weighted least squares. Throws InvalidArgument with fewer than two
// points or when every sampled pair was vertical.
AlignmentFit ransac_line_fit(std::span<const MatchPoint> points, const RansacParams& params = {},
                             const GateParams& gates = {});
AlignmentFit ransac_line_fit(const MatchPointSet& set, const RansacParams& params = {},
                             const GateParams& gates = {});

struct LineFit {
  double slope = 0;
  double intercept = 0;
};

// Closed-form weighted least squares; throws InvalidArgument when the weighted
// x variance is zero.
LineFit weighted_least_squares(std::span<const MatchPoint> points);

// Clip time <-> movie time in seconds: t_movie = slope * t_clip + intercept.
struct TimeMapping {
  double slope = 1.0;
  double intercept = 0.0;  // seconds

  double to_clip(double t_movie) const { return (t_movie - intercept) / slope; }
  double to_movie(double t_clip) const { return slope * t_clip + intercept; }
};

// Converts an accepted frame-domain fit. chunk_offset is the movie time of
// movie frame 0. Throws InvalidArgument for rejected fits or zero slope.
TimeMapping to_time_mapping(const AlignmentFit& fit, double seconds_per_frame,
                            double chunk_offset = 0.0);

nlohmann::json to_json(const AlignmentFit& fit);
nlohmann::json to_json(const TimeMapping& mapping);

}  // namespace adtk
