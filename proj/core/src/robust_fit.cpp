#include "adtk/robust_fit.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtk/error.hpp"

namespace adtk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Consensus {
  std::vector<std::size_t> inliers;
  double weight = -1.0;
  double mse = std::numeric_limits<double>::infinity();
};

double weighted_mse(std::span<const MatchPoint> points, std::span<const std::size_t> idx,
                    double slope, double intercept) {
  double num = 0.0, den = 0.0;
  for (const std::size_t i : idx) {
    const double r = points[i].y - (slope * points[i].x + intercept);
    num += points[i].weight * r * r;
    den += points[i].weight;
  }
  if (den > 0) return num / den;
  // All-zero weights: plain mean.
  num = 0.0;
  for (const std::size_t i : idx) {
    const double r = points[i].y - (slope * points[i].x + intercept);
    num += r * r;
  }
  return idx.empty() ? 0.0 : num / static_cast<double>(idx.size());
}

}  // namespace

bool passes_gates(double slope, double mse, std::size_t inlier_count, const GateParams& gates) {
  return gates.min_slope < slope && slope < gates.max_slope && mse < gates.max_mse &&
         inlier_count >= gates.min_inliers;
}

LineFit weighted_least_squares(std::span<const MatchPoint> points) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    sw += p.weight;
    sx += p.weight * p.x;
    sy += p.weight * p.y;
    sxx += p.weight * p.x * p.x;
    sxy += p.weight * p.x * p.y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(sw > 0) || det == 0.0) throw InvalidArgument("weighted_least_squares: degenerate x");
  const double slope = (sw * sxy - sx * sy) / det;
  return LineFit{slope, (sy - slope * sx) / sw};
}

AlignmentFit ransac_line_fit(std::span<const MatchPoint> points, const RansacParams& params,
                             const GateParams& gates) {
  if (points.size() < 2) throw InvalidArgument("ransac_line_fit: need at least two points");
  if (params.iterations <= 0 || !(params.residual_threshold > 0)) {
    throw InvalidArgument("ransac_line_fit: iterations and residual_threshold must be positive");
  }

  Consensus best;
  std::vector<std::size_t> current;
  const auto n = points.size();
  for (int it = 0; it < params.iterations; ++it) {
    std::mt19937_64 rng(splitmix64(params.seed ^ splitmix64(static_cast<std::uint64_t>(it))));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    const double dx = points[b].x - points[a].x;
    if (dx == 0.0) continue;
    const double slope = (points[b].y - points[a].y) / dx;
    const double intercept = points[a].y - slope * points[a].x;

    current.clear();
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(points[i].y - (slope * points[i].x + intercept)) <= params.residual_threshold) {
        current.push_back(i);
        weight += points[i].weight;
      }
    }
    if (weight < best.weight) continue;
    const double mse = weighted_mse(points, current, slope, intercept);
    if (weight > best.weight || mse < best.mse) {
      best.inliers = current;
      best.weight = weight;
      best.mse = mse;
    }
  }
  if (best.inliers.empty()) {
    throw InvalidArgument("ransac_line_fit: every sampled pair defined a vertical line");
  }

  std::vector<MatchPoint> consensus;
  consensus.reserve(best.inliers.size());
  bool any_weight = false;
  for (const std::size_t i : best.inliers) {
    consensus.push_back(points[i]);
    any_weight = any_weight || points[i].weight > 0;
  }
  if (!any_weight) {
    for (auto& p : consensus) p.weight = 1.0;
  }
  const LineFit line = weighted_least_squares(consensus);

  AlignmentFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.mse = weighted_mse(points, best.inliers, line.slope, line.intercept);
  fit.inlier_count = best.inliers.size();
  fit.total_points = n;
  fit.rng_seed = params.seed;
  fit.accepted = passes_gates(fit.slope, fit.mse, fit.inlier_count, gates);
  return fit;
}

AlignmentFit ransac_line_fit(const MatchPointSet& set, const RansacParams& params,
                             const GateParams& gates) {
  return ransac_line_fit(std::span<const MatchPoint>(set.points), params, gates);
}

TimeMapping to_time_mapping(const AlignmentFit& fit, double seconds_per_frame,
                            double chunk_offset) {
  if (!fit.accepted) throw InvalidArgument("to_time_mapping: fit was rejected by the gates");
  if (fit.slope == 0.0) throw InvalidArgument("to_time_mapping: zero slope");
  if (!(seconds_per_frame > 0)) throw InvalidArgument("to_time_mapping: bad frame duration");
  // y = slope * x + intercept in frames; slope is unitless.
  return TimeMapping{fit.slope, chunk_offset + fit.intercept * seconds_per_frame};
}

nlohmann::json to_json(const AlignmentFit& fit) {
  return nlohmann::json{{"slope", fit.slope},
                        {"intercept_frames", fit.intercept},
                        {"mse", fit.mse},
                        {"inliers", fit.inlier_count},
                        {"total", fit.total_points},
                        {"accepted", fit.accepted},
                        {"seed", fit.rng_seed}};
}

nlohmann::json to_json(const TimeMapping& mapping) {
  return nlohmann::json{{"slope", mapping.slope}, {"intercept_seconds", mapping.intercept}};
}

}  // namespace adtk
