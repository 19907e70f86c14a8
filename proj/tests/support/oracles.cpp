#include "support/oracles.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <Eigen/Dense>

namespace adtk::testing {

std::vector<std::string> oracle_tokens(const std::string& text) {
  std::string s;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) {
      s += ' ';
    } else {
      s += static_cast<char>(std::tolower(u));
    }
  }
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::size_t oracle_levenshtein(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return d[a.size()][b.size()];
}

double oracle_wer(const std::string& hypothesis, const std::string& reference) {
  const auto ref = oracle_tokens(reference);
  return static_cast<double>(oracle_levenshtein(oracle_tokens(hypothesis), ref)) /
         static_cast<double>(ref.size());
}

OracleScan oracle_locate(const TranscriptTrack& clip, const TranscriptTrack& movie) {
  std::string reference;
  for (const auto& s : clip.segments()) reference += s.text + " ";
  OracleScan best{0, 1e300};
  for (std::size_t i = 0; i + clip.size() <= movie.size(); ++i) {
    std::string hyp;
    for (std::size_t k = i; k < i + clip.size(); ++k) hyp += movie[k].text + " ";
    const double w = oracle_wer(hyp, reference);
    if (w < best.wer) best = OracleScan{i, w};
  }
  return best;
}

std::vector<OracleMatch> oracle_correlate(const MelSpectrogram& movie, const MelSpectrogram& clip,
                                          int window) {
  std::vector<OracleMatch> out;
  const long bins = movie.frames.rows();
  for (long y = 0; y + window <= movie.frames.cols(); y += window) {
    bool masked = false;
    for (long k = 0; k < window; ++k) {
      double s = 0;
      for (long b = 0; b < bins; ++b) s += std::abs(movie.frames(b, y + k));
      if (s == 0) masked = true;
    }
    if (masked) continue;
    OracleMatch best{y, 0, -1.0};
    for (long x = 0; x + window <= clip.frames.cols(); ++x) {
      double c = 0;
      for (long k = 0; k < window; ++k) {
        for (long b = 0; b < bins; ++b) c += clip.frames(b, x + k) * movie.frames(b, y + k);
      }
      if (c > best.correlation) best = OracleMatch{y, x, c};
    }
    out.push_back(best);
  }
  return out;
}

OracleLine oracle_wls(const std::vector<MatchPoint>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(points[i].weight);
    a(i, 0) = sw * points[i].x;
    a(i, 1) = sw;
    y(i) = sw * points[i].y;
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(y);
  return OracleLine{sol(0), sol(1)};
}

std::uint64_t SplitMix::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

}  // namespace adtk::testing
