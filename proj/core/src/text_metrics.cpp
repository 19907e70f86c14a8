#include "adtk/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "adtk/error.hpp"
#include "adtk/text.hpp"

namespace adtk {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// n-gram key -> count, one map per order (index = n - 1).
using NgramCounts = std::vector<std::unordered_map<std::string, double>>;

NgramCounts count_ngrams(const std::vector<std::string>& words, int max_n) {
  NgramCounts out(static_cast<std::size_t>(max_n));
  for (int n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string key = words[i];
      for (int k = 1; k < n; ++k) {
        key.push_back('\x1f');
        key += words[i + k];
      }
      out[n - 1][key] += 1.0;
    }
  }
  return out;
}

struct TfidfVec {
  NgramCounts vec;
  std::vector<double> norm;
  double length = 0;
};

}  // namespace

CiderResult cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references,
                  const CiderOptions& options) {
  if (candidates.empty()) throw InvalidArgument("cider: empty corpus");
  if (candidates.size() != references.size()) {
    throw InvalidArgument("cider: candidate and reference counts differ");
  }
  if (options.max_n < 1) throw InvalidArgument("cider: max_n must be >= 1");
  const auto words = [&](const std::string& s) {
    return options.normalize ? normalize_words(s) : split_ws(s);
  };

  std::vector<NgramCounts> cand;
  std::vector<std::vector<NgramCounts>> refs;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) throw InvalidArgument("cider: item without references");
    cand.push_back(count_ngrams(words(candidates[i]), options.max_n));
    auto& group = refs.emplace_back();
    for (const auto& r : references[i]) group.push_back(count_ngrams(words(r), options.max_n));
  }

  std::unordered_map<std::string, double> df;
  for (const auto& group : refs) {
    std::unordered_set<std::string> seen;
    for (const auto& r : group) {
      for (const auto& order : r) {
        for (const auto& [g, _] : order) seen.insert(g);
      }
    }
    for (const auto& g : seen) df[g] += 1.0;
  }
  const double ref_len = std::log(static_cast<double>(refs.size()));
  const auto n = static_cast<std::size_t>(options.max_n);

  const auto to_vec = [&](const NgramCounts& counts) {
    TfidfVec v{NgramCounts(n), std::vector<double>(n, 0.0), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      for (const auto& [g, tf] : counts[k]) {
        const auto it = df.find(g);
        const double d = std::log(std::max(1.0, it == df.end() ? 0.0 : it->second));
        const double w = tf * (ref_len - d);
        v.vec[k][g] = w;
        v.norm[k] += w * w;
        if (k == 1) v.length += tf;
      }
      v.norm[k] = std::sqrt(v.norm[k]);
    }
    return v;
  };

  CiderResult out;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const TfidfVec hyp = to_vec(cand[i]);
    std::vector<double> score(n, 0.0);
    for (const auto& r : refs[i]) {
      const TfidfVec ref = to_vec(r);
      const double delta = hyp.length - ref.length;
      const double penalty = std::exp(-(delta * delta) / (2.0 * options.sigma * options.sigma));
      for (std::size_t k = 0; k < n; ++k) {
        double val = 0.0;
        for (const auto& [g, w] : hyp.vec[k]) {
          const auto it = ref.vec[k].find(g);
          const double rw = it == ref.vec[k].end() ? 0.0 : it->second;
          val += std::min(w, rw) * rw;
        }
        if (hyp.norm[k] != 0.0 && ref.norm[k] != 0.0) val /= hyp.norm[k] * ref.norm[k];
        score[k] += val * penalty;
      }
    }
    double mean = 0.0;
    for (const double s : score) mean += s;
    mean /= static_cast<double>(n);
    out.per_item.push_back(mean / static_cast<double>(refs[i].size()) * 10.0);
  }
  double total = 0.0;
  for (const double s : out.per_item) total += s;
  out.corpus = total / static_cast<double>(out.per_item.size());
  return out;
}

TfidfScorer::TfidfScorer(std::span<const std::string> corpus) {
  std::unordered_map<std::string, double> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& [g, _] : vectorize(doc)) seen.insert(g);
    for (const auto& g : seen) df[g] += 1.0;
  }
  const double n = static_cast<double>(corpus.size());
  for (const auto& [g, d] : df) idf_[g] = std::log((1.0 + n) / (1.0 + d)) + 1.0;
  unseen_idf_ = std::log(1.0 + n) + 1.0;
}

std::unordered_map<std::string, double> TfidfScorer::vectorize(std::string_view text) const {
  const auto words = normalize_words(text);
  std::unordered_map<std::string, double> tf;
  for (std::size_t i = 0; i < words.size(); ++i) {
    tf[words[i]] += 1.0;
    if (i + 1 < words.size()) tf[words[i] + '\x1f' + words[i + 1]] += 1.0;
  }
  if (idf_.empty()) return tf;
  for (auto& [g, w] : tf) {
    const auto it = idf_.find(g);
    w *= it == idf_.end() ? unseen_idf_ : it->second;
  }
  return tf;
}

double TfidfScorer::operator()(std::string_view a, std::string_view b) const {
  const auto va = vectorize(a);
  const auto vb = vectorize(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [g, w] : va) {
    na += w * w;
    if (auto it = vb.find(g); it != vb.end()) dot += w * it->second;
  }
  for (const auto& [g, w] : vb) nb += w * w;
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

std::pair<std::size_t, std::size_t> recall_window(std::size_t i, std::size_t size, std::size_t n,
                                                  RecallWindow mode) {
  const auto half = static_cast<std::ptrdiff_t>(mode == RecallWindow::centered ? (n - 1) / 2 : n - 1);
  const auto max_start = static_cast<std::ptrdiff_t>(size - n);
  const auto start =
      std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - half, 0, max_start);
  return {static_cast<std::size_t>(start), static_cast<std::size_t>(start) + n};
}

RecallResult recall_at_k(std::span<const std::string> predictions,
                         std::span<const std::string> references, int k, int n,
                         const TextScorer& scorer, RecallWindow mode) {
  if (predictions.size() != references.size()) {
    throw InvalidArgument("recall_at_k: prediction and reference counts differ");
  }
  if (k < 1 || n <= k) throw InvalidArgument("recall_at_k: need 1 <= k < N");
  if (references.size() < static_cast<std::size_t>(n)) {
    throw InvalidArgument("recall_at_k: " + std::to_string(references.size()) +
                          " references, fewer than N = " + std::to_string(n));
  }
  RecallResult out;
  out.count = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto [lo, hi] = recall_window(i, references.size(), static_cast<std::size_t>(n), mode);
    const double truth = scorer(predictions[i], references[i]);
    int at_least_as_good = 0;
    for (std::size_t j = lo; j < hi; ++j) {
      if (j != i && scorer(predictions[i], references[j]) >= truth) ++at_least_as_good;
    }
    if (at_least_as_good < k) ++out.hits;
  }
  out.percent = 100.0 * static_cast<double>(out.hits) / static_cast<double>(out.count);
  return out;
}

double tiou(Interval a, Interval b) {
  if (!(a.end > a.start) || !(b.end > b.start)) {
    spdlog::warn("tiou: degenerate interval [{}, {}] vs [{}, {}]", a.start, a.end, b.start, b.end);
    return 0.0;
  }
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = (a.end - a.start) + (b.end - b.start) - inter;
  return inter / uni;
}

std::vector<InterRaterPair> pair_inter_rater(const TranscriptTrack& track_a,
                                             const TranscriptTrack& track_b, double threshold) {
  struct Candidate {
    double iou;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  const auto& a = track_a.segments();
  const auto& b = track_b.segments();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size() && b[j].start_ms < a[i].end_ms; ++j) {
      if (b[j].end_ms <= a[i].start_ms) continue;
      const double v = tiou({a[i].start(), a[i].end()}, {b[j].start(), b[j].end()});
      if (v >= threshold && v > 0.0) candidates.push_back({v, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  std::vector<bool> used_a(a.size()), used_b(b.size());
  std::vector<Candidate> chosen;
  for (const auto& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Candidate& x, const Candidate& y) { return x.i < y.i; });
  std::vector<InterRaterPair> out;
  out.reserve(chosen.size());
  for (const auto& c : chosen) out.push_back(InterRaterPair{a[c.i], b[c.j], c.iou});
  return out;
}

void write_pairs(const std::filesystem::path& path, std::span<const InterRaterPair> pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto clean = [](std::string s) {
    std::replace(s.begin(), s.end(), '\t', ' ');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
  };
  out << "tiou\tstart_a\tend_a\ttext_a\tstart_b\tend_b\ttext_b\n";
  for (const auto& p : pairs) {
    out << p.tiou << '\t' << p.ad_a.start() << '\t' << p.ad_a.end() << '\t' << clean(p.ad_a.text)
        << '\t' << p.ad_b.start() << '\t' << p.ad_b.end() << '\t' << clean(p.ad_b.text) << '\n';
  }
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

DuplicateCheck detect_duplicate_versions(const TranscriptTrack& track_a,
                                         const TranscriptTrack& track_b,
                                         std::size_t duplicate_count_threshold) {
  const bool a_smaller = track_a.size() <= track_b.size();
  const auto& small = a_smaller ? track_a : track_b;
  const auto& large = a_smaller ? track_b : track_a;
  std::unordered_set<std::string> texts;
  for (const auto& seg : large.segments()) texts.insert(normalize_text(seg.text));
  DuplicateCheck out;
  for (const auto& seg : small.segments()) {
    const auto t = normalize_text(seg.text);
    if (!t.empty() && texts.contains(t)) ++out.exact_matches;
  }
  out.match_rate =
      small.empty() ? 0.0 : static_cast<double>(out.exact_matches) / static_cast<double>(small.size());
  out.duplicate = out.exact_matches > duplicate_count_threshold;
  return out;
}

nlohmann::json to_json(const MetricRecord& r) {
  return nlohmann::json{
      {"metric", r.metric}, {"value", r.value}, {"n_items", r.n_items}, {"params", r.params}};
}

}  // namespace adtk
