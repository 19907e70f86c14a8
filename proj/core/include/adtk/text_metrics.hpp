#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtk/corpus.hpp"

namespace adtk {

// ---------------------------------------------------------------------------
// CIDEr-D

struct CiderOptions {
  int max_n = 4;
  double sigma = 6.0;
  // Apply normalize_text() before splitting on whitespace.
  bool normalize = true;
};

struct CiderResult {
  double corpus = 0;  // mean of per_item
  std::vector<double> per_item;
};

// TF-IDF n-gram vectors with document frequencies over the reference groups,
// clipped cosine similarity per n, Gaussian length penalty, mean over n,
// averaged over references, scaled by 10. Matches the widely used COCO
// caption evaluation implementation, including its use of the bigram count
// as the length term.
CiderResult cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references,
                  const CiderOptions& options = {});

// ---------------------------------------------------------------------------
// Recall@k/N

// Similarity of (prediction, reference); larger is more similar.
using TextScorer = std::function<double(std::string_view, std::string_view)>;

// Cosine similarity of TF-IDF vectors over unigrams and bigrams of normalized
// text. IDF is fit on `corpus`: log((1 + N) / (1 + df)) + 1.
class TfidfScorer {
 public:
  explicit TfidfScorer(std::span<const std::string> corpus);
  double operator()(std::string_view a, std::string_view b) const;

 private:
  std::unordered_map<std::string, double> vectorize(std::string_view text) const;

  std::unordered_map<std::string, double> idf_;
  double unseen_idf_ = 1.0;
};

struct RecallResult {
  double percent = 0;
  std::size_t hits = 0;
  std::size_t count = 0;
};

// centered: N consecutive references starting at clamp(i - (N - 1) / 2, 0, size - N).
// causal: the N references ending at i, shifted right near the start.
enum class RecallWindow { centered, causal };

std::pair<std::size_t, std::size_t> recall_window(std::size_t i, std::size_t size, std::size_t n,
                                                  RecallWindow mode = RecallWindow::centered);

// predictions[i] pairs with references[i]; references are in temporal order.
// A hit needs fewer than k neighbors scoring >= the true reference, so ties
// count against the hit. Throws InvalidArgument unless 1 <= k < n <= size.
RecallResult recall_at_k(std::span<const std::string> predictions,
                         std::span<const std::string> references, int k, int n,
                         const TextScorer& scorer,
                         RecallWindow mode = RecallWindow::centered);

// ---------------------------------------------------------------------------
// Temporal IoU and inter-rater pairing

struct Interval {
  double start = 0;
  double end = 0;
};

// |a ∩ b| / |a ∪ b|; zero-length or inverted intervals give 0 with a logged
// warning.
double tiou(Interval a, Interval b);

struct InterRaterPair {
  TimedSegment ad_a;
  TimedSegment ad_b;
  double tiou = 0;
};

// Greedy one-to-one matching in descending tIoU (ties by index in a, then b),
// keeping pairs with tiou >= threshold. Output is ordered by ad_a.
std::vector<InterRaterPair> pair_inter_rater(const TranscriptTrack& track_a,
                                             const TranscriptTrack& track_b, double threshold);

void write_pairs(const std::filesystem::path& path, std::span<const InterRaterPair> pairs);

struct DuplicateCheck {
  bool duplicate = false;
  double match_rate = 0;
  std::size_t exact_matches = 0;
};

// Counts segments of the smaller track whose normalized text occurs verbatim
// in the other; duplicate iff that count exceeds duplicate_count_threshold.
DuplicateCheck detect_duplicate_versions(const TranscriptTrack& track_a,
                                         const TranscriptTrack& track_b,
                                         std::size_t duplicate_count_threshold = 1);

// ---------------------------------------------------------------------------

struct MetricRecord {
  std::string metric;
  double value = 0;
  std::size_t n_items = 0;
  nlohmann::json params = nlohmann::json::object();
};

nlohmann::json to_json(const MetricRecord& record);

}  // namespace adtk
