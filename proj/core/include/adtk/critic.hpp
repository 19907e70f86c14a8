#pragma once

// Character-identification scoring. AD sentences are grouped into a paragraph
// prefixed with the cast list, coreference clusters are computed over it, and
// each AD gets the set of cast characters it refers to. Predicted and
// reference sets are compared per AD by intersection over union.

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adtk/corpus.hpp"
#include "adtk/error.hpp"
#include "adtk/pseudo_ad.hpp"

namespace adtk {

struct Paragraph {
  std::string text;
  ByteSpan cast_span;                   // "c1, c2, ..., cn."
  std::vector<ByteSpan> sentence_spans;  // one per AD, in order
};

// Cast sentence followed by the AD texts, all joined with single spaces.
Paragraph build_paragraph(std::span<const std::string> ads, const CastList& cast);

struct Mention {
  ByteSpan span;
  std::string text;
};

struct CorefCluster {
  std::vector<Mention> mentions;
};

// Lower-case third-person pronouns that never name an identity.
const std::set<std::string>& identity_pronouns();
bool is_pronoun(std::string_view word);

class ResolverError : public Error {
 public:
  using Error::Error;
};

class CorefResolver {
 public:
  virtual ~CorefResolver() = default;
  // Must be safe to call concurrently.
  virtual std::vector<CorefCluster> resolve(std::string_view paragraph_id,
                                            const Paragraph& paragraph,
                                            const CastList& cast) const = 0;
};

// Deterministic rules: cast names are matched by full name or by an
// unambiguous first/last token (case-insensitive, possessive 's allowed);
// he/she/him/her/his/hers attach to the nearest preceding name mention in
// the same or previous AD sentence. One cluster per mentioned character.
class RuleBasedResolver final : public CorefResolver {
 public:
  std::vector<CorefCluster> resolve(std::string_view paragraph_id, const Paragraph& paragraph,
                                    const CastList& cast) const override;
};

// Clusters produced by an external coreference tool. File format, one JSON
// record per line:
//   {"paragraph_id": "...", "clusters": [[[begin, end], ...], ...]}
// with byte offsets into the paragraph built by build_paragraph().
class ClusterFileResolver final : public CorefResolver {
 public:
  explicit ClusterFileResolver(const std::filesystem::path& path);
  explicit ClusterFileResolver(std::map<std::string, std::vector<std::vector<ByteSpan>>> clusters);

  std::vector<CorefCluster> resolve(std::string_view paragraph_id, const Paragraph& paragraph,
                                    const CastList& cast) const override;

 private:
  std::map<std::string, std::vector<std::vector<ByteSpan>>, std::less<>> clusters_;
};

// Character names (as spelled in the cast list) attached to one AD.
using IdentitySet = std::set<std::string>;

// Keeps clusters naming exactly one cast character. Each AD sentence gets the
// characters of kept clusters that have a mention inside its span; pronoun
// mentions count once their cluster is named, but never name it.
std::vector<IdentitySet> resolve_identities(const Paragraph& paragraph, const CastList& cast,
                                            std::span<const CorefCluster> clusters);
std::vector<IdentitySet> resolve_identities(std::string_view paragraph_id,
                                            const Paragraph& paragraph, const CastList& cast,
                                            const CorefResolver& resolver);

struct CriticEntry {
  std::size_t ad_index = 0;
  double iou = 0;
  bool skipped = false;  // reference set empty
};

struct CriticReport {
  std::vector<CriticEntry> per_ad;
  double aggregate = 0;  // mean of non-skipped ious; 0 when all are skipped
  std::size_t scored = 0;

  double percent() const { return aggregate * 100.0; }
};

double set_iou(const IdentitySet& a, const IdentitySet& b);

// Throws InvalidArgument when the sequences differ in length.
CriticReport critic_score(std::span<const IdentitySet> pred, std::span<const IdentitySet> ref);

// Pools the non-skipped entries of several reports into one mean.
CriticReport combine_reports(std::span<const CriticReport> reports);

// Full pipeline for one movie. Paragraph ids are "<movie_id>/pred" and
// "<movie_id>/ref".
CriticReport critic_for_movie(std::string_view movie_id, std::span<const std::string> pred_ads,
                              std::span<const std::string> ref_ads, const CastList& cast,
                              const CorefResolver& resolver);

nlohmann::json to_json(const CriticReport& report);

}  // namespace adtk
