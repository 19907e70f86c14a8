#include "adtk/critic.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <nlohmann/json.hpp>

#include "adtk/text.hpp"

namespace adtk {

using nlohmann::json;

namespace {

const std::set<std::string>& singular_pronouns() {
  static const std::set<std::string> kSet{"he", "she", "him", "her", "his", "hers"};
  return kSet;
}

bool is_word_byte(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) || c == '\'' || c == '-';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Drops a trailing possessive ('s, ', or the typographic ’s).
std::string_view strip_possessive(std::string_view w) {
  for (std::string_view suffix : {std::string_view("'s"), std::string_view("\xE2\x80\x99s"),
                                  std::string_view("'")}) {
    if (w.size() > suffix.size() && w.ends_with(suffix)) return w.substr(0, w.size() - suffix.size());
  }
  return w;
}

struct Token {
  ByteSpan span;
  std::string key;  // lower-cased, possessive stripped
  std::size_t key_len = 0;  // bytes of the original token covered by key
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view word = text.substr(i, j - i);
    while (!word.empty() && (word.front() == '\'' || word.front() == '-')) {
      word.remove_prefix(1);
      ++i;
    }
    if (!word.empty()) {
      const std::string_view stem = strip_possessive(word);
      out.push_back(Token{ByteSpan{i, j}, lower(stem), stem.size()});
    }
    i = j;
  }
  return out;
}

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(name)) out.push_back(t.key);
  return out;
}

// Surface-form lookup of cast members: full names first, then first/last
// tokens of multi-token names when they identify a single member.
class NameIndex {
 public:
  explicit NameIndex(const CastList& cast) {
    std::map<std::string, std::set<std::size_t>> aliases;
    for (std::size_t i = 0; i < cast.size(); ++i) {
      auto toks = name_tokens(cast.members()[i].character);
      if (toks.empty()) continue;
      if (toks.size() > 1) {
        aliases[toks.front()].insert(i);
        aliases[toks.back()].insert(i);
      }
      full_.emplace_back(std::move(toks), i);
    }
    std::stable_sort(full_.begin(), full_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    for (const auto& [key, owners] : aliases) {
      if (owners.size() == 1) alias_.emplace(key, *owners.begin());
    }
    // A single-token full name outranks another member's alias.
    for (const auto& [toks, idx] : full_) {
      if (toks.size() == 1) alias_[toks.front()] = idx;
    }
  }

  // Longest match starting at tokens[pos]: (member, tokens consumed).
  std::optional<std::pair<std::size_t, std::size_t>> match(const std::vector<Token>& tokens,
                                                           std::size_t pos) const {
    for (const auto& [toks, idx] : full_) {
      if (toks.size() < 2 || pos + toks.size() > tokens.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < toks.size() && ok; ++k) ok = tokens[pos + k].key == toks[k];
      if (ok) return std::pair{idx, toks.size()};
    }
    if (auto it = alias_.find(tokens[pos].key); it != alias_.end()) return std::pair{it->second, 1};
    return std::nullopt;
  }

  // Whole-mention lookup used for external clusters.
  std::optional<std::size_t> lookup(std::string_view surface) const {
    const auto tokens = tokenize(surface);
    if (tokens.empty()) return std::nullopt;
    const auto m = match(tokens, 0);
    if (m && m->second == tokens.size()) return m->first;
    return std::nullopt;
  }

 private:
  std::vector<std::pair<std::vector<std::string>, std::size_t>> full_;
  std::map<std::string, std::size_t> alias_;
};

// Index of the AD sentence containing the span, -1 for the cast sentence or
// anything outside the AD spans.
int sentence_of(const Paragraph& p, ByteSpan s) {
  for (std::size_t i = 0; i < p.sentence_spans.size(); ++i) {
    const auto& sent = p.sentence_spans[i];
    if (s.begin >= sent.begin && s.end <= sent.end) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

const std::set<std::string>& identity_pronouns() {
  static const std::set<std::string> kSet{"he",   "she",  "they", "him",  "her",
                                          "them", "his",  "hers", "their"};
  return kSet;
}

bool is_pronoun(std::string_view word) { return identity_pronouns().contains(lower(trim(word))); }

Paragraph build_paragraph(std::span<const std::string> ads, const CastList& cast) {
  if (cast.empty()) throw InvalidArgument("build_paragraph: empty cast list");
  if (ads.empty()) throw InvalidArgument("build_paragraph: no AD sentences");
  Paragraph p;
  const auto names = cast.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) p.text += ", ";
    p.text += names[i];
  }
  p.text += '.';
  p.cast_span = ByteSpan{0, p.text.size()};
  for (const auto& ad : ads) {
    p.text += ' ';
    const std::size_t begin = p.text.size();
    p.text += trim(ad);
    p.sentence_spans.push_back(ByteSpan{begin, p.text.size()});
  }
  return p;
}

std::vector<CorefCluster> RuleBasedResolver::resolve(std::string_view, const Paragraph& paragraph,
                                                     const CastList& cast) const {
  const NameIndex index(cast);
  const auto tokens = tokenize(paragraph.text);
  std::vector<std::vector<ByteSpan>> spans(cast.size());
  struct NameHit {
    std::size_t member;
    int sentence;
  };
  std::vector<NameHit> history;

  for (std::size_t pos = 0; pos < tokens.size();) {
    const Token& tok = tokens[pos];
    if (auto m = index.match(tokens, pos)) {
      const auto& last = tokens[pos + m->second - 1];
      const ByteSpan span{tok.span.begin, last.span.begin + last.key_len};
      spans[m->first].push_back(span);
      history.push_back(NameHit{m->first, sentence_of(paragraph, span)});
      pos += m->second;
      continue;
    }
    if (singular_pronouns().contains(tok.key)) {
      const int sent = sentence_of(paragraph, tok.span);
      if (sent >= 0) {
        for (auto it = history.rbegin(); it != history.rend(); ++it) {
          if (it->sentence < 0 || it->sentence < sent - 1) break;
          spans[it->member].push_back(tok.span);
          break;
        }
      }
    }
    ++pos;
  }

  std::vector<CorefCluster> out;
  for (const auto& member_spans : spans) {
    if (member_spans.empty()) continue;
    CorefCluster c;
    for (const auto& s : member_spans) {
      c.mentions.push_back(Mention{s, paragraph.text.substr(s.begin, s.end - s.begin)});
    }
    out.push_back(std::move(c));
  }
  return out;
}

ClusterFileResolver::ClusterFileResolver(
    std::map<std::string, std::vector<std::vector<ByteSpan>>> clusters)
    : clusters_(clusters.begin(), clusters.end()) {}

ClusterFileResolver::ClusterFileResolver(const std::filesystem::path& path) {
  std::vector<json> records;
  try {
    records = read_jsonl(path);
  } catch (const Error& e) {
    throw ResolverError(std::string("cluster file: ") + e.what());
  }
  for (const auto& rec : records) {
    try {
      auto& slot = clusters_[rec.at("paragraph_id").get<std::string>()];
      for (const auto& cluster : rec.at("clusters")) {
        std::vector<ByteSpan> spans;
        for (const auto& m : cluster) {
          spans.push_back(ByteSpan{m.at(0).get<std::size_t>(), m.at(1).get<std::size_t>()});
        }
        slot.push_back(std::move(spans));
      }
    } catch (const json::exception& e) {
      throw ResolverError(path.string() + ": malformed cluster record: " + e.what());
    }
  }
}

std::vector<CorefCluster> ClusterFileResolver::resolve(std::string_view paragraph_id,
                                                       const Paragraph& paragraph,
                                                       const CastList&) const {
  const auto it = clusters_.find(paragraph_id);
  if (it == clusters_.end()) {
    throw ResolverError("no clusters for paragraph '" + std::string(paragraph_id) + "'");
  }
  std::vector<CorefCluster> out;
  for (const auto& spans : it->second) {
    CorefCluster c;
    for (const auto& s : spans) {
      if (s.end <= s.begin || s.end > paragraph.text.size()) {
        throw ResolverError("mention span out of range in paragraph '" +
                            std::string(paragraph_id) + "'");
      }
      c.mentions.push_back(Mention{s, paragraph.text.substr(s.begin, s.end - s.begin)});
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<IdentitySet> resolve_identities(const Paragraph& paragraph, const CastList& cast,
                                            std::span<const CorefCluster> clusters) {
  const NameIndex index(cast);
  std::vector<IdentitySet> out(paragraph.sentence_spans.size());
  for (const auto& cluster : clusters) {
    std::set<std::size_t> members;
    for (const auto& m : cluster.mentions) {
      if (is_pronoun(m.text)) continue;
      if (auto idx = index.lookup(m.text)) members.insert(*idx);
    }
    if (members.size() != 1) continue;
    const std::string& name = cast.members()[*members.begin()].character;
    for (const auto& m : cluster.mentions) {
      const int sent = sentence_of(paragraph, m.span);
      if (sent >= 0) out[static_cast<std::size_t>(sent)].insert(name);
    }
  }
  return out;
}

std::vector<IdentitySet> resolve_identities(std::string_view paragraph_id,
                                            const Paragraph& paragraph, const CastList& cast,
                                            const CorefResolver& resolver) {
  const auto clusters = resolver.resolve(paragraph_id, paragraph, cast);
  return resolve_identities(paragraph, cast, clusters);
}

double set_iou(const IdentitySet& a, const IdentitySet& b) {
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.contains(x) ? 1 : 0;
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

CriticReport critic_score(std::span<const IdentitySet> pred, std::span<const IdentitySet> ref) {
  if (pred.size() != ref.size()) {
    throw InvalidArgument("critic_score: " + std::to_string(pred.size()) + " predictions vs " +
                          std::to_string(ref.size()) + " references");
  }
  CriticReport report;
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CriticEntry e{i, 0.0, ref[i].empty()};
    if (!e.skipped) {
      e.iou = set_iou(pred[i], ref[i]);
      sum += e.iou;
      ++report.scored;
    }
    report.per_ad.push_back(e);
  }
  report.aggregate = report.scored ? sum / static_cast<double>(report.scored) : 0.0;
  return report;
}

CriticReport combine_reports(std::span<const CriticReport> reports) {
  CriticReport out;
  double sum = 0;
  for (const auto& r : reports) {
    for (const auto& e : r.per_ad) {
      CriticEntry copy = e;
      copy.ad_index = out.per_ad.size();
      out.per_ad.push_back(copy);
      if (!e.skipped) {
        sum += e.iou;
        ++out.scored;
      }
    }
  }
  out.aggregate = out.scored ? sum / static_cast<double>(out.scored) : 0.0;
  return out;
}

CriticReport critic_for_movie(std::string_view movie_id, std::span<const std::string> pred_ads,
                              std::span<const std::string> ref_ads, const CastList& cast,
                              const CorefResolver& resolver) {
  if (pred_ads.size() != ref_ads.size()) {
    throw InvalidArgument("critic: prediction and reference counts differ for '" +
                          std::string(movie_id) + "'");
  }
  const Paragraph pred = build_paragraph(pred_ads, cast);
  const Paragraph ref = build_paragraph(ref_ads, cast);
  const auto pred_sets =
      resolve_identities(std::string(movie_id) + "/pred", pred, cast, resolver);
  const auto ref_sets = resolve_identities(std::string(movie_id) + "/ref", ref, cast, resolver);
  return critic_score(pred_sets, ref_sets);
}

json to_json(const CriticReport& report) {
  json per_ad = json::array();
  for (const auto& e : report.per_ad) {
    per_ad.push_back(json{{"ad_index", e.ad_index}, {"iou", e.iou}, {"skipped", e.skipped}});
  }
  return json{{"value", report.aggregate},
              {"value_x100", report.percent()},
              {"scored", report.scored},
              {"per_ad", per_ad}};
}

}  // namespace adtk
