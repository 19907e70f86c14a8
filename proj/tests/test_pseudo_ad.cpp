#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "adtk/error.hpp"
#include "adtk/pseudo_ad.hpp"
#include "support/tempdir.hpp"

using namespace adtk;
using adtk::testing::TempDir;
using nlohmann::json;

namespace {

CaptionRecord caption(std::string video, std::string text, std::optional<ByteSpan> span,
                      int names = 1, bool face = true) {
  CaptionRecord c;
  c.video_id = std::move(video);
  c.text = std::move(text);
  c.end = 1.0;
  c.subject_span = span;
  c.unique_name_count = names;
  c.has_face_frame = face;
  return c;
}

}  // namespace

TEST(ReplaceSubject, WorkedExample) {
  EXPECT_EQ(replace_subject(caption("v", "a man is pouring wine", ByteSpan{0, 5}), "John"),
            "John is pouring wine");
}

TEST(ReplaceSubject, Pronoun) {
  EXPECT_EQ(replace_subject(caption("v", "she stirs the pot", ByteSpan{0, 3}), "John"),
            "John stirs the pot");
}

TEST(ReplaceSubject, MidSentenceSpanKeepsNameCase) {
  EXPECT_EQ(replace_subject(caption("v", "then the chef adds salt", ByteSpan{5, 13}), "mary"),
            "then mary adds salt");
}

TEST(ReplaceSubject, MissingSpanIsAnError) {
  EXPECT_THROW(replace_subject(caption("v", "stir well", std::nullopt), "John"), InvalidArgument);
}

TEST(CaptionJson, ParsesAndValidatesSpans) {
  const json ok = {{"video_id", "v"},       {"text", "a man cuts"},  {"start", 0.0},
                   {"end", 1.0},            {"subject_start", 0},    {"subject_end", 5},
                   {"unique_name_count", 1}, {"has_face_frame", true}};
  EXPECT_EQ(caption_from_json(ok).subject_span, (ByteSpan{0, 5}));
  json bad = ok;
  bad["subject_end"] = 50;
  EXPECT_THROW(caption_from_json(bad), FormatError);
  json missing = ok;
  missing.erase("has_face_frame");
  EXPECT_THROW(caption_from_json(missing), FormatError);
  json none = ok;
  none["subject_start"] = nullptr;
  none["subject_end"] = nullptr;
  EXPECT_FALSE(caption_from_json(none).subject_span.has_value());
}

TEST(TransformVideo, OneNamePerVideo) {
  const std::vector<CaptionRecord> caps{caption("v", "a man is pouring wine", ByteSpan{0, 5}),
                                        caption("v", "he stirs", ByteSpan{0, 2}),
                                        caption("v", "then the man smiles", ByteSpan{5, 12})};
  const std::vector<std::string> pool{"John", "Mary"};
  const std::vector<std::string> others{"v", "w"};
  const auto t = transform_video(caps, pool, 3, others);
  ASSERT_EQ(t.pseudo_ads.size(), 3u);
  for (const auto& ad : t.pseudo_ads) {
    EXPECT_EQ(ad.name, t.bank.name);
    EXPECT_NE(ad.text.find(t.bank.name), std::string::npos);
  }
  EXPECT_EQ(t.bank.portrait_ref, "portraits/v.jpg");
}

TEST(TransformVideo, PinnedNameReproducesWorkedExample) {
  const std::vector<CaptionRecord> caps{caption("v", "a man is pouring wine", ByteSpan{0, 5})};
  const std::vector<std::string> pool{"John"};
  const auto t = transform_video(caps, pool, 0, {});
  ASSERT_EQ(t.pseudo_ads.size(), 1u);
  EXPECT_EQ(t.pseudo_ads[0].text, "John is pouring wine");
}

TEST(TransformVideo, UniformityHoldsAcrossSeeds) {
  std::vector<CaptionRecord> caps;
  for (int i = 0; i < 6; ++i) {
    caps.push_back(caption("v", "she does step " + std::to_string(i), ByteSpan{0, 3}));
  }
  caps.push_back(caption("v", "no subject here", std::nullopt));
  const std::vector<std::string> pool{"John", "Mary", "Ava", "Liam", "Noah"};
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = transform_video(caps, pool, seed, {});
    EXPECT_EQ(t.skipped, 1u);
    for (const auto& ad : t.pseudo_ads) EXPECT_EQ(ad.name, t.pseudo_ads.front().name);
    seen.insert(t.bank.name);
    EXPECT_EQ(transform_video(caps, pool, seed, {}).bank.name, t.bank.name);
  }
  EXPECT_GT(seen.size(), 1u);
}

TEST(TransformVideo, DistractorsAreDistinctAndExcludeThePortrait) {
  const std::vector<CaptionRecord> caps{caption("v0", "she cuts", ByteSpan{0, 3})};
  const std::vector<std::string> pool{"John"};
  const std::vector<std::string> others{"v0", "v1", "v2", "v3", "v4", "v5"};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto t = transform_video(caps, pool, seed, others);
    ASSERT_EQ(t.bank.distractor_refs.size(), 4u);
    const std::set<std::string> uniq(t.bank.distractor_refs.begin(), t.bank.distractor_refs.end());
    EXPECT_EQ(uniq.size(), 4u);
    EXPECT_FALSE(uniq.contains(t.bank.portrait_ref));
  }
}

TEST(TransformVideo, FewerCandidatesThanK) {
  const std::vector<CaptionRecord> caps{caption("v0", "she cuts", ByteSpan{0, 3})};
  const std::vector<std::string> pool{"John"};
  const std::vector<std::string> others{"v0", "v1", "v2"};
  EXPECT_EQ(transform_video(caps, pool, 1, others).bank.distractor_refs.size(), 2u);
}

TEST(TransformVideo, EmptyPoolIsAnError) {
  const std::vector<CaptionRecord> caps{caption("v0", "she cuts", ByteSpan{0, 3})};
  EXPECT_THROW(transform_video(caps, {}, 1, {}), InvalidArgument);
}

TEST(FilterVideos, EachFilterRejectsWithItsReason) {
  std::map<std::string, std::vector<CaptionRecord>> videos;
  videos["names"] = {caption("names", "she cuts", ByteSpan{0, 3}, 6)};
  videos["nosubj"] = {caption("nosubj", "cut it", std::nullopt)};
  videos["noface"] = {caption("noface", "she cuts", ByteSpan{0, 3}, 1, false)};
  videos["good"] = {caption("good", "she cuts", ByteSpan{0, 3}, 5)};
  const auto r = filter_videos(videos);
  EXPECT_EQ(r.kept, std::vector<std::string>{"good"});
  EXPECT_EQ(r.tally.at(RejectReason::too_many_names), 1u);
  EXPECT_EQ(r.tally.at(RejectReason::no_subject), 1u);
  EXPECT_EQ(r.tally.at(RejectReason::no_face), 1u);
}

TEST(FilterVideos, FirstFailingFilterWins) {
  std::map<std::string, std::vector<CaptionRecord>> videos;
  videos["v"] = {caption("v", "cut it", std::nullopt, 7, false)};
  const auto r = filter_videos(videos);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].second, RejectReason::too_many_names);
}

TEST(NamePool, SkipsBlankLinesAndDuplicates) {
  TempDir dir;
  const auto names = load_name_pool(dir.write("n.txt", "John\n\n Mary \nJohn\n"));
  EXPECT_EQ(names, (std::vector<std::string>{"John", "Mary"}));
}
