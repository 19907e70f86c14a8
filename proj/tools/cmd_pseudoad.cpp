#include <fstream>
#include <ostream>

#include "adtk/error.hpp"
#include "adtk/parallel.hpp"
#include "adtk/pseudo_ad.hpp"
#include "cli.hpp"

namespace adtk::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int run_pseudoad(const PseudoAdOptions& opt, const CommonOptions& common, const json& config,
                 std::ostream& out) {
  if (opt.portrait_pattern.empty()) throw InvalidArgument("--portrait-pattern is empty");
  const std::vector<CaptionRecord> captions = read_captions(opt.captions);
  const std::vector<std::string> names = load_name_pool(opt.names);
  if (names.empty()) throw InvalidArgument("name pool '" + opt.names.string() + "' is empty");

  const auto videos = group_by_video(captions);
  const FilterResult filtered = filter_videos(videos);

  json rejected_tally = json::object();
  for (const auto& [reason, n] : filtered.tally) rejected_tally[std::string(to_string(reason))] = n;
  json rejected = json::array();
  for (const auto& [video, reason] : filtered.rejected) {
    rejected.push_back({{"video_id", video}, {"reason", to_string(reason)}});
  }
  json stats{{"config", config},
             {"captions", captions.size()},
             {"videos", videos.size()},
             {"kept", filtered.kept.size()},
             {"rejected", rejected_tally},
             {"rejected_videos", rejected}};

  if (common.dry_run) {
    stats["dry_run"] = true;
    out << stats.dump(2) << '\n';
    return kOk;
  }

  const BankOptions bank_options{opt.portrait_pattern, opt.distractors};
  std::vector<TransformedVideo> transformed(filtered.kept.size());
  parallel_for(filtered.kept.size(), common.jobs, [&](std::size_t i) {
    const auto& video = filtered.kept[i];
    transformed[i] =
        transform_video(videos.at(video), names, common.seed, filtered.kept, bank_options);
  });

  fs::create_directories(common.out_dir);
  std::ofstream ads(common.out_dir / "pseudo_ad.jsonl", std::ios::binary);
  std::ofstream banks(common.out_dir / "banks.jsonl", std::ios::binary);
  if (!ads || !banks) throw IoError("cannot write into '" + common.out_dir.string() + "'");
  std::size_t emitted = 0, skipped = 0;
  std::map<std::string, std::size_t> categories;
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    for (const auto& ad : transformed[i].pseudo_ads) ads << to_json(ad).dump() << '\n';
    banks << to_json(transformed[i].bank).dump() << '\n';
    emitted += transformed[i].pseudo_ads.size();
    skipped += transformed[i].skipped;
    const auto& caps = videos.at(filtered.kept[i]);
    const auto cat = std::find_if(caps.begin(), caps.end(),
                                  [](const CaptionRecord& c) { return c.category.has_value(); });
    ++categories[cat == caps.end() ? std::string("uncategorized") : *cat->category];
  }
  stats["pseudo_ads"] = emitted;
  stats["captions_without_subject"] = skipped;
  stats["categories"] = categories;
  write_json_file(common.out_dir / "stats.json", stats);
  out << stats.dump(2) << '\n';
  return kOk;
}

}  // namespace adtk::cli
