#include <ostream>

#include "adtk/error.hpp"
#include "cli.hpp"
#include "metrics.hpp"

namespace adtk::cli {

using nlohmann::json;

int run_eval(const EvalOptions& opt, const CommonOptions& common, const json& config,
             std::ostream& out) {
  validate_metric_options(opt);
  const std::vector<EvalItem> pred = read_eval_items(opt.pred);
  const std::vector<EvalItem> ref = read_eval_items(opt.ref);
  if (pred.size() != ref.size()) {
    throw InvalidArgument("predictions (" + std::to_string(pred.size()) + ") and references (" +
                          std::to_string(ref.size()) + ") are not index-aligned");
  }
  CastMap casts;
  if (opt.cast) casts = load_cast_map(*opt.cast);

  json report{{"config", config}, {"n_items", pred.size()}};
  if (common.dry_run) {
    report["dry_run"] = true;
    out << report.dump(2) << '\n';
    return kOk;
  }
  report["metrics"] = compute_metrics(opt, pred, ref, casts, common.jobs);
  std::filesystem::create_directories(common.out_dir);
  write_json_file(common.out_dir / "eval_report.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

}  // namespace adtk::cli
