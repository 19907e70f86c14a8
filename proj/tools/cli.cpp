#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "adtk/error.hpp"
#include "adtk/parallel.hpp"

namespace adtk::cli {

using nlohmann::json;

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << doc.dump(2) << '\n';
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

namespace {

// Numbers and booleans are kept typed; everything else stays a string.
json scalar(const std::string& text) {
  if (text == "true" || text == "false") return text == "true";
  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_number()) return j;
  return text;
}

json option_value(const CLI::Option& opt) {
  std::vector<std::string> values = opt.results();
  if (values.empty()) {
    std::string d = opt.get_default_str();
    if (d.empty()) return nullptr;
    if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
    values.clear();
    std::stringstream ss(d);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(item);
  }
  if (opt.get_expected_max() > 1) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(scalar(v));
    return arr;
  }
  return scalar(values.front());
}

void collect(const CLI::App& app, json& out) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    out[name] = option_value(*opt);
  }
}

}  // namespace

json resolved_config(const CLI::App& app, const CLI::App& sub) {
  json out = json::object();
  collect(app, out);
  json cmd = json::object();
  collect(sub, cmd);
  out[sub.get_name()] = cmd;
  return out;
}

namespace {

void add_align_params(CLI::App& cmd, AlignOptions& o) {
  cmd.add_option("--wer-threshold", o.wer_threshold, "Stage-1 acceptance: max window WER")
      ->capture_default_str();
  cmd.add_option("--chunk-margin", o.chunk_margin, "Seconds of movie audio on each side of the clip")
      ->capture_default_str();
  cmd.add_option("--window-frames", o.window_frames, "Movie correlation window, in mel frames")
      ->capture_default_str();
  cmd.add_option("--residual-threshold", o.residual_threshold, "RANSAC inlier residual, frames")
      ->capture_default_str();
  cmd.add_option("--iterations", o.iterations, "RANSAC iterations")->capture_default_str();
  cmd.add_option("--min-slope", o.min_slope, "Gate: slope must exceed this")->capture_default_str();
  cmd.add_option("--max-slope", o.max_slope, "Gate: slope must stay below this")
      ->capture_default_str();
  cmd.add_option("--max-mse", o.max_mse, "Gate: inlier MSE must stay below this (frames^2)")
      ->capture_default_str();
  cmd.add_option("--min-inliers", o.min_inliers, "Gate: minimum inlier points")
      ->capture_default_str();
  cmd.add_option("--n-fft", o.n_fft, "FFT size and Hann window length")->capture_default_str();
  cmd.add_option("--n-mels", o.n_mels, "Mel bands")->capture_default_str();
}

void add_metric_params(CLI::App& cmd, EvalOptions& o) {
  cmd.add_option("--metrics", o.metrics, "Subset of critic,cider,recall,llm")
      ->delimiter(',')
      ->check(CLI::IsMember({"critic", "cider", "recall", "llm"}))
      ->capture_default_str();
  cmd.add_option("--cast", o.cast, "JSON object mapping movie_id to its cast list");
  cmd.add_option("--coref-clusters", o.coref_clusters,
                 "JSONL coreference clusters from an external tool (default: rule-based)");
  cmd.add_option("--recall-k", o.recall_k, "k values for Recall@k/N")
      ->delimiter(',')
      ->capture_default_str();
  cmd.add_option("--recall-n", o.recall_n, "Neighbour window N for Recall@k/N")
      ->capture_default_str();
  cmd.add_option("--recall-window", o.recall_window, "Neighbour window placement")
      ->check(CLI::IsMember({"centered", "causal"}))
      ->capture_default_str();
  cmd.add_option("--judge-endpoint", o.judge_endpoint, "Chat-completions URL for the LLM judge");
  cmd.add_option("--judge-model", o.judge_model, "Judge model name")->capture_default_str();
  cmd.add_option("--judge-retries", o.judge_retries, "Retries per pair")->capture_default_str();
  cmd.add_option("--judge-concurrency", o.judge_concurrency, "Requests in flight")
      ->capture_default_str();
  cmd.add_option("--judge-timeout", o.judge_timeout, "Request timeout, seconds")
      ->capture_default_str();
  cmd.add_option("--judge-cache", o.judge_cache, "Append-only judge cache file");
}

int dispatch(CLI::App& app, CLI::App* sub, const CommonOptions& common, AlignOptions& align,
             EvalOptions& eval, InterraterOptions& interrater, PseudoAdOptions& pseudoad,
             std::ostream& out) {
  const json config = resolved_config(app, *sub);
  const std::string name = sub->get_name();
  if (name == "align") return run_align(align, common, config, out);
  if (name == "eval") return run_eval(eval, common, config, out);
  if (name == "interrater") return run_interrater(interrater, common, config, out);
  return run_pseudoad(pseudoad, common, config, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio-description alignment and evaluation toolkit", "adtk"};
  app.set_config("--config", "", "INI/TOML file; [align], [eval], ... sections set command keys");
  app.require_subcommand(1, 1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--jobs", common.jobs, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--dry-run", common.dry_run, "Validate config and inputs, do no work")
      ->capture_default_str();

  AlignOptions align;
  CLI::App* align_cmd = app.add_subcommand("align", "Align clips to movies and emit AD datasets");
  align_cmd->fallthrough();
  align_cmd->add_option("--manifest", align.manifest, "JSON manifest of movies and clips")
      ->required();
  add_align_params(*align_cmd, align);
  align_cmd->add_option("--eval-count", align.eval_count,
                        "Movies without an explicit split that go to eval")
      ->capture_default_str();
  align_cmd->add_flag("--guess-narrator", align.guess_narrator,
                      "Experimental: take the longest-speaking label as the narrator")
      ->capture_default_str();
  align_cmd->add_flag("--dump-scatter", align.dump_scatter,
                      "Write each clip's correlation scatter as CSV")
      ->capture_default_str();

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predicted ADs against references");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--pred", eval.pred, "Predictions, JSONL")->required();
  eval_cmd->add_option("--ref", eval.ref, "References, JSONL, index-aligned")->required();
  add_metric_params(*eval_cmd, eval);

  InterraterOptions interrater;
  CLI::App* ir_cmd =
      app.add_subcommand("interrater", "Compare two AD versions of the same movies");
  ir_cmd->fallthrough();
  ir_cmd->add_option("--manifest", interrater.manifest, "JSON manifest of version pairs")
      ->required();
  ir_cmd->add_option("--tiou", interrater.tiou, "tIoU thresholds for pairing")
      ->delimiter(',')
      ->capture_default_str();
  ir_cmd->add_option("--duplicate-threshold", interrater.duplicate_threshold,
                     "Exact-match count above which versions count as duplicates")
      ->capture_default_str();
  add_metric_params(*ir_cmd, interrater.eval);
  add_align_params(*ir_cmd, interrater.align);

  PseudoAdOptions pseudoad;
  CLI::App* pa_cmd = app.add_subcommand("pseudoad", "Turn annotated captions into pseudo-AD");
  pa_cmd->fallthrough();
  pa_cmd->add_option("--captions", pseudoad.captions, "Caption annotations, JSONL")->required();
  pa_cmd->add_option("--names", pseudoad.names, "Name pool, one name per line")->required();
  pa_cmd->add_option("--distractors", pseudoad.distractors, "Distractor portraits per bank")
      ->capture_default_str();
  pa_cmd->add_option("--portrait-pattern", pseudoad.portrait_pattern,
                     "Portrait path; {video_id} is substituted")
      ->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (common.jobs == 0) common.jobs = default_jobs();

  try {
    return dispatch(app, app.get_subcommands().front(), common, align, eval, interrater, pseudoad,
                    out);
  } catch (const IoError& e) {
    err << "adtk: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "adtk: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "adtk: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "adtk: malformed input: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace adtk::cli
