#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace CLI {
class App;
}

namespace adtk::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2 };

struct CommonOptions {
  unsigned jobs = 0;  // 0: available parallelism
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  bool dry_run = false;
};

// Every option of `app` and `sub` with its effective value (command line,
// then config file, then default).
nlohmann::json resolved_config(const CLI::App& app, const CLI::App& sub);

struct AlignOptions {
  std::filesystem::path manifest;
  double wer_threshold = 0.8;
  double chunk_margin = 120.0;
  int window_frames = 50;
  double residual_threshold = 50.0;
  int iterations = 2000;
  double min_slope = 0.8;
  double max_slope = 1.25;
  double max_mse = 100.0;
  std::size_t min_inliers = 10;
  int n_fft = 1024;
  int n_mels = 64;
  std::size_t eval_count = 0;
  bool guess_narrator = false;
  bool dump_scatter = false;
};

struct EvalOptions {
  std::filesystem::path pred;
  std::filesystem::path ref;
  std::vector<std::string> metrics{"critic", "cider", "recall"};
  std::optional<std::filesystem::path> cast;
  std::optional<std::filesystem::path> coref_clusters;
  std::vector<int> recall_k{1};
  int recall_n = 5;
  std::string recall_window = "centered";
  std::string judge_endpoint;
  std::string judge_model = "gpt-3.5-turbo";
  int judge_retries = 3;
  unsigned judge_concurrency = 4;
  double judge_timeout = 60.0;
  std::optional<std::filesystem::path> judge_cache;
};

struct InterraterOptions {
  std::filesystem::path manifest;
  std::vector<double> tiou{0.8, 0.9};
  std::size_t duplicate_threshold = 1;
  EvalOptions eval;  // metric selection and metric parameters
  AlignOptions align;  // alignment parameters for version B onto A
};

struct PseudoAdOptions {
  std::filesystem::path captions;
  std::filesystem::path names;
  std::size_t distractors = 4;
  std::string portrait_pattern = "portraits/{video_id}.jpg";
};

int run_align(const AlignOptions& opt, const CommonOptions& common, const nlohmann::json& config,
              std::ostream& out);
int run_eval(const EvalOptions& opt, const CommonOptions& common, const nlohmann::json& config,
             std::ostream& out);
int run_interrater(const InterraterOptions& opt, const CommonOptions& common,
                   const nlohmann::json& config, std::ostream& out);
int run_pseudoad(const PseudoAdOptions& opt, const CommonOptions& common,
                 const nlohmann::json& config, std::ostream& out);

// Parses arguments (argv[0] is the program name) and dispatches. Library
// errors are mapped to exit codes: InvalidArgument/FormatError and usage
// errors give kConfigError, IoError gives kIoError.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Helpers shared by the commands.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::filesystem::path& p);

}  // namespace adtk::cli
