#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adtk/corpus.hpp"
#include "cli.hpp"

namespace adtk::cli {

// One AD sentence of a prediction or reference file.
struct EvalItem {
  std::string movie_id;
  std::string text;
  std::optional<double> start;
  std::optional<double> end;
};

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path);

using CastMap = std::map<std::string, CastList>;

// {movie_id: [names or cast records]}.
CastMap load_cast_map(const std::filesystem::path& path);

// Validates metric names and parameters without computing anything.
// have_cast: cast lists come from somewhere other than --cast.
void validate_metric_options(const EvalOptions& opt, bool have_cast = false);

// Computes the selected metrics over index-aligned predictions and
// references. Returns {"<metric>": {...}} with only the selected metrics.
nlohmann::json compute_metrics(const EvalOptions& opt, const std::vector<EvalItem>& pred,
                               const std::vector<EvalItem>& ref, const CastMap& casts,
                               unsigned jobs);

}  // namespace adtk::cli
