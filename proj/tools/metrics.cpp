#include "metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "adtk/critic.hpp"
#include "adtk/error.hpp"
#include "adtk/llm_judge.hpp"
#include "adtk/parallel.hpp"
#include "adtk/text_metrics.hpp"

namespace adtk::cli {

using nlohmann::json;

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path) {
  std::vector<EvalItem> out;
  std::size_t line = 0;
  for (const json& j : read_jsonl(path)) {
    ++line;
    const std::string where = path.string() + " record " + std::to_string(line);
    if (!j.is_object() || !j.contains("movie_id") || !j.contains("text")) {
      throw FormatError(where + ": needs movie_id and text");
    }
    EvalItem item;
    item.movie_id = j.at("movie_id").get<std::string>();
    item.text = j.at("text").get<std::string>();
    if (j.contains("start") && !j.at("start").is_null()) item.start = j.at("start").get<double>();
    if (j.contains("end") && !j.at("end").is_null()) item.end = j.at("end").get<double>();
    out.push_back(std::move(item));
  }
  return out;
}

CastMap load_cast_map(const std::filesystem::path& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw FormatError(path.string() + ": expected {movie_id: cast}");
  CastMap out;
  for (const auto& [movie, cast] : doc.items()) out.emplace(movie, cast_from_json(cast).cast);
  return out;
}

void validate_metric_options(const EvalOptions& opt, bool have_cast) {
  static const std::set<std::string> kKnown{"critic", "cider", "recall", "llm"};
  if (opt.metrics.empty()) throw InvalidArgument("--metrics selects nothing");
  for (const auto& m : opt.metrics) {
    if (!kKnown.contains(m)) throw InvalidArgument("unknown metric '" + m + "'");
  }
  const auto wants = [&](const char* m) {
    return std::find(opt.metrics.begin(), opt.metrics.end(), m) != opt.metrics.end();
  };
  if (wants("recall")) {
    if (opt.recall_n < 2) throw InvalidArgument("--recall-n must be >= 2");
    if (opt.recall_k.empty()) throw InvalidArgument("--recall-k is empty");
    for (int k : opt.recall_k) {
      if (k < 1 || k >= opt.recall_n) throw InvalidArgument("--recall-k values must be in [1, N)");
    }
  }
  if (wants("critic") && !opt.cast && !have_cast) throw InvalidArgument("critic needs --cast");
  if (wants("llm")) {
    if (opt.judge_timeout <= 0) throw InvalidArgument("--judge-timeout must be positive");
    JudgeConfig cfg;
    cfg.endpoint = opt.judge_endpoint;
    cfg.model_name = opt.judge_model;
    cfg.max_retries = opt.judge_retries;
    cfg.concurrency_limit = opt.judge_concurrency;
    cfg.validate();
  }
}

namespace {

bool wants(const EvalOptions& opt, std::string_view metric) {
  return std::find(opt.metrics.begin(), opt.metrics.end(), metric) != opt.metrics.end();
}

// Movie id -> item indices, references in temporal order when every one has
// a start time, otherwise in file order.
std::map<std::string, std::vector<std::size_t>> group_items(const std::vector<EvalItem>& ref) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ref.size(); ++i) groups[ref[i].movie_id].push_back(i);
  for (auto& [movie, idx] : groups) {
    const bool timed = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return ref[i].start.has_value();
    });
    if (timed) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return *ref[a].start < *ref[b].start; });
    }
  }
  return groups;
}

json critic_metric(const EvalOptions& opt, const std::vector<EvalItem>& pred,
                   const std::vector<EvalItem>& ref, const CastMap& casts, unsigned jobs) {
  std::unique_ptr<CorefResolver> resolver;
  if (opt.coref_clusters) {
    resolver = std::make_unique<ClusterFileResolver>(*opt.coref_clusters);
  } else {
    resolver = std::make_unique<RuleBasedResolver>();
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ref.size(); ++i) groups[ref[i].movie_id].push_back(i);
  std::vector<std::string> movies;
  for (const auto& [movie, idx] : groups) {
    if (!casts.contains(movie)) throw InvalidArgument("no cast list for movie '" + movie + "'");
    movies.push_back(movie);
  }

  std::vector<CriticReport> reports(movies.size());
  parallel_for(movies.size(), jobs, [&](std::size_t m) {
    std::vector<std::string> p, r;
    for (std::size_t i : groups.at(movies[m])) {
      p.push_back(pred[i].text);
      r.push_back(ref[i].text);
    }
    reports[m] = critic_for_movie(movies[m], p, r, casts.at(movies[m]), *resolver);
  });
  const CriticReport total = combine_reports(reports);
  json per_movie = json::object();
  for (std::size_t m = 0; m < movies.size(); ++m) per_movie[movies[m]] = to_json(reports[m]);
  MetricRecord rec{"critic", total.aggregate, total.scored,
                   {{"resolver", opt.coref_clusters ? "cluster-file" : "rule-based"}}};
  json j = to_json(rec);
  j["percent"] = total.percent();
  j["per_movie"] = per_movie;
  return j;
}

json cider_metric(const std::vector<EvalItem>& pred, const std::vector<EvalItem>& ref) {
  std::vector<std::string> cands;
  std::vector<std::vector<std::string>> refs;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    cands.push_back(pred[i].text);
    refs.push_back({ref[i].text});
  }
  const CiderOptions options;
  const CiderResult res = cider(cands, refs, options);
  json j = to_json(MetricRecord{"cider", res.corpus, pred.size(),
                                {{"max_n", options.max_n}, {"sigma", options.sigma}}});
  j["per_item"] = res.per_item;
  return j;
}

json recall_metric(const EvalOptions& opt, const std::vector<EvalItem>& pred,
                   const std::vector<EvalItem>& ref) {
  std::vector<std::string> corpus;
  for (const auto& r : ref) corpus.push_back(r.text);
  const TfidfScorer tfidf(corpus);
  const TextScorer scorer = [&tfidf](std::string_view a, std::string_view b) {
    return tfidf(a, b);
  };
  const auto groups = group_items(ref);
  const RecallWindow mode =
      opt.recall_window == "causal" ? RecallWindow::causal : RecallWindow::centered;

  json out = json::array();
  for (int k : opt.recall_k) {
    std::size_t hits = 0, count = 0;
    json skipped = json::array();
    for (const auto& [movie, idx] : groups) {
      if (idx.size() < static_cast<std::size_t>(opt.recall_n)) {
        skipped.push_back(movie);
        continue;
      }
      std::vector<std::string> p, r;
      for (std::size_t i : idx) {
        p.push_back(pred[i].text);
        r.push_back(ref[i].text);
      }
      const RecallResult res = recall_at_k(p, r, k, opt.recall_n, scorer, mode);
      hits += res.hits;
      count += res.count;
    }
    const double value = count == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / count;
    out.push_back(to_json(MetricRecord{
        "recall@" + std::to_string(k) + "/" + std::to_string(opt.recall_n),
        value,
        count,
        {{"k", k},
         {"n", opt.recall_n},
         {"window", opt.recall_window},
         {"scorer", "tfidf-cosine-unigram-bigram"},
         {"skipped_movies", skipped}}}));
  }
  return out;
}

json llm_metric(const EvalOptions& opt, const std::vector<EvalItem>& pred,
                const std::vector<EvalItem>& ref) {
  JudgeConfig cfg;
  cfg.endpoint = opt.judge_endpoint;
  cfg.model_name = opt.judge_model;
  cfg.api_key = JudgeConfig::api_key_from_env();
  cfg.max_retries = opt.judge_retries;
  cfg.concurrency_limit = opt.judge_concurrency;
  cfg.timeout = std::chrono::milliseconds(static_cast<long long>(opt.judge_timeout * 1000.0));
  cfg.cache_path = opt.judge_cache;
  std::vector<JudgePair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pairs.push_back({pred[i].movie_id + "/" + std::to_string(i), ref[i].text, pred[i].text});
  }
  JudgeReport report;
  std::string error;
  try {
    report = judge_corpus(pairs, cfg);
  } catch (const JudgeError& e) {
    report = e.report();
    error = e.what();
  }
  json j = to_json(MetricRecord{"llm", report.mean.value_or(0.0), report.scores.size(),
                                {{"model", cfg.model_name}, {"score_range", "0-5"}}});
  j["failures"] = report.failures.size();
  j["detail"] = to_json(report);
  if (!error.empty()) j["error"] = error;
  return j;
}

}  // namespace

json compute_metrics(const EvalOptions& opt, const std::vector<EvalItem>& pred,
                     const std::vector<EvalItem>& ref, const CastMap& casts, unsigned jobs) {
  if (pred.size() != ref.size()) {
    throw InvalidArgument("predictions (" + std::to_string(pred.size()) + ") and references (" +
                          std::to_string(ref.size()) + ") are not index-aligned");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].movie_id != ref[i].movie_id) {
      throw InvalidArgument("movie_id mismatch at item " + std::to_string(i));
    }
  }
  json out = json::object();
  if (pred.empty()) return out;
  if (wants(opt, "critic")) out["critic"] = critic_metric(opt, pred, ref, casts, jobs);
  if (wants(opt, "cider")) out["cider"] = cider_metric(pred, ref);
  if (wants(opt, "recall")) out["recall"] = recall_metric(opt, pred, ref);
  if (wants(opt, "llm")) out["llm"] = llm_metric(opt, pred, ref);
  return out;
}

}  // namespace adtk::cli
