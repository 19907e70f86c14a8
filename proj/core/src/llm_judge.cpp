#include "adtk/llm_judge.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/sha.h>
#include <spdlog/spdlog.h>

#include "adtk/corpus.hpp"
#include "adtk/parallel.hpp"
#include "adtk/text.hpp"

namespace adtk {

using nlohmann::json;

ChatPrompt build_prompt(std::string_view reference, std::string_view prediction) {
  ChatPrompt p;
  p.system =
      "You are an intelligent chatbot designed for evaluating the quality of generative outputs "
      "for movie audio descriptions. "
      "Your task is to compare the predicted audio descriptions with the correct audio "
      "descriptions and determine its level of match, considering mainly the visual elements "
      "like actions, objects and interactions. Here's how you can accomplish the task:"
      "------"
      "##INSTRUCTIONS: "
      "- Check if the predicted audio description covers the main visual events from the movie, "
      "especially focusing on the verbs and nouns.\n"
      "- Evaluate whether the predicted audio description includes specific details rather than "
      "just generic points. It should provide comprehensive information that is tied to specific "
      "elements of the video.\n"
      "- Consider synonyms or paraphrases as valid matches. Consider pronouns like 'he' or 'she' "
      "as valid matches with character names. Consider different character names as valid "
      "matches. \n"
      "- Provide a single evaluation score that reflects the level of match of the prediction, "
      "considering the visual elements like actions, objects and interactions.";

  p.user = "Please evaluate the following movie audio description pair:\n\n";
  p.user += "Correct Audio Description: ";
  p.user += reference;
  p.user += "\nPredicted Audio Description: ";
  p.user += prediction;
  p.user +=
      "\n\n"
      "Provide your evaluation only as a matching score where the matching score is an integer "
      "value between 0 and 5, with 5 indicating the highest level of match. "
      "Please generate the response in the form of a Python dictionary string with keys "
      "'score', where its value is the matching score in INTEGER, not STRING."
      "DO NOT PROVIDE ANY OTHER OUTPUT TEXT OR EXPLANATION. Only provide the Python dictionary "
      "string. "
      "For example, your response should look like this: {'score': }.";
  return p;
}

int parse_score(std::string_view response_text) {
  const auto open = response_text.find('{');
  const auto close = open == std::string_view::npos ? open : response_text.find('}', open);
  if (close == std::string_view::npos) {
    throw ScoreParseError("no dictionary in judge response: '" + std::string(response_text) + "'");
  }
  const std::string dict(response_text.substr(open, close - open + 1));
  static const std::regex kScore(R"re((['"])score\1\s*:\s*([^,}]*))re");
  std::smatch m;
  if (!std::regex_search(dict, m, kScore)) {
    throw ScoreParseError("judge response has no 'score' key: '" + dict + "'");
  }
  const std::string value(trim(m[2].str()));
  static const std::regex kInt(R"([+-]?\d+)");
  if (!std::regex_match(value, kInt)) {
    throw ScoreParseError("judge score is not an integer literal: '" + value + "'");
  }
  long score = 0;
  try {
    score = std::stol(value);
  } catch (const std::exception&) {
    throw ScoreParseError("judge score out of range: '" + value + "'");
  }
  if (score < 0 || score > 5) throw ScoreParseError("judge score outside [0, 5]: " + value);
  return static_cast<int>(score);
}

void JudgeConfig::validate() const {
  if (endpoint.empty()) throw InvalidArgument("judge: endpoint URL is required");
  if (model_name.empty()) throw InvalidArgument("judge: model name is required");
  if (max_retries < 0) throw InvalidArgument("judge: max_retries must be >= 0");
  if (concurrency_limit < 1) throw InvalidArgument("judge: concurrency_limit must be >= 1");
  if (timeout.count() <= 0) throw InvalidArgument("judge: timeout must be positive");
}

std::string JudgeConfig::api_key_from_env() {
  const char* v = std::getenv(kJudgeApiKeyEnv);
  return v ? std::string(v) : std::string();
}

json chat_request_body(const ChatPrompt& prompt, std::string_view model) {
  return json{{"model", model},
              {"temperature", 0},
              {"messages",
               json::array({json{{"role", "system"}, {"content", prompt.system}},
                            json{{"role", "user"}, {"content", prompt.user}}})}};
}

HttpChatClient::HttpChatClient(JudgeConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw InvalidArgument("judge: cannot parse endpoint URL '" + config_.endpoint + "'");
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
}

std::string HttpChatClient::complete(const ChatPrompt& prompt) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post(path_, headers, chat_request_body(prompt, config_.model_name).dump(),
                               "application/json");
  if (!res) throw IoError("judge endpoint: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw IoError("judge endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(std::string("judge endpoint: malformed completion: ") + e.what());
  }
}

JudgeCache::JudgeCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  std::ifstream in(*path_, std::ios::binary);
  if (!in) throw IoError("cannot open judge cache '" + path_->string() + "'");
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      entries_[j.at("key").get<std::string>()] =
          Entry{j.at("score").get<int>(), j.at("raw_response").get<std::string>()};
    } catch (const json::exception& e) {
      spdlog::warn("judge cache {}:{}: skipping bad entry ({})", path_->string(), line_no,
                   e.what());
    }
  }
}

std::string JudgeCache::key(std::string_view model, std::string_view reference,
                            std::string_view prediction) {
  std::string material;
  material.append(model).push_back('\0');
  material.append(reference).push_back('\0');
  material.append(prediction);
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (const unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

std::optional<JudgeCache::Entry> JudgeCache::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void JudgeCache::insert(const std::string& key, const Entry& entry) {
  std::lock_guard lock(mu_);
  entries_[key] = entry;
  if (!path_) return;
  std::ofstream out(*path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to judge cache '" + path_->string() + "'");
  out << json{{"key", key}, {"score", entry.score}, {"raw_response", entry.raw_response}}.dump()
      << '\n';
}

std::size_t JudgeCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

json to_json(const JudgeReport& report) {
  const auto entry = [](const JudgeScore& s) {
    json j{{"pair_id", s.pair_id}, {"attempts", s.attempts}, {"cached", s.cached}};
    if (s.score) j["score"] = *s.score;
    if (!s.error.empty()) j["error"] = s.error;
    return j;
  };
  json scores = json::array(), failures = json::array();
  for (const auto& s : report.scores) scores.push_back(entry(s));
  for (const auto& s : report.failures) failures.push_back(entry(s));
  json j{{"scores", scores}, {"failures", failures}, {"network_calls", report.network_calls}};
  j["mean"] = report.mean ? json(*report.mean) : json(nullptr);
  return j;
}

JudgeReport judge_corpus(std::span<const JudgePair> pairs, const JudgeConfig& config,
                         ChatClient& client) {
  config.validate();
  JudgeCache cache = config.cache_path ? JudgeCache(*config.cache_path) : JudgeCache();
  std::vector<JudgeScore> results(pairs.size());
  std::atomic<std::size_t> calls{0};

  parallel_for(pairs.size(), config.concurrency_limit, [&](std::size_t i) {
    const JudgePair& pair = pairs[i];
    JudgeScore& out = results[i];
    out.pair_id = pair.pair_id;
    const std::string key = JudgeCache::key(config.model_name, pair.reference, pair.prediction);
    if (auto hit = cache.find(key)) {
      out.score = hit->score;
      out.raw_response = hit->raw_response;
      out.cached = true;
      return;
    }
    const ChatPrompt prompt = build_prompt(pair.reference, pair.prediction);
    auto backoff = config.initial_backoff;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      ++out.attempts;
      try {
        ++calls;
        out.raw_response = client.complete(prompt);
        out.score = parse_score(out.raw_response);
        out.error.clear();
        cache.insert(key, JudgeCache::Entry{*out.score, out.raw_response});
        return;
      } catch (const Error& e) {
        out.error = e.what();
      }
    }
  });

  JudgeReport report;
  report.network_calls = calls.load();
  double sum = 0;
  for (auto& r : results) {
    if (r.score) {
      sum += *r.score;
      report.scores.push_back(std::move(r));
    } else {
      report.failures.push_back(std::move(r));
    }
  }
  if (!report.scores.empty()) report.mean = sum / static_cast<double>(report.scores.size());
  if (!pairs.empty() && report.scores.empty()) {
    const std::string first = report.failures.front().error;
    throw JudgeError("all " + std::to_string(pairs.size()) + " judge requests failed (first: " +
                         first + ")",
                     std::move(report));
  }
  return report;
}

JudgeReport judge_corpus(std::span<const JudgePair> pairs, const JudgeConfig& config) {
  HttpChatClient client(config);
  return judge_corpus(pairs, config, client);
}

}  // namespace adtk
