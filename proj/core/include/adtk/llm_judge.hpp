#pragma once

// LLM-as-judge scoring of (reference, prediction) AD pairs over an
// OpenAI-compatible chat-completion endpoint.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adtk/error.hpp"

namespace adtk {

inline constexpr const char* kJudgeApiKeyEnv = "AD_JUDGE_API_KEY";

struct ChatPrompt {
  std::string system;
  std::string user;
};

ChatPrompt build_prompt(std::string_view reference, std::string_view prediction);

class ScoreParseError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Reads the integer "score" of the first dict literal in the response, e.g.
// "{'score': 4}", optionally wrapped in whitespace or a markdown fence.
// Throws ScoreParseError if there is no dict, the value is not an integer
// literal, or it is outside [0, 5].
int parse_score(std::string_view response_text);

struct JudgeConfig {
  std::string endpoint;  // full URL of the chat-completions route
  std::string model_name = "gpt-3.5-turbo";
  std::string api_key;  // usually from AD_JUDGE_API_KEY
  int max_retries = 3;
  unsigned concurrency_limit = 4;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds initial_backoff{500};  // doubled per retry
  std::optional<std::filesystem::path> cache_path;

  void validate() const;
  static std::string api_key_from_env();
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant message content; throws IoError on transport or
  // protocol failure. Must be safe to call concurrently.
  virtual std::string complete(const ChatPrompt& prompt) = 0;
};

// POSTs {model, messages: [system, user], temperature: 0} with a bearer token
// and reads choices[0].message.content.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(JudgeConfig config);
  std::string complete(const ChatPrompt& prompt) override;

 private:
  JudgeConfig config_;
  std::string origin_;
  std::string path_;
};

nlohmann::json chat_request_body(const ChatPrompt& prompt, std::string_view model);

// Append-only journal of {key, score, raw_response} JSON lines.
class JudgeCache {
 public:
  JudgeCache() = default;
  explicit JudgeCache(std::filesystem::path path);

  static std::string key(std::string_view model, std::string_view reference,
                         std::string_view prediction);

  struct Entry {
    int score = 0;
    std::string raw_response;
  };
  std::optional<Entry> find(const std::string& key) const;
  void insert(const std::string& key, const Entry& entry);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

struct JudgePair {
  std::string pair_id;
  std::string reference;
  std::string prediction;
};

struct JudgeScore {
  std::string pair_id;
  std::optional<int> score;  // set only when parsing succeeded
  std::string raw_response;
  int attempts = 0;
  bool cached = false;
  std::string error;
};

struct JudgeReport {
  std::vector<JudgeScore> scores;    // successes, in input order
  std::vector<JudgeScore> failures;  // in input order
  std::optional<double> mean;
  std::size_t network_calls = 0;
};

nlohmann::json to_json(const JudgeReport& report);

class JudgeError : public Error {
 public:
  JudgeError(const std::string& what, JudgeReport report)
      : Error(what), report_(std::move(report)) {}
  const JudgeReport& report() const { return report_; }

 private:
  JudgeReport report_;
};

// Judges every pair with at most config.concurrency_limit requests in flight.
// Transport and parse failures are retried with exponential backoff up to
// config.max_retries times. Successful scores are cached by
// (model, reference, prediction). Throws JudgeError if no pair succeeded.
JudgeReport judge_corpus(std::span<const JudgePair> pairs, const JudgeConfig& config,
                         ChatClient& client);
JudgeReport judge_corpus(std::span<const JudgePair> pairs, const JudgeConfig& config);

}  // namespace adtk
