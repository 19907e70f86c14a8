#pragma once

// Scripted OpenAI-style chat-completions endpoint on 127.0.0.1 for judge tests.

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

namespace adtk::testing {

struct MockReply {
  int status = 200;
  std::string content;  // assistant message text
};

class MockChatServer {
 public:
  // `script` receives the parsed request body and the 0-based call number.
  using Script = std::function<MockReply(const nlohmann::json& request, int call)>;

  explicit MockChatServer(Script script);
  ~MockChatServer();
  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  std::string endpoint() const;  // http://127.0.0.1:<port>/v1/chat/completions
  int calls() const { return calls_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> calls_{0};
};

}  // namespace adtk::testing
