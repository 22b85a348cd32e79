#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "skill/error.hpp"

namespace skill::llm {

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

/// Chat-completion abstraction. Implementations: HTTP client and a
/// file-scripted mock (the test suites use only the mock).
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  /// Returns the assistant reply for the conversation so far.
  /// Throws Error("provider-unreachable") on transport failure.
  virtual std::string complete(const std::vector<Message>& messages) = 0;
};

/// Replays canned responses by conversation index. The script is a JSON
/// object mapping "0", "1", ... to response text (arrays work too).
class MockChatProvider : public ChatProvider {
 public:
  explicit MockChatProvider(const std::string& script_path);
  explicit MockChatProvider(nlohmann::json script);

  std::string complete(const std::vector<Message>& messages) override;

  int calls() const { return calls_; }
  void reset() { calls_ = 0; }

 private:
  nlohmann::json script_;
  int calls_ = 0;
};

class HttpChatProvider : public ChatProvider {
 public:
  struct Options {
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string api_key;
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int timeout_seconds = 60;
  };

  /// Reads SKILL_LLM_BASE_URL and SKILL_LLM_API_KEY.
  static Options from_env();

  explicit HttpChatProvider(Options options);

  std::string complete(const std::vector<Message>& messages) override;

 private:
  Options options_;
};

}  // namespace skill::llm
