#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace itemseg {

struct ChatRequest {
  std::string doc_id;
  std::string prompt;
  int attempt = 1;
};

/// Send-text, receive-text chat interface. Implementations throw FetchError
/// (retriable for timeouts and transient server errors) on transport failure.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const ChatRequest& request) = 0;
};

/// Replays scripted replies. Each entry answers the next request for its
/// doc_id, or any request when doc_id is unset; entries are consumed in order.
class MockChatBackend : public ChatBackend {
 public:
  struct Reply {
    std::optional<std::string> doc_id;
    std::string response;
    bool timeout = false;  // raise a retriable FetchError instead of answering
  };

  explicit MockChatBackend(std::vector<Reply> script);
  /// JSON Lines of {"doc_id"?, "response"?, "timeout"?}.
  static std::unique_ptr<MockChatBackend> from_file(const std::filesystem::path& path);

  std::string send(const ChatRequest& request) override;
  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<Reply> script_;
  std::vector<ChatRequest> requests_;
};

struct HttpChatConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  double temperature = 0.0;
  std::chrono::seconds timeout{120};
  std::string api_key_env = "OPENAI_API_KEY";
};

/// OpenAI-style chat-completions endpoint; the prompt travels as a single
/// user message. The bearer token is read from the configured environment
/// variable at construction (ModelError when unset).
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpChatConfig config);
  std::string send(const ChatRequest& request) override;

  /// Request body for a prompt; exposed for tests.
  std::string request_body(const std::string& prompt) const;
  /// Extracts choices[0].message.content; throws ModelError on other shapes.
  static std::string extract_content(const std::string& response_body);

 private:
  HttpChatConfig config_;
  std::string api_key_;
};

}  // namespace itemseg
