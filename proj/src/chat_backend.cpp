#include "itemseg/chat_backend.hpp"

#include <cstdlib>
#include <fstream>

#include "itemseg/error.hpp"
#include "itemseg/http_client.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

MockChatBackend::MockChatBackend(std::vector<Reply> script) : script_(script.begin(), script.end()) {}

std::unique_ptr<MockChatBackend> MockChatBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script " + path.string());
  std::vector<Reply> script;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("mock script record is not a JSON object", line_no);
    Reply r;
    if (j.contains("doc_id")) {
      if (!j["doc_id"].is_string()) throw ParseError("mock script doc_id must be a string", line_no);
      r.doc_id = j["doc_id"].get<std::string>();
    }
    r.timeout = j.value("timeout", false);
    if (!r.timeout) {
      if (!j.contains("response") || !j["response"].is_string()) {
        throw ParseError("mock script record needs a string response", line_no);
      }
      r.response = j["response"].get<std::string>();
    }
    script.push_back(std::move(r));
  }
  return std::make_unique<MockChatBackend>(std::move(script));
}

std::string MockChatBackend::send(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  for (auto it = script_.begin(); it != script_.end(); ++it) {
    if (it->doc_id && *it->doc_id != request.doc_id) continue;
    Reply r = std::move(*it);
    script_.erase(it);
    if (r.timeout) throw FetchError("scripted timeout", 0, true);
    return r.response;
  }
  throw FetchError("mock script has no reply left for " + request.doc_id, 0, false);
}

std::size_t MockChatBackend::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::vector<ChatRequest> MockChatBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw ModelError("environment variable " + config_.api_key_env + " holds no API key");
  api_key_ = key;
}

std::string HttpChatBackend::request_body(const std::string& prompt) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string HttpChatBackend::extract_content(const std::string& response_body) {
  auto j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw ModelError("chat response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ModelError("chat response lacks choices[0].message.content");
  }
}

std::string HttpChatBackend::send(const ChatRequest& request) {
  HttpResponse r = http_post_json(config_.url, request_body(request.prompt),
                                  {{"Authorization", "Bearer " + api_key_}}, config_.timeout);
  if (r.status != 200) {
    bool retriable = r.status == 429 || r.status >= 500;
    throw FetchError("chat endpoint returned HTTP " + std::to_string(r.status), r.status, retriable);
  }
  return extract_content(r.body);
}

}  // namespace itemseg
