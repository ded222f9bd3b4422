#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "itemseg/chat_backend.hpp"
#include "itemseg/lib_prompt.hpp"

namespace itemseg {

/// Append-only JSON Lines record of every prompt/response exchange:
/// {"doc_id", "attempt", "prompt_sha256", "response", "verdict"}. Safe for
/// concurrent writers within one process; each record is one write.
class AuditLog {
 public:
  explicit AuditLog(const std::filesystem::path& path);
  void record(const std::string& doc_id, int attempt, const std::string& prompt, const std::string& response,
              const std::string& verdict);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct LlmConfig {
  PromptBudget budget;
  std::vector<Item> items = default_lib_items();
  int max_retries = 3;  // reruns after the first attempt
};

struct LlmResult {
  std::vector<ItemSpan> spans;
  LibResponse response;
  int attempts = 0;
  std::size_t word_limit = 0;
  std::vector<std::string> rejections;  // reasons from earlier failed attempts
};

class LlmSegmentationError : public Error {
 public:
  LlmSegmentationError(const std::string& doc_id, std::vector<std::string> reasons);
  const std::vector<std::string>& reasons() const { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

/// Start lines of the assigned items, order-filtered with
/// select_ordered_starts, then spanned to the line before the next start.
std::vector<ItemSpan> spans_from_response(const LibResponse& response, std::size_t n_lines);

/// Prompt, send, validate, and rerun on rejection or timeout up to
/// config.max_retries times. Non-retriable backend errors propagate.
LlmResult segment_llm(const std::string& doc_id, std::span<const TextLine> lines, ChatBackend& backend,
                      std::span<const Demonstration> demos, const LlmConfig& config, AuditLog* audit = nullptr);

}  // namespace itemseg
