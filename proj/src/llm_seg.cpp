#include "itemseg/llm_seg.hpp"

#include <algorithm>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

AuditLog::AuditLog(const std::filesystem::path& path) : out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw IoError("cannot open audit log " + path.string());
}

void AuditLog::record(const std::string& doc_id, int attempt, const std::string& prompt, const std::string& response,
                      const std::string& verdict) {
  nlohmann::json j = {{"doc_id", doc_id},
                      {"attempt", attempt},
                      {"prompt_sha256", sha256_hex(prompt)},
                      {"response", response},
                      {"verdict", verdict}};
  std::string line = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
  if (!out_) throw IoError("failed to append to the audit log");
}

namespace {

std::string join_reasons(const std::vector<std::string>& reasons) {
  std::string out;
  for (const auto& r : reasons) {
    if (!out.empty()) out += "; ";
    out += r;
  }
  return out;
}

}  // namespace

LlmSegmentationError::LlmSegmentationError(const std::string& doc_id, std::vector<std::string> reasons)
    : Error("no valid response for " + doc_id + ": " + join_reasons(reasons)), reasons_(std::move(reasons)) {}

std::vector<ItemSpan> spans_from_response(const LibResponse& response, std::size_t n_lines) {
  std::vector<ItemStart> starts;
  for (const auto& [item, id] : response.assignments) {
    if (id && *id < n_lines) starts.push_back({item, *id});
  }
  return spans_from_starts(select_ordered_starts(std::move(starts)), n_lines);
}

LlmResult segment_llm(const std::string& doc_id, std::span<const TextLine> lines, ChatBackend& backend,
                      std::span<const Demonstration> demos, const LlmConfig& config, AuditLog* audit) {
  BuiltPrompt prompt = build_prompt_within_budget(lines, demos, config.items, config.budget);
  LlmResult result;
  result.word_limit = prompt.word_limit;
  const int attempts = 1 + std::max(0, config.max_retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    result.attempts = attempt;
    std::string response;
    try {
      response = backend.send({doc_id, prompt.text, attempt});
    } catch (const FetchError& e) {
      if (!e.retriable()) throw;
      std::string reason = "attempt " + std::to_string(attempt) + ": " + e.what();
      if (audit) audit->record(doc_id, attempt, prompt.text, "", std::string("error: ") + e.what());
      result.rejections.push_back(std::move(reason));
      continue;
    }
    ResponseVerdict v = parse_response(response, prompt.issued_ids, config.items);
    if (audit) {
      audit->record(doc_id, attempt, prompt.text, response,
                    v.accepted() ? "accepted" : "rejected: " + join_reasons(v.reasons));
    }
    if (v.accepted()) {
      result.response = std::move(*v.response);
      result.spans = spans_from_response(result.response, lines.size());
      return result;
    }
    result.rejections.push_back("attempt " + std::to_string(attempt) + ": " + join_reasons(v.reasons));
  }
  throw LlmSegmentationError(doc_id, result.rejections);
}

}  // namespace itemseg
