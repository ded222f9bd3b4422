#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "itemseg/chat_backend.hpp"
#include "itemseg/error.hpp"
#include "itemseg/lib_prompt.hpp"
#include "itemseg/llm_seg.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace itemseg {
namespace {

std::vector<TextLine> numbered(std::size_t n) {
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n; ++i) texts.push_back("line " + std::to_string(i) + " has a few words in it");
  return number_lines(texts);
}

std::string full_response(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (const auto& [item, id] : rows) out += "Item " + item + "," + id + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> default_rows() {
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t id = 1;
  for (Item it : default_lib_items()) rows.emplace_back(std::string(to_string(it)), std::to_string(id++));
  return rows;
}

TEST(LibReport, TruncatesWordsAndKeepsIds) {
  auto lines = number_lines({"one two three four", "", "alpha"});
  auto r = format_lib_report(lines, 2);
  EXPECT_EQ(r.render(), "0 one two\n1\n2 alpha\n");
  EXPECT_THROW(format_lib_report(lines, 0), std::invalid_argument);
}

TEST(LibPrompt, CarriesInstructionsReportAndDemos) {
  auto lines = number_lines({"ITEM 1. BUSINESS", "We make things."});
  std::vector<Demonstration> demos{{"5 ITEM 1A. RISK FACTORS\n", "Item 1,NA\nItem 1A,5\n"}};
  std::vector<Item> items{Item::k1, Item::k1A};
  auto p = build_prompt(format_lib_report(lines, 30), demos, items);
  EXPECT_NE(p.find("If the item is not available, print NA."), std::string::npos);
  EXPECT_NE(p.find("Use comma (\",\") to separate the two columns"), std::string::npos);
  EXPECT_NE(p.find("Item 1, Item 1A."), std::string::npos);
  EXPECT_NE(p.find("0 ITEM 1. BUSINESS\n1 We make things.\n"), std::string::npos);
  EXPECT_NE(p.find("5 ITEM 1A. RISK FACTORS\n"), std::string::npos);
  EXPECT_LT(p.find("5 ITEM 1A."), p.find("0 ITEM 1. BUSINESS"));
}

TEST(LibPrompt, BudgetHalvesWordLimit) {
  std::vector<std::string> texts(200, std::string(40, 'w'));
  for (auto& t : texts) {
    t.clear();
    for (int k = 0; k < 30; ++k) t += "word ";
  }
  auto lines = number_lines(texts);
  std::vector<Item> items = default_lib_items();
  PromptBudget budget;
  auto at30 = build_prompt_within_budget(lines, {}, items, budget);
  EXPECT_EQ(at30.word_limit, 30u);
  EXPECT_EQ(at30.issued_ids, 200u);

  budget.context_tokens = (at30.text.size() - 1) / 4;
  auto smaller = build_prompt_within_budget(lines, {}, items, budget);
  EXPECT_EQ(smaller.word_limit, 15u);
  EXPECT_LE(smaller.text.size(), budget.char_budget());

  budget.context_tokens = 50;
  try {
    build_prompt_within_budget(lines, {}, items, budget);
    FAIL() << "expected PromptBudgetError";
  } catch (const PromptBudgetError& e) {
    EXPECT_EQ(e.available_tokens(), 50u);
    EXPECT_GT(e.required_tokens(), 50u);
  }
}

TEST(LibResponse, AcceptsVerbatimBlock) {
  auto text = read_file(testing::fixture("lib_response_block.txt"));
  auto items = default_lib_items();
  auto v = parse_response(text, 3495, items);
  ASSERT_TRUE(v.accepted()) << (v.reasons.empty() ? "" : v.reasons.front());
  ASSERT_EQ(v.response->assignments.size(), 18u);
  EXPECT_EQ(v.response->assignments.front(), (std::pair<Item, std::optional<std::size_t>>{Item::k1, 67}));
  EXPECT_EQ(v.response->assignments.back(), (std::pair<Item, std::optional<std::size_t>>{Item::k15, 3171}));
  auto again = parse_response(render_response(*v.response), 3495, items);
  ASSERT_TRUE(again.accepted());
  EXPECT_EQ(*again.response, *v.response);
}

TEST(LibResponse, RejectsBadRows) {
  auto items = default_lib_items();
  auto rows = default_rows();
  EXPECT_TRUE(parse_response(full_response(rows), 100, items).accepted());

  auto non_int = rows;
  non_int[3].second = "12a";
  EXPECT_FALSE(parse_response(full_response(non_int), 100, items).accepted());
  non_int[3].second = "-4";
  EXPECT_FALSE(parse_response(full_response(non_int), 100, items).accepted());

  auto unissued = rows;
  unissued[0].second = "100";
  auto v = parse_response(full_response(unissued), 100, items);
  ASSERT_FALSE(v.accepted());
  EXPECT_NE(v.reasons.front().find("not issued"), std::string::npos);

  auto missing = rows;
  missing.pop_back();
  EXPECT_FALSE(parse_response(full_response(missing), 100, items).accepted());

  auto dup = rows;
  dup.push_back(rows[2]);
  EXPECT_FALSE(parse_response(full_response(dup), 100, items).accepted());

  auto extra = rows;
  extra.emplace_back("9B", "50");
  EXPECT_FALSE(parse_response(full_response(extra), 100, items).accepted());

  auto na = rows;
  na[5].second = "NA";
  auto ok = parse_response(full_response(na), 100, items);
  ASSERT_TRUE(ok.accepted());
  EXPECT_FALSE(ok.response->assignments[5].second);
}

TEST(LibResponse, SpansSkipNaAndOutOfOrderStarts) {
  LibResponse r;
  r.assignments = {{Item::k1, 3}, {Item::k1A, std::nullopt}, {Item::k2, 1}, {Item::k7, 8}};
  auto spans = spans_from_response(r, 12);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0], (ItemSpan{Item::k1, 3, 7}));
  EXPECT_EQ(spans[1], (ItemSpan{Item::k7, 8, 11}));
}

TEST(Demonstrations, ShippedSetLoadsAndChecks) {
  auto demos = load_demonstrations(testing::fixture("../../data/lib_demos.jsonl"));
  EXPECT_GE(demos.size(), 1u);
  for (const auto& d : demos) EXPECT_NO_THROW(check_demonstration(d));
  EXPECT_THROW(check_demonstration({"1 Item 1\n", "Item 1,2\n"}), ParseError);
  auto dir = testing::scratch_dir("demos");
  std::ofstream(dir / "bad.jsonl") << "{\"excerpt\": 3}\n";
  EXPECT_THROW(load_demonstrations(dir / "bad.jsonl"), ParseError);
  EXPECT_THROW(load_demonstrations(dir / "absent.jsonl"), IoError);
}

TEST(LlmSegmentation, MalformedThenValidSucceedsOnSecondAttempt) {
  auto lines = numbered(40);
  MockChatBackend backend({{std::nullopt, "I could not find the items.", false},
                           {std::nullopt, full_response(default_rows()), false}});
  auto dir = testing::scratch_dir("audit");
  LlmResult result;
  {
    AuditLog audit(dir / "audit.jsonl");
    result = segment_llm("doc-a", lines, backend, {}, {}, &audit);
  }
  EXPECT_EQ(result.attempts, 2);
  EXPECT_EQ(backend.calls(), 2u);
  EXPECT_EQ(result.rejections.size(), 1u);
  EXPECT_EQ(result.spans.front(), (ItemSpan{Item::k1, 1, 1}));
  EXPECT_EQ(result.spans.back().end_line, 39u);
  auto reqs = backend.requests();
  EXPECT_EQ(reqs[0].attempt, 1);
  EXPECT_EQ(reqs[1].attempt, 2);
  EXPECT_EQ(reqs[0].prompt, reqs[1].prompt);

  std::ifstream in(dir / "audit.jsonl");
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0]["doc_id"], "doc-a");
  EXPECT_EQ(records[0]["attempt"], 1);
  EXPECT_EQ(records[0]["prompt_sha256"], sha256_hex(reqs[0].prompt));
  EXPECT_TRUE(records[0]["verdict"].get<std::string>().starts_with("rejected"));
  EXPECT_EQ(records[1]["verdict"], "accepted");
}

TEST(LlmSegmentation, TimeoutsConsumeAttempts) {
  auto lines = numbered(40);
  MockChatBackend backend({{std::nullopt, "", true}, {std::nullopt, full_response(default_rows()), false}});
  auto r = segment_llm("d", lines, backend, {}, {});
  EXPECT_EQ(r.attempts, 2);
}

TEST(LlmSegmentation, GivesUpAfterRetries) {
  auto lines = numbered(40);
  std::vector<MockChatBackend::Reply> script(4, {std::nullopt, "nothing useful", false});
  MockChatBackend backend(script);
  LlmConfig cfg;
  cfg.max_retries = 3;
  try {
    segment_llm("doc-z", lines, backend, {}, cfg);
    FAIL() << "expected LlmSegmentationError";
  } catch (const LlmSegmentationError& e) {
    EXPECT_EQ(e.reasons().size(), 4u);
    EXPECT_NE(std::string(e.what()).find("doc-z"), std::string::npos);
  }
  EXPECT_EQ(backend.calls(), 4u);
}

TEST(LlmSegmentation, ScriptsAreMatchedByDocument) {
  auto lines = numbered(40);
  MockChatBackend backend({{"b", full_response(default_rows()), false}, {"a", full_response(default_rows()), false}});
  EXPECT_NO_THROW(segment_llm("a", lines, backend, {}, {}));
  EXPECT_NO_THROW(segment_llm("b", lines, backend, {}, {}));
  // script exhausted: not retriable, so it surfaces directly
  EXPECT_THROW(segment_llm("a", lines, backend, {}, {}), FetchError);
}

TEST(MockBackend, LoadsScriptFile) {
  auto dir = testing::scratch_dir("mock");
  std::ofstream(dir / "s.jsonl") << R"({"doc_id": "x", "response": "hello"})" << "\n" << R"({"timeout": true})" << "\n";
  auto backend = MockChatBackend::from_file(dir / "s.jsonl");
  EXPECT_EQ(backend->send({"x", "p", 1}), "hello");
  EXPECT_THROW(backend->send({"y", "p", 1}), FetchError);
}

TEST(HttpChat, RequiresApiKeyFromEnvironment) {
  HttpChatConfig cfg;
  cfg.api_key_env = "ITEMSEG_TEST_UNSET_KEY";
  ::unsetenv("ITEMSEG_TEST_UNSET_KEY");
  EXPECT_THROW(HttpChatBackend backend(cfg), ModelError);
}

TEST(HttpChat, RequestAndResponseShapes) {
  ::setenv("ITEMSEG_TEST_KEY", "sk-test", 1);
  HttpChatConfig cfg;
  cfg.api_key_env = "ITEMSEG_TEST_KEY";
  cfg.model = "some-model";
  HttpChatBackend backend(cfg);
  auto body = nlohmann::json::parse(backend.request_body("hi there"));
  EXPECT_EQ(body["model"], "some-model");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hi there");
  EXPECT_EQ(HttpChatBackend::extract_content(R"({"choices":[{"message":{"content":"Item 1,4"}}]})"), "Item 1,4");
  EXPECT_THROW(HttpChatBackend::extract_content(R"({"error":{"message":"bad"}})"), ModelError);
  EXPECT_THROW(HttpChatBackend::extract_content("not json"), ModelError);
}

TEST(HttpChat, TalksToLocalEndpoint) {
  httplib::Server server;
  std::string seen_auth, seen_body;
  int hits = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    if (hits == 1) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Item 1,0"}}]})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("ITEMSEG_TEST_KEY", "sk-local", 1);
  HttpChatConfig cfg;
  cfg.api_key_env = "ITEMSEG_TEST_KEY";
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.timeout = std::chrono::seconds(5);
  HttpChatBackend backend(cfg);
  try {
    backend.send({"d", "prompt text", 1});
    ADD_FAILURE() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 503);
    EXPECT_TRUE(e.retriable());
  }
  EXPECT_EQ(backend.send({"d", "prompt text", 2}), "Item 1,0");
  EXPECT_EQ(seen_auth, "Bearer sk-local");
  EXPECT_EQ(nlohmann::json::parse(seen_body)["messages"][0]["content"], "prompt text");
  server.stop();
  th.join();

  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  HttpChatBackend closed(cfg);
  try {
    closed.send({"d", "p", 1});
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 0);
    EXPECT_TRUE(e.retriable());
  }
}

}  // namespace
}  // namespace itemseg
