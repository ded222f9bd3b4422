#include "itemseg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "itemseg/bilstm.hpp"
#include "itemseg/chat_backend.hpp"
#include "itemseg/crf.hpp"
#include "itemseg/edgar.hpp"
#include "itemseg/error.hpp"
#include "itemseg/eval.hpp"
#include "itemseg/html_text.hpp"
#include "itemseg/llm_seg.hpp"
#include "itemseg/rule_seg.hpp"
#include "itemseg/sgml.hpp"
#include "itemseg/synth.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

#ifndef ITEMSEG_DATA_DIR
#define ITEMSEG_DATA_DIR "data"
#endif

namespace itemseg::cli {

namespace fs = std::filesystem;

namespace {

/// Signals a usage problem found after parsing (exit 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw UsageError(what + " is required");
  if (!fs::exists(p)) throw IoError(what + " not found: " + p.string());
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct Common {
  std::size_t jobs = 1;
  bool keep_going = false;
};

/// Result of one document; collect() reports them in doc_id order.
template <typename T>
struct Outcome {
  std::string doc_id;
  std::optional<T> value;
  std::string error;
};

template <typename T>
std::vector<T> collect(std::vector<Outcome<T>> outcomes, const Common& common, std::ostream& err, bool& failed) {
  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  std::vector<T> out;
  for (auto& o : outcomes) {
    if (o.value) {
      out.push_back(std::move(*o.value));
    } else {
      err << (common.keep_going ? "warning: " : "error: ") << o.doc_id << ": " << o.error << "\n";
      failed = true;
    }
  }
  return out;
}

/// Fills in line text from converted documents for label files that lack it.
void attach_lines(std::vector<AnnotatedDocument>& gold, const fs::path& docs_path) {
  std::map<std::string, std::vector<TextLine>> lines;
  if (!docs_path.empty()) {
    for (auto& d : read_documents_jsonl(docs_path)) lines.emplace(d.doc_id, std::move(d.lines));
  }
  for (auto& g : gold) {
    if (!g.lines.empty() || g.labels.empty()) continue;
    auto it = lines.find(g.doc_id);
    if (it == lines.end()) throw UsageError("gold document " + g.doc_id + " has no line text; pass --docs");
    if (it->second.size() != g.labels.size()) {
      throw LabelError("document " + g.doc_id + " has " + std::to_string(it->second.size()) + " lines but " +
                       std::to_string(g.labels.size()) + " labels");
    }
    g.lines = it->second;
  }
}

std::set<std::string> split_set(const std::string& csv) {
  std::set<std::string> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

std::vector<Item> parse_items(const std::string& csv) {
  std::vector<Item> items;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto t = trim(part);
    if (t.empty()) continue;
    auto item = parse_item(t);
    if (!item) throw UsageError("unknown item: " + std::string(t));
    items.push_back(*item);
  }
  return items;
}

// ---------------------------------------------------------------------------

struct FetchArgs {
  int year = 0;
  int quarter = 0;
  std::string index_file;
  std::string forms = "10-K,10-K405";
  std::string cache_dir = "edgar-cache";
  std::string user_agent;
  std::string base_url = "https://www.sec.gov/Archives/";
  std::string output;
  std::size_t limit = 0;
  double rate = 8.0;
};

int do_fetch(const FetchArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  if (a.index_file.empty() && (a.year == 0 || a.quarter < 1 || a.quarter > 4)) {
    throw UsageError("give --index, or --year with --quarter 1-4");
  }
  if (a.user_agent.empty()) throw UsageError("--user-agent (or ITEMSEG_USER_AGENT) is required by EDGAR");
  FetchConfig cfg;
  cfg.base_url = a.base_url;
  cfg.cache_dir = a.cache_dir;
  cfg.user_agent = a.user_agent;
  cfg.max_requests_per_second = a.rate;
  fs::create_directories(cfg.cache_dir);
  EdgarClient client(cfg, make_http_transport());

  std::string index_text;
  if (!a.index_file.empty()) {
    require_file(a.index_file, "index file");
    index_text = read_file(a.index_file);
  } else {
    index_text = client.fetch_master_index(a.year, a.quarter);
  }
  auto refs = parse_master_index(index_text, split_set(a.forms));
  if (a.limit && refs.size() > a.limit) refs.resize(a.limit);

  std::vector<Outcome<std::string>> outcomes(refs.size());
  parallel_for(refs.size(), common.jobs, [&](std::size_t i) {
    const FilingRef& r = refs[i];
    outcomes[i].doc_id = r.path;
    try {
      client.fetch_filing(r);
      char date[16];
      std::snprintf(date, sizeof date, "%04d-%02d-%02d", r.date_filed.year, r.date_filed.month, r.date_filed.day);
      nlohmann::json j = {{"cik", r.cik},
                          {"company_name", r.company_name},
                          {"form_type", r.form_type},
                          {"date_filed", date},
                          {"path", r.path},
                          {"cache_file", cache_path(cfg.cache_dir, r.path).string()}};
      outcomes[i].value = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  bool failed = false;
  auto records = collect(std::move(outcomes), common, err, failed);
  std::string manifest;
  for (const auto& r : records) manifest += r + "\n";
  if (!a.output.empty()) {
    write_file_atomic(a.output, manifest);
  } else {
    out << manifest;
  }
  err << "fetched " << records.size() << " of " << refs.size() << " filings\n";
  return failed && !common.keep_going ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string forms = "10-K,10-K405";
};

int do_convert(const ConvertArgs& a, const Common& common, std::ostream& err) {
  if (a.output.empty()) throw UsageError("--output is required");
  std::vector<fs::path> files;
  for (const auto& in : a.inputs) {
    require_file(in, "input");
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file()) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  const auto forms = split_set(a.forms);
  std::vector<Outcome<ConvertedDocument>> outcomes(files.size());
  parallel_for(files.size(), common.jobs, [&](std::size_t i) {
    outcomes[i].doc_id = files[i].stem().string();
    try {
      auto sessions = unwrap_document_sessions(read_file(files[i]));
      auto k = primary_session(sessions, forms);
      if (!k) throw Error("no document session of the requested form types");
      outcomes[i].value = ConvertedDocument{outcomes[i].doc_id, html_to_lines(sessions[*k])};
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  bool failed = false;
  auto docs = collect(std::move(outcomes), common, err, failed);
  if (failed && !common.keep_going) return kExitFailure;
  write_documents_jsonl(a.output, docs);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainCrfArgs {
  std::string gold, docs, model;
  CrfTrainConfig config;
};

int do_train_crf(const TrainCrfArgs& a, std::ostream& err) {
  require_file(a.gold, "gold file");
  if (a.model.empty()) throw UsageError("--model is required");
  auto gold = read_labels_jsonl(a.gold);
  attach_lines(gold, a.docs);
  CrfTrainReport report;
  CrfModel model = train_crf(gold, a.config, &report);
  save_crf_model(model, a.model);
  err << "trained CRF on " << gold.size() << " documents: " << report.iterations << " iterations, final loss "
      << (report.loss_history.empty() ? 0.0 : report.loss_history.back()) << " (" << report.stop_reason << ")\n";
  return kExitOk;
}

struct TrainLstmArgs {
  std::string gold, embeddings, model;
  LstmTrainConfig config;
  bool single_precision = false;
};

int do_train_lstm(const TrainLstmArgs& a, std::ostream& err) {
  require_file(a.gold, "gold file");
  require_file(a.embeddings, "embeddings file");
  if (a.model.empty()) throw UsageError("--model is required");
  auto gold = read_labels_jsonl(a.gold);
  auto emb = read_embeddings(a.embeddings);
  LstmTrainState st;
  if (a.single_precision) {
    save_bilstm(train_bilstm<float>(gold, emb, a.config, &st), a.model);
  } else {
    save_bilstm(train_bilstm<double>(gold, emb, a.config, &st), a.model);
  }
  err << "trained Bi-LSTM on " << st.train_docs << " documents (" << st.val_docs << " validation): best epoch "
      << st.best_epoch << " of " << st.epoch << ", validation loss " << st.best_val_loss << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SegmentArgs {
  std::string method = "rule";
  std::string input, output, model, embeddings;
  bool with_lines = false;
  bool single_precision = false;
  // llm
  std::string backend = "http";
  std::string demos = std::string(ITEMSEG_DATA_DIR) + "/lib_demos.jsonl";
  std::string audit_log;
  std::string items;
  int max_retries = 3;
  std::size_t word_limit = 30;
  std::size_t context_tokens = 128000;
  double chars_per_token = 4.0;
  std::string llm_url = "https://api.openai.com/v1/chat/completions";
  std::string llm_model = "gpt-4o";
  double temperature = 0.0;
  int timeout = 120;
  std::string api_key_env = "OPENAI_API_KEY";
};

int do_segment(const SegmentArgs& a, const Common& common, std::ostream& err) {
  require_file(a.input, "input");
  if (a.output.empty()) throw UsageError("--output is required");
  auto docs = read_documents_jsonl(a.input);

  std::function<std::vector<LineLabel>(const ConvertedDocument&)> label_doc;

  if (a.method == "rule") {
    label_doc = [](const ConvertedDocument& d) {
      return spans_to_labels(segment_rule_based(d.lines), d.lines.size());
    };
  } else if (a.method == "crf") {
    require_file(a.model, "model");
    auto model = std::make_shared<CrfModel>(load_crf_model(a.model));
    label_doc = [model](const ConvertedDocument& d) { return label_crf(*model, d.lines); };
  } else if (a.method == "lstm") {
    require_file(a.model, "model");
    require_file(a.embeddings, "embeddings file");
    auto emb = std::make_shared<EmbeddingFile>(read_embeddings(a.embeddings));
    auto index = std::make_shared<std::map<std::string, const EmbeddingMatrix*>>(emb->index());
    auto find = [emb, index](const std::string& id) -> const EmbeddingMatrix& {
      auto it = index->find(id);
      if (it == index->end()) throw ModelError("no embeddings for document " + id);
      return *it->second;
    };
    if (a.single_precision) {
      auto model = std::make_shared<BiLstmModel<float>>(load_bilstm<float>(a.model));
      label_doc = [model, find](const ConvertedDocument& d) { return label_lstm(*model, find(d.doc_id), d.lines.size()); };
    } else {
      auto model = std::make_shared<BiLstmModel<double>>(load_bilstm<double>(a.model));
      label_doc = [model, find](const ConvertedDocument& d) { return label_lstm(*model, find(d.doc_id), d.lines.size()); };
    }
  } else if (a.method == "llm") {
    std::shared_ptr<ChatBackend> backend;
    if (a.backend.starts_with("mock:")) {
      fs::path script = a.backend.substr(5);
      require_file(script, "mock script");
      backend = MockChatBackend::from_file(script);
    } else if (a.backend == "http") {
      HttpChatConfig hc;
      hc.url = a.llm_url;
      hc.model = a.llm_model;
      hc.temperature = a.temperature;
      hc.timeout = std::chrono::seconds(a.timeout);
      hc.api_key_env = a.api_key_env;
      backend = std::make_shared<HttpChatBackend>(hc);
    } else {
      throw UsageError("--backend must be http or mock:<script>");
    }
    auto demos = std::make_shared<std::vector<Demonstration>>();
    if (!a.demos.empty()) {
      require_file(a.demos, "demonstrations file");
      *demos = load_demonstrations(a.demos);
    }
    auto config = std::make_shared<LlmConfig>();
    config->max_retries = a.max_retries;
    config->budget.word_limit = a.word_limit;
    config->budget.context_tokens = a.context_tokens;
    config->budget.chars_per_token = a.chars_per_token;
    if (!a.items.empty()) config->items = parse_items(a.items);
    std::shared_ptr<AuditLog> audit;
    if (!a.audit_log.empty()) audit = std::make_shared<AuditLog>(a.audit_log);
    label_doc = [backend, demos, config, audit](const ConvertedDocument& d) {
      auto r = segment_llm(d.doc_id, d.lines, *backend, *demos, *config, audit.get());
      return spans_to_labels(r.spans, d.lines.size());
    };
  } else {
    throw UsageError("--method must be one of rule, crf, lstm, llm");
  }

  std::vector<Outcome<AnnotatedDocument>> outcomes(docs.size());
  parallel_for(docs.size(), common.jobs, [&](std::size_t i) {
    outcomes[i].doc_id = docs[i].doc_id;
    try {
      AnnotatedDocument ad;
      ad.doc_id = docs[i].doc_id;
      ad.labels = label_doc(docs[i]);
      if (a.with_lines) ad.lines = docs[i].lines;
      outcomes[i].value = std::move(ad);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });
  bool failed = false;
  auto labeled = collect(std::move(outcomes), common, err, failed);
  if (failed && !common.keep_going) return kExitFailure;
  write_labels_jsonl(a.output, labeled, a.with_lines);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gold, pred, output, json;
  bool per_doc_mean = false;
  double min_prevalence = 0.7;
  std::string core = "1,1A,3,7";
  std::string other = "2,4,5,6,7A,8,9,9A,10,11,12,13,14";
  bool agreement = false;
  double kappa_threshold = 0.8;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.gold, "gold file");
  require_file(a.pred, "prediction file");
  auto gold = read_labels_jsonl(a.gold);
  auto pred = read_labels_jsonl(a.pred);

  if (a.agreement) {
    std::map<std::string, const AnnotatedDocument*> other;
    for (const auto& p : pred) other.emplace(p.doc_id, &p);
    std::string csv = "doc_id,kappa,needs_review\n";
    std::sort(gold.begin(), gold.end(), [](const auto& x, const auto& y) { return x.doc_id < y.doc_id; });
    for (const auto& g : gold) {
      auto it = other.find(g.doc_id);
      if (it == other.end()) throw LabelError("second annotation lacks document " + g.doc_id);
      KappaCheck k = kappa_gate(g.labels, it->second->labels, a.kappa_threshold);
      csv += g.doc_id + "," + format_double(k.kappa) + "," + (k.needs_review ? "true" : "false") + "\n";
    }
    if (!a.output.empty()) {
      write_file_atomic(a.output, csv);
    } else {
      out << csv;
    }
    return kExitOk;
  }

  EvalConfig cfg;
  cfg.per_document_mean = a.per_doc_mean;
  cfg.min_prevalence = a.min_prevalence;
  cfg.groups = {{"core", parse_items(a.core)}, {"other", parse_items(a.other)}};
  EvalReport report = evaluate(gold, pred, cfg);
  std::string csv = format_eval_csv(report);
  if (!a.output.empty()) {
    write_file_atomic(a.output, csv);
  } else {
    out << csv;
  }
  if (!a.json.empty()) write_file_atomic(a.json, format_eval_json(report));
  return kExitOk;
}

struct StatsArgs {
  std::string gold, docs, output;
};

int do_stats(const StatsArgs& a, std::ostream& out) {
  require_file(a.gold, "gold file");
  auto gold = read_labels_jsonl(a.gold);
  if (!a.docs.empty()) attach_lines(gold, a.docs);
  std::string csv = format_stats_csv(corpus_stats(gold));
  if (!a.output.empty()) {
    write_file_atomic(a.output, csv);
  } else {
    out << csv;
  }
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 42;
  std::size_t n_docs = 200;
  std::size_t first_index = 0;
  double length_scale = 0.1;
  std::string output, docs_output, embeddings;
  std::size_t dim = 64;
};

int do_synth(const SynthArgs& a) {
  if (a.output.empty()) throw UsageError("--output is required");
  SynthSpec spec = SynthSpec::from_profile(a.length_scale);
  spec.seed = a.seed;
  spec.n_docs = a.n_docs;
  spec.first_index = a.first_index;
  auto docs = generate_corpus(spec);
  write_labels_jsonl(a.output, docs, true);
  if (!a.docs_output.empty()) {
    std::vector<ConvertedDocument> plain;
    for (const auto& d : docs) plain.push_back({d.doc_id, d.lines});
    write_documents_jsonl(a.docs_output, plain);
  }
  if (!a.embeddings.empty()) write_embeddings(a.embeddings, embed_corpus(docs, a.dim));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segment 10-K filings into their numbered items", "itemseg"};
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  Common common;
  app.add_option("--jobs,-j", common.jobs, "Documents processed in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--keep-going", common.keep_going, "Skip documents that fail instead of stopping");

  FetchArgs fa;
  auto* fetch = app.add_subcommand("fetch", "Download filings listed in an EDGAR quarterly master index");
  fetch->add_option("--year", fa.year, "Index year");
  fetch->add_option("--quarter", fa.quarter, "Index quarter (1-4)");
  fetch->add_option("--index", fa.index_file, "Local master.idx to use instead of downloading one");
  fetch->add_option("--forms", fa.forms, "Comma-separated form types")->capture_default_str();
  fetch->add_option("--cache-dir", fa.cache_dir, "Download cache")->envname("ITEMSEG_CACHE_DIR")->capture_default_str();
  fetch->add_option("--user-agent", fa.user_agent, "Contact string sent to EDGAR")->envname("ITEMSEG_USER_AGENT");
  fetch->add_option("--base-url", fa.base_url, "Archive root URL")->capture_default_str();
  fetch->add_option("--rate", fa.rate, "Maximum requests per second")->capture_default_str();
  fetch->add_option("--limit", fa.limit, "Fetch at most this many filings (0 = all)");
  fetch->add_option("--output,-o", fa.output, "Manifest JSON Lines (default stdout)");

  ConvertArgs ca;
  auto* convert = app.add_subcommand("convert", "Turn raw EDGAR submissions into filtered text lines");
  convert->add_option("--input,-i", ca.inputs, "Submission files or directories")->required();
  convert->add_option("--output,-o", ca.output, "Converted documents (JSON Lines)");
  convert->add_option("--forms", ca.forms, "Form types of the primary document")->capture_default_str();

  TrainCrfArgs tc;
  auto* train_crf_cmd = app.add_subcommand("train-crf", "Fit the CRF line tagger");
  train_crf_cmd->add_option("--gold", tc.gold, "Gold labels (JSON Lines)");
  train_crf_cmd->add_option("--docs", tc.docs, "Converted documents, when gold lacks line text");
  train_crf_cmd->add_option("--model,-m", tc.model, "Output model file");
  train_crf_cmd->add_option("--l2", tc.config.l2_lambda, "L2 penalty")->capture_default_str();
  train_crf_cmd->add_option("--tol", tc.config.tol, "Relative gradient-norm tolerance")->capture_default_str();
  train_crf_cmd->add_option("--max-iter", tc.config.max_iter, "Iteration limit")->capture_default_str();

  TrainLstmArgs tl;
  auto* train_lstm_cmd = app.add_subcommand("train-lstm", "Fit the Bi-LSTM line tagger over line embeddings");
  train_lstm_cmd->add_option("--gold", tl.gold, "Gold labels (JSON Lines)");
  train_lstm_cmd->add_option("--embeddings,-e", tl.embeddings, "Line embedding file");
  train_lstm_cmd->add_option("--model,-m", tl.model, "Output model file");
  train_lstm_cmd->add_option("--hidden", tl.config.hidden_dim, "Hidden width per direction")->capture_default_str();
  train_lstm_cmd->add_option("--lr", tl.config.learning_rate, "Adam learning rate")->capture_default_str();
  train_lstm_cmd->add_option("--max-epochs", tl.config.max_epochs, "Epoch limit")->capture_default_str();
  train_lstm_cmd->add_option("--patience", tl.config.patience, "Early-stopping patience")->capture_default_str();
  train_lstm_cmd->add_option("--seed", tl.config.seed, "Initialization and shuffling seed")->capture_default_str();
  train_lstm_cmd->add_flag("--float", tl.single_precision, "Train in single precision");

  SegmentArgs sa;
  auto* segment = app.add_subcommand("segment", "Label every line of converted documents");
  segment->add_option("--method", sa.method, "rule, crf, lstm or llm")
      ->capture_default_str()
      ->check(CLI::IsMember({"rule", "crf", "lstm", "llm"}));
  segment->add_option("--input,-i", sa.input, "Converted documents (JSON Lines)");
  segment->add_option("--output,-o", sa.output, "Predicted labels (JSON Lines)");
  segment->add_option("--model,-m", sa.model, "Model file for crf and lstm");
  segment->add_option("--embeddings,-e", sa.embeddings, "Line embedding file for lstm");
  segment->add_flag("--with-lines", sa.with_lines, "Copy line text into the output");
  segment->add_flag("--float", sa.single_precision, "Run the Bi-LSTM in single precision");
  segment->add_option("--backend", sa.backend, "http or mock:<script.jsonl>")->capture_default_str();
  segment->add_option("--demos", sa.demos, "Demonstration file (empty for none)");
  segment->add_option("--audit-log", sa.audit_log, "Append prompt/response records here");
  segment->add_option("--items", sa.items, "Comma-separated items to request");
  segment->add_option("--max-retries", sa.max_retries, "Reruns after a rejected response")->capture_default_str();
  segment->add_option("--word-limit", sa.word_limit, "Words kept per line in the prompt")->capture_default_str();
  segment->add_option("--context-tokens", sa.context_tokens, "Prompt budget in tokens")->capture_default_str();
  segment->add_option("--chars-per-token", sa.chars_per_token, "Characters per token estimate")->capture_default_str();
  segment->add_option("--llm-url", sa.llm_url, "Chat-completions endpoint")->envname("ITEMSEG_LLM_URL");
  segment->add_option("--llm-model", sa.llm_model, "Model name")->envname("ITEMSEG_LLM_MODEL")->capture_default_str();
  segment->add_option("--temperature", sa.temperature, "Sampling temperature")->capture_default_str();
  segment->add_option("--timeout", sa.timeout, "Request timeout in seconds")->capture_default_str();
  segment->add_option("--api-key-env", sa.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  eval->add_option("--gold", ea.gold, "Gold labels (JSON Lines)");
  eval->add_option("--pred", ea.pred, "Predicted labels (JSON Lines)");
  eval->add_option("--output,-o", ea.output, "CSV report (default stdout)");
  eval->add_option("--json", ea.json, "Also write a JSON report here");
  eval->add_flag("--per-doc-mean", ea.per_doc_mean, "Average per-document scores instead of pooling counts");
  eval->add_option("--min-prevalence", ea.min_prevalence, "Drop group items rarer than this in gold")
      ->capture_default_str();
  eval->add_option("--core-items", ea.core, "Members of the core group")->capture_default_str();
  eval->add_option("--other-items", ea.other, "Members of the other group")->capture_default_str();
  eval->add_flag("--agreement", ea.agreement, "Report per-document Cohen's kappa between the two files");
  eval->add_option("--kappa-threshold", ea.kappa_threshold, "Kappa below this flags a document for review")
      ->capture_default_str();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Per-item corpus statistics");
  stats->add_option("--gold", st.gold, "Labels (JSON Lines)");
  stats->add_option("--docs", st.docs, "Converted documents, when labels lack line text");
  stats->add_option("--output,-o", st.output, "CSV (default stdout)");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--seed", sy.seed, "Generator seed")->capture_default_str();
  synth->add_option("--n-docs", sy.n_docs, "Number of documents")->capture_default_str();
  synth->add_option("--first-index", sy.first_index, "Index of the first document")->capture_default_str();
  synth->add_option("--length-scale", sy.length_scale, "Item length relative to the reference corpus")
      ->capture_default_str();
  synth->add_option("--output,-o", sy.output, "Gold labels with line text (JSON Lines)");
  synth->add_option("--docs-output", sy.docs_output, "Also write the documents without labels");
  synth->add_option("--embeddings", sy.embeddings, "Also write pseudo-embeddings");
  synth->add_option("--dim", sy.dim, "Pseudo-embedding width")->capture_default_str();

  std::vector<const char*> argv{"itemseg"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fetch->parsed()) return do_fetch(fa, common, out, err);
    if (convert->parsed()) return do_convert(ca, common, err);
    if (train_crf_cmd->parsed()) return do_train_crf(tc, err);
    if (train_lstm_cmd->parsed()) return do_train_lstm(tl, err);
    if (segment->parsed()) return do_segment(sa, common, err);
    if (eval->parsed()) return do_eval(ea, out);
    if (stats->parsed()) return do_stats(st, out);
    if (synth->parsed()) return do_synth(sy);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace itemseg::cli
