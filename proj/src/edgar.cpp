#include "itemseg/edgar.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"

namespace itemseg {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

bool leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

std::vector<std::string_view> split_pipes(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = line.find('|', start);
    fields.push_back(line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return fields;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  std::string_view y, m, d;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
  } else if (text.size() == 8) {
    y = text.substr(0, 4), m = text.substr(4, 2), d = text.substr(6, 2);
  } else {
    return std::nullopt;
  }
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  Date date{to_int(y), to_int(m), to_int(d)};
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (date.month < 1 || date.month > 12 || date.day < 1) return std::nullopt;
  int max_day = kDays[date.month - 1] + (date.month == 2 && leap_year(date.year) ? 1 : 0);
  if (date.day > max_day) return std::nullopt;
  return date;
}

std::vector<FilingRef> parse_master_index(std::string_view index_text, const std::set<std::string>& form_types) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= index_text.size()) {
    std::size_t nl = index_text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < index_text.size()) lines.push_back(index_text.substr(pos));
      break;
    }
    lines.push_back(index_text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }

  std::size_t header = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = split_pipes(trim(lines[i]));
    if (fields.size() == 5 && trim(fields[0]) == "CIK" && trim(fields[2]) == "Form Type") {
      header = i;
      break;
    }
  }
  if (header == lines.size()) {
    throw ParseError("master index has no \"CIK|Company Name|Form Type|Date Filed|Filename\" column header", 1);
  }
  if (header + 1 >= lines.size() || trim(lines[header + 1]).find_first_not_of('-') != std::string_view::npos ||
      trim(lines[header + 1]).empty()) {
    throw ParseError("expected a dashed rule after the column header", header + 2);
  }

  std::vector<FilingRef> refs;
  for (std::size_t i = header + 2; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (trim(line).empty()) continue;
    auto fields = split_pipes(line);
    if (fields.size() != 5) {
      throw ParseError("record has " + std::to_string(fields.size()) + " fields, expected 5", i + 1);
    }
    FilingRef ref;
    ref.cik = std::string(trim(fields[0]));
    ref.company_name = std::string(trim(fields[1]));
    ref.form_type = std::string(trim(fields[2]));
    ref.path = std::string(trim(fields[4]));
    if (!all_digits(ref.cik)) throw ParseError("CIK is not a digit string", i + 1);
    if (ref.form_type.empty()) throw ParseError("empty form type", i + 1);
    if (ref.path.empty()) throw ParseError("empty filename", i + 1);
    auto date = parse_date(trim(fields[3]));
    if (!date) throw ParseError("invalid filing date \"" + std::string(trim(fields[3])) + "\"", i + 1);
    ref.date_filed = *date;
    if (form_types.contains(ref.form_type)) refs.push_back(std::move(ref));
  }
  return refs;
}

RateLimiter::RateLimiter(double per_second)
    : interval_(per_second > 0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(1.0 / per_second))
                               : std::chrono::steady_clock::duration::zero()),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, std::string_view archive_path) {
  std::string name(archive_path);
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return cache_dir / name;
}

EdgarClient::EdgarClient(FetchConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)), limiter_(config_.max_requests_per_second) {
  if (config_.user_agent.empty()) throw Error("EDGAR fetching requires a User-Agent string");
}

std::string EdgarClient::fetch(std::string_view archive_path) {
  auto cached = cache_path(config_.cache_dir, archive_path);
  if (std::filesystem::exists(cached)) return read_file(cached);

  std::string url = config_.base_url;
  if (!url.empty() && url.back() != '/') url += '/';
  url += archive_path;

  limiter_.acquire();
  HttpResponse resp = transport_->get(url, {{"User-Agent", config_.user_agent}});
  if (resp.status != 200) {
    bool retriable = resp.status == 429 || resp.status >= 500;
    throw FetchError("GET " + url + " returned HTTP " + std::to_string(resp.status), resp.status, retriable);
  }

  std::error_code ec;
  std::filesystem::create_directories(config_.cache_dir, ec);
  if (ec) throw IoError("cannot create cache directory " + config_.cache_dir.string() + ": " + ec.message());
  write_file_atomic(cached, resp.body);
  return std::move(resp.body);
}

}  // namespace itemseg
