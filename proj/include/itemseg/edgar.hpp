#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace itemseg {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Accepts YYYY-MM-DD and YYYYMMDD; rejects impossible calendar dates.
std::optional<Date> parse_date(std::string_view text);

struct FilingRef {
  std::string cik;
  std::string company_name;
  std::string form_type;
  Date date_filed;
  std::string path;  // relative to the archive root, e.g. "edgar/data/320193/0000320193-19-000119.txt"
};

/// Parses an EDGAR full-index master.idx body: a free-form header, the
/// "CIK|Company Name|Form Type|Date Filed|Filename" column line, a dashed
/// rule, then one pipe-delimited record per line. Records whose form type is
/// not in `form_types` are dropped. Throws ParseError naming the first bad line.
std::vector<FilingRef> parse_master_index(std::string_view index_text, const std::set<std::string>& form_types);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal blocking GET. Implementations throw FetchError(status 0) when no
/// response could be obtained.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers) = 0;
};

/// cpp-httplib backed transport supporting http:// and https:// URLs.
std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(60));

/// Spaces calls so that at most `per_second` proceed per second, across threads.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

struct FetchConfig {
  std::string base_url = "https://www.sec.gov/Archives/";
  std::filesystem::path cache_dir = "edgar-cache";
  double max_requests_per_second = 8.0;
  std::string user_agent;  // EDGAR rejects anonymous clients; required.
};

/// Cache file for an archive path: separators replaced by '_'.
std::filesystem::path cache_path(const std::filesystem::path& cache_dir, std::string_view archive_path);

/// Fetches archive files through a transport with an on-disk cache. Safe for
/// concurrent use; the rate limit is shared by all callers of one instance.
class EdgarClient {
 public:
  EdgarClient(FetchConfig config, std::shared_ptr<HttpTransport> transport);

  /// Raw bytes of `archive_path`; served from cache when present, otherwise
  /// downloaded and written to cache. Throws FetchError or IoError.
  std::string fetch(std::string_view archive_path);

  std::string fetch_filing(const FilingRef& ref) { return fetch(ref.path); }

  /// "edgar/full-index/<year>/QTR<q>/master.idx"
  std::string fetch_master_index(int year, int quarter) {
    return fetch("edgar/full-index/" + std::to_string(year) + "/QTR" + std::to_string(quarter) + "/master.idx");
  }

  const FetchConfig& config() const { return config_; }

 private:
  FetchConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  RateLimiter limiter_;
};

}  // namespace itemseg
