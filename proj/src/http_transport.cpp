#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "itemseg/edgar.hpp"
#include "itemseg/error.hpp"
#include "itemseg/http_client.hpp"

namespace itemseg {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchError("not an absolute URL: " + url, 0, false);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers) override {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    auto res = client.Get(path, to_headers(headers));
    if (!res) {
      throw FetchError("GET " + url + " failed: " + httplib::to_string(res.error()), 0, true);
    }
    return {res->status, std::move(res->body)};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_unique<HttplibTransport>(timeout);
}

HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, std::chrono::seconds timeout) {
  auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(path, to_headers(headers), body, "application/json");
  if (!res) {
    throw FetchError("POST " + url + " failed: " + httplib::to_string(res.error()), 0, true);
  }
  return {res->status, std::move(res->body)};
}

}  // namespace itemseg
