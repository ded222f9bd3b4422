#pragma once

#include <chrono>
#include <map>
#include <string>

#include "itemseg/edgar.hpp"

namespace itemseg {

/// Blocking JSON POST. Throws FetchError(status 0, retriable) when the request
/// produced no response (refused connection, timeout).
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, std::chrono::seconds timeout);

}  // namespace itemseg
