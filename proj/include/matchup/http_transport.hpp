#pragma once

// Network transport for query_model backed by httplib with TLS.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <regex>
#include <string>

#include <httplib.h>

#include "matchup/llm_client.hpp"

namespace matchup {

inline Transport http_transport() {
  return [](const HttpRequest& req) -> HttpResponse {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(req.url, m, url)) throw NetworkError("bad URL " + req.url);
    httplib::Client client(m[1].str());
    client.set_connection_timeout(req.timeout_seconds, 0);
    client.set_read_timeout(req.timeout_seconds, 0);
    client.set_write_timeout(req.timeout_seconds, 0);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : req.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    const std::string path = m[2].matched ? m[2].str() : "/";
    auto res = client.Post(path, headers, req.body, content_type);
    if (!res) throw NetworkError(httplib::to_string(res.error()));
    return {res->status, res->body};
  };
}

} // namespace matchup
