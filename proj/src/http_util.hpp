#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>

#include "asrpost/errors.hpp"

namespace asrpost {

struct ParsedUrl {
  std::string scheme;  // http or https
  std::string host;
  int port = 0;
  std::string path;  // may be empty
};

inline ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  std::string rest;
  if (url.rfind("http://", 0) == 0) {
    out.scheme = "http";
    out.port = 80;
    rest = url.substr(7);
  } else if (url.rfind("https://", 0) == 0) {
    out.scheme = "https";
    out.port = 443;
    rest = url.substr(8);
  } else {
    throw ValidationError("endpoint must start with http:// or https://: " + url);
  }
  auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) {
    out.path = rest.substr(slash);
  }
  auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad port in endpoint: " + url);
    }
  } else {
    out.host = authority;
  }
  if (out.host.empty()) {
    throw ValidationError("endpoint has no host: " + url);
  }
  return out;
}

inline std::unique_ptr<httplib::Client> make_http_client(const ParsedUrl& url,
                                                         std::chrono::milliseconds timeout) {
  auto base = url.scheme + "://" + url.host + ":" + std::to_string(url.port);
  auto client = std::make_unique<httplib::Client>(base);
  client->set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout) +
                                 std::chrono::seconds(1));
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  return client;
}

}  // namespace asrpost
