#include "asrpost/lm_scorer.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "http_util.hpp"

namespace asrpost {

double HashScorer::score(const std::string& text) {
  // FNV-1a over the bytes, folded into a stable negative pseudo log-prob.
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return -0.5 - static_cast<double>(h % 9973) / 997.0;
}

TableScorer::TableScorer(std::map<std::string, double> scores, std::string id)
    : scores_(std::move(scores)), id_(std::move(id)) {
  for (const auto& [text, log_prob] : scores_) {
    if (!std::isfinite(log_prob) || log_prob > 0.0) {
      throw ValidationError("table score for \"" + text + "\" must be finite and <= 0");
    }
  }
}

TableScorer TableScorer::from_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open score file: " + path);
  }
  std::map<std::string, double> scores;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      auto record = nlohmann::json::parse(line);
      scores[record.at("text").get<std::string>()] = record.at("log_prob").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, std::string("bad score record: ") + e.what());
    }
  }
  return TableScorer(std::move(scores), "file:" + path);
}

double TableScorer::score(const std::string& text) {
  auto it = scores_.find(text);
  if (it == scores_.end()) {
    throw ScorerError("no precomputed score for: \"" + text + "\"");
  }
  return it->second;
}

WireScorer::WireScorer(std::string endpoint, std::chrono::milliseconds timeout,
                       std::string api_key_env)
    : endpoint_(std::move(endpoint)), timeout_(timeout), api_key_env_(std::move(api_key_env)) {
  if (endpoint_.empty()) {
    throw ValidationError("wire scorer requires an endpoint");
  }
}

double WireScorer::score(const std::string& text) {
  const ParsedUrl url = parse_url(endpoint_);
  // One client per call keeps score() safe for concurrent use.
  auto client = make_http_client(url, timeout_);
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = nlohmann::json{{"text", text}}.dump();
  auto res = client->Post(url.path.empty() ? "/" : url.path, headers, body, "application/json");
  if (!res) {
    throw ScorerError("scoring service unreachable (" + httplib::to_string(res.error()) +
                      "): " + endpoint_);
  }
  if (res->status != 200) {
    throw ScorerError("scoring service returned HTTP " + std::to_string(res->status));
  }
  double log_prob = 0.0;
  try {
    log_prob = nlohmann::json::parse(res->body).at("log_prob").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("bad scoring response: ") + e.what());
  }
  if (!std::isfinite(log_prob) || log_prob > 0.0) {
    throw ScorerError("scoring service returned an invalid log_prob");
  }
  return log_prob;
}

CachingScorer::CachingScorer(std::shared_ptr<LmScorer> inner) : inner_(std::move(inner)) {
  if (!inner_) {
    throw ValidationError("caching scorer requires a backend");
  }
}

double CachingScorer::score(const std::string& text) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(text); it != cache_.end()) {
      return it->second;
    }
  }
  const double value = inner_->score(text);
  std::lock_guard lock(mutex_);
  return cache_.emplace(text, value).first->second;
}

size_t CachingScorer::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace asrpost
