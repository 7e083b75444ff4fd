#include "asrpost/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asrpost/eval.hpp"
#include "asrpost/guard.hpp"
#include "asrpost/sha256.hpp"
#include "http_util.hpp"

namespace asrpost {

void validate(const LlmConfig& config) {
  if (!std::isfinite(config.temperature) || config.temperature < 0.0 ||
      config.temperature > 2.0) {
    throw ValidationError("temperature must be in [0, 2]");
  }
  if (config.max_output_tokens < 1) {
    throw ValidationError("max_output_tokens must be >= 1");
  }
  if (config.max_retries < 0) {
    throw ValidationError("max_retries must be >= 0");
  }
}

std::string EchoBackend::complete_once(const RenderedPrompt& prompt, const LlmConfig&) {
  return prompt.target;
}

std::string SubstitutionOracleBackend::complete_once(const RenderedPrompt& prompt,
                                                     const LlmConfig&) {
  const std::vector<std::string> target_words = tokenize(prompt.target);
  std::vector<std::vector<std::string>> variant_words;
  variant_words.reserve(prompt.variants.size());
  for (const auto& variant : prompt.variants) {
    variant_words.push_back(tokenize(variant));
  }

  std::string out;
  for (size_t pos = 0; pos < target_words.size(); ++pos) {
    std::unordered_map<std::string, int> votes;
    ++votes[target_words[pos]];
    for (const auto& words : variant_words) {
      if (pos < words.size()) {
        ++votes[words[pos]];
      }
    }
    int best_count = 0;
    bool unique = false;
    std::string best_word;
    for (const auto& [word, count] : votes) {
      if (count > best_count) {
        best_count = count;
        best_word = word;
        unique = true;
      } else if (count == best_count) {
        unique = false;
      }
    }
    const std::string& chosen = unique ? best_word : target_words[pos];
    if (!out.empty()) {
      out += ' ';
    }
    out += chosen;
  }
  return out;
}

BestWerOracleBackend::BestWerOracleBackend(ReferenceSet references)
    : references_(std::move(references)) {}

std::string BestWerOracleBackend::complete_once(const RenderedPrompt& prompt, const LlmConfig&) {
  if (!references_.contains(prompt.utterance_id)) {
    throw LlmProtocolError("oracle-best-wer has no reference for utterance",
                           prompt.utterance_id);
  }
  const std::string reference = normalize(references_.lookup(prompt.utterance_id));
  std::vector<const std::string*> candidates;
  candidates.push_back(&prompt.target);
  for (const auto& variant : prompt.variants) {
    candidates.push_back(&variant);
  }
  const std::string* best = candidates.front();
  int best_errors = align(reference, normalize(*best)).edit_count();
  for (size_t i = 1; i < candidates.size(); ++i) {
    const int errors = align(reference, normalize(*candidates[i])).edit_count();
    if (errors < best_errors) {
      best_errors = errors;
      best = candidates[i];
    }
  }
  return *best;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedBackend ScriptedBackend::from_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scripted fixture: " + path);
  }
  std::map<std::string, std::string> responses;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      auto record = nlohmann::json::parse(line);
      responses[record.at("prompt_sha256").get<std::string>()] =
          record.at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, std::string("bad fixture record: ") + e.what());
    }
  }
  return ScriptedBackend(std::move(responses));
}

std::string ScriptedBackend::complete_once(const RenderedPrompt& prompt, const LlmConfig&) {
  const std::string key = sha256_hex(prompt.text);
  auto it = responses_.find(key);
  if (it == responses_.end()) {
    throw LlmProtocolError("scripted fixture has no response for prompt " + key,
                           prompt.utterance_id);
  }
  return it->second;
}

WireBackend::WireBackend(std::string endpoint, std::string api_key_env)
    : endpoint_(std::move(endpoint)), api_key_env_(std::move(api_key_env)) {
  if (endpoint_.empty()) {
    throw ValidationError("wire backend requires an endpoint");
  }
}

std::string WireBackend::complete_once(const RenderedPrompt& prompt, const LlmConfig& config) {
  const ParsedUrl url = parse_url(endpoint_);
  auto client = make_http_client(url, config.request_timeout);
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json messages = nlohmann::json::array();
  if (config.system_role_split) {
    const auto split = prompt.text.find('\n');
    const std::string system_part = prompt.text.substr(0, split);
    const std::string user_part =
        split == std::string::npos ? std::string() : prompt.text.substr(split + 1);
    messages.push_back({{"role", "system"}, {"content", system_part}});
    messages.push_back({{"role", "user"}, {"content", user_part}});
  } else {
    messages.push_back({{"role", "user"}, {"content", prompt.text}});
  }
  const nlohmann::json body = {{"model", config.model_id},
                               {"temperature", config.temperature},
                               {"max_tokens", config.max_output_tokens},
                               {"n", 1},
                               {"messages", messages}};

  const std::string path = url.path.empty() ? "/v1/chat/completions" : url.path;
  auto res = client->Post(path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what =
        "chat completion transport error (" + httplib::to_string(err) + "): " + endpoint_;
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw LlmTimeoutError(what, prompt.utterance_id);
    }
    throw LlmProtocolError(what, prompt.utterance_id, /*transient=*/true);
  }
  if (res->status == 401 || res->status == 403) {
    throw LlmAuthError("chat completion auth failure (HTTP " + std::to_string(res->status) + ")",
                       prompt.utterance_id);
  }
  if (res->status == 408) {
    throw LlmTimeoutError("chat completion HTTP 408", prompt.utterance_id);
  }
  if (res->status != 200) {
    const bool transient = res->status == 429 || res->status >= 500;
    throw LlmProtocolError("chat completion HTTP " + std::to_string(res->status),
                           prompt.utterance_id, transient);
  }
  try {
    const auto parsed = nlohmann::json::parse(res->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmProtocolError(std::string("bad chat completion response: ") + e.what(),
                           prompt.utterance_id);
  }
}

CachingBackend::CachingBackend(std::shared_ptr<LlmBackend> inner) : inner_(std::move(inner)) {
  if (!inner_) {
    throw ValidationError("caching backend requires an inner backend");
  }
}

std::string CachingBackend::complete_once(const RenderedPrompt& prompt, const LlmConfig& config) {
  const std::string key = sha256_hex(prompt.text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      return it->second;
    }
  }
  const std::string value = inner_->complete_once(prompt, config);
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, value).first->second;
}

size_t CachingBackend::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::shared_ptr<LlmBackend> select_backend(const std::string& name,
                                           const BackendOptions& options) {
  if (name == "echo") {
    return std::make_shared<EchoBackend>();
  }
  if (name == "oracle-substitution") {
    return std::make_shared<SubstitutionOracleBackend>();
  }
  if (name == "oracle-best-wer") {
    if (options.references == nullptr) {
      throw ValidationError("oracle-best-wer backend needs references");
    }
    return std::make_shared<BestWerOracleBackend>(*options.references);
  }
  if (name == "scripted") {
    if (options.fixture_path.empty()) {
      throw ValidationError("scripted backend needs a fixture path");
    }
    return std::make_shared<ScriptedBackend>(ScriptedBackend::from_jsonl(options.fixture_path));
  }
  if (name == "wire") {
    if (options.endpoint.empty()) {
      throw ValidationError("wire backend needs an endpoint");
    }
    return std::make_shared<WireBackend>(options.endpoint, options.api_key_env);
  }
  throw ValidationError("unknown LLM backend: " + name);
}

LlmGateway::LlmGateway(std::shared_ptr<LlmBackend> backend, Sleeper sleeper)
    : backend_(std::move(backend)), sleeper_(std::move(sleeper)) {
  if (!backend_) {
    throw ValidationError("gateway requires a backend");
  }
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

LlmResponse LlmGateway::complete(const RenderedPrompt& prompt, const LlmConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 1; attempt <= config.max_retries + 1; ++attempt) {
    try {
      LlmResponse response;
      response.raw_text = backend_->complete_once(prompt, config);
      response.attempt_count = attempt;
      response.backend_latency = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - start);
      return response;
    } catch (const LlmError& e) {
      if (!e.transient()) {
        throw;
      }
      last_error = e.what();
      if (attempt <= config.max_retries) {
        // Doubling each attempt keeps the delay sequence non-decreasing.
        sleeper_(config.retry_base_delay * (1LL << (attempt - 1)));
      }
    }
  }
  throw LlmRetryExhaustedError("retry budget exhausted after " +
                                   std::to_string(config.max_retries + 1) +
                                   " attempts; last error: " + last_error,
                               prompt.utterance_id, config.max_retries + 1);
}

}  // namespace asrpost
