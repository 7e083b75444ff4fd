#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "asrpost/corpus.hpp"
#include "asrpost/errors.hpp"
#include "asrpost/prompting.hpp"

namespace asrpost {

struct LlmConfig {
  std::string model_id = "gpt-4";
  // In [0, 2]; default matches the best observed correction configuration.
  double temperature = 0.2;
  int max_output_tokens = 256;
  std::chrono::milliseconds request_timeout{30000};
  // Transient failures retried with exponential backoff; total attempts are
  // at most max_retries + 1.
  int max_retries = 3;
  std::chrono::milliseconds retry_base_delay{200};
  // Move the prompt's first line into a system message instead of sending the
  // whole prompt as one user turn.
  bool system_role_split = false;
};

void validate(const LlmConfig& config);

struct LlmResponse {
  std::string raw_text;
  std::chrono::microseconds backend_latency{0};
  int attempt_count = 1;
};

// One shot against a completion backend; no retry policy here. Backends never
// mutate the prompt, and mock backends are pure functions of (prompt, config).
// Implementations must be safe for concurrent calls.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  virtual std::string name() const = 0;

  // Returns the single completion text. Throws an LlmError subtype carrying
  // the prompt's utterance id on failure.
  virtual std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) = 0;
};

// Returns the target unchanged; stage 2 becomes a no-op.
class EchoBackend final : public LlmBackend {
 public:
  std::string name() const override { return "echo"; }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;
};

// Per word position of the target, takes the majority word across target and
// all variants covering that position; a tied vote keeps the target's word.
class SubstitutionOracleBackend final : public LlmBackend {
 public:
  std::string name() const override { return "oracle-substitution"; }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;
};

// Test-only: returns the candidate (target or variant) with the fewest edit
// errors against the utterance's reference. Exists to drive the
// pipeline-improvement acceptance property; never use it to report results.
class BestWerOracleBackend final : public LlmBackend {
 public:
  explicit BestWerOracleBackend(ReferenceSet references);

  std::string name() const override { return "oracle-best-wer"; }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;

 private:
  ReferenceSet references_;
};

// Replays canned responses keyed by the SHA-256 of the full prompt text.
// Fixture JSONL: {"prompt_sha256": "<hex>", "response": "<text>"}
class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> responses);
  static ScriptedBackend from_jsonl(const std::string& path);

  std::string name() const override { return "scripted"; }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;

 private:
  std::map<std::string, std::string> responses_;
};

// Chat-completion wire client. POSTs provider-standard JSON to
// <endpoint>/v1/chat/completions with the prompt as a single user message
// (or a system+user pair under config.system_role_split); expects
// choices[0].message.content back. Bearer auth from the configured
// environment variable when set.
class WireBackend final : public LlmBackend {
 public:
  explicit WireBackend(std::string endpoint, std::string api_key_env = "ASRPOST_LLM_API_KEY");

  std::string name() const override { return "wire"; }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;

 private:
  std::string endpoint_;
  std::string api_key_env_;
};

// Memoizes completions by prompt SHA-256 so sweeps that only move beta never
// re-query. Assumes a fixed LlmConfig for the wrapper's lifetime.
class CachingBackend final : public LlmBackend {
 public:
  explicit CachingBackend(std::shared_ptr<LlmBackend> inner);

  std::string name() const override { return inner_->name(); }
  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override;

  size_t cache_size() const;

 private:
  std::shared_ptr<LlmBackend> inner_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> cache_;
};

struct BackendOptions {
  std::string endpoint;
  std::string fixture_path;
  // Required by oracle-best-wer.
  const ReferenceSet* references = nullptr;
  std::string api_key_env = "ASRPOST_LLM_API_KEY";
};

// name in {wire, echo, oracle-substitution, oracle-best-wer, scripted}.
// Throws ValidationError on an unknown name or missing option.
std::shared_ptr<LlmBackend> select_backend(const std::string& name,
                                           const BackendOptions& options = {});

// Retry/backoff wrapper around a backend. Transient errors are retried up to
// config.max_retries extra attempts with exponentially growing, non-decreasing
// delays; the sleeper is injectable for tests.
class LlmGateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit LlmGateway(std::shared_ptr<LlmBackend> backend, Sleeper sleeper = {});

  LlmResponse complete(const RenderedPrompt& prompt, const LlmConfig& config);

  LlmBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<LlmBackend> backend_;
  Sleeper sleeper_;
};

}  // namespace asrpost
