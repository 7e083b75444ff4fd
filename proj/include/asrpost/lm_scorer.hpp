#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "asrpost/errors.hpp"

namespace asrpost {

// Sentence-level LM scoring backend. score() returns a finite log-probability
// <= 0 and is deterministic for a fixed backend and text within one session.
// Implementations must be safe for concurrent calls.
class LmScorer {
 public:
  virtual ~LmScorer() = default;

  // Throws ScorerError on backend failure or contract violation.
  virtual double score(const std::string& text) = 0;

  // Stable backend identity, used in cache keys.
  virtual std::string id() const = 0;
};

// Deterministic arithmetic mock: a pure function of the text bytes, always
// finite and <= 0. For tests and offline runs without an LM service.
class HashScorer final : public LmScorer {
 public:
  double score(const std::string& text) override;
  std::string id() const override { return "hash"; }
};

// File-backed scorer over precomputed sentence scores.
// JSONL format: {"text": "<sentence>", "log_prob": <number>}
class TableScorer final : public LmScorer {
 public:
  explicit TableScorer(std::map<std::string, double> scores, std::string id = "table");
  static TableScorer from_jsonl(const std::string& path);

  double score(const std::string& text) override;
  std::string id() const override { return id_; }

 private:
  std::map<std::string, double> scores_;
  std::string id_;
};

// Wire-protocol client to a token/sentence scoring service.
//   POST <endpoint>  body {"text": "<sentence>"}  ->  {"log_prob": <number>}
// Bearer auth header is attached when the configured environment variable
// (default ASRPOST_LM_API_KEY) is set.
class WireScorer final : public LmScorer {
 public:
  explicit WireScorer(std::string endpoint,
                      std::chrono::milliseconds timeout = std::chrono::milliseconds(30000),
                      std::string api_key_env = "ASRPOST_LM_API_KEY");

  double score(const std::string& text) override;
  std::string id() const override { return "wire:" + endpoint_; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  std::string api_key_env_;
};

// Memoizes scores per (backend id, text) for the lifetime of the wrapper so
// repeated texts and sweep re-runs never hit the backend twice.
class CachingScorer final : public LmScorer {
 public:
  explicit CachingScorer(std::shared_ptr<LmScorer> inner);

  double score(const std::string& text) override;
  std::string id() const override { return inner_->id(); }

  size_t cache_size() const;

 private:
  std::shared_ptr<LmScorer> inner_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> cache_;
};

}  // namespace asrpost
