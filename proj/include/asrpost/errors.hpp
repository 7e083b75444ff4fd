#pragma once

#include <stdexcept>
#include <string>

namespace asrpost {

// Base for everything this library throws on purpose. The CLI maps these to
// exit code 1 (data errors); usage errors are handled by the parser (exit 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input with a file/line location, e.g. a bad JSONL record.
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, size_t line, const std::string& what)
      : Error(origin + ":" + std::to_string(line) + ": " + what),
        origin_(origin),
        line_(line) {}

  const std::string& origin() const { return origin_; }
  size_t line() const { return line_; }

 private:
  std::string origin_;
  size_t line_ = 0;
};

// A domain invariant was violated (empty N-best list, non-finite score, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// LM scorer backend failure, wrapped with the utterance it aborted.
class ScorerError : public Error {
 public:
  explicit ScorerError(const std::string& what, std::string utterance_id = "")
      : Error(what), utterance_id_(std::move(utterance_id)) {}

  const std::string& utterance_id() const { return utterance_id_; }

 private:
  std::string utterance_id_;
};

// LLM backend failures. Each subtype is distinguishable and carries the
// utterance it belongs to; `transient()` drives the retry policy.
class LlmError : public Error {
 public:
  LlmError(const std::string& what, std::string utterance_id, bool transient)
      : Error(what), utterance_id_(std::move(utterance_id)), transient_(transient) {}

  const std::string& utterance_id() const { return utterance_id_; }
  bool transient() const { return transient_; }

 private:
  std::string utterance_id_;
  bool transient_ = false;
};

class LlmTimeoutError : public LlmError {
 public:
  LlmTimeoutError(const std::string& what, std::string utterance_id)
      : LlmError(what, std::move(utterance_id), /*transient=*/true) {}
};

class LlmAuthError : public LlmError {
 public:
  LlmAuthError(const std::string& what, std::string utterance_id)
      : LlmError(what, std::move(utterance_id), /*transient=*/false) {}
};

class LlmProtocolError : public LlmError {
 public:
  LlmProtocolError(const std::string& what, std::string utterance_id, bool transient = false)
      : LlmError(what, std::move(utterance_id), transient) {}
};

class LlmRetryExhaustedError : public LlmError {
 public:
  LlmRetryExhaustedError(const std::string& what, std::string utterance_id, int attempts)
      : LlmError(what, std::move(utterance_id), /*transient=*/false), attempts_(attempts) {}

  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

}  // namespace asrpost
