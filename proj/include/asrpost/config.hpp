#pragma once

#include <iosfwd>
#include <string>

#include "asrpost/guard.hpp"
#include "asrpost/llm_gateway.hpp"
#include "asrpost/prompting.hpp"

namespace asrpost {

// Full pipeline configuration. Defaults are the tuned operating point:
// N=5, alpha=3.0, beta=0.70.
struct PipelineConfig {
  double alpha = 3.0;
  double beta = 0.70;
  // Keep the top-N entries by rescored rank before confidence and prompting.
  int n_best_cap = 5;

  // LM scorer backend: hash | file | wire.
  std::string scorer = "hash";
  std::string scorer_file;
  std::string lm_endpoint;

  // LLM backend: echo | oracle-substitution | oracle-best-wer | scripted | wire.
  std::string llm = "echo";
  std::string llm_fixture;
  std::string llm_endpoint;

  PromptConfig prompt;
  GuardConfig guard;
  LlmConfig llm_params;

  // Utterance worker pool and per-backend in-flight caps.
  int workers = 4;
  int lm_inflight = 4;
  int llm_inflight = 4;
};

void validate(const PipelineConfig& config);

// Key-value config file: one "key = value" per line, '#' comments, blank
// lines ignored. Unknown keys are errors. Keys mirror PipelineConfig; the
// full list is documented in the README.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(std::istream& in, const std::string& origin);

// Apply one key=value pair onto a config; shared by the file parser and CLI
// overrides. Throws ValidationError on unknown key or unparseable value.
void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value);

}  // namespace asrpost
