#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asrpost/config.hpp"
#include "asrpost/confidence.hpp"
#include "asrpost/corpus.hpp"
#include "asrpost/eval.hpp"
#include "asrpost/llm_gateway.hpp"

namespace asrpost {

enum class Provenance { Stage1Accept, LlmAccepted, GuardFallback };

const char* to_string(Provenance provenance);

struct CorrectionResult {
  std::string utterance_id;
  std::string final_text;
  Provenance provenance = Provenance::Stage1Accept;
  // Unset when scoring failed and the utterance was degraded unrouted.
  std::optional<double> confidence;
  Verdict route_verdict = Verdict::Accept;
  std::optional<std::string> raw_llm_text;
};

struct RunReport {
  long total = 0;
  long escalated = 0;
  double escalated_fraction = 0.0;
  long stage1_accept = 0;
  long llm_accepted = 0;
  long guard_fallback = 0;
  // Utterances that fell back to stage-1 output after a backend failure.
  long degraded = 0;
  std::chrono::milliseconds wall_time{0};
  std::optional<WerReport> wer;
};

// Backend instances a run executes against. assemble_backends() builds them
// from config names and wraps both sides in memoizing caches; tests may
// inject instrumented instances directly.
struct PipelineBackends {
  std::shared_ptr<LmScorer> scorer;
  std::shared_ptr<LlmBackend> llm;
};

PipelineBackends assemble_backends(const PipelineConfig& config,
                                   const ReferenceSet* references = nullptr);

struct RunOutput {
  // Sorted by utterance_id.
  std::vector<CorrectionResult> results;
  RunReport report;
  // Per-utterance degradation notices, sorted by utterance id.
  std::vector<std::string> warnings;
};

// The full two-stage flow over a corpus: rescore, cap to N, softmax
// confidence, route against beta; accepted utterances emit the stage-1 top,
// escalated ones go through prompt -> completion -> guard. Per-utterance
// backend failures degrade that utterance to its stage-1 output with a
// warning; nothing is ever dropped. refs may be null (no WER section).
RunOutput run(const Corpus& corpus, const ReferenceSet* refs, const PipelineConfig& config,
              const PipelineBackends& backends);

// Result JSONL, one CorrectionResult per line, sorted by utterance_id.
// Stable field order and no timestamps: reruns with mock backends are
// byte-identical.
std::string results_to_jsonl(const std::vector<CorrectionResult>& results);
std::vector<CorrectionResult> results_from_jsonl(std::istream& in, const std::string& origin);
void save_results(const std::vector<CorrectionResult>& results, const std::string& path);
std::vector<CorrectionResult> load_results(const std::string& path);

nlohmann::ordered_json report_to_json(const RunReport& report);
std::string report_to_text(const RunReport& report);

}  // namespace asrpost
