#include "asrpost/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <thread>

#include "asrpost/guard.hpp"
#include "asrpost/prompting.hpp"

namespace asrpost {

namespace {

// Decorator holding a concurrency permit across each backend call, so at most
// `cap` scorer/LLM requests are in flight regardless of worker count.
class Gate {
 public:
  explicit Gate(int cap) : semaphore_(cap) {}

  class Permit {
   public:
    explicit Permit(std::counting_semaphore<>& s) : semaphore_(s) { semaphore_.acquire(); }
    ~Permit() { semaphore_.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    std::counting_semaphore<>& semaphore_;
  };

  Permit acquire() { return Permit(semaphore_); }

 private:
  std::counting_semaphore<> semaphore_;
};

class GatedScorer final : public LmScorer {
 public:
  GatedScorer(std::shared_ptr<LmScorer> inner, Gate& gate) : inner_(std::move(inner)), gate_(gate) {}

  double score(const std::string& text) override {
    auto permit = gate_.acquire();
    return inner_->score(text);
  }

  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<LmScorer> inner_;
  Gate& gate_;
};

class GatedBackend final : public LlmBackend {
 public:
  GatedBackend(std::shared_ptr<LlmBackend> inner, Gate& gate) : inner_(std::move(inner)), gate_(gate) {}

  std::string name() const override { return inner_->name(); }

  std::string complete_once(const RenderedPrompt& prompt, const LlmConfig& config) override {
    auto permit = gate_.acquire();
    return inner_->complete_once(prompt, config);
  }

 private:
  std::shared_ptr<LlmBackend> inner_;
  Gate& gate_;
};

struct UtteranceOutcome {
  CorrectionResult result;
  std::string warning;  // empty unless degraded
};

void run_workers(size_t jobs, int workers, const std::function<void(size_t)>& body) {
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
  if (count == 1) {
    for (size_t i = 0; i < jobs; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs) {
          return;
        }
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& thread : pool) {
    thread.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace

const char* to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::Stage1Accept:
      return "STAGE1_ACCEPT";
    case Provenance::LlmAccepted:
      return "LLM_ACCEPTED";
    case Provenance::GuardFallback:
      return "GUARD_FALLBACK";
  }
  return "?";
}

PipelineBackends assemble_backends(const PipelineConfig& config, const ReferenceSet* references) {
  PipelineBackends backends;

  std::shared_ptr<LmScorer> scorer;
  if (config.scorer == "hash") {
    scorer = std::make_shared<HashScorer>();
  } else if (config.scorer == "file") {
    if (config.scorer_file.empty()) {
      throw ValidationError("file scorer needs scorer_file");
    }
    scorer = std::make_shared<TableScorer>(TableScorer::from_jsonl(config.scorer_file));
  } else if (config.scorer == "wire") {
    scorer = std::make_shared<WireScorer>(config.lm_endpoint);
  } else {
    throw ValidationError("unknown scorer backend: " + config.scorer);
  }
  backends.scorer = std::make_shared<CachingScorer>(std::move(scorer));

  BackendOptions options;
  options.endpoint = config.llm_endpoint;
  options.fixture_path = config.llm_fixture;
  options.references = references;
  backends.llm = std::make_shared<CachingBackend>(select_backend(config.llm, options));
  return backends;
}

RunOutput run(const Corpus& corpus, const ReferenceSet* refs, const PipelineConfig& config,
              const PipelineBackends& backends) {
  validate(config);
  if (!backends.scorer || !backends.llm) {
    throw ValidationError("run() needs scorer and llm backends");
  }
  const auto start = std::chrono::steady_clock::now();

  Gate lm_gate(config.lm_inflight);
  Gate llm_gate(config.llm_inflight);
  auto scorer = std::make_shared<GatedScorer>(backends.scorer, lm_gate);
  LlmGateway gateway(std::make_shared<GatedBackend>(backends.llm, llm_gate));

  const RescoreConfig rescore_config{config.alpha};
  std::vector<UtteranceOutcome> outcomes(corpus.size());

  run_workers(corpus.size(), config.workers, [&](size_t i) {
    const NBestList& list = corpus[i];
    UtteranceOutcome& outcome = outcomes[i];
    CorrectionResult& result = outcome.result;
    result.utterance_id = list.utterance_id;

    RescoredList rescored;
    try {
      rescored = truncate_to(rescore_list(list, *scorer, rescore_config),
                             static_cast<size_t>(config.n_best_cap));
    } catch (const ScorerError& e) {
      // Degrade to the decoder's own top hypothesis, unrouted.
      RescoredList raw;
      raw.utterance_id = list.utterance_id;
      raw.entries.push_back({list.hypotheses.front().text, list.hypotheses.front().asr_log_prob,
                             0.0, 0.0, 0});
      result.final_text = fallback_text(raw);
      result.provenance = Provenance::Stage1Accept;
      result.route_verdict = Verdict::Accept;
      outcome.warning = list.utterance_id + ": scorer failed, kept decoder top-1 (" + e.what() + ")";
      return;
    }

    const ConfidenceEstimate estimate = softmax_confidence(rescored);
    const RouteDecision decision = route(estimate, config.beta);
    result.confidence = estimate.confidence;
    result.route_verdict = decision.verdict;

    const bool escalate = decision.verdict == Verdict::Escalate && rescored.entries.size() >= 2;
    if (!escalate) {
      result.final_text = fallback_text(rescored);
      result.provenance = Provenance::Stage1Accept;
      return;
    }

    try {
      const RenderedPrompt prompt = build_prompt(rescored, config.prompt);
      const LlmResponse response = gateway.complete(prompt, config.llm_params);
      const GuardVerdict verdict = check(normalize(response.raw_text), rescored, config.guard);
      result.final_text = verdict.final_text;
      result.provenance = verdict.outcome == GuardOutcome::Accepted ? Provenance::LlmAccepted
                                                                    : Provenance::GuardFallback;
      result.raw_llm_text = response.raw_text;
    } catch (const LlmError& e) {
      result.final_text = fallback_text(rescored);
      result.provenance = Provenance::Stage1Accept;
      outcome.warning =
          list.utterance_id + ": LLM correction failed, kept stage-1 output (" + e.what() + ")";
    }
  });

  RunOutput output;
  output.results.reserve(outcomes.size());
  for (auto& outcome : outcomes) {
    if (!outcome.warning.empty()) {
      output.warnings.push_back(std::move(outcome.warning));
    }
    output.results.push_back(std::move(outcome.result));
  }
  std::sort(output.results.begin(), output.results.end(),
            [](const CorrectionResult& a, const CorrectionResult& b) {
              return a.utterance_id < b.utterance_id;
            });
  std::sort(output.warnings.begin(), output.warnings.end());

  RunReport& report = output.report;
  report.total = static_cast<long>(output.results.size());
  for (const auto& result : output.results) {
    if (result.route_verdict == Verdict::Escalate) {
      ++report.escalated;
    }
    switch (result.provenance) {
      case Provenance::Stage1Accept:
        ++report.stage1_accept;
        break;
      case Provenance::LlmAccepted:
        ++report.llm_accepted;
        break;
      case Provenance::GuardFallback:
        ++report.guard_fallback;
        break;
    }
  }
  report.degraded = static_cast<long>(output.warnings.size());
  report.escalated_fraction =
      report.total > 0 ? static_cast<double>(report.escalated) / report.total : 0.0;

  if (refs != nullptr) {
    std::map<std::string, std::string> finals;
    for (const auto& result : output.results) {
      finals.emplace(result.utterance_id, result.final_text);
    }
    report.wer = corpus_wer(*refs, finals);
  }
  report.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return output;
}

std::string results_to_jsonl(const std::vector<CorrectionResult>& results) {
  std::string out;
  for (const auto& result : results) {
    nlohmann::ordered_json record;
    record["utterance_id"] = result.utterance_id;
    record["final_text"] = result.final_text;
    record["provenance"] = to_string(result.provenance);
    record["route"] = to_string(result.route_verdict);
    if (result.confidence) {
      record["confidence"] = *result.confidence;
    }
    if (result.raw_llm_text) {
      record["raw_llm_text"] = *result.raw_llm_text;
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<CorrectionResult> results_from_jsonl(std::istream& in, const std::string& origin) {
  std::vector<CorrectionResult> results;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const auto record = nlohmann::json::parse(line);
      CorrectionResult result;
      record.at("utterance_id").get_to(result.utterance_id);
      if (record.contains("final_text")) {
        record.at("final_text").get_to(result.final_text);
      } else {
        record.at("text").get_to(result.final_text);
      }
      if (record.contains("provenance")) {
        const std::string p = record["provenance"].get<std::string>();
        if (p == "STAGE1_ACCEPT") {
          result.provenance = Provenance::Stage1Accept;
        } else if (p == "LLM_ACCEPTED") {
          result.provenance = Provenance::LlmAccepted;
        } else if (p == "GUARD_FALLBACK") {
          result.provenance = Provenance::GuardFallback;
        } else {
          throw ValidationError("unknown provenance: " + p);
        }
      }
      if (record.contains("route")) {
        const std::string r = record["route"].get<std::string>();
        if (r == "ACCEPT") {
          result.route_verdict = Verdict::Accept;
        } else if (r == "ESCALATE") {
          result.route_verdict = Verdict::Escalate;
        } else {
          throw ValidationError("unknown route verdict: " + r);
        }
      }
      if (record.contains("confidence")) {
        result.confidence = record["confidence"].get<double>();
      }
      if (record.contains("raw_llm_text")) {
        result.raw_llm_text = record["raw_llm_text"].get<std::string>();
      }
      results.push_back(std::move(result));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, line_no, std::string("bad result record: ") + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(origin, line_no, e.what());
    }
  }
  return results;
}

void save_results(const std::vector<CorrectionResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write results file: " + path);
  }
  out << results_to_jsonl(results);
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

std::vector<CorrectionResult> load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open results file: " + path);
  }
  return results_from_jsonl(in, path);
}

nlohmann::ordered_json report_to_json(const RunReport& report) {
  nlohmann::ordered_json out;
  out["total"] = report.total;
  out["escalated"] = report.escalated;
  out["escalated_fraction"] = report.escalated_fraction;
  out["provenance"] = {{"stage1_accept", report.stage1_accept},
                       {"llm_accepted", report.llm_accepted},
                       {"guard_fallback", report.guard_fallback}};
  out["degraded"] = report.degraded;
  out["wall_time_ms"] = report.wall_time.count();
  if (report.wer) {
    out["wer"] = report_to_json(*report.wer, /*per_utterance=*/false);
  }
  return out;
}

std::string report_to_text(const RunReport& report) {
  std::ostringstream out;
  out << "utterances:        " << report.total << '\n'
      << "escalated:         " << report.escalated << " (" << std::fixed << std::setprecision(1)
      << report.escalated_fraction * 100.0 << "%)\n"
      << "stage-1 accepted:  " << report.stage1_accept << '\n'
      << "llm accepted:      " << report.llm_accepted << '\n'
      << "guard fallbacks:   " << report.guard_fallback << '\n'
      << "degraded:          " << report.degraded << '\n'
      << "wall time:         " << report.wall_time.count() << " ms\n";
  if (report.wer) {
    out << "corpus WER:        " << std::setprecision(4) << report.wer->corpus_wer << '\n';
  }
  return out.str();
}

}  // namespace asrpost
