#include "asrpost/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asrpost/config.hpp"
#include "asrpost/corpus.hpp"
#include "asrpost/eval.hpp"
#include "asrpost/pipeline.hpp"
#include "asrpost/rescore.hpp"
#include "asrpost/sweep.hpp"

namespace asrpost {

namespace {

struct CommonOpts {
  std::string corpus_path;
  std::string refs_path;
  std::string config_path;
  std::string out_path;
  bool json = false;

  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> n_best;
  std::optional<std::string> scorer;
  std::optional<std::string> scorer_file;
  std::optional<std::string> lm_endpoint;
  std::optional<std::string> llm;
  std::optional<std::string> llm_fixture;
  std::optional<std::string> llm_endpoint;
  std::optional<std::string> model;
  std::optional<double> temperature;
  std::optional<int> max_retries;
  std::optional<int> request_timeout_ms;
  std::optional<std::string> spelling;
  std::optional<std::string> variant_order;
  std::optional<std::string> prompt_template;
  std::optional<int> max_variants;
  std::optional<bool> allow_new_words;
  std::optional<bool> enforce_length;
  std::optional<int> length_tolerance;
  std::optional<int> workers;
  std::vector<std::string> set_entries;
};

void add_common_options(CLI::App* cmd, CommonOpts& opts, bool with_corpus, bool with_refs) {
  if (with_corpus) {
    cmd->add_option("--corpus", opts.corpus_path, "N-best JSONL corpus")->required();
  }
  if (with_refs) {
    cmd->add_option("--refs", opts.refs_path, "Reference transcripts (id<TAB>transcript)");
  }
  cmd->add_option("--config", opts.config_path, "Key-value config file");
  cmd->add_flag("--json", opts.json, "Machine-readable JSON output");
  cmd->add_option("--alpha", opts.alpha, "LM interpolation weight");
  cmd->add_option("--beta", opts.beta, "Confidence threshold in [0,1]");
  cmd->add_option("--n-best", opts.n_best, "Keep top-N rescored hypotheses");
  cmd->add_option("--scorer", opts.scorer, "LM scorer backend: hash|file|wire");
  cmd->add_option("--scorer-file", opts.scorer_file, "Precomputed score JSONL (file scorer)");
  cmd->add_option("--lm-endpoint", opts.lm_endpoint, "Scoring service URL (wire scorer)");
  cmd->add_option("--llm", opts.llm,
                  "LLM backend: echo|oracle-substitution|oracle-best-wer|scripted|wire");
  cmd->add_option("--llm-fixture", opts.llm_fixture, "Scripted-backend fixture JSONL");
  cmd->add_option("--llm-endpoint", opts.llm_endpoint, "Chat-completion base URL (wire backend)");
  cmd->add_option("--model", opts.model, "Chat-completion model id");
  cmd->add_option("--temperature", opts.temperature, "Sampling temperature in [0,2]");
  cmd->add_option("--max-retries", opts.max_retries, "Transient-failure retry budget");
  cmd->add_option("--timeout-ms", opts.request_timeout_ms, "Per-request timeout");
  cmd->add_option("--spelling", opts.spelling, "Prompt rule 7 spelling: us|uk");
  cmd->add_option("--variant-order", opts.variant_order, "Prompt variant order: rescored|beam");
  cmd->add_option("--template", opts.prompt_template, "Prompt template file override");
  cmd->add_option("--max-variants", opts.max_variants, "Cap on prompt variants");
  cmd->add_option("--allow-new-words", opts.allow_new_words,
                  "Guard: accept words outside the N-best union");
  cmd->add_option("--enforce-length", opts.enforce_length, "Guard: enforce word-count rule");
  cmd->add_option("--length-tolerance", opts.length_tolerance, "Guard: word-count slack");
  cmd->add_option("--workers", opts.workers, "Utterance worker threads");
  cmd->add_option("--set", opts.set_entries, "Extra config override, key=value");
}

PipelineConfig build_config(const CommonOpts& opts) {
  PipelineConfig config;
  if (!opts.config_path.empty()) {
    config = load_config(opts.config_path);
  }
  if (opts.alpha) config.alpha = *opts.alpha;
  if (opts.beta) config.beta = *opts.beta;
  if (opts.n_best) config.n_best_cap = *opts.n_best;
  if (opts.scorer) config.scorer = *opts.scorer;
  if (opts.scorer_file) config.scorer_file = *opts.scorer_file;
  if (opts.lm_endpoint) config.lm_endpoint = *opts.lm_endpoint;
  if (opts.llm) config.llm = *opts.llm;
  if (opts.llm_fixture) config.llm_fixture = *opts.llm_fixture;
  if (opts.llm_endpoint) config.llm_endpoint = *opts.llm_endpoint;
  if (opts.model) config.llm_params.model_id = *opts.model;
  if (opts.temperature) config.llm_params.temperature = *opts.temperature;
  if (opts.max_retries) config.llm_params.max_retries = *opts.max_retries;
  if (opts.request_timeout_ms) {
    config.llm_params.request_timeout = std::chrono::milliseconds(*opts.request_timeout_ms);
  }
  if (opts.max_variants) config.prompt.max_variants = *opts.max_variants;
  if (opts.prompt_template) config.prompt.template_path = *opts.prompt_template;
  if (opts.allow_new_words) config.guard.allow_new_words = *opts.allow_new_words;
  if (opts.enforce_length) config.guard.enforce_length = *opts.enforce_length;
  if (opts.length_tolerance) config.guard.length_tolerance = *opts.length_tolerance;
  if (opts.workers) config.workers = *opts.workers;
  if (opts.spelling) apply_config_entry(config, "spelling", *opts.spelling);
  if (opts.variant_order) apply_config_entry(config, "variant_order", *opts.variant_order);
  for (const auto& entry : opts.set_entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--set expects key=value, got: " + entry);
    }
    apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  return config;
}

// Records (JSONL) go to --out when given, else stdout; the summary goes to
// stdout when records went to a file, else stderr.
struct OutputPlan {
  std::ofstream file;
  bool records_to_file = false;

  explicit OutputPlan(const std::string& out_path) {
    if (!out_path.empty()) {
      file.open(out_path, std::ios::binary);
      if (!file) {
        throw IoError("cannot write output file: " + out_path);
      }
      records_to_file = true;
    }
  }

  std::ostream& records() { return records_to_file ? file : std::cout; }
  std::ostream& summary() { return records_to_file ? std::cout : std::cerr; }

  void finish(const std::string& out_path) {
    if (records_to_file) {
      file.flush();
      if (!file) {
        throw IoError("write failed: " + out_path);
      }
    }
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& warning : warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
}

int cmd_rescore(const CommonOpts& opts) {
  const PipelineConfig config = build_config(opts);
  validate(config);
  const Corpus corpus = load_nbest(opts.corpus_path);
  const PipelineBackends backends = assemble_backends(config);

  OutputPlan out(opts.out_path);
  const RescoreConfig rescore_config{config.alpha};
  for (const auto& list : corpus) {
    const RescoredList rescored =
        truncate_to(rescore_list(list, *backends.scorer, rescore_config),
                    static_cast<size_t>(config.n_best_cap));
    nlohmann::ordered_json record;
    record["utterance_id"] = rescored.utterance_id;
    auto& entries = record["entries"] = nlohmann::ordered_json::array();
    for (const auto& entry : rescored.entries) {
      entries.push_back({{"text", entry.text},
                         {"asr_log_prob", entry.asr_log_prob},
                         {"lm_log_prob", entry.lm_log_prob},
                         {"combined_score", entry.combined_score},
                         {"original_rank", entry.original_rank}});
    }
    out.records() << record.dump() << '\n';
  }
  out.finish(opts.out_path);
  if (opts.json) {
    out.summary() << nlohmann::ordered_json{{"total", corpus.size()}, {"alpha", config.alpha}}
                         .dump(2)
                  << '\n';
  } else {
    out.summary() << "rescored " << corpus.size() << " utterances (alpha=" << config.alpha
                  << ")\n";
  }
  return 0;
}

int cmd_route(const CommonOpts& opts) {
  const PipelineConfig config = build_config(opts);
  validate(config);
  const Corpus corpus = load_nbest(opts.corpus_path);
  const PipelineBackends backends = assemble_backends(config);

  OutputPlan out(opts.out_path);
  const RescoreConfig rescore_config{config.alpha};
  long escalated = 0;
  for (const auto& list : corpus) {
    const RescoredList rescored =
        truncate_to(rescore_list(list, *backends.scorer, rescore_config),
                    static_cast<size_t>(config.n_best_cap));
    const RouteDecision decision = route(softmax_confidence(rescored), config.beta);
    escalated += decision.verdict == Verdict::Escalate ? 1 : 0;
    out.records() << nlohmann::ordered_json{{"utterance_id", decision.utterance_id},
                                            {"confidence", decision.confidence},
                                            {"verdict", to_string(decision.verdict)},
                                            {"beta", decision.beta}}
                         .dump()
                  << '\n';
  }
  out.finish(opts.out_path);
  const double fraction = corpus.empty() ? 0.0 : static_cast<double>(escalated) / corpus.size();
  if (opts.json) {
    out.summary() << nlohmann::ordered_json{{"total", corpus.size()},
                                            {"escalated", escalated},
                                            {"escalated_fraction", fraction},
                                            {"beta", config.beta}}
                         .dump(2)
                  << '\n';
  } else {
    out.summary() << "escalated " << escalated << "/" << corpus.size() << " utterances (beta="
                  << config.beta << ")\n";
  }
  return 0;
}

int run_and_emit(const CommonOpts& opts, PipelineConfig config) {
  validate(config);
  const Corpus corpus = load_nbest(opts.corpus_path);
  std::optional<ReferenceSet> refs;
  if (!opts.refs_path.empty()) {
    refs = load_references(opts.refs_path);
  }
  const PipelineBackends backends = assemble_backends(config, refs ? &*refs : nullptr);
  const RunOutput output = run(corpus, refs ? &*refs : nullptr, config, backends);

  print_warnings(output.warnings);
  OutputPlan out(opts.out_path);
  out.records() << results_to_jsonl(output.results);
  out.finish(opts.out_path);
  if (opts.json) {
    out.summary() << report_to_json(output.report).dump(2) << '\n';
  } else {
    out.summary() << report_to_text(output.report);
  }
  return 0;
}

int cmd_run(const CommonOpts& opts) { return run_and_emit(opts, build_config(opts)); }

// LLM-correction-only ablation: every routable utterance goes to stage 2.
int cmd_correct(const CommonOpts& opts) {
  PipelineConfig config = build_config(opts);
  config.beta = 1.0;
  return run_and_emit(opts, config);
}

int cmd_sweep(const CommonOpts& opts, const std::vector<double>& alphas,
              const std::vector<double>& betas, const std::vector<int>& n_values) {
  const PipelineConfig config = build_config(opts);
  validate(config);
  const Corpus corpus = load_nbest(opts.corpus_path);
  const ReferenceSet refs = load_references(opts.refs_path);
  const PipelineBackends backends = assemble_backends(config, &refs);

  SweepGrid grid = SweepGrid::defaults();
  if (!alphas.empty()) grid.alphas = alphas;
  if (!betas.empty()) grid.betas = betas;
  if (!n_values.empty()) grid.n_values = n_values;

  const SweepResult result = sweep(corpus, refs, grid, config, backends);
  if (opts.json) {
    std::cout << sweep_to_json(result).dump(2) << '\n';
  } else {
    std::cout << sweep_to_table(result);
  }
  return 0;
}

int cmd_score(const std::string& refs_path, const std::string& hyps_path, bool json,
              bool verbose_alignment) {
  const ReferenceSet refs = load_references(refs_path);
  const std::vector<CorrectionResult> results = load_results(hyps_path);
  std::map<std::string, std::string> finals;
  for (const auto& result : results) {
    if (!finals.emplace(result.utterance_id, result.final_text).second) {
      throw ValidationError("duplicate utterance_id in hypotheses: " + result.utterance_id);
    }
  }
  const WerReport report = corpus_wer(refs, finals);
  if (json) {
    std::cout << report_to_json(report).dump(2) << '\n';
  } else {
    std::cout << report_to_table(report);
    if (verbose_alignment) {
      for (const auto& [id, score] : report.per_utterance) {
        std::cout << alignment_dump(id, score.alignment);
      }
    }
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Two-stage ASR N-best post-processing: LM rescoring, softmax-confidence routing, "
               "rule-guarded LLM correction, WER scoring."};
  app.require_subcommand(1);

  CommonOpts rescore_opts;
  auto* rescore_cmd = app.add_subcommand("rescore", "LM-rescore an N-best corpus");
  add_common_options(rescore_cmd, rescore_opts, /*with_corpus=*/true, /*with_refs=*/false);
  rescore_cmd->add_option("--out", rescore_opts.out_path, "Write rescored JSONL here");

  CommonOpts route_opts;
  auto* route_cmd = app.add_subcommand("route", "Confidence-route a corpus against beta");
  add_common_options(route_cmd, route_opts, true, false);
  route_cmd->add_option("--out", route_opts.out_path, "Write route-decision JSONL here");

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run the full two-stage pipeline");
  add_common_options(run_cmd, run_opts, true, true);
  run_cmd->add_option("--out", run_opts.out_path, "Write result JSONL here");

  CommonOpts correct_opts;
  auto* correct_cmd =
      app.add_subcommand("correct", "LLM-correct every utterance (beta=1 ablation)");
  add_common_options(correct_cmd, correct_opts, true, true);
  correct_cmd->add_option("--out", correct_opts.out_path, "Write result JSONL here");

  CommonOpts sweep_opts;
  std::vector<double> sweep_alphas;
  std::vector<double> sweep_betas;
  std::vector<int> sweep_n;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search N, alpha, beta on a dev corpus");
  add_common_options(sweep_cmd, sweep_opts, true, true);
  sweep_cmd->get_option("--refs")->required();
  sweep_cmd->add_option("--alphas", sweep_alphas, "Alpha grid values (default 1.0..5.0 step 0.1)");
  sweep_cmd->add_option("--betas", sweep_betas, "Beta grid values (default 0.0..1.0 step 0.05)");
  sweep_cmd->add_option("--n-values", sweep_n, "N grid values (default 5 8 16)");

  std::string score_refs;
  std::string score_hyps;
  bool score_json = false;
  bool score_verbose = false;
  auto* score_cmd = app.add_subcommand("score", "WER of hypothesis texts against references");
  score_cmd->add_option("--refs", score_refs, "Reference transcripts")->required();
  score_cmd->add_option("--hyps", score_hyps, "Hypothesis JSONL (result format or {id, text})")
      ->required();
  score_cmd->add_flag("--json", score_json, "Machine-readable JSON output");
  score_cmd->add_flag("--verbose-alignment", score_verbose, "Dump per-utterance alignments");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("asrpost");
  for (const auto& arg : args) {
    argv.push_back(arg.c_str());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (rescore_cmd->parsed()) return cmd_rescore(rescore_opts);
    if (route_cmd->parsed()) return cmd_route(route_opts);
    if (run_cmd->parsed()) return cmd_run(run_opts);
    if (correct_cmd->parsed()) return cmd_correct(correct_opts);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, sweep_alphas, sweep_betas, sweep_n);
    if (score_cmd->parsed()) return cmd_score(score_refs, score_hyps, score_json, score_verbose);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace asrpost
