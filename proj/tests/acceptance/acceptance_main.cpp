// Acceptance suite: ten end-to-end properties of the two-stage correction
// pipeline, one pass/fail line each. Exit code 0 iff every selected
// criterion passes. Usage: acceptance_tests [--only N].

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "asrpost/cli.hpp"
#include "asrpost/config.hpp"
#include "asrpost/confidence.hpp"
#include "asrpost/corpus.hpp"
#include "asrpost/eval.hpp"
#include "asrpost/guard.hpp"
#include "asrpost/pipeline.hpp"
#include "asrpost/prompting.hpp"
#include "asrpost/rescore.hpp"
#include "asrpost/sweep.hpp"

#include "../support/edit_oracle.hpp"
#include "../support/synthetic.hpp"
#include "../support/test_util.hpp"

using namespace asrpost;
using namespace asrpost::testsupport;

namespace {

const std::string kFixtureDir = ASRPOST_TEST_DATA_DIR;

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw CheckFailure(message);
  }
}

// --- 1. softmax correctness -------------------------------------------------

void criterion_softmax() {
  std::mt19937 rng(20240801);
  std::uniform_int_distribution<int> n_dist(1, 16);
  std::uniform_real_distribution<double> score_dist(-500.0, 0.0);
  std::uniform_real_distribution<double> shift_dist(-250.0, 250.0);

  for (int round = 0; round < 10000; ++round) {
    const int n = n_dist(rng);
    std::vector<double> scores(n);
    for (double& s : scores) {
      s = score_dist(rng);
    }
    const std::vector<double> normalized = stable_softmax(scores);
    double sum = 0.0;
    for (double v : normalized) {
      require(v >= 0.0 && v <= 1.0, "softmax entry outside [0,1]");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "softmax sum off by more than 1e-9");

    const double c = shift_dist(rng);
    std::vector<double> shifted = scores;
    for (double& s : shifted) {
      s += c;
    }
    const std::vector<double> shifted_normalized = stable_softmax(shifted);
    for (int i = 0; i < n; ++i) {
      require(std::abs(normalized[i] - shifted_normalized[i]) <= 1e-9,
              "softmax not shift-invariant within 1e-9");
    }
  }
}

// --- 2. rescoring identity and monotonicity ---------------------------------

void criterion_rescoring() {
  std::mt19937 rng(20240802);
  std::uniform_int_distribution<int> n_dist(1, 16);
  std::uniform_real_distribution<double> asr_dist(-30.0, 0.0);
  std::uniform_real_distribution<double> lm_dist(-20.0, -0.1);
  std::uniform_real_distribution<double> alpha_dist(0.1, 5.0);
  std::uniform_real_distribution<double> bump_dist(0.1, 6.0);

  for (int round = 0; round < 1000; ++round) {
    const int n = n_dist(rng);
    NBestList list;
    list.utterance_id = "acc2";
    std::map<std::string, double> table;
    for (int k = 0; k < n; ++k) {
      const std::string text = "hyp " + std::to_string(k);
      list.hypotheses.push_back({text, asr_dist(rng)});
      table[text] = lm_dist(rng);
    }

    // alpha = 0: the top of the rescored list is the ASR argmax.
    TableScorer zero_scorer(table);
    const RescoredList identity = rescore_list(list, zero_scorer, {0.0});
    size_t expected = 0;
    for (size_t i = 1; i < list.hypotheses.size(); ++i) {
      if (list.hypotheses[i].asr_log_prob > list.hypotheses[expected].asr_log_prob) {
        expected = i;
      }
    }
    require(identity.entries.front().original_rank == static_cast<int>(expected),
            "alpha=0 top-1 is not the ASR argmax");

    if (n < 2) {
      continue;
    }
    // alpha > 0: raising one LM score never lowers that hypothesis's rank.
    const double alpha = alpha_dist(rng);
    const int target = static_cast<int>(rng() % n);
    const std::string target_text = "hyp " + std::to_string(target);
    auto rank_of = [&](const RescoredList& rescored) {
      for (size_t i = 0; i < rescored.entries.size(); ++i) {
        if (rescored.entries[i].original_rank == target) {
          return i;
        }
      }
      return rescored.entries.size();
    };
    TableScorer before(table);
    const size_t rank_before = rank_of(rescore_list(list, before, {alpha}));
    table[target_text] = std::min(0.0, table[target_text] + bump_dist(rng));
    TableScorer after(table);
    const size_t rank_after = rank_of(rescore_list(list, after, {alpha}));
    require(rank_after <= rank_before, "raising an LM score lowered the hypothesis rank");
  }
}

// --- 3. routing monotonicity -------------------------------------------------

void criterion_routing() {
  const Corpus corpus = make_routing_corpus(1000, 20240803);
  PipelineConfig config;
  config.scorer = "hash";
  config.llm = "echo";
  config.alpha = 0.25;
  config.workers = 2;
  const PipelineBackends backends = assemble_backends(config);

  // Independent confidence census for the beta=1 check.
  long certain = 0;
  HashScorer scorer;
  for (const auto& list : corpus) {
    const RescoredList rescored =
        truncate_to(rescore_list(list, scorer, {config.alpha}), 5);
    if (softmax_confidence(rescored).confidence >= 1.0) {
      ++certain;
    }
  }

  double previous = -1.0;
  for (int j = 0; j <= 20; ++j) {
    config.beta = std::round(0.05 * j * 1000.0) / 1000.0;
    const RunOutput output = run(corpus, nullptr, config, backends);
    require(output.report.escalated_fraction >= previous,
            "escalated fraction decreased while beta increased");
    previous = output.report.escalated_fraction;
    if (j == 0) {
      require(output.report.escalated == 0, "beta=0 escalated something");
    }
    if (j == 20) {
      require(output.report.escalated == static_cast<long>(corpus.size()) - certain,
              "beta=1 did not escalate exactly the uncertain lists");
    }
  }
}

// --- 4. WER oracle equivalence ----------------------------------------------

void criterion_wer_oracle() {
  // Exhaustive: every token-sequence pair up to length 6 over a 3-word vocab.
  const std::vector<std::string> vocab = {"a", "b", "c"};
  std::vector<std::vector<std::string>> sequences;
  sequences.push_back({});
  size_t level_start = 0;
  for (int len = 1; len <= 6; ++len) {
    const size_t level_end = sequences.size();
    for (size_t i = level_start; i < level_end; ++i) {
      for (const auto& word : vocab) {
        auto extended = sequences[i];
        extended.push_back(word);
        sequences.push_back(std::move(extended));
      }
    }
    level_start = level_end;
  }
  require(sequences.size() == 1093, "sequence enumeration is wrong");

  for (const auto& ref : sequences) {
    for (const auto& hyp : sequences) {
      const Alignment alignment = align_tokens(ref, hyp);
      const int oracle = brute_force_edit_distance(ref, hyp);
      require(alignment.edit_count() == oracle, "alignment cost differs from the oracle");
      require(alignment.substitutions + alignment.insertions + alignment.deletions == oracle,
              "op counts inconsistent with cost");
    }
  }

  // Plus random longer pairs.
  std::mt19937 rng(20240804);
  const std::vector<std::string> wide_vocab = {"a", "b", "c", "d", "e", "f"};
  std::uniform_int_distribution<size_t> len_dist(0, 30);
  std::uniform_int_distribution<size_t> word_dist(0, wide_vocab.size() - 1);
  for (int round = 0; round < 10000; ++round) {
    std::vector<std::string> ref(len_dist(rng));
    std::vector<std::string> hyp(len_dist(rng));
    for (auto& w : ref) {
      w = wide_vocab[word_dist(rng)];
    }
    for (auto& w : hyp) {
      w = wide_vocab[word_dist(rng)];
    }
    require(align_tokens(ref, hyp).edit_count() == brute_force_edit_distance(ref, hyp),
            "alignment cost differs from the oracle on a random pair");
  }
}

// --- 5. guard safety ----------------------------------------------------------

void criterion_guard_safety() {
  std::mt19937 rng(20240805);
  const std::vector<std::string> pool = {"alpha", "bravo", "charlie", "delta", "echo",
                                         "foxtrot", "don't", "well-known", "nine", "ten"};
  std::uniform_int_distribution<size_t> pool_pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> n_pick(1, 6);
  std::uniform_int_distribution<int> extra_words(0, 9);
  const std::string junk = "abcdefXYZ '.,!?-_\xE2\x80\x99 09";
  std::uniform_int_distribution<size_t> junk_pick(0, junk.size() - 1);
  std::uniform_int_distribution<int> junk_len(0, 40);
  std::uniform_int_distribution<int> strategy(0, 2);
  const GuardConfig config;  // allow_new_words = false

  for (int round = 0; round < 10000; ++round) {
    RescoredList list;
    list.utterance_id = "acc5";
    const int n = n_pick(rng);
    for (int k = 0; k < n; ++k) {
      std::string text = pool[pool_pick(rng)];
      for (int w = extra_words(rng); w > 0; --w) {
        text += ' ';
        text += pool[pool_pick(rng)];
      }
      list.entries.push_back({std::move(text), -1.0 - k, -1.0, -2.0 - k, k});
    }

    std::string candidate;
    switch (strategy(rng)) {
      case 0:
        for (int i = junk_len(rng); i > 0; --i) {
          candidate += junk[junk_pick(rng)];
        }
        break;
      case 1:
        for (int i = extra_words(rng); i > 0; --i) {
          candidate += pool[pool_pick(rng)];
          candidate += ' ';
        }
        break;
      default:
        candidate = list.entries.front().text + " overflow";
        break;
    }

    const GuardVerdict verdict = check(normalize(candidate), list, config);
    require(!verdict.final_text.empty(), "guard emitted an empty transcript");
    std::unordered_set<std::string> union_words;
    for (const auto& entry : list.entries) {
      for (const auto& word : tokenize(normalize(entry.text))) {
        union_words.insert(word);
      }
    }
    for (const auto& word : tokenize(verdict.final_text)) {
      require(union_words.count(word) == 1, "guard leaked a word outside the N-best union");
    }
  }
}

// --- 6. oracle improvement -----------------------------------------------------

void criterion_oracle_improvement() {
  const ErrorCorpus data = make_error_corpus(250, 20240806);
  PipelineConfig config;
  config.scorer = "hash";
  config.llm = "oracle-best-wer";
  config.alpha = 0.3;
  config.workers = 2;
  const PipelineBackends backends = assemble_backends(config, &data.refs);

  config.beta = 0.0;
  const RunOutput stage1 = run(data.corpus, &data.refs, config, backends);
  const long stage1_errors = stage1.report.wer->totals.errors();

  for (int j = 0; j <= 20; ++j) {
    config.beta = std::round(0.05 * j * 1000.0) / 1000.0;
    const RunOutput output = run(data.corpus, &data.refs, config, backends);
    require(output.report.wer->totals.errors() <= stage1_errors,
            "full pipeline exceeded the beta=0 WER at beta=" + std::to_string(config.beta));
  }
}

// --- 7. echo equivalence --------------------------------------------------------

void criterion_echo_equivalence() {
  const Corpus corpus = load_nbest(kFixtureDir + "/corpus_small.jsonl");
  PipelineConfig config;
  config.scorer = "file";
  config.scorer_file = kFixtureDir + "/scores_small.jsonl";
  config.llm = "echo";

  config.beta = 0.0;
  const RunOutput baseline = run(corpus, nullptr, config, assemble_backends(config));
  config.beta = 0.7;
  const RunOutput echoed = run(corpus, nullptr, config, assemble_backends(config));

  require(baseline.results.size() == echoed.results.size(), "result counts differ");
  for (size_t i = 0; i < baseline.results.size(); ++i) {
    require(baseline.results[i].utterance_id == echoed.results[i].utterance_id,
            "result ordering differs");
    require(baseline.results[i].final_text == echoed.results[i].final_text,
            "echo run diverged from the beta=0 transcripts at " +
                baseline.results[i].utterance_id);
  }
}

// --- 8. sweep recovery -----------------------------------------------------------

void criterion_sweep_recovery() {
  const SweepFixture fixture = make_sweep_fixture();
  PipelineBackends backends;
  backends.scorer =
      std::make_shared<CachingScorer>(std::make_shared<TableScorer>(fixture.lm_scores));
  backends.llm = std::make_shared<CachingBackend>(std::make_shared<SubstitutionOracleBackend>());

  PipelineConfig base;
  base.workers = 2;
  const SweepResult result =
      sweep(fixture.corpus, fixture.refs, SweepGrid::defaults(), base, backends);

  require(result.table.size() == 2583, "default grid should have 2583 points");
  require(result.best.alpha == 2.0,
          "sweep alpha optimum is " + std::to_string(result.best.alpha) + ", expected 2.0");
  require(result.best.beta == 0.5,
          "sweep beta optimum is " + std::to_string(result.best.beta) + ", expected 0.5");
  require(result.best.n == 5, "sweep N optimum should resolve to 5");
  require(result.best.edit_errors == 0, "engineered optimum should be error-free");

  // Exhaustive oracle: the winning point is the unique zero-error point.
  for (const auto& point : result.table) {
    if (point.alpha != 2.0 || point.beta != 0.5) {
      require(point.edit_errors > 0, "another grid point ties the engineered optimum");
    }
  }
}

// --- 9. prompt fidelity -----------------------------------------------------------

void criterion_prompt_fidelity() {
  const Corpus corpus = load_nbest(kFixtureDir + "/corpus_small.jsonl");
  TableScorer scorer = TableScorer::from_jsonl(kFixtureDir + "/scores_small.jsonl");
  const RescoredList rescored = rescore_list(corpus.front(), scorer, {3.0});
  require(rescored.entries.size() == 5, "fixture u001 should be 5-best");
  const RenderedPrompt prompt = build_prompt(rescored, {});

  // Byte comparison against the pinned template.
  const std::string asset = read_file(std::string(ASRPOST_ASSET_DIR) + "/prompt_v1.txt");
  require(!asset.empty(), "prompt asset missing");
  std::string expected = asset;
  const auto target_slot = expected.find("{{TARGET}}");
  expected.replace(target_slot, std::strlen("{{TARGET}}"), prompt.target);
  std::string variants_joined;
  for (size_t i = 0; i < prompt.variants.size(); ++i) {
    if (i) {
      variants_joined += '\n';
    }
    variants_joined += prompt.variants[i];
  }
  const auto variants_slot = expected.find("{{VARIANTS}}");
  expected.replace(variants_slot, std::strlen("{{VARIANTS}}"), variants_joined);
  require(prompt.text == expected, "rendered prompt differs from the pinned template bytes");

  // All eight rules verbatim, numbered, in order.
  std::istringstream asset_lines(asset);
  std::string line;
  std::vector<std::string> rule_lines;
  while (std::getline(asset_lines, line)) {
    if (!line.empty() && line[0] >= '1' && line[0] <= '9') {
      rule_lines.push_back(line);
    }
  }
  require(rule_lines.size() == 8, "template should pin eight rules");
  size_t cursor = 0;
  for (const auto& rule : rule_lines) {
    const auto pos = prompt.text.find("\n" + rule + "\n", cursor);
    require(pos != std::string::npos, "missing rule line: " + rule);
    cursor = pos + 1;
  }
  require(rule_lines.back() == "8. Output only one modified sentence and no explanation.",
          "rule 8 must close the rule list");

  // Target once, exactly four variants.
  size_t occurrences = 0;
  for (size_t pos = prompt.text.find(prompt.target); pos != std::string::npos;
       pos = prompt.text.find(prompt.target, pos + 1)) {
    ++occurrences;
  }
  require(occurrences == 1, "target must appear exactly once");
  require(prompt.variants.size() == 4, "expected exactly 4 variants");
  const auto parsed = PromptTemplate::builtin().parse_back(prompt.text);
  require(parsed.variants.size() == 4, "parse-back should find 4 variants");
  require(parsed.target == prompt.target, "parse-back target mismatch");
}

// --- 10. determinism ---------------------------------------------------------------

void criterion_determinism() {
  const ErrorCorpus data = make_error_corpus(150, 20240810);
  TempDir dir;
  const std::string corpus_path = dir.file("corpus.jsonl");
  save_nbest(data.corpus, corpus_path);

  auto run_once = [&](const std::string& out) {
    CaptureStream capture_out;
    const int code =
        run_cli({"run", "--corpus", corpus_path, "--scorer", "hash", "--llm",
                 "oracle-substitution", "--alpha", "0.3", "--beta", "0.7", "--workers", "8",
                 "--json", "--out", out});
    require(code == 0, "run invocation failed");
  };
  const std::string first = dir.file("first.jsonl");
  const std::string second = dir.file("second.jsonl");
  run_once(first);
  run_once(second);

  const std::string a = read_file(first);
  const std::string b = read_file(second);
  require(!a.empty(), "first run produced no output");
  require(a == b, "two identical runs produced different result bytes");
}

// --- harness -------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  double time_limit_seconds;
  std::function<void()> body;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::cerr << "usage: acceptance_tests [--only N]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "softmax correctness", 5.0, criterion_softmax},
      {2, "rescoring identity and monotonicity", 5.0, criterion_rescoring},
      {3, "routing monotonicity", 10.0, criterion_routing},
      {4, "WER oracle equivalence", 60.0, criterion_wer_oracle},
      {5, "guard safety", 10.0, criterion_guard_safety},
      {6, "oracle improvement", 30.0, criterion_oracle_improvement},
      {7, "echo equivalence", 10.0, criterion_echo_equivalence},
      {8, "sweep recovery", 300.0, criterion_sweep_recovery},
      {9, "prompt fidelity", 1.0, criterion_prompt_fidelity},
      {10, "determinism", 10.0, criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.time_limit_seconds) {
      std::ostringstream message;
      message << "exceeded time limit (" << elapsed << "s > " << criterion.time_limit_seconds
              << "s)";
      error = message.str();
    }
    std::ostringstream line;
    line << (error.empty() ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id << ": "
         << criterion.name << " (" << std::fixed << std::setprecision(2) << elapsed << "s)";
    if (!error.empty()) {
      line << " -- " << error;
      ++failures;
    }
    std::cout << line.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
