#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "asrpost/corpus.hpp"

namespace asrpost::testsupport {

// Mixed-N corpus (10% single-hypothesis lists) with word-like texts and a
// confidence distribution spread over (0, 1) when rescored with alpha ~ 0.25.
Corpus make_routing_corpus(size_t size, uint32_t seed);

struct ErrorCorpus {
  Corpus corpus;
  ReferenceSet refs;
};

// References plus 5-best lists with injected word substitutions; later
// hypotheses carry more corruption. Decoder scores descend with rank.
ErrorCorpus make_error_corpus(size_t size, uint32_t seed);

struct SweepFixture {
  Corpus corpus;
  ReferenceSet refs;
  // Designed sentence scores for a TableScorer.
  std::map<std::string, double> lm_scores;
};

// Corpus engineered so that, swept with the substitution-oracle LLM over the
// default grid, (alpha=2.0, beta=0.5) is the unique corpus-WER minimizer:
//   - six "window" utterances whose correct hypothesis tops the rescored list
//     only at alpha=2.0 and whose majority vote is wrong,
//   - six low-confidence (0.47) utterances the LLM fixes, escalated only at
//     beta >= 0.5,
//   - six mid-confidence (0.52) utterances the LLM breaks, escalated only at
//     beta >= 0.55.
SweepFixture make_sweep_fixture();

}  // namespace asrpost::testsupport
