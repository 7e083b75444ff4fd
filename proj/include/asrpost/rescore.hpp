#pragma once

#include <string>
#include <vector>

#include "asrpost/corpus.hpp"
#include "asrpost/lm_scorer.hpp"

namespace asrpost {

struct RescoreConfig {
  // Interpolation weight on the LM log-probability; finite, >= 0.
  double alpha = 3.0;
};

struct RescoredHypothesis {
  std::string text;
  double asr_log_prob = 0.0;
  double lm_log_prob = 0.0;
  double combined_score = 0.0;
  // 0-based decoder rank; tie-break key and the source of beam-order variants.
  int original_rank = 0;
};

// Entries sorted by combined_score descending, ties by original rank
// ascending. Same multiset of texts as the input list.
struct RescoredList {
  std::string utterance_id;
  std::vector<RescoredHypothesis> entries;
};

// combined = asr_log_prob + alpha * lm_log_prob. Throws ValidationError on
// non-finite input or bad alpha.
double combine(double asr_log_prob, double lm_log_prob, const RescoreConfig& config);

// Scores every hypothesis exactly once and re-ranks. Scorer failures abort the
// list with a ScorerError carrying the utterance id.
RescoredList rescore_list(const NBestList& list, LmScorer& scorer, const RescoreConfig& config);

// Keep the top n entries by rescored rank; no-op if the list is shorter.
RescoredList truncate_to(RescoredList list, size_t n);

}  // namespace asrpost
