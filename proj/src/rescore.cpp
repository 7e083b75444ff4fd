#include "asrpost/rescore.hpp"

#include <algorithm>
#include <cmath>

namespace asrpost {

double combine(double asr_log_prob, double lm_log_prob, const RescoreConfig& config) {
  if (!std::isfinite(config.alpha) || config.alpha < 0.0) {
    throw ValidationError("alpha must be finite and >= 0");
  }
  if (!std::isfinite(asr_log_prob) || !std::isfinite(lm_log_prob)) {
    throw ValidationError("combine() requires finite scores");
  }
  return asr_log_prob + config.alpha * lm_log_prob;
}

RescoredList rescore_list(const NBestList& list, LmScorer& scorer, const RescoreConfig& config) {
  validate(list);
  RescoredList out;
  out.utterance_id = list.utterance_id;
  out.entries.reserve(list.hypotheses.size());
  for (size_t rank = 0; rank < list.hypotheses.size(); ++rank) {
    const Hypothesis& hypothesis = list.hypotheses[rank];
    double lm_log_prob = 0.0;
    try {
      lm_log_prob = scorer.score(hypothesis.text);
    } catch (const ScorerError& e) {
      throw ScorerError(std::string(e.what()), list.utterance_id);
    } catch (const std::exception& e) {
      throw ScorerError("scorer failed: " + std::string(e.what()), list.utterance_id);
    }
    if (!std::isfinite(lm_log_prob) || lm_log_prob > 0.0) {
      throw ScorerError("scorer broke its contract (non-finite or positive log-prob)",
                        list.utterance_id);
    }
    out.entries.push_back({hypothesis.text, hypothesis.asr_log_prob, lm_log_prob,
                           combine(hypothesis.asr_log_prob, lm_log_prob, config),
                           static_cast<int>(rank)});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const RescoredHypothesis& a, const RescoredHypothesis& b) {
              if (a.combined_score != b.combined_score) {
                return a.combined_score > b.combined_score;
              }
              return a.original_rank < b.original_rank;
            });
  return out;
}

RescoredList truncate_to(RescoredList list, size_t n) {
  if (n == 0) {
    throw ValidationError("cannot truncate to an empty list");
  }
  if (list.entries.size() > n) {
    list.entries.resize(n);
  }
  return list;
}

}  // namespace asrpost
