#pragma once

#include <span>
#include <string>
#include <vector>

#include "asrpost/rescore.hpp"

namespace asrpost {

// Numerically stable softmax (max subtraction before exponentiation).
// Input scores must be finite; output sums to 1 with every entry in [0, 1].
std::vector<double> stable_softmax(std::span<const double> scores);

struct ConfidenceEstimate {
  std::string utterance_id;
  // Aligned with the RescoredList entries they were computed from.
  std::vector<double> normalized_scores;
  // The value at the sorted-first entry; the maximum by the sort invariant.
  // Exactly 1.0 for single-hypothesis lists.
  double confidence = 0.0;
};

enum class Verdict { Accept, Escalate };

const char* to_string(Verdict verdict);

struct RouteDecision {
  std::string utterance_id;
  Verdict verdict = Verdict::Accept;
  double confidence = 0.0;
  double beta = 0.0;
};

// Softmax over the combined scores of a rescored list. Note the normalized
// values depend on the absolute score scale: scores from a differently scaled
// decoder or LM shift the whole confidence distribution, and beta must be
// re-tuned against it (there is no temperature).
ConfidenceEstimate softmax_confidence(const RescoredList& list);

// ESCALATE iff confidence < beta; the confidence == beta boundary ACCEPTs.
// Throws ValidationError unless 0 <= beta <= 1.
RouteDecision route(const ConfidenceEstimate& estimate, double beta);

}  // namespace asrpost
