#include "asrpost/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "asrpost/errors.hpp"

namespace asrpost {

std::vector<double> stable_softmax(std::span<const double> scores) {
  if (scores.empty()) {
    throw ValidationError("softmax over empty score vector");
  }
  double max_score = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw ValidationError("softmax requires finite scores");
    }
    max_score = std::max(max_score, s);
  }
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - max_score);
    sum += out[i];
  }
  for (double& v : out) {
    v /= sum;
  }
  return out;
}

const char* to_string(Verdict verdict) {
  return verdict == Verdict::Accept ? "ACCEPT" : "ESCALATE";
}

ConfidenceEstimate softmax_confidence(const RescoredList& list) {
  if (list.entries.empty()) {
    throw ValidationError("confidence over empty list: " + list.utterance_id);
  }
  std::vector<double> scores;
  scores.reserve(list.entries.size());
  for (const auto& entry : list.entries) {
    scores.push_back(entry.combined_score);
  }
  ConfidenceEstimate estimate;
  estimate.utterance_id = list.utterance_id;
  estimate.normalized_scores = stable_softmax(scores);
  estimate.confidence = estimate.normalized_scores.front();
  return estimate;
}

RouteDecision route(const ConfidenceEstimate& estimate, double beta) {
  if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) {
    throw ValidationError("beta must be in [0, 1]");
  }
  RouteDecision decision;
  decision.utterance_id = estimate.utterance_id;
  decision.confidence = estimate.confidence;
  decision.beta = beta;
  decision.verdict = estimate.confidence < beta ? Verdict::Escalate : Verdict::Accept;
  return decision;
}

}  // namespace asrpost
