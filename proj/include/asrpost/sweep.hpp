#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asrpost/pipeline.hpp"

namespace asrpost {

struct SweepGrid {
  std::vector<int> n_values;
  std::vector<double> alphas;
  std::vector<double> betas;

  // N in {5, 8, 16}; alpha 1.0..5.0 step 0.1; beta 0.0..1.0 step 0.05.
  static SweepGrid defaults();
};

void validate(const SweepGrid& grid);

struct SweepPoint {
  int n = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double wer = 0.0;
  long edit_errors = 0;
  long reference_words = 0;
  double escalated_fraction = 0.0;
};

struct SweepResult {
  SweepPoint best;
  // Grid order: n outer, alpha, then beta innermost.
  std::vector<SweepPoint> table;
};

// Evaluates corpus WER at every grid point, sharing the backends (and their
// caches) across points so beta moves never re-query the LLM. Best point is
// the minimum WER; ties resolve to smaller escalated fraction, then smaller
// alpha, then smaller beta, then first grid order. References are required.
SweepResult sweep(const Corpus& corpus, const ReferenceSet& refs, const SweepGrid& grid,
                  const PipelineConfig& base, const PipelineBackends& backends);

nlohmann::ordered_json sweep_to_json(const SweepResult& result);
std::string sweep_to_table(const SweepResult& result);

}  // namespace asrpost
