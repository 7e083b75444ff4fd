#include "asrpost/sweep.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace asrpost {

SweepGrid SweepGrid::defaults() {
  SweepGrid grid;
  grid.n_values = {5, 8, 16};
  for (int i = 0; i <= 40; ++i) {
    grid.alphas.push_back(std::round((1.0 + 0.1 * i) * 1000.0) / 1000.0);
  }
  for (int j = 0; j <= 20; ++j) {
    grid.betas.push_back(std::round(0.05 * j * 1000.0) / 1000.0);
  }
  return grid;
}

void validate(const SweepGrid& grid) {
  if (grid.n_values.empty() || grid.alphas.empty() || grid.betas.empty()) {
    throw ValidationError("sweep grid must be non-empty in every dimension");
  }
  for (int n : grid.n_values) {
    if (n < 1) {
      throw ValidationError("grid N values must be >= 1");
    }
  }
}

SweepResult sweep(const Corpus& corpus, const ReferenceSet& refs, const SweepGrid& grid,
                  const PipelineConfig& base, const PipelineBackends& backends) {
  validate(grid);
  if (corpus.empty()) {
    throw ValidationError("sweep over empty corpus");
  }

  SweepResult result;
  result.table.reserve(grid.n_values.size() * grid.alphas.size() * grid.betas.size());
  bool have_best = false;

  for (int n : grid.n_values) {
    for (double alpha : grid.alphas) {
      for (double beta : grid.betas) {
        PipelineConfig config = base;
        config.n_best_cap = n;
        config.alpha = alpha;
        config.beta = beta;
        const RunOutput output = run(corpus, &refs, config, backends);

        SweepPoint point;
        point.n = n;
        point.alpha = alpha;
        point.beta = beta;
        point.wer = output.report.wer->corpus_wer;
        point.edit_errors = output.report.wer->totals.errors();
        point.reference_words = output.report.wer->totals.reference_words;
        point.escalated_fraction = output.report.escalated_fraction;
        result.table.push_back(point);

        const auto key = [](const SweepPoint& p) {
          return std::make_tuple(p.wer, p.escalated_fraction, p.alpha, p.beta);
        };
        if (!have_best || key(point) < key(result.best)) {
          result.best = point;
          have_best = true;
        }
      }
    }
  }
  return result;
}

nlohmann::ordered_json sweep_to_json(const SweepResult& result) {
  auto point_json = [](const SweepPoint& point) {
    return nlohmann::ordered_json{{"n", point.n},
                                  {"alpha", point.alpha},
                                  {"beta", point.beta},
                                  {"wer", point.wer},
                                  {"edit_errors", point.edit_errors},
                                  {"reference_words", point.reference_words},
                                  {"escalated_fraction", point.escalated_fraction}};
  };
  nlohmann::ordered_json out;
  out["best"] = point_json(result.best);
  auto& table = out["table"] = nlohmann::ordered_json::array();
  for (const auto& point : result.table) {
    table.push_back(point_json(point));
  }
  return out;
}

std::string sweep_to_table(const SweepResult& result) {
  std::ostringstream out;
  out << std::right << std::setw(4) << "N" << std::setw(8) << "alpha" << std::setw(8) << "beta"
      << std::setw(10) << "wer" << std::setw(12) << "escalated" << '\n';
  for (const auto& point : result.table) {
    out << std::setw(4) << point.n << std::setw(8) << std::fixed << std::setprecision(2)
        << point.alpha << std::setw(8) << point.beta << std::setw(10) << std::setprecision(4)
        << point.wer << std::setw(11) << std::setprecision(1) << point.escalated_fraction * 100.0
        << "%" << '\n';
  }
  out << "best: N=" << result.best.n << " alpha=" << std::setprecision(2) << result.best.alpha
      << " beta=" << result.best.beta << " wer=" << std::setprecision(4) << result.best.wer
      << " escalated=" << std::setprecision(1) << result.best.escalated_fraction * 100.0 << "%\n";
  return out.str();
}

}  // namespace asrpost
