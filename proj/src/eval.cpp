#include "asrpost/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "asrpost/guard.hpp"

namespace asrpost {

const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::Match:
      return "MATCH";
    case EditOp::Substitute:
      return "SUB";
    case EditOp::Insert:
      return "INS";
    case EditOp::Delete:
      return "DEL";
  }
  return "?";
}

Alignment align_tokens(const std::vector<std::string>& ref_tokens,
                       const std::vector<std::string>& hyp_tokens) {
  const size_t m = ref_tokens.size();
  const size_t n = hyp_tokens.size();

  // cost[i][j]: minimal edits between ref[0..i) and hyp[0..j). choice stores
  // the op taken into each cell, picked with MATCH > SUB > DEL > INS on ties.
  std::vector<int> cost((m + 1) * (n + 1), 0);
  std::vector<unsigned char> choice((m + 1) * (n + 1), 0);
  auto at = [n](size_t i, size_t j) { return i * (n + 1) + j; };

  for (size_t i = 1; i <= m; ++i) {
    cost[at(i, 0)] = static_cast<int>(i);
    choice[at(i, 0)] = static_cast<unsigned char>(EditOp::Delete);
  }
  for (size_t j = 1; j <= n; ++j) {
    cost[at(0, j)] = static_cast<int>(j);
    choice[at(0, j)] = static_cast<unsigned char>(EditOp::Insert);
  }
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      const bool same = ref_tokens[i - 1] == hyp_tokens[j - 1];
      const int diag = cost[at(i - 1, j - 1)] + (same ? 0 : 1);
      const int del = cost[at(i - 1, j)] + 1;
      const int ins = cost[at(i, j - 1)] + 1;
      int best = diag;
      EditOp op = same ? EditOp::Match : EditOp::Substitute;
      if (del < best) {
        best = del;
        op = EditOp::Delete;
      }
      if (ins < best) {
        best = ins;
        op = EditOp::Insert;
      }
      cost[at(i, j)] = best;
      choice[at(i, j)] = static_cast<unsigned char>(op);
    }
  }

  Alignment alignment;
  alignment.ref_len = static_cast<int>(m);
  size_t i = m;
  size_t j = n;
  while (i > 0 || j > 0) {
    switch (static_cast<EditOp>(choice[at(i, j)])) {
      case EditOp::Match:
        alignment.ops.push_back({EditOp::Match, ref_tokens[i - 1], hyp_tokens[j - 1]});
        ++alignment.matches;
        --i;
        --j;
        break;
      case EditOp::Substitute:
        alignment.ops.push_back({EditOp::Substitute, ref_tokens[i - 1], hyp_tokens[j - 1]});
        ++alignment.substitutions;
        --i;
        --j;
        break;
      case EditOp::Delete:
        alignment.ops.push_back({EditOp::Delete, ref_tokens[i - 1], ""});
        ++alignment.deletions;
        --i;
        break;
      case EditOp::Insert:
        alignment.ops.push_back({EditOp::Insert, "", hyp_tokens[j - 1]});
        ++alignment.insertions;
        --j;
        break;
    }
  }
  std::reverse(alignment.ops.begin(), alignment.ops.end());
  return alignment;
}

Alignment align(const std::string& reference, const std::string& hypothesis) {
  return align_tokens(tokenize(reference), tokenize(hypothesis));
}

WerReport corpus_wer(const ReferenceSet& refs, const std::map<std::string, std::string>& finals) {
  WerReport report;
  for (const auto& [id, final_text] : finals) {
    const std::string& reference = refs.lookup(id);
    UtteranceScore score;
    score.alignment = align(normalize(reference), normalize(final_text));
    if (score.alignment.ref_len > 0) {
      score.wer = static_cast<double>(score.alignment.edit_count()) / score.alignment.ref_len;
    }
    report.totals.matches += score.alignment.matches;
    report.totals.substitutions += score.alignment.substitutions;
    report.totals.insertions += score.alignment.insertions;
    report.totals.deletions += score.alignment.deletions;
    report.totals.reference_words += score.alignment.ref_len;
    report.per_utterance.emplace(id, std::move(score));
  }
  report.corpus_wer = report.totals.reference_words > 0
                          ? static_cast<double>(report.totals.errors()) /
                                static_cast<double>(report.totals.reference_words)
                          : 0.0;
  return report;
}

nlohmann::ordered_json report_to_json(const WerReport& report, bool per_utterance) {
  nlohmann::ordered_json out;
  out["corpus_wer"] = report.corpus_wer;
  out["totals"] = {{"matches", report.totals.matches},
                   {"substitutions", report.totals.substitutions},
                   {"insertions", report.totals.insertions},
                   {"deletions", report.totals.deletions},
                   {"errors", report.totals.errors()},
                   {"reference_words", report.totals.reference_words}};
  if (per_utterance) {
    auto& per = out["per_utterance"] = nlohmann::ordered_json::object();
    for (const auto& [id, score] : report.per_utterance) {
      nlohmann::ordered_json entry;
      if (score.wer) {
        entry["wer"] = *score.wer;
      } else {
        entry["wer"] = nullptr;
      }
      entry["substitutions"] = score.alignment.substitutions;
      entry["insertions"] = score.alignment.insertions;
      entry["deletions"] = score.alignment.deletions;
      entry["reference_words"] = score.alignment.ref_len;
      per[id] = std::move(entry);
    }
  }
  return out;
}

std::string report_to_table(const WerReport& report) {
  std::ostringstream out;
  size_t id_width = 12;
  for (const auto& [id, score] : report.per_utterance) {
    id_width = std::max(id_width, id.size());
  }
  out << std::left << std::setw(static_cast<int>(id_width + 2)) << "utterance"
      << std::right << std::setw(8) << "wer" << std::setw(6) << "sub" << std::setw(6) << "ins"
      << std::setw(6) << "del" << std::setw(6) << "ref" << '\n';
  for (const auto& [id, score] : report.per_utterance) {
    out << std::left << std::setw(static_cast<int>(id_width + 2)) << id << std::right;
    if (score.wer) {
      out << std::setw(8) << std::fixed << std::setprecision(4) << *score.wer;
    } else {
      out << std::setw(8) << "n/a";
    }
    out << std::setw(6) << score.alignment.substitutions << std::setw(6)
        << score.alignment.insertions << std::setw(6) << score.alignment.deletions << std::setw(6)
        << score.alignment.ref_len << '\n';
  }
  out << std::left << std::setw(static_cast<int>(id_width + 2)) << "corpus" << std::right
      << std::setw(8) << std::fixed << std::setprecision(4) << report.corpus_wer << std::setw(6)
      << report.totals.substitutions << std::setw(6) << report.totals.insertions << std::setw(6)
      << report.totals.deletions << std::setw(6) << report.totals.reference_words << '\n';
  return out.str();
}

std::string alignment_dump(const std::string& utterance_id, const Alignment& alignment) {
  std::ostringstream out;
  out << utterance_id << ":\n";
  for (const auto& step : alignment.ops) {
    out << "  " << std::left << std::setw(6) << to_string(step.op) << std::setw(20)
        << (step.ref_word.empty() ? "*" : step.ref_word)
        << (step.hyp_word.empty() ? "*" : step.hyp_word) << '\n';
  }
  return out.str();
}

}  // namespace asrpost
