#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asrpost/corpus.hpp"

namespace asrpost {

enum class EditOp { Match, Substitute, Insert, Delete };

const char* to_string(EditOp op);

struct AlignmentStep {
  EditOp op = EditOp::Match;
  std::string ref_word;  // empty for Insert
  std::string hyp_word;  // empty for Delete
};

struct Alignment {
  std::vector<AlignmentStep> ops;
  int matches = 0;
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_len = 0;

  int edit_count() const { return substitutions + insertions + deletions; }
};

// Minimum unit-cost word alignment. Equal-cost choices resolve by preferring
// MATCH > SUBSTITUTE > DELETE > INSERT, so the traceback is deterministic.
// Inputs are expected to be normalized (see guard normalize()); tokens are
// whitespace-separated words. Empty strings are fine: an empty reference
// against a non-empty hypothesis is pure insertions.
Alignment align(const std::string& reference, const std::string& hypothesis);
Alignment align_tokens(const std::vector<std::string>& ref_tokens,
                       const std::vector<std::string>& hyp_tokens);

struct UtteranceScore {
  Alignment alignment;
  // (S+I+D)/ref_len; unset when ref_len == 0 (counts still reported).
  std::optional<double> wer;
};

struct WerTotals {
  long matches = 0;
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long reference_words = 0;

  long errors() const { return substitutions + insertions + deletions; }
};

struct WerReport {
  // Micro-averaged: total (S+I+D) over total reference words.
  double corpus_wer = 0.0;
  WerTotals totals;
  std::map<std::string, UtteranceScore> per_utterance;
};

// Scores finals against references; both sides are normalized before
// alignment. Throws ValidationError when a final's id has no reference.
WerReport corpus_wer(const ReferenceSet& refs, const std::map<std::string, std::string>& finals);

nlohmann::ordered_json report_to_json(const WerReport& report, bool per_utterance = true);
std::string report_to_table(const WerReport& report);

// Per-utterance op dump for manual error review (one op per line).
std::string alignment_dump(const std::string& utterance_id, const Alignment& alignment);

}  // namespace asrpost
