#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "asrpost/rescore.hpp"

namespace asrpost {

struct GuardConfig {
  // Accept candidate words outside the N-best word union (prompt rule 4).
  bool allow_new_words = false;
  // Enforce |len(candidate) - len(y1)| <= length_tolerance (prompt rule 5).
  bool enforce_length = true;
  int length_tolerance = 0;
};

enum class GuardOutcome { Accepted, Fallback };

// Which constraint the candidate broke. NewWords/Length map to prompt rules
// 4 and 5; Empty is an empty candidate after normalization.
enum class RuleViolation { NewWords, Length, Empty };

const char* to_string(GuardOutcome outcome);
const char* to_string(RuleViolation violation);

struct GuardVerdict {
  GuardOutcome outcome = GuardOutcome::Accepted;
  std::string final_text;
  std::vector<RuleViolation> violations;
};

// Text normalization used for guarding and WER scoring:
//   - Unicode punctuation folds to ASCII first: U+2018/U+2019 -> ',
//     U+2013/U+2014 -> -, and U+201C/U+201D/U+2026/U+00A1/U+00BF are removed
//   - ASCII letters are lowercased
//   - ASCII punctuation is stripped, except ' and - kept between two
//     alphanumeric (or non-ASCII) characters; the exact stripped set is
//     ! " # $ % & ' ( ) * + , - . / : ; < = > ? @ [ \ ] ^ _ ` { | } ~
//   - whitespace runs collapse to a single space, ends trimmed
// Bytes >= 0x80 outside the mapped sequences pass through unchanged.
// Locale-independent and idempotent: normalize(normalize(s)) == normalize(s).
std::string normalize(std::string_view text);

// Whitespace-split word tokens of an already collapsed/normalized string.
std::vector<std::string> tokenize(std::string_view text);

// The text emitted when the guard rejects: normalized y[1], or the
// whitespace-collapsed raw y[1] in the degenerate case where normalization
// erases every y[1] token. Never empty for a valid list.
std::string fallback_text(const RescoredList& list);

// Enforce the prompt rules on an LLM candidate. `candidate` must already be
// normalized; the list's hypothesis texts are normalized here for comparison.
// ACCEPTED iff the candidate is non-empty, every candidate word appears in
// the union of words across all N hypotheses (unless allow_new_words), and
// the word-count constraint holds (when enforce_length). On any violation the
// verdict is FALLBACK with final_text = fallback_text(list).
GuardVerdict check(const std::string& candidate, const RescoredList& list,
                   const GuardConfig& config);

}  // namespace asrpost
