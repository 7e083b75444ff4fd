#include "asrpost/guard.hpp"

#include <cstdlib>
#include <unordered_set>

namespace asrpost {

namespace {

// Locale-independent ASCII classification: the normalization contract is
// bit-exact and must not move with the global locale.
bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

// Word characters for the intra-word rule: ASCII alphanumerics and any
// non-ASCII byte (multibyte UTF-8 letters count as word content).
bool is_word_char(unsigned char c) {
  return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

// Fold common Unicode punctuation into its ASCII analog (single quotes to ',
// dashes to -, double quotes/ellipsis/inverted marks removed) and lowercase
// ASCII letters. Done up front so the intra-word check sees final bytes.
std::string map_and_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const unsigned char third = static_cast<unsigned char>(text[i + 2]);
      if (third == 0x98 || third == 0x99) {  // ‘ ’
        out += '\'';
        i += 2;
        continue;
      }
      if (third == 0x93 || third == 0x94) {  // – —
        out += '-';
        i += 2;
        continue;
      }
      if (third == 0x9C || third == 0x9D || third == 0xA6) {  // “ ” …
        i += 2;
        continue;
      }
    }
    if (c == 0xC2 && i + 1 < text.size()) {
      const unsigned char second = static_cast<unsigned char>(text[i + 1]);
      if (second == 0xA1 || second == 0xBF) {  // ¡ ¿
        i += 1;
        continue;
      }
    }
    if (c >= 'A' && c <= 'Z') {
      c = static_cast<unsigned char>(c - 'A' + 'a');
    }
    out += static_cast<char>(c);
  }
  return out;
}

}  // namespace

std::string normalize(std::string_view text) {
  const std::string mapped = map_and_lower(text);
  std::string out;
  out.reserve(mapped.size());
  bool pending_space = false;
  for (size_t i = 0; i < mapped.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(mapped[i]);
    if (is_ascii_space(c)) {
      pending_space = true;
      continue;
    }
    if (is_ascii_punct(c)) {
      const bool intra_word =
          (c == '\'' || c == '-') && i > 0 && i + 1 < mapped.size() &&
          is_word_char(static_cast<unsigned char>(mapped[i - 1])) &&
          is_word_char(static_cast<unsigned char>(mapped[i + 1]));
      if (!intra_word) {
        continue;
      }
    }
    if (pending_space && !out.empty()) {
      out += ' ';
    }
    pending_space = false;
    out += static_cast<char>(c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < text.size() && !is_ascii_space(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) {
      tokens.emplace_back(text.substr(start, i - start));
    }
  }
  return tokens;
}

const char* to_string(GuardOutcome outcome) {
  return outcome == GuardOutcome::Accepted ? "ACCEPTED" : "FALLBACK";
}

const char* to_string(RuleViolation violation) {
  switch (violation) {
    case RuleViolation::NewWords:
      return "4";
    case RuleViolation::Length:
      return "5";
    case RuleViolation::Empty:
      return "EMPTY";
  }
  return "?";
}

std::string fallback_text(const RescoredList& list) {
  if (list.entries.empty()) {
    throw ValidationError("guard fallback on empty list: " + list.utterance_id);
  }
  std::string normalized = normalize(list.entries.front().text);
  if (!normalized.empty()) {
    return normalized;
  }
  // Degenerate all-punctuation y[1]: keep it verbatim (collapsed) rather than
  // emit an empty transcript.
  std::string collapsed;
  for (const auto& token : tokenize(list.entries.front().text)) {
    if (!collapsed.empty()) {
      collapsed += ' ';
    }
    collapsed += token;
  }
  return collapsed;
}

GuardVerdict check(const std::string& candidate, const RescoredList& list,
                   const GuardConfig& config) {
  if (list.entries.empty()) {
    throw ValidationError("guard check on empty list: " + list.utterance_id);
  }
  if (config.length_tolerance < 0) {
    throw ValidationError("length_tolerance must be >= 0");
  }

  GuardVerdict verdict;
  const std::vector<std::string> candidate_words = tokenize(candidate);

  if (candidate_words.empty()) {
    verdict.violations.push_back(RuleViolation::Empty);
  }

  if (!config.allow_new_words && !candidate_words.empty()) {
    std::unordered_set<std::string> union_words;
    for (const auto& entry : list.entries) {
      for (auto& word : tokenize(normalize(entry.text))) {
        union_words.insert(std::move(word));
      }
    }
    for (const auto& word : candidate_words) {
      if (union_words.count(word) == 0) {
        verdict.violations.push_back(RuleViolation::NewWords);
        break;
      }
    }
  }

  if (config.enforce_length && !candidate_words.empty()) {
    const long top_len =
        static_cast<long>(tokenize(normalize(list.entries.front().text)).size());
    const long diff = static_cast<long>(candidate_words.size()) - top_len;
    if (std::abs(diff) > config.length_tolerance) {
      verdict.violations.push_back(RuleViolation::Length);
    }
  }

  if (verdict.violations.empty()) {
    verdict.outcome = GuardOutcome::Accepted;
    verdict.final_text = candidate;
  } else {
    verdict.outcome = GuardOutcome::Fallback;
    verdict.final_text = fallback_text(list);
  }
  return verdict;
}

}  // namespace asrpost
