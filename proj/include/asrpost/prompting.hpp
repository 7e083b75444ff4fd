#pragma once

#include <string>
#include <vector>

#include "asrpost/rescore.hpp"

namespace asrpost {

enum class SpellingVariant { US, UK };
enum class VariantOrder { Rescored, Beam };

struct PromptConfig {
  // Rule 7 text; UK swaps "U.S." for "U.K.".
  SpellingVariant spelling = SpellingVariant::US;
  // Include rule 6 ("Ignore punctuation."). When false the rule line is
  // dropped and the remaining rules renumber consecutively.
  bool ignore_punctuation = true;
  // Cap on variant sentences included after the target; >= 1.
  int max_variants = 15;
  // Rescored feeds the LLM the stage-1 ranking; Beam replays the decoder's.
  VariantOrder variant_order = VariantOrder::Rescored;
  // Optional template override; empty selects the built-in v1 asset.
  std::string template_path;
};

struct RenderedPrompt {
  std::string utterance_id;
  std::string text;
  std::string target;
  std::vector<std::string> variants;
};

// A prompt template with {{TARGET}} and {{VARIANTS}} placeholders, TARGET
// first, each exactly once. The placeholders must each sit on their own line
// tail so rendered prompts can be parsed back. Rendering is pure: identical
// inputs give byte-identical prompts.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text);

  // The compiled-in v1 asset (assets/prompt_v1.txt).
  static const PromptTemplate& builtin();
  static PromptTemplate load(const std::string& path);

  const std::string& text() const { return text_; }

  // Target is the top-ranked rescored text; variants are the next
  // min(N-1, max_variants) texts in the configured order. Requires N >= 2 and
  // single-line hypothesis texts; throws ValidationError otherwise.
  RenderedPrompt render(const RescoredList& list, const PromptConfig& config) const;

  struct Parsed {
    std::string target;
    std::vector<std::string> variants;
  };

  // Recover target and variants from a prompt rendered by this template.
  Parsed parse_back(const std::string& rendered) const;

 private:
  std::string text_;
  // Template split around the two placeholders.
  std::string head_;
  std::string mid_;
  std::string tail_;
};

// Render with the configured template (config.template_path or built-in).
RenderedPrompt build_prompt(const RescoredList& list, const PromptConfig& config);

}  // namespace asrpost
