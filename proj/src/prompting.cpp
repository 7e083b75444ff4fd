#include "asrpost/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "asrpost/errors.hpp"
#include "asrpost/prompt_template_v1.hpp"

namespace asrpost {

namespace {

constexpr std::string_view kTargetSlot = "{{TARGET}}";
constexpr std::string_view kVariantsSlot = "{{VARIANTS}}";
constexpr std::string_view kUsRule = "Use U.S. English.";
constexpr std::string_view kUkRule = "Use U.K. English.";
constexpr std::string_view kPunctRule = "Ignore punctuation.";

void require_single_line(const std::string& text, const std::string& utterance_id) {
  if (text.find('\n') != std::string::npos || text.find('\r') != std::string::npos) {
    throw ValidationError("multi-line hypothesis text cannot be rendered (utterance " +
                          utterance_id + ")");
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) {
      out += '\n';
    }
    out += lines[i];
  }
  return out;
}

// "N. rest" -> N, or 0 if the line is not a numbered rule.
int rule_number(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
    ++i;
  }
  if (i == 0 || i + 1 >= line.size() || line[i] != '.' || line[i + 1] != ' ') {
    return 0;
  }
  return std::stoi(line.substr(0, i));
}

// Spelling swap and optional rule-6 drop (with consecutive renumbering),
// applied to the rule lines wherever they sit in the template.
std::string apply_rule_options(const std::string& segment, const PromptConfig& config) {
  if (config.spelling == SpellingVariant::US && config.ignore_punctuation) {
    return segment;
  }
  std::vector<std::string> lines = split_lines(segment);
  std::vector<std::string> out;
  out.reserve(lines.size());
  int renumber_from = 0;  // active after the dropped rule
  for (auto& line : lines) {
    const int number = rule_number(line);
    std::string body = number > 0 ? line.substr(line.find(". ") + 2) : line;
    if (number > 0 && !config.ignore_punctuation && body == kPunctRule) {
      renumber_from = number;
      continue;
    }
    if (number > 0 && config.spelling == SpellingVariant::UK && body == kUsRule) {
      body = kUkRule;
      line = std::to_string(number) + ". " + body;
    }
    if (number > 0 && renumber_from > 0 && number > renumber_from) {
      line = std::to_string(number - 1) + ". " + body;
    }
    out.push_back(std::move(line));
  }
  return join_lines(out);
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  const auto target_pos = text_.find(kTargetSlot);
  if (target_pos == std::string::npos || text_.find(kTargetSlot, target_pos + 1) != std::string::npos) {
    throw ValidationError("template must contain {{TARGET}} exactly once");
  }
  const auto variants_pos = text_.find(kVariantsSlot);
  if (variants_pos == std::string::npos ||
      text_.find(kVariantsSlot, variants_pos + 1) != std::string::npos) {
    throw ValidationError("template must contain {{VARIANTS}} exactly once");
  }
  if (variants_pos < target_pos) {
    throw ValidationError("template must place {{TARGET}} before {{VARIANTS}}");
  }
  head_ = text_.substr(0, target_pos);
  mid_ = text_.substr(target_pos + kTargetSlot.size(),
                      variants_pos - target_pos - kTargetSlot.size());
  tail_ = text_.substr(variants_pos + kVariantsSlot.size());
  // parse_back() needs line-delimited slots.
  if (mid_.empty() || mid_.front() != '\n') {
    throw ValidationError("{{TARGET}} must end its line");
  }
  if (tail_.empty() || tail_.front() != '\n') {
    throw ValidationError("{{VARIANTS}} must end its line");
  }
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate instance{std::string(detail::kPromptTemplateV1)};
  return instance;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open prompt template: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return PromptTemplate(buffer.str());
}

RenderedPrompt PromptTemplate::render(const RescoredList& list, const PromptConfig& config) const {
  if (config.max_variants < 1) {
    throw ValidationError("max_variants must be >= 1");
  }
  if (list.entries.size() < 2) {
    throw ValidationError("prompt needs at least 2 hypotheses (utterance " + list.utterance_id +
                          ")");
  }

  RenderedPrompt prompt;
  prompt.utterance_id = list.utterance_id;
  prompt.target = list.entries.front().text;
  require_single_line(prompt.target, list.utterance_id);

  std::vector<const RescoredHypothesis*> rest;
  rest.reserve(list.entries.size() - 1);
  for (size_t i = 1; i < list.entries.size(); ++i) {
    rest.push_back(&list.entries[i]);
  }
  if (config.variant_order == VariantOrder::Beam) {
    std::sort(rest.begin(), rest.end(), [](const RescoredHypothesis* a, const RescoredHypothesis* b) {
      return a->original_rank < b->original_rank;
    });
  }
  // The line that ends the variants block when parsing back; a variant equal
  // to it would make the rendered prompt ambiguous.
  const size_t anchor_end = tail_.find('\n', 1);
  const std::string anchor =
      tail_.substr(1, anchor_end == std::string::npos ? std::string::npos : anchor_end - 1);
  const size_t count = std::min<size_t>(rest.size(), static_cast<size_t>(config.max_variants));
  for (size_t i = 0; i < count; ++i) {
    require_single_line(rest[i]->text, list.utterance_id);
    if (rest[i]->text == anchor) {
      throw ValidationError("hypothesis text collides with a template delimiter (utterance " +
                            list.utterance_id + ")");
    }
    prompt.variants.push_back(rest[i]->text);
  }

  prompt.text = head_;
  prompt.text += prompt.target;
  prompt.text += mid_;
  prompt.text += join_lines(prompt.variants);
  prompt.text += apply_rule_options(tail_, config);
  return prompt;
}

PromptTemplate::Parsed PromptTemplate::parse_back(const std::string& rendered) const {
  if (rendered.rfind(head_, 0) != 0) {
    throw ValidationError("prompt does not start with this template's header");
  }
  const size_t target_start = head_.size();
  const size_t target_end = rendered.find('\n', target_start);
  if (target_end == std::string::npos) {
    throw ValidationError("prompt is truncated after the target slot");
  }
  Parsed parsed;
  parsed.target = rendered.substr(target_start, target_end - target_start);

  // mid_ starts with the newline that closed the target line.
  if (rendered.compare(target_end, mid_.size(), mid_) != 0) {
    throw ValidationError("prompt does not contain this template's variant header");
  }
  size_t cursor = target_end + mid_.size();
  // First line of tail_ after its leading newline anchors the end of variants.
  const size_t anchor_end = tail_.find('\n', 1);
  const std::string anchor = tail_.substr(1, anchor_end == std::string::npos ? std::string::npos
                                                                             : anchor_end - 1);
  while (cursor <= rendered.size()) {
    size_t line_end = rendered.find('\n', cursor);
    if (line_end == std::string::npos) {
      line_end = rendered.size();
    }
    std::string line = rendered.substr(cursor, line_end - cursor);
    if (line == anchor) {
      return parsed;
    }
    parsed.variants.push_back(std::move(line));
    if (line_end == rendered.size()) {
      break;
    }
    cursor = line_end + 1;
  }
  throw ValidationError("prompt is missing the rules section");
}

RenderedPrompt build_prompt(const RescoredList& list, const PromptConfig& config) {
  if (config.template_path.empty()) {
    return PromptTemplate::builtin().render(list, config);
  }
  return PromptTemplate::load(config.template_path).render(list, config);
}

}  // namespace asrpost
