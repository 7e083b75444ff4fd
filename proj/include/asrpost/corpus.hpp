#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "asrpost/errors.hpp"

namespace asrpost {

// One candidate transcription with the decoder's sentence log-probability,
// natural-log units, <= 0.
struct Hypothesis {
  std::string text;
  double asr_log_prob = 0.0;

  bool operator==(const Hypothesis&) const = default;
};

// One utterance's ranked hypotheses in the decoder's original order;
// position 0 is the beam-search top. Lists are immutable after loading.
struct NBestList {
  std::string utterance_id;
  std::vector<Hypothesis> hypotheses;

  bool operator==(const NBestList&) const = default;
};

using Corpus = std::vector<NBestList>;

// id -> reference transcript, verbatim as loaded. Lookup of a missing id is
// an error: evaluation must be total over the corpus it scores.
class ReferenceSet {
 public:
  ReferenceSet() = default;

  // Throws ValidationError on empty or duplicate id.
  void add(const std::string& id, std::string transcript);

  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const std::string& lookup(const std::string& id) const;
  size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Throw ValidationError if the record breaks a type invariant.
void validate(const Hypothesis& hypothesis);
void validate(const NBestList& list);

// N-best JSONL, one record per line:
//   {"utterance_id": "<id>", "hypotheses": [{"text": "...", "asr_log_prob": -1.2}, ...]}
// File order is preserved; hypotheses are never reordered.
Corpus load_nbest(const std::string& path);
Corpus parse_nbest(std::istream& in, const std::string& origin);

std::string to_jsonl(const Corpus& corpus);
void save_nbest(const Corpus& corpus, const std::string& path);

// Reference file: UTF-8, one "id<TAB>transcript" per line.
ReferenceSet load_references(const std::string& path);
ReferenceSet parse_references(std::istream& in, const std::string& origin);

}  // namespace asrpost
