#include "asrpost/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace asrpost {

namespace {

bool has_token(const std::string& text) {
  return text.find_first_not_of(" \t\r\n\f\v") != std::string::npos;
}

}  // namespace

void validate(const Hypothesis& hypothesis) {
  if (!has_token(hypothesis.text)) {
    throw ValidationError("hypothesis text has no tokens");
  }
  if (!std::isfinite(hypothesis.asr_log_prob)) {
    throw ValidationError("asr_log_prob is not finite");
  }
  if (hypothesis.asr_log_prob > 0.0) {
    throw ValidationError("asr_log_prob must be <= 0 (natural-log units)");
  }
}

void validate(const NBestList& list) {
  if (list.utterance_id.empty()) {
    throw ValidationError("utterance_id is empty");
  }
  if (list.hypotheses.empty()) {
    throw ValidationError("empty N-best list");
  }
  for (const auto& hypothesis : list.hypotheses) {
    validate(hypothesis);
  }
}

void ReferenceSet::add(const std::string& id, std::string transcript) {
  if (id.empty()) {
    throw ValidationError("reference id is empty");
  }
  auto [it, inserted] = entries_.emplace(id, std::move(transcript));
  if (!inserted) {
    throw ValidationError("duplicate reference id: " + id);
  }
}

const std::string& ReferenceSet::lookup(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw ValidationError("no reference for utterance: " + id);
  }
  return it->second;
}

Corpus parse_nbest(std::istream& in, const std::string& origin) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;  // blank line
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, line_no, std::string("invalid JSON: ") + e.what());
    }
    NBestList list;
    try {
      record.at("utterance_id").get_to(list.utterance_id);
      for (const auto& h : record.at("hypotheses")) {
        Hypothesis hypothesis;
        h.at("text").get_to(hypothesis.text);
        h.at("asr_log_prob").get_to(hypothesis.asr_log_prob);
        list.hypotheses.push_back(std::move(hypothesis));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, line_no, std::string("bad record: ") + e.what());
    }
    try {
      validate(list);
    } catch (const ValidationError& e) {
      throw ParseError(origin, line_no, e.what());
    }
    if (!seen_ids.insert(list.utterance_id).second) {
      throw ParseError(origin, line_no, "duplicate utterance_id: " + list.utterance_id);
    }
    corpus.push_back(std::move(list));
  }
  return corpus;
}

Corpus load_nbest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open N-best file: " + path);
  }
  return parse_nbest(in, path);
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& list : corpus) {
    nlohmann::ordered_json record;
    record["utterance_id"] = list.utterance_id;
    auto& hyps = record["hypotheses"] = nlohmann::ordered_json::array();
    for (const auto& hypothesis : list.hypotheses) {
      hyps.push_back({{"text", hypothesis.text}, {"asr_log_prob", hypothesis.asr_log_prob}});
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_nbest(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write N-best file: " + path);
  }
  out << to_jsonl(corpus);
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

ReferenceSet parse_references(std::istream& in, const std::string& origin) {
  ReferenceSet refs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(origin, line_no, "missing transcript field (expected id<TAB>transcript)");
    }
    std::string id = line.substr(0, tab);
    std::string transcript = line.substr(tab + 1);
    try {
      refs.add(id, std::move(transcript));
    } catch (const ValidationError& e) {
      throw ParseError(origin, line_no, e.what());
    }
  }
  return refs;
}

ReferenceSet load_references(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open reference file: " + path);
  }
  return parse_references(in, path);
}

}  // namespace asrpost
