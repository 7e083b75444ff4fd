#include "asrpost/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace asrpost {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("bad numeric value for " + key + ": " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("bad integer value for " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ValidationError("bad boolean value for " + key + ": " + value);
}

}  // namespace

void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value) {
  if (key == "alpha") {
    config.alpha = parse_double(key, value);
  } else if (key == "beta") {
    config.beta = parse_double(key, value);
  } else if (key == "n_best") {
    config.n_best_cap = parse_int(key, value);
  } else if (key == "scorer") {
    config.scorer = value;
  } else if (key == "scorer_file") {
    config.scorer_file = value;
  } else if (key == "lm_endpoint") {
    config.lm_endpoint = value;
  } else if (key == "llm") {
    config.llm = value;
  } else if (key == "llm_fixture") {
    config.llm_fixture = value;
  } else if (key == "llm_endpoint") {
    config.llm_endpoint = value;
  } else if (key == "model") {
    config.llm_params.model_id = value;
  } else if (key == "temperature") {
    config.llm_params.temperature = parse_double(key, value);
  } else if (key == "max_output_tokens") {
    config.llm_params.max_output_tokens = parse_int(key, value);
  } else if (key == "request_timeout_ms") {
    config.llm_params.request_timeout = std::chrono::milliseconds(parse_int(key, value));
  } else if (key == "max_retries") {
    config.llm_params.max_retries = parse_int(key, value);
  } else if (key == "retry_base_delay_ms") {
    config.llm_params.retry_base_delay = std::chrono::milliseconds(parse_int(key, value));
  } else if (key == "system_role_split") {
    config.llm_params.system_role_split = parse_bool(key, value);
  } else if (key == "spelling") {
    if (value == "us") {
      config.prompt.spelling = SpellingVariant::US;
    } else if (value == "uk") {
      config.prompt.spelling = SpellingVariant::UK;
    } else {
      throw ValidationError("spelling must be us or uk, got: " + value);
    }
  } else if (key == "ignore_punctuation") {
    config.prompt.ignore_punctuation = parse_bool(key, value);
  } else if (key == "max_variants") {
    config.prompt.max_variants = parse_int(key, value);
  } else if (key == "variant_order") {
    if (value == "rescored") {
      config.prompt.variant_order = VariantOrder::Rescored;
    } else if (value == "beam") {
      config.prompt.variant_order = VariantOrder::Beam;
    } else {
      throw ValidationError("variant_order must be rescored or beam, got: " + value);
    }
  } else if (key == "prompt_template") {
    config.prompt.template_path = value;
  } else if (key == "allow_new_words") {
    config.guard.allow_new_words = parse_bool(key, value);
  } else if (key == "enforce_length") {
    config.guard.enforce_length = parse_bool(key, value);
  } else if (key == "length_tolerance") {
    config.guard.length_tolerance = parse_int(key, value);
  } else if (key == "workers") {
    config.workers = parse_int(key, value);
  } else if (key == "lm_inflight") {
    config.lm_inflight = parse_int(key, value);
  } else if (key == "llm_inflight") {
    config.llm_inflight = parse_int(key, value);
  } else {
    throw ValidationError("unknown config key: " + key);
  }
}

PipelineConfig parse_config(std::istream& in, const std::string& origin) {
  PipelineConfig config;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin, line_no, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(origin, line_no, "empty key");
    }
    try {
      apply_config_entry(config, key, value);
    } catch (const ValidationError& e) {
      throw ParseError(origin, line_no, e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  return parse_config(in, path);
}

void validate(const PipelineConfig& config) {
  if (!std::isfinite(config.alpha) || config.alpha < 0.0) {
    throw ValidationError("alpha must be finite and >= 0");
  }
  if (!std::isfinite(config.beta) || config.beta < 0.0 || config.beta > 1.0) {
    throw ValidationError("beta must be in [0, 1]");
  }
  if (config.n_best_cap < 1) {
    throw ValidationError("n_best must be >= 1");
  }
  if (config.prompt.max_variants < 1) {
    throw ValidationError("max_variants must be >= 1");
  }
  if (config.guard.length_tolerance < 0) {
    throw ValidationError("length_tolerance must be >= 0");
  }
  if (config.workers < 1 || config.lm_inflight < 1 || config.llm_inflight < 1) {
    throw ValidationError("workers and in-flight caps must be >= 1");
  }
  validate(config.llm_params);
}

}  // namespace asrpost
