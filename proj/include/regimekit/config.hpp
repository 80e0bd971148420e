#pragma once

#include "regimekit/records.hpp"
#include "regimekit/simulator.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace regimekit {

using Json = nlohmann::ordered_json;

struct BackendConfig {
  std::string kind = "mock_parametric";  // http | mock_replay | mock_parametric
  std::string endpoint_url;
  std::string auth_env;  // name of the env var holding the bearer token
  int timeout_ms = 60000;
  int max_retries = 5;
  int backoff_initial_ms = 250;
  double backoff_multiplier = 2.0;
  int concurrency = 1;  // in-flight request bound
  std::string fixture_path;  // replay transcript, JSONL
};

// Placeholders: {question} in initial, {question}/{own_previous}/
// {peer_responses} in debate, {question}/{previous_response} in review.
struct PromptTemplates {
  std::string initial;
  std::string debate;
  std::string review;
};

struct CohortConfig {
  std::string cohort_id;
  std::string model_name;
  Benchmark benchmark = Benchmark::Gsm8k;
  Method method = Method::E1;
  int agents = 3;        // E2 default: 1
  int rounds = 5;
  int passes = 2;        // E2 only
  int replicates = 3;
  double temperature = 0.0;
  int max_tokens = 0;    // 0 resolves to the benchmark default
  BackendConfig backend;
  PromptTemplates prompt_templates;  // empty fields resolve to defaults
  Json generation_options = Json::object();  // forwarded verbatim
  std::uint64_t seed = 0;
  SimParams sim;  // drives the parametric mock and the simulate command
  double parse_fail_warn_rate = 0.06;
  double dropout_warn_rate = 0.0;
};

int default_max_tokens(Benchmark b);
PromptTemplates default_templates(Benchmark b);

// Parses a config document. Unknown keys anywhere in the tree are rejected;
// defaults are filled in; the result is validated. Throws ConfigError.
CohortConfig config_from_json(const Json& doc);

// Loads the file, applies dotted-path overrides ("backend.kind=http",
// values parsed as JSON when possible), then parses and re-validates.
CohortConfig load_config_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Full invariant check; every command accepts exactly the configs this
// accepts. Throws ConfigError.
void validate_config(const CohortConfig& config);

}  // namespace regimekit
