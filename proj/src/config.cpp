#include "regimekit/config.hpp"

#include "regimekit/error.hpp"

#include <fstream>
#include <set>

namespace regimekit {

int default_max_tokens(Benchmark b) {
  switch (b) {
    case Benchmark::Gsm8k: return 1024;
    case Benchmark::Math500Hard: return 4096;
    case Benchmark::GpqaDiamond: return 8192;
    case Benchmark::Aime: return 8192;
  }
  return 1024;
}

PromptTemplates default_templates(Benchmark b) {
  const std::string format_instruction =
      b == Benchmark::Gsm8k
          ? "End your response with the final numeric answer."
          : "Put your final answer in \\boxed{}.";
  PromptTemplates t;
  t.initial = "Solve the following problem step by step. " +
              format_instruction + "\n\nProblem: {question}";
  t.debate =
      "Here is the problem again:\n{question}\n\nYour previous answer:\n"
      "{own_previous}\n\nResponses from the other agents:\n{peer_responses}\n"
      "Consider their reasoning, then give your updated solution. " +
      format_instruction;
  t.review =
      "Review your previous solution for errors.\n\nProblem: {question}\n\n"
      "Your previous solution:\n{previous_response}\n\nIf you find a mistake, "
      "correct it; otherwise confirm your answer. " + format_instruction;
  return t;
}

namespace {

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const Json& obj, const char* key, T* out) {
  if (!obj.contains(key)) return;
  try {
    *out = obj.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

BackendConfig backend_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"kind", "endpoint_url", "auth_env", "timeout_ms",
                       "max_retries", "backoff_initial_ms",
                       "backoff_multiplier", "concurrency", "fixture_path"},
                      "backend");
  BackendConfig b;
  read_field(j, "kind", &b.kind);
  read_field(j, "endpoint_url", &b.endpoint_url);
  read_field(j, "auth_env", &b.auth_env);
  read_field(j, "timeout_ms", &b.timeout_ms);
  read_field(j, "max_retries", &b.max_retries);
  read_field(j, "backoff_initial_ms", &b.backoff_initial_ms);
  read_field(j, "backoff_multiplier", &b.backoff_multiplier);
  read_field(j, "concurrency", &b.concurrency);
  read_field(j, "fixture_path", &b.fixture_path);
  return b;
}

SimParams sim_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"n_items", "a0", "rounds", "agents", "replicates",
                       "p_detect_incorrect", "p_correct_given_revision",
                       "p_detect_correct", "p_incorrect_given_correct_revision",
                       "parse_fail_rate", "p_detect_incorrect_schedule", "seed"},
                      "sim");
  SimParams s;
  read_field(j, "n_items", &s.n_items);
  read_field(j, "a0", &s.a0);
  read_field(j, "rounds", &s.rounds);
  read_field(j, "agents", &s.agents);
  read_field(j, "replicates", &s.replicates);
  read_field(j, "p_detect_incorrect", &s.p_detect_incorrect);
  read_field(j, "p_correct_given_revision", &s.p_correct_given_revision);
  read_field(j, "p_detect_correct", &s.p_detect_correct);
  read_field(j, "p_incorrect_given_correct_revision",
             &s.p_incorrect_given_correct_revision);
  read_field(j, "parse_fail_rate", &s.parse_fail_rate);
  read_field(j, "p_detect_incorrect_schedule", &s.p_detect_incorrect_schedule);
  read_field(j, "seed", &s.seed);
  return s;
}

bool contains_placeholder(const std::string& tmpl, const char* name) {
  return tmpl.find(name) != std::string::npos;
}

}  // namespace

CohortConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(
      doc,
      {"cohort_id", "model_name", "benchmark", "method", "agents", "rounds",
       "passes", "replicates", "temperature", "max_tokens", "backend",
       "prompt_templates", "generation_options", "seed", "sim",
       "parse_fail_warn_rate", "dropout_warn_rate"},
      "config");
  CohortConfig c;
  read_field(doc, "cohort_id", &c.cohort_id);
  read_field(doc, "model_name", &c.model_name);
  if (doc.contains("benchmark")) {
    c.benchmark = benchmark_from_string(doc.at("benchmark").get<std::string>());
  }
  if (doc.contains("method")) {
    c.method = method_from_string(doc.at("method").get<std::string>());
  }
  c.agents = c.method == Method::E2 ? 1 : 3;
  read_field(doc, "agents", &c.agents);
  read_field(doc, "rounds", &c.rounds);
  read_field(doc, "passes", &c.passes);
  read_field(doc, "replicates", &c.replicates);
  read_field(doc, "temperature", &c.temperature);
  read_field(doc, "max_tokens", &c.max_tokens);
  read_field(doc, "seed", &c.seed);
  read_field(doc, "parse_fail_warn_rate", &c.parse_fail_warn_rate);
  read_field(doc, "dropout_warn_rate", &c.dropout_warn_rate);
  if (doc.contains("backend")) c.backend = backend_from_json(doc.at("backend"));
  if (doc.contains("sim")) {
    c.sim = sim_from_json(doc.at("sim"));
  }
  if (c.sim.seed == 0) c.sim.seed = c.seed;
  if (doc.contains("generation_options")) {
    if (!doc.at("generation_options").is_object()) {
      throw ConfigError("generation_options must be an object");
    }
    c.generation_options = doc.at("generation_options");
  }
  PromptTemplates defaults = default_templates(c.benchmark);
  c.prompt_templates = defaults;
  if (doc.contains("prompt_templates")) {
    const Json& t = doc.at("prompt_templates");
    reject_unknown_keys(t, {"initial", "debate", "review"}, "prompt_templates");
    read_field(t, "initial", &c.prompt_templates.initial);
    read_field(t, "debate", &c.prompt_templates.debate);
    read_field(t, "review", &c.prompt_templates.review);
  }
  if (c.max_tokens == 0) c.max_tokens = default_max_tokens(c.benchmark);
  validate_config(c);
  return c;
}

void validate_config(const CohortConfig& c) {
  if (c.cohort_id.empty()) throw ConfigError("cohort_id is required");
  if (c.model_name.empty()) throw ConfigError("model_name is required");
  if (c.method == Method::E1) {
    if (c.agents < 2) throw ConfigError("debate requires agents >= 2");
    if (c.rounds < 2) throw ConfigError("debate requires rounds >= 2");
  } else {
    if (c.agents != 1) throw ConfigError("self-correction requires agents == 1");
    if (c.passes != 2) throw ConfigError("self-correction requires passes == 2");
  }
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (c.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (c.backend.kind != "http" && c.backend.kind != "mock_replay" &&
      c.backend.kind != "mock_parametric") {
    throw ConfigError("backend.kind must be http, mock_replay or "
                      "mock_parametric");
  }
  if (c.backend.kind == "http" && c.backend.endpoint_url.empty()) {
    throw ConfigError("http backend requires endpoint_url");
  }
  if (c.backend.kind == "mock_replay" && c.backend.fixture_path.empty()) {
    throw ConfigError("replay backend requires fixture_path");
  }
  if (c.backend.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (c.backend.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (c.backend.timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
  if (!contains_placeholder(c.prompt_templates.initial, "{question}")) {
    throw ConfigError("initial template must contain {question}");
  }
  if (c.method == Method::E1) {
    if (!contains_placeholder(c.prompt_templates.debate, "{own_previous}") ||
        !contains_placeholder(c.prompt_templates.debate, "{peer_responses}")) {
      throw ConfigError("debate template must contain {own_previous} and "
                        "{peer_responses}");
    }
  } else if (!contains_placeholder(c.prompt_templates.review,
                                   "{previous_response}")) {
    throw ConfigError("review template must contain {previous_response}");
  }
  if (c.parse_fail_warn_rate < 0.0 || c.parse_fail_warn_rate > 1.0 ||
      c.dropout_warn_rate < 0.0 || c.dropout_warn_rate > 1.0) {
    throw ConfigError("warning thresholds must be rates in [0, 1]");
  }
  try {
    validate(c.sim);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  if (c.backend.kind == "mock_parametric" &&
      !c.sim.p_detect_incorrect_schedule.empty() &&
      static_cast<int>(c.sim.p_detect_incorrect_schedule.size()) !=
          c.rounds - 1) {
    throw ConfigError("sim schedule length must match the run's transitions");
  }
}

namespace {

// Parses the value as JSON when possible so numbers and booleans keep their
// type; anything unparseable is a plain string.
Json override_value(const std::string& text) {
  Json parsed = Json::parse(text, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  return Json(text);
}

}  // namespace

CohortConfig load_config_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file is not valid JSON");
  for (const auto& [key, value] : overrides) {
    Json* node = &doc;
    size_t begin = 0;
    for (;;) {
      size_t dot = key.find('.', begin);
      std::string part = key.substr(begin, dot - begin);
      if (part.empty()) throw ConfigError("bad override key '" + key + "'");
      if (dot == std::string::npos) {
        (*node)[part] = override_value(value);
        break;
      }
      node = &(*node)[part];
      begin = dot + 1;
    }
  }
  return config_from_json(doc);
}

}  // namespace regimekit
