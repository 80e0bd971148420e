#include "regimekit/runner.hpp"

#include "regimekit/error.hpp"
#include "regimekit/io.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <numeric>
#include <thread>

namespace regimekit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97f4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string fixture_key(const std::string& item_id, int round, int agent_id) {
  return item_id + "\x1f" + std::to_string(round) + "\x1f" +
         std::to_string(agent_id);
}

std::string replace_all(std::string text, std::string_view needle,
                        std::string_view value) {
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct Task {
  size_t item_index = 0;
  int agent_id = 0;
  std::string prompt;
};

BackendReply call_with_retries(ChatBackend& backend, const BackendConfig& cfg,
                               const CallKey& key, const BackendRequest& req) {
  BackendReply reply;
  double backoff = cfg.backoff_initial_ms;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    reply = backend.complete(key, req);
    if (reply.ok) return reply;
    if (attempt < cfg.max_retries && backoff > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long long>(backoff)));
      backoff *= cfg.backoff_multiplier;
    }
  }
  return reply;
}

// Dispatches one round's tasks with the configured in-flight bound and
// returns replies in task order, so log output is deterministic regardless of
// completion order.
std::vector<BackendReply> dispatch_round(ChatBackend& backend,
                                         const CohortConfig& cfg,
                                         std::span<const ItemSpec> items,
                                         const std::vector<Task>& tasks,
                                         int replicate, int round) {
  std::vector<BackendReply> replies(tasks.size());
  auto run_task = [&](size_t i) {
    const Task& t = tasks[i];
    CallKey key{items[t.item_index].item_id, replicate, round, t.agent_id};
    BackendRequest req;
    req.model = cfg.model_name;
    req.messages = {{"user", t.prompt}};
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.generation_options = &cfg.generation_options;
    replies[i] = call_with_retries(backend, cfg.backend, key, req);
  };
  const size_t bound = static_cast<size_t>(std::max(1, cfg.backend.concurrency));
  if (bound <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) run_task(i);
    return replies;
  }
  for (size_t begin = 0; begin < tasks.size(); begin += bound) {
    const size_t end = std::min(tasks.size(), begin + bound);
    std::vector<std::future<void>> wave;
    wave.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
      wave.push_back(std::async(std::launch::async, run_task, i));
    }
    for (auto& f : wave) f.get();
  }
  return replies;
}

TrajectoryRecord base_record(const CohortConfig& cfg, const ItemSpec& item,
                             int replicate, int round, int agent_id,
                             const std::string& prompt) {
  TrajectoryRecord rec;
  rec.cohort_id = cfg.cohort_id;
  rec.model_name = cfg.model_name;
  rec.benchmark = cfg.benchmark;
  rec.method = cfg.method;
  rec.replicate = replicate;
  rec.item_id = item.item_id;
  rec.round = round;
  rec.agent_id = agent_id;
  rec.prompt_digest = fnv1a64_hex(prompt);
  rec.ground_truth = item.ground_truth;
  rec.timestamp = now_ms();
  return rec;
}

void absorb_reply(const BackendReply& reply, Benchmark benchmark,
                  TrajectoryRecord* rec, RunSummary* sum) {
  ++sum->n_records;
  if (!reply.ok) {
    rec->dropped = true;
    ++sum->n_dropped;
    return;
  }
  rec->raw_text = reply.text;
  rec->parsed = extract_answer(rec->raw_text, benchmark);
  if (!parsed_ok(rec->parsed)) ++sum->n_parse_fail;
}

void finalize_summary(const CohortConfig& cfg, RunSummary* sum) {
  const long long live = sum->n_records - sum->n_dropped;
  sum->parse_fail_rate =
      live > 0 ? static_cast<double>(sum->n_parse_fail) / live : 0.0;
  sum->dropout_rate =
      sum->n_records > 0
          ? static_cast<double>(sum->n_dropped) / sum->n_records
          : 0.0;
  char buf[160];
  if (sum->parse_fail_rate > cfg.parse_fail_warn_rate) {
    std::snprintf(buf, sizeof(buf),
                  "parse-failure rate %.2f%% exceeds %.2f%%",
                  sum->parse_fail_rate * 100.0, cfg.parse_fail_warn_rate * 100.0);
    sum->warnings.push_back(buf);
  }
  if (sum->n_dropped > 0 && sum->dropout_rate > cfg.dropout_warn_rate) {
    std::snprintf(buf, sizeof(buf), "dropout rate %.2f%% exceeds %.2f%%",
                  sum->dropout_rate * 100.0, cfg.dropout_warn_rate * 100.0);
    sum->warnings.push_back(buf);
  }
}

std::vector<size_t> replicate_item_order(const CohortConfig& cfg,
                                         size_t n_items, int replicate) {
  std::vector<size_t> order(n_items);
  std::iota(order.begin(), order.end(), size_t{0});
  std::uint64_t state = cfg.seed ^ (0x51ED270B9A9D47ULL *
                                    (static_cast<std::uint64_t>(replicate) + 1));
  for (size_t i = n_items; i > 1; --i) {
    const size_t j = static_cast<size_t>(splitmix64(state) % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayBackend ReplayBackend::from_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fixture " + path);
  ReplayBackend backend;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      backend.add(j.at("item_id").get<std::string>(), j.at("round").get<int>(),
                  j.at("agent_id").get<int>(),
                  j.at("raw_text").get<std::string>());
    } catch (const std::exception& e) {
      throw DataError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return backend;
}

void ReplayBackend::add(const std::string& item_id, int round, int agent_id,
                        std::string raw_text) {
  fixture_[fixture_key(item_id, round, agent_id)] = std::move(raw_text);
}

BackendReply ReplayBackend::complete(const CallKey& key,
                                     const BackendRequest&) {
  auto it = fixture_.find(fixture_key(key.item_id, key.round, key.agent_id));
  if (it == fixture_.end()) {
    throw FixtureMissError("no fixture entry for item " + key.item_id +
                           " round " + std::to_string(key.round) + " agent " +
                           std::to_string(key.agent_id));
  }
  return {true, it->second, ""};
}

ParametricBackend::ParametricBackend(SimParams params, Benchmark benchmark,
                                     std::span<const ItemSpec> items)
    : params_(std::move(params)), benchmark_(benchmark) {
  validate(params_);
  int index = 0;
  for (const auto& item : items) item_index_[item.item_id] = index++;
}

BackendReply ParametricBackend::complete(const CallKey& key,
                                         const BackendRequest&) {
  auto it = item_index_.find(key.item_id);
  if (it == item_index_.end()) {
    return {false, "", "unknown item " + key.item_id};
  }
  TrajectoryPolicy policy(params_, benchmark_, it->second, key.replicate,
                          key.agent_id);
  TrajectoryPolicy::Turn turn;
  for (int r = 0; r <= key.round; ++r) turn = policy.step();
  return {true, turn.raw_text, ""};
}

HttpBackend::HttpBackend(const BackendConfig& config) : config_(config) {
  const std::string& url = config_.endpoint_url;
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint_url must include a scheme: " + url);
  }
  size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    base_ = url;
    path_ = "/";
  } else {
    base_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }
}

BackendReply HttpBackend::complete(const CallKey&, const BackendRequest& req) {
  Json body;
  body["model"] = req.model;
  Json messages = Json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  body["messages"] = messages;
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  if (req.generation_options != nullptr) {
    for (const auto& [key, value] : req.generation_options->items()) {
      body[key] = value;
    }
  }
  httplib::Client client(base_);
  client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
  client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    return {false, "", "transport error: " + httplib::to_string(res.error())};
  }
  if (res->status != 200) {
    return {false, "", "http status " + std::to_string(res->status)};
  }
  Json parsed = Json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) return {false, "", "response is not JSON"};
  try {
    const Json& choice = parsed.at("choices").at(0);
    if (choice.contains("message")) {
      return {true, choice.at("message").at("content").get<std::string>(), ""};
    }
    return {true, choice.at("text").get<std::string>(), ""};
  } catch (const std::exception& e) {
    return {false, "", std::string("unexpected response shape: ") + e.what()};
  }
}

std::unique_ptr<ChatBackend> make_backend(const CohortConfig& config,
                                          std::span<const ItemSpec> items) {
  if (config.backend.kind == "http") {
    return std::make_unique<HttpBackend>(config.backend);
  }
  if (config.backend.kind == "mock_replay") {
    return std::make_unique<ReplayBackend>(
        ReplayBackend::from_jsonl(config.backend.fixture_path));
  }
  return std::make_unique<ParametricBackend>(config.sim, config.benchmark,
                                             items);
}

RunSummary run_debate(const CohortConfig& cfg, std::span<const ItemSpec> items,
                      ChatBackend& backend, const RecordSink& sink) {
  validate_config(cfg);
  if (cfg.method != Method::E1) throw ConfigError("run_debate requires method E1");
  if (items.empty()) throw DataError("no items");
  RunSummary sum;
  const PromptTemplates& tmpl = cfg.prompt_templates;
  for (int replicate = 0; replicate < cfg.replicates; ++replicate) {
    std::vector<size_t> order = replicate_item_order(cfg, items.size(), replicate);
    // Full prior-round responses per item and agent; peer context for the
    // debate template.
    std::vector<std::vector<std::string>> prior(
        items.size(), std::vector<std::string>(static_cast<size_t>(cfg.agents)));
    for (int round = 0; round < cfg.rounds; ++round) {
      std::vector<Task> tasks;
      tasks.reserve(order.size() * static_cast<size_t>(cfg.agents));
      for (size_t item_index : order) {
        const ItemSpec& item = items[item_index];
        for (int agent = 0; agent < cfg.agents; ++agent) {
          Task t;
          t.item_index = item_index;
          t.agent_id = agent;
          if (round == 0) {
            t.prompt = replace_all(tmpl.initial, "{question}", item.question);
          } else {
            std::string peers;
            for (int other = 0; other < cfg.agents; ++other) {
              if (other == agent) continue;
              peers += "One agent responded:\n";
              peers += prior[item_index][static_cast<size_t>(other)];
              peers += "\n\n";
            }
            std::string p = replace_all(tmpl.debate, "{question}", item.question);
            p = replace_all(p, "{own_previous}",
                            prior[item_index][static_cast<size_t>(agent)]);
            t.prompt = replace_all(p, "{peer_responses}", peers);
          }
          tasks.push_back(std::move(t));
        }
      }
      std::vector<BackendReply> replies =
          dispatch_round(backend, cfg, items, tasks, replicate, round);
      for (size_t i = 0; i < tasks.size(); ++i) {
        const Task& t = tasks[i];
        TrajectoryRecord rec = base_record(cfg, items[t.item_index], replicate,
                                           round, t.agent_id, t.prompt);
        absorb_reply(replies[i], cfg.benchmark, &rec, &sum);
        prior[t.item_index][static_cast<size_t>(t.agent_id)] =
            replies[i].ok ? replies[i].text : "(no response)";
        sink(std::move(rec));
      }
    }
  }
  finalize_summary(cfg, &sum);
  return sum;
}

RunSummary run_self_correction(const CohortConfig& cfg,
                               std::span<const ItemSpec> items,
                               ChatBackend& backend, const RecordSink& sink) {
  validate_config(cfg);
  if (cfg.method != Method::E2) {
    throw ConfigError("run_self_correction requires method E2");
  }
  if (items.empty()) throw DataError("no items");
  RunSummary sum;
  const PromptTemplates& tmpl = cfg.prompt_templates;
  for (int replicate = 0; replicate < cfg.replicates; ++replicate) {
    std::vector<size_t> order = replicate_item_order(cfg, items.size(), replicate);
    std::vector<std::string> prior(items.size());
    for (int pass = 0; pass < cfg.passes; ++pass) {
      std::vector<Task> tasks;
      tasks.reserve(order.size());
      for (size_t item_index : order) {
        const ItemSpec& item = items[item_index];
        Task t;
        t.item_index = item_index;
        t.agent_id = 0;
        if (pass == 0) {
          t.prompt = replace_all(tmpl.initial, "{question}", item.question);
        } else {
          std::string p = replace_all(tmpl.review, "{question}", item.question);
          t.prompt = replace_all(p, "{previous_response}", prior[item_index]);
        }
        tasks.push_back(std::move(t));
      }
      std::vector<BackendReply> replies =
          dispatch_round(backend, cfg, items, tasks, replicate, pass);
      for (size_t i = 0; i < tasks.size(); ++i) {
        const Task& t = tasks[i];
        TrajectoryRecord rec = base_record(cfg, items[t.item_index], replicate,
                                           pass, 0, t.prompt);
        absorb_reply(replies[i], cfg.benchmark, &rec, &sum);
        prior[t.item_index] = replies[i].ok ? replies[i].text : "(no response)";
        sink(std::move(rec));
      }
    }
  }
  finalize_summary(cfg, &sum);
  return sum;
}

RunSummary run_cohort(const CohortConfig& cfg, std::span<const ItemSpec> items,
                      ChatBackend& backend, const RecordSink& sink) {
  return cfg.method == Method::E1
             ? run_debate(cfg, items, backend, sink)
             : run_self_correction(cfg, items, backend, sink);
}

}  // namespace regimekit
