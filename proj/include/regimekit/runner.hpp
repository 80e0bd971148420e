#pragma once

#include "regimekit/config.hpp"
#include "regimekit/records.hpp"
#include "regimekit/simulator.hpp"

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace regimekit {

struct CallKey {
  std::string item_id;
  int replicate = 0;
  int round = 0;
  int agent_id = 0;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct BackendRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 0;
  const Json* generation_options = nullptr;  // forwarded verbatim
};

struct BackendReply {
  bool ok = false;
  std::string text;
  std::string error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendReply complete(const CallKey& key, const BackendRequest& req) = 0;
};

// Replays a fixture transcript keyed by (item, round, agent). Misses throw
// FixtureMissError: a replay run must be fully scripted.
class ReplayBackend final : public ChatBackend {
 public:
  static ReplayBackend from_jsonl(const std::string& path);
  void add(const std::string& item_id, int round, int agent_id,
           std::string raw_text);
  BackendReply complete(const CallKey& key, const BackendRequest& req) override;

 private:
  std::map<std::string, std::string> fixture_;
};

// Drives responses from the regime simulator's per-trajectory policy, so the
// full pipeline -> parser -> classifier -> analytics path can run against
// known generative marginals. Stateless per call (the trajectory is re-derived
// from the seed), hence safe under concurrent dispatch.
class ParametricBackend final : public ChatBackend {
 public:
  ParametricBackend(SimParams params, Benchmark benchmark,
                    std::span<const ItemSpec> items);
  BackendReply complete(const CallKey& key, const BackendRequest& req) override;

 private:
  SimParams params_;
  Benchmark benchmark_;
  std::map<std::string, int> item_index_;
};

// Chat-completion HTTP endpoint: POSTs a JSON body with model, messages,
// temperature, max_tokens and the opaque generation options; reads the first
// choice's text content. Auth token comes from the env var named in config.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(const BackendConfig& config);
  BackendReply complete(const CallKey& key, const BackendRequest& req) override;

 private:
  BackendConfig config_;
  std::string base_;
  std::string path_;
};

std::unique_ptr<ChatBackend> make_backend(const CohortConfig& config,
                                          std::span<const ItemSpec> items);

using RecordSink = std::function<void(TrajectoryRecord&&)>;

struct RunSummary {
  long long n_records = 0;
  long long n_dropped = 0;
  long long n_parse_fail = 0;
  double parse_fail_rate = 0.0;
  double dropout_rate = 0.0;
  std::vector<std::string> warnings;
};

// Multi-agent debate: round 0 answers the question independently; each later
// round re-asks with the agent's own prior answer and the other agents' full
// prior responses embedded in the debate template. All agents x rounds x
// replicates x items are logged, dropped requests included.
RunSummary run_debate(const CohortConfig& config,
                      std::span<const ItemSpec> items, ChatBackend& backend,
                      const RecordSink& sink);

// Intrinsic self-correction: pass 0 initial answer, pass 1 review-and-revise
// of the agent's own pass-0 response.
RunSummary run_self_correction(const CohortConfig& config,
                               std::span<const ItemSpec> items,
                               ChatBackend& backend, const RecordSink& sink);

RunSummary run_cohort(const CohortConfig& config,
                      std::span<const ItemSpec> items, ChatBackend& backend,
                      const RecordSink& sink);

std::string fnv1a64_hex(std::string_view data);

}  // namespace regimekit
