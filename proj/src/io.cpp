#include "regimekit/io.hpp"

#include "regimekit/error.hpp"


#include <fstream>
#include <sstream>

namespace regimekit {

Json to_json(const ParsedAnswer& a) {
  Json j;
  j["kind"] = to_string(a.kind);
  j["raw_text"] = a.raw_text;
  j["canonical"] = a.canonical;
  if (a.numeric_value) j["numeric_value"] = rational_to_string(*a.numeric_value);
  return j;
}

Json to_json(const ParseOutcome& o) {
  if (parsed_ok(o)) return to_json(answer_of(o));
  Json j;
  j["parse_failure"] = to_string(failure_of(o).reason);
  return j;
}

ParsedAnswer parsed_answer_from_json(const Json& j) {
  ParsedAnswer a;
  a.kind = answer_kind_from_string(j.at("kind").get<std::string>());
  a.raw_text = j.at("raw_text").get<std::string>();
  a.canonical = j.at("canonical").get<std::string>();
  if (j.contains("numeric_value")) {
    auto r = rational_from_string(j.at("numeric_value").get<std::string>());
    if (!r) throw DataError("bad numeric_value in answer");
    a.numeric_value = *r;
  }
  if ((a.kind == AnswerKind::Numeric) != a.numeric_value.has_value()) {
    throw DataError("numeric_value presence does not match answer kind");
  }
  return a;
}

ParseOutcome parse_outcome_from_json(const Json& j) {
  if (j.contains("parse_failure")) {
    return ParseFailure{
        parse_fail_reason_from_string(j.at("parse_failure").get<std::string>())};
  }
  return parsed_answer_from_json(j);
}

Json to_json(const TrajectoryRecord& r) {
  Json j;
  j["cohort_id"] = r.cohort_id;
  j["model_name"] = r.model_name;
  j["benchmark"] = to_string(r.benchmark);
  j["method"] = to_string(r.method);
  j["replicate"] = r.replicate;
  j["item_id"] = r.item_id;
  j["round"] = r.round;
  j["agent_id"] = r.agent_id;
  j["prompt_digest"] = r.prompt_digest;
  if (!r.dropped) {
    j["raw_text"] = r.raw_text;
    j["parsed"] = to_json(r.parsed);
  }
  j["ground_truth"] = to_json(r.ground_truth);
  j["timestamp"] = r.timestamp;
  j["dropped"] = r.dropped;
  return j;
}

TrajectoryRecord record_from_json(const Json& j) {
  TrajectoryRecord r;
  r.cohort_id = j.at("cohort_id").get<std::string>();
  r.model_name = j.at("model_name").get<std::string>();
  r.benchmark = benchmark_from_string(j.at("benchmark").get<std::string>());
  r.method = method_from_string(j.at("method").get<std::string>());
  r.replicate = j.at("replicate").get<int>();
  r.item_id = j.at("item_id").get<std::string>();
  r.round = j.at("round").get<int>();
  r.agent_id = j.at("agent_id").get<int>();
  r.prompt_digest = j.at("prompt_digest").get<std::string>();
  r.dropped = j.at("dropped").get<bool>();
  if (!r.dropped) {
    r.raw_text = j.at("raw_text").get<std::string>();
    r.parsed = parse_outcome_from_json(j.at("parsed"));
  }
  r.ground_truth = parsed_answer_from_json(j.at("ground_truth"));
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  return r;
}

Json to_json(const Transition& t) {
  Json j;
  j["item_id"] = t.item_id;
  j["replicate"] = t.replicate;
  j["agent_id"] = t.agent_id;
  j["round_from"] = t.round_from;
  j["round_to"] = t.round_to;
  j["prev"] = to_json(t.prev);
  j["next"] = to_json(t.next);
  if (t.d_flag) j["d_flag"] = *t.d_flag;
  if (t.prev_correct) j["prev_correct"] = *t.prev_correct;
  if (t.next_correct) j["next_correct"] = *t.next_correct;
  j["regime"] = to_string(t.regime);
  return j;
}

Transition transition_from_json(const Json& j) {
  Transition t;
  t.item_id = j.at("item_id").get<std::string>();
  t.replicate = j.at("replicate").get<int>();
  t.agent_id = j.at("agent_id").get<int>();
  t.round_from = j.at("round_from").get<int>();
  t.round_to = j.at("round_to").get<int>();
  t.prev = parse_outcome_from_json(j.at("prev"));
  t.next = parse_outcome_from_json(j.at("next"));
  if (j.contains("d_flag")) t.d_flag = j.at("d_flag").get<int>();
  if (j.contains("prev_correct")) t.prev_correct = j.at("prev_correct").get<bool>();
  if (j.contains("next_correct")) t.next_correct = j.at("next_correct").get<bool>();
  t.regime = regime_from_string(j.at("regime").get<std::string>());
  return t;
}

std::string record_to_line(const TrajectoryRecord& r) {
  return to_json(r).dump();
}

std::string transition_to_line(const Transition& t) { return to_json(t).dump(); }

namespace {

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<T> out;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Dump>
void write_jsonl(const std::string& path, const std::vector<T>& rows,
                 Dump dump) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& r : rows) out << dump(r) << '\n';
}

}  // namespace

void write_records_jsonl(const std::string& path,
                         const std::vector<TrajectoryRecord>& records) {
  write_jsonl(path, records, record_to_line);
}

void write_transitions_jsonl(const std::string& path,
                             const std::vector<Transition>& transitions) {
  write_jsonl(path, transitions, transition_to_line);
}

std::vector<TrajectoryRecord> read_records_jsonl(const std::string& path) {
  return read_jsonl<TrajectoryRecord>(path, record_from_json);
}

std::vector<Transition> read_transitions_jsonl(const std::string& path) {
  return read_jsonl<Transition>(path, transition_from_json);
}

std::vector<ItemSpec> load_items(const std::string& path, Benchmark benchmark,
                                 const NormalizeOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<ItemSpec> items;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      ItemSpec item;
      item.item_id = j.at("item_id").get<std::string>();
      item.question = j.at("question").get<std::string>();
      item.ground_truth_text = j.at("ground_truth").get<std::string>();
      ParseOutcome gt = parse_ground_truth(item.ground_truth_text, benchmark, opts);
      if (!parsed_ok(gt)) {
        throw DataError("ground truth does not parse for benchmark " +
                        std::string(to_string(benchmark)));
      }
      item.ground_truth = answer_of(gt);
      items.push_back(std::move(item));
    } catch (const std::exception& e) {
      throw DataError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  if (items.empty()) throw DataError(path + ": no items");
  return items;
}

}  // namespace regimekit
