#pragma once

#include "regimekit/records.hpp"
#include "regimekit/regime.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace regimekit {

using Json = nlohmann::ordered_json;

Json to_json(const ParsedAnswer& a);
Json to_json(const ParseOutcome& o);
Json to_json(const TrajectoryRecord& r);
Json to_json(const Transition& t);

ParsedAnswer parsed_answer_from_json(const Json& j);
ParseOutcome parse_outcome_from_json(const Json& j);
TrajectoryRecord record_from_json(const Json& j);
Transition transition_from_json(const Json& j);

// JSONL files: one object per line, UTF-8. Readers throw DataError with the
// offending 1-based row number.
void write_records_jsonl(const std::string& path,
                         const std::vector<TrajectoryRecord>& records);
void write_transitions_jsonl(const std::string& path,
                             const std::vector<Transition>& transitions);
std::vector<TrajectoryRecord> read_records_jsonl(const std::string& path);
std::vector<Transition> read_transitions_jsonl(const std::string& path);

// Items file: JSONL of {item_id, question, ground_truth}. Ground truth is
// parsed for the benchmark; unparseable answers are a configuration error.
std::vector<ItemSpec> load_items(const std::string& path, Benchmark benchmark,
                                 const NormalizeOptions& opts = {});

std::string record_to_line(const TrajectoryRecord& r);
std::string transition_to_line(const Transition& t);

}  // namespace regimekit
