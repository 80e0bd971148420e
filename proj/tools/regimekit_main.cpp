#include "regimekit/analytics.hpp"
#include "regimekit/config.hpp"
#include "regimekit/error.hpp"
#include "regimekit/io.hpp"
#include "regimekit/regime.hpp"
#include "regimekit/runner.hpp"
#include "regimekit/simulator.hpp"
#include "regimekit/stats.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace regimekit;

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& set_args) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : set_args) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return overrides;
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot open " + out_path + " for writing");
  out << content;
}

std::vector<long long> parse_ll_list(const std::string& csv) {
  std::vector<long long> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(std::stoll(part));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(std::stod(part));
  }
  return out;
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& set_args,
            const std::string& items_path, const std::string& out_path,
            std::optional<std::uint64_t> seed) {
  auto overrides = parse_overrides(set_args);
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  CohortConfig cfg = load_config_file(config_path, overrides);
  std::vector<ItemSpec> items = load_items(items_path, cfg.benchmark);
  std::unique_ptr<ChatBackend> backend = make_backend(cfg, items);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot open " + out_path + " for writing");
  RunSummary sum = run_cohort(cfg, items, *backend, [&](TrajectoryRecord&& r) {
    out << record_to_line(r) << '\n';
  });
  std::printf("records=%lld parse_fail_rate=%.2f%% dropout_rate=%.2f%%\n",
              sum.n_records, sum.parse_fail_rate * 100.0,
              sum.dropout_rate * 100.0);
  for (const auto& w : sum.warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  return sum.warnings.empty() ? 0 : 2;
}

int cmd_simulate(const std::string& config_path,
                 const std::vector<std::string>& set_args,
                 const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  auto overrides = parse_overrides(set_args);
  if (seed) overrides.emplace_back("sim.seed", std::to_string(*seed));
  CohortConfig cfg = load_config_file(config_path, overrides);
  std::vector<TrajectoryRecord> records =
      simulate(cfg.sim, cfg.benchmark, cfg.cohort_id);
  write_records_jsonl(out_path, records);
  long long fails = 0;
  for (const auto& r : records) {
    if (!parsed_ok(r.parsed)) ++fails;
  }
  std::printf("records=%zu parse_fail_rate=%.2f%%\n", records.size(),
              records.empty() ? 0.0 : 100.0 * fails / records.size());
  return 0;
}

int cmd_classify(const std::string& in_path, const std::string& tier_name,
                 const std::string& out_path, bool aggressive) {
  std::vector<TrajectoryRecord> records = read_records_jsonl(in_path);
  NormalizeOptions opts{.aggressive_whitespace = aggressive};
  ClassifiedLog log =
      classify_records(records, tier_from_string(tier_name), opts);
  write_transitions_jsonl(out_path, log.transitions);
  std::map<Regime, long long> counts;
  for (const auto& t : log.transitions) ++counts[t.regime];
  std::string line = "transitions=" + std::to_string(log.transitions.size());
  for (Regime r : {Regime::Boundary, Regime::IP, Regime::DC, Regime::DM,
                   Regime::BenignRevision, Regime::ParseFail}) {
    line += " " + std::string(to_string(r)) + "=" + std::to_string(counts[r]);
  }
  line += " dropped_transitions=" + std::to_string(log.dropped_transitions);
  std::printf("%s\n", line.c_str());
  return 0;
}

int cmd_report(const std::string& transitions_path,
               const std::string& records_path, const std::string& metric_name,
               const std::string& tier_name, const std::string& format,
               const std::string& out_path, const std::string& pairwise_path) {
  std::vector<Transition> transitions = read_transitions_jsonl(transitions_path);
  std::vector<TrajectoryRecord> records = read_records_jsonl(records_path);
  CohortReport rep =
      aggregate(transitions, records, accuracy_metric_from_string(metric_name),
                tier_from_string(tier_name));
  std::string content;
  if (format == "json") {
    content = render_report_json(rep) + "\n";
  } else if (format == "csv") {
    content = render_report_csv(rep);
  } else if (format == "table") {
    content = render_report_table(rep);
  } else {
    throw ConfigError("unknown format: " + format);
  }
  if (!pairwise_path.empty()) {
    std::vector<Transition> other = read_transitions_jsonl(pairwise_path);
    PairwiseResult pr = pairwise_contingency(transitions, other);
    content += render_pairwise_table(rep.cohort_id, pairwise_path, pr);
  }
  write_output(out_path, content);
  return 0;
}

int cmd_stats(const std::string& op, long long k, long long n, double z,
              const std::string& table_path, const std::string& successes_csv,
              const std::string& totals_csv, const std::string& scores_csv,
              bool one_sided) {
  Json out;
  if (op == "wilson") {
    IntervalEstimate est = wilson_interval(k, n, z);
    out = {{"point", est.point}, {"lo", est.lo}, {"hi", est.hi},
           {"z", est.z},         {"k", est.k},   {"n", est.n}};
  } else if (op == "chi2" || op == "cramers-v") {
    std::ifstream in(table_path);
    if (!in) throw DataError("cannot open " + table_path);
    Json doc = Json::parse(in);
    auto rows = doc.at("counts").get<std::vector<std::vector<long long>>>();
    ContingencyTable table = ContingencyTable::from_rows(rows);
    if (op == "chi2") {
      Chi2Result res = pearson_chi2(table);
      out = {{"chi2", res.chi2}, {"df", res.df}, {"p", res.p}};
    } else {
      out = {{"v", cramers_v_bias_corrected(table)}};
    }
  } else if (op == "trend") {
    std::vector<long long> successes = parse_ll_list(successes_csv);
    std::vector<long long> totals = parse_ll_list(totals_csv);
    std::vector<double> scores = parse_double_list(scores_csv);
    TrendResult res = cochran_armitage(successes, totals, scores, !one_sided);
    out = {{"z_stat", res.z_stat}, {"p", res.p}};
  } else {
    throw ConfigError("unknown stats op: " + op);
  }
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path,
                 const std::vector<std::string>& set_args) {
  load_config_file(config_path, parse_overrides(set_args));
  std::printf("ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-stage pipeline evaluation toolkit: run debate and "
               "self-correction protocols, classify answer transitions into "
               "response regimes, and report cohort statistics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string items_path;
  std::string in_path;
  std::string out_path;
  std::string transitions_path;
  std::string records_path;
  std::string pairwise_path;
  std::string tier = "primary";
  std::string metric = "per-agent-mean";
  std::string format = "table";
  std::vector<std::string> set_args;
  std::optional<std::uint64_t> seed;
  bool aggressive = false;

  auto* run = app.add_subcommand("run", "execute a protocol against a backend");
  run->add_option("--config", config_path)->required();
  run->add_option("--items", items_path)->required();
  run->add_option("--out", out_path)->required();
  run->add_option("--set", set_args, "override config keys, key=value");
  run->add_option("--seed", seed);

  auto* sim = app.add_subcommand("simulate", "emit a synthetic trajectory log");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--out", out_path)->required();
  sim->add_option("--set", set_args, "override config keys, key=value");
  sim->add_option("--seed", seed);

  auto* classify = app.add_subcommand("classify",
                                      "map a trajectory log to regimes");
  classify->add_option("--in", in_path)->required();
  classify->add_option("--tier", tier)->check(CLI::IsMember({"strict", "primary", "lenient"}));
  classify->add_option("--out", out_path)->required();
  classify->add_flag("--aggressive-whitespace", aggressive,
                     "collapse whitespace inside LaTeX arguments too");

  auto* report = app.add_subcommand("report", "aggregate one classified cohort");
  report->add_option("--transitions", transitions_path)->required();
  report->add_option("--records", records_path)->required();
  report->add_option("--metric", metric)
      ->check(CLI::IsMember({"per-agent-mean", "majority-vote"}));
  report->add_option("--tier", tier)->check(CLI::IsMember({"strict", "primary", "lenient"}));
  report->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "table"}));
  report->add_option("--out", out_path);
  report->add_option("--pairwise", pairwise_path,
                     "second cohort's transitions for a regime contingency test");

  std::string stats_op;
  long long stats_k = 0;
  long long stats_n = 0;
  double stats_z = kDefaultZ;
  std::string table_path;
  std::string successes_csv;
  std::string totals_csv;
  std::string scores_csv;
  bool one_sided = false;
  auto* stats = app.add_subcommand("stats", "statistical primitives");
  stats->add_option("--op", stats_op)
      ->required()
      ->check(CLI::IsMember({"wilson", "chi2", "cramers-v", "trend"}));
  stats->add_option("--k", stats_k);
  stats->add_option("--n", stats_n);
  stats->add_option("--z", stats_z);
  stats->add_option("--table", table_path, "JSON file with a counts matrix");
  stats->add_option("--successes", successes_csv);
  stats->add_option("--totals", totals_csv);
  stats->add_option("--scores", scores_csv);
  stats->add_flag("--one-sided", one_sided);

  auto* validate = app.add_subcommand("validate-config", "check a config file");
  validate->add_option("--config", config_path)->required();
  validate->add_option("--set", set_args, "override config keys, key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, set_args, items_path, out_path, seed);
    }
    if (sim->parsed()) {
      return cmd_simulate(config_path, set_args, out_path, seed);
    }
    if (classify->parsed()) {
      return cmd_classify(in_path, tier, out_path, aggressive);
    }
    if (report->parsed()) {
      return cmd_report(transitions_path, records_path, metric, tier, format,
                        out_path, pairwise_path);
    }
    if (stats->parsed()) {
      return cmd_stats(stats_op, stats_k, stats_n, stats_z, table_path,
                       successes_csv, totals_csv, scores_csv, one_sided);
    }
    if (validate->parsed()) {
      return cmd_validate(config_path, set_args);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
