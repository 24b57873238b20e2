#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tempoq/gdn.hpp"
#include "tempoq/log_tools.hpp"
#include "tempoq/oracle.hpp"
#include "tempoq/query_parser.hpp"
#include "tempoq/shs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMismatch = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json read_json(const std::string& path) {
  return nlohmann::json::parse(read_file(path));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open " + path + " for writing");
  }
  out << content;
}

struct GenLogArgs {
  std::string spec_path;
  std::string out_path;
};

int run_gen_log(const GenLogArgs& args) {
  tempoq::LogSpec spec = tempoq::log_spec_from_json(read_json(args.spec_path));
  if (!spec.has_seed) {
    if (const char* env = std::getenv("TEMPOQ_SEED")) {
      spec.seed = std::stoull(env);
      spec.has_seed = true;
    } else {
      throw std::invalid_argument(
          "log spec has no seed and TEMPOQ_SEED is not set");
    }
  }
  std::vector<tempoq::ShsEvent> events = tempoq::synthesize(spec);
  tempoq::write_log_file(args.out_path, events);

  std::vector<std::int64_t> er_times;
  for (const auto& e : events) {
    if (e.kind == tempoq::ShsEventKind::ER) {
      er_times.push_back(e.timestamp);
    }
  }
  std::sort(er_times.begin(), er_times.end());
  double mean_iat = 0.0;
  if (er_times.size() > 1) {
    mean_iat = static_cast<double>(er_times.back() - er_times.front()) /
               static_cast<double>(er_times.size() - 1);
  }
  std::cout << "trajectories: " << er_times.size() << "\n"
            << "events: " << events.size() << "\n"
            << "mean inter-arrival time (s): " << mean_iat << "\n";
  return kExitOk;
}

struct ReplayArgs {
  std::string config_path;
  std::string log_path;
  std::string queries_path;
  std::string variant;
  std::int64_t period = 0;
  std::string report_base;
  bool no_timing = false;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

// Explicit flags override config-file values.
ReplayArgs merge_replay_config(ReplayArgs args) {
  if (!args.config_path.empty()) {
    nlohmann::json cfg = read_json(args.config_path);
    if (args.log_path.empty() && cfg.contains("log")) {
      args.log_path = cfg.at("log").get<std::string>();
    }
    if (args.queries_path.empty() && cfg.contains("queries")) {
      args.queries_path = cfg.at("queries").get<std::string>();
    }
    if (args.variant.empty() && cfg.contains("variant")) {
      args.variant = cfg.at("variant").get<std::string>();
    }
    if (args.period == 0 && cfg.contains("period")) {
      args.period = cfg.at("period").get<std::int64_t>();
    }
    if (cfg.contains("seed")) {
      args.seed = cfg.at("seed").get<std::uint64_t>();
      args.has_seed = true;
    }
  }
  if (args.variant.empty()) {
    args.variant = "intempo";
  }
  if (args.period == 0) {
    args.period = 3600;
  }
  if (args.log_path.empty() || args.queries_path.empty() ||
      args.report_base.empty()) {
    throw std::invalid_argument(
        "replay needs a log, a query file and a report path (flags or config)");
  }
  return args;
}

int run_replay(ReplayArgs args) {
  args = merge_replay_config(std::move(args));
  std::vector<tempoq::ShsEvent> events = tempoq::read_log_file(args.log_path);
  tempoq::QueryFile queries = tempoq::parse_queries(read_file(args.queries_path));
  if (queries.queries.empty()) {
    throw std::invalid_argument("query file declares no queries");
  }
  tempoq::shs::LoopConfig config;
  config.period = args.period;
  config.variant = tempoq::shs::variant_from_name(args.variant);
  config.queries = queries.queries;
  config.record_timing = !args.no_timing;

  tempoq::shs::AdaptationLoop loop(config);
  std::vector<tempoq::shs::LoopStats> rows = loop.run(events);
  for (const auto& w : loop.warnings()) {
    std::cerr << "warning: " << w << "\n";
  }

  nlohmann::ordered_json echo;
  echo["variant"] = args.variant;
  echo["period"] = args.period;
  echo["log"] = args.log_path;
  echo["queries"] = args.queries_path;
  echo["noTiming"] = args.no_timing;
  if (args.has_seed) {
    echo["seed"] = args.seed;
  }
  nlohmann::ordered_json report =
      tempoq::shs::run_report_to_json(echo, rows, loop.ledger());
  write_file(args.report_base + ".csv", tempoq::shs::stats_to_csv(rows));
  write_file(args.report_base + ".json", report.dump(2) + "\n");

  std::cout << "invocations: " << rows.size() << "\n"
            << "violations: " << loop.ledger().size() << "\n"
            << "final model elements: "
            << (rows.empty() ? 0 : rows.back().model_elements) << "\n";
  return kExitOk;
}

struct QueryArgs {
  std::string model_path;
  std::string queries_path;
  std::int64_t now = 0;
};

int run_query(const QueryArgs& args) {
  tempoq::HistoryGraph graph =
      tempoq::HistoryGraph::from_json(read_json(args.model_path));
  tempoq::QueryFile queries = tempoq::parse_queries(read_file(args.queries_path));
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const tempoq::Query& q : queries.queries) {
    tempoq::GdnNetwork network(q, graph.types());
    network.execute_full(graph);
    tempoq::MatchReport report = network.report();
    tempoq::ClassifiedMatches classified = tempoq::classify_matches(
        report, *q.condition, tempoq::TimePoint(args.now));
    out.push_back(tempoq::report_to_json(report, classified));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct OracleArgs {
  std::string model_path;
  std::string queries_path;
  std::int64_t horizon = 0;
  bool diff = false;
  std::string expect_path;
};

int run_oracle(const OracleArgs& args) {
  tempoq::HistoryGraph graph =
      tempoq::HistoryGraph::from_json(read_json(args.model_path));
  tempoq::QueryFile queries = tempoq::parse_queries(read_file(args.queries_path));
  tempoq::TimePoint horizon(args.horizon);

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  bool mismatch = false;
  for (const tempoq::Query& q : queries.queries) {
    tempoq::OracleResult result = tempoq::evaluate(graph, q, horizon);
    out.push_back(tempoq::oracle_result_to_json(result, horizon));
    if (args.diff) {
      tempoq::GdnNetwork network(q, graph.types());
      network.execute_full(graph);
      tempoq::FragmentedInterval window(
          tempoq::Interval::closed(0, args.horizon));
      std::map<tempoq::Binding, std::string> engine;
      for (const auto& entry : network.report().matches) {
        tempoq::FragmentedInterval clipped = intersect(entry.lambda, window);
        if (!clipped.empty()) {
          engine[entry.binding] = clipped.to_string();
        }
      }
      std::map<tempoq::Binding, std::string> oracle;
      for (const auto& entry : result.results) {
        oracle[entry.binding] = entry.satisfaction.to_string();
      }
      if (engine != oracle) {
        mismatch = true;
        std::cerr << "mismatch for query " << q.name << ": engine has "
                  << engine.size() << " matches, oracle has " << oracle.size()
                  << "\n";
      }
    }
  }
  std::cout << out.dump(2) << "\n";
  if (!args.expect_path.empty()) {
    nlohmann::json expected = read_json(args.expect_path);
    if (nlohmann::json(out) != expected) {
      std::cerr << "oracle output differs from " << args.expect_path << "\n";
      return kExitMismatch;
    }
  }
  return mismatch ? kExitMismatch : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental temporal graph queries over runtime models with "
               "history"};
  app.require_subcommand(1);

  GenLogArgs gen_args;
  CLI::App* gen = app.add_subcommand(
      "gen-log", "Synthesize a density-scaled patient event log");
  gen->add_option("--spec", gen_args.spec_path, "Log spec JSON")->required();
  gen->add_option("--out", gen_args.out_path, "Output CSV path")->required();

  ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand(
      "replay", "Replay a log through the adaptation loop");
  replay->add_option("--config", replay_args.config_path,
                     "Loop config JSON (variant, period, log, queries, seed); "
                     "explicit flags take precedence");
  replay->add_option("--log", replay_args.log_path, "Event log CSV");
  replay->add_option("--queries", replay_args.queries_path, "Query file");
  replay->add_option("--variant", replay_args.variant,
                     "intempo or intempo-plus");
  replay->add_option("--period", replay_args.period,
                     "Loop invocation period in seconds (default 3600)");
  replay->add_option("--report", replay_args.report_base,
                     "Report base path (.csv and .json are appended)")
      ->required();
  replay->add_flag("--no-timing", replay_args.no_timing,
                   "Zero timing columns for reproducible reports");

  QueryArgs query_args;
  CLI::App* query = app.add_subcommand(
      "query", "Run queries once over a model snapshot");
  query->add_option("--model", query_args.model_path, "Model snapshot JSON")
      ->required();
  query->add_option("--queries", query_args.queries_path, "Query file")
      ->required();
  query->add_option("--now", query_args.now, "Current time point")->required();

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Brute-force satisfaction check over a model snapshot");
  oracle->add_option("--model", oracle_args.model_path, "Model snapshot JSON")
      ->required();
  oracle->add_option("--queries", oracle_args.queries_path, "Query file")
      ->required();
  oracle->add_option("--horizon", oracle_args.horizon, "Evaluation horizon")
      ->required();
  oracle->add_flag("--diff", oracle_args.diff,
                   "Compare against the incremental engine");
  oracle->add_option("--expect", oracle_args.expect_path,
                     "Compare output against an expected JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return run_gen_log(gen_args);
    }
    if (replay->parsed()) {
      return run_replay(replay_args);
    }
    if (query->parsed()) {
      return run_query(query_args);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
