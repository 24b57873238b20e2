// Acceptance suite: one check per shipped guarantee, each printed as a
// single PASS/FAIL line. The process exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "tempoq/gdn.hpp"
#include "tempoq/log_tools.hpp"
#include "tempoq/oracle.hpp"
#include "tempoq/query_parser.hpp"
#include "tempoq/shs.hpp"

using namespace tempoq;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(TEMPOQ_FIXTURE_DIR) + "/" + rel;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

HistoryGraph worked_example() {
  return HistoryGraph::from_json(
      nlohmann::json::parse(slurp(fixture("worked_example/model.json"))));
}

FragmentedInterval fi(const std::string& text) {
  return FragmentedInterval::from_string(text);
}

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) {
    throw Failure(detail);
  }
}

// ---------------------------------------------------------------- helpers

std::map<Binding, FragmentedInterval> engine_clipped(const HistoryGraph& g,
                                                     const Query& q,
                                                     std::int64_t horizon) {
  GdnNetwork net(q, g.types());
  net.execute_full(g);
  FragmentedInterval window(Interval::closed(0, horizon));
  std::map<Binding, FragmentedInterval> out;
  for (const auto& m : net.report().matches) {
    FragmentedInterval clipped = intersect(m.lambda, window);
    if (!clipped.empty()) {
      out[m.binding] = clipped;
    }
  }
  return out;
}

std::map<Binding, FragmentedInterval> oracle_map(const HistoryGraph& g,
                                                 const Query& q,
                                                 std::int64_t horizon) {
  std::map<Binding, FragmentedInterval> out;
  for (const auto& r : evaluate(g, q, TimePoint(horizon)).results) {
    out[r.binding] = r.satisfaction;
  }
  return out;
}

std::vector<ShsEvent> random_shs_log(testgen::Rng& rng, int patients) {
  std::vector<ShsEvent> events;
  std::int64_t now = 0;
  for (int i = 0; i < patients; ++i) {
    now += 60 + rng.below(9000);
    std::string pid = "p" + std::to_string(i + 1);
    events.push_back({ShsEventKind::ER, pid, now});
    if (rng.chance(60)) {
      events.push_back({ShsEventKind::IV, pid, now + 60 + rng.below(7200)});
    }
    if (rng.chance(60)) {
      events.push_back({ShsEventKind::RE, pid, now + 60 + rng.below(7200)});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ShsEvent& a, const ShsEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
  return events;
}

using LedgerKey =
    std::vector<std::tuple<std::string, std::string, std::int64_t>>;

LedgerKey ledger_key(const std::vector<shs::ViolationRecord>& ledger) {
  LedgerKey out;
  for (const auto& v : ledger) {
    out.emplace_back(v.query, v.patient, v.detected_at);
  }
  return out;
}

// ---------------------------------------------------------------- criteria

// Worked-example golden values, exact equality.
void criterion_worked_example() {
  auto start = std::chrono::steady_clock::now();
  HistoryGraph g = worked_example();
  Query zeta =
      parse_queries(slurp(fixture("worked_example/queries.tq"))).queries[0];
  GdnNetwork net(zeta, g.types());
  net.execute_full(g);

  const GdnNodeInfo* leaf_left = nullptr;
  const GdnNodeInfo* leaf_right = nullptr;
  const GdnNodeInfo* until = nullptr;
  for (const auto& node : net.nodes()) {
    if (node.kind == GdnNodeKind::Pattern && node.pattern.name == "n1_1") {
      leaf_left = &node;
    }
    if (node.kind == GdnNodeKind::Pattern && node.pattern.name == "n1_2") {
      leaf_right = &node;
    }
    if (node.kind == GdnNodeKind::Until) {
      until = &node;
    }
  }
  require(leaf_left && leaf_right && until, "network nodes missing");

  const auto& left_marks = net.node_markings(leaf_left->id);
  require(left_marks.size() == 1 &&
              left_marks.begin()->second.lambda == fi("[5,7]"),
          "phase I lifespan is not [5,7]");

  bool alpha_ok = false;
  for (const auto& node : net.nodes()) {
    if (node.kind == GdnNodeKind::Alpha &&
        node.deps.front().node == leaf_right->id) {
      const auto& marks = net.node_markings(node.id);
      alpha_ok =
          marks.size() == 1 && marks.begin()->second.lambda == fi("[6,9]");
    }
  }
  require(alpha_ok, "phase IV aggregated lifespan is not [6,9]");

  const auto& until_marks = net.node_markings(until->id);
  require(until_marks.size() == 1 &&
              until_marks.begin()->second.lambda == fi("[5,9]"),
          "phase V satisfaction is not [5,9]");

  MatchReport report = net.report();
  require(
      report.matches.size() == 1 && report.matches[0].lambda == fi("[5,9]"),
      "terminal match lifespan is not [5,9]");

  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(secs < 1.0, "worked example exceeded one second");
}

// Cut-off values for the three shipped queries.
void criterion_cutoff() {
  Query zeta =
      parse_queries(slurp(fixture("worked_example/queries.tq"))).queries[0];
  QueryFile shs_file = parse_queries(slurp(fixture("shs/queries.tq")));
  require(cutoff(zeta) == 2, "cutoff of the running example is not 2");
  require(cutoff(shs_file.queries[0]) == 3600, "cutoff of phi1 is not 3600");
  require(cutoff(shs_file.queries[1]) == 3600, "cutoff of phi2 is not 3600");
}

// Engine vs brute-force oracle on randomized instances.
void criterion_oracle_equivalence() {
  const int kInstances = 500;
  for (int trial = 0; trial < kInstances; ++trial) {
    testgen::Rng rng(3000 + static_cast<std::uint64_t>(trial));
    HistoryGraph g = testgen::random_history(rng, 12, 30);
    Query q =
        testgen::random_query(rng, static_cast<std::uint64_t>(trial), 3, 8);
    auto engine = engine_clipped(g, q, 30);
    auto oracle = oracle_map(g, q, 30);
    if (engine != oracle) {
      throw Failure("mismatch on instance " + std::to_string(trial) + ": " +
                    render_query(q));
    }
  }
}

// Incremental execution after arbitrary journal batching ends in the same
// marking state as a single full execution.
void criterion_incremental_equals_full() {
  struct Op {
    enum Kind { Vertex, Edge, Delete } kind = Vertex;
    std::string type;
    AttrMap attrs;
    ElementId a = 0;
    ElementId b = 0;
    std::int64_t at = 0;
  };
  const int kSequences = 200;
  for (int trial = 0; trial < kSequences; ++trial) {
    testgen::Rng rng(5000 + static_cast<std::uint64_t>(trial));

    // Script a valid change sequence against a scratch graph.
    std::vector<Op> ops;
    {
      HistoryGraph scratch(testgen::test_type_graph());
      int n = 6 + static_cast<int>(rng.below(14));
      const char* types[] = {"A", "B", "C"};
      for (int i = 0; i < n; ++i) {
        if (rng.chance(60) || scratch.element_count() < 2) {
          Op op;
          op.kind = Op::Vertex;
          op.type = types[rng.below(3)];
          if (op.type == "A") {
            op.attrs["tag"] = std::string(rng.chance(50) ? "red" : "blue");
          }
          op.at = rng.below(25);
          scratch.create_vertex(op.type, op.attrs, TimePoint(op.at));
          ops.push_back(op);
        } else if (rng.chance(60)) {
          auto ids = scratch.all_ids();
          ElementId a = ids[rng.below(ids.size())];
          ElementId b = ids[rng.below(ids.size())];
          if (a == b || !scratch.element(a).is_vertex ||
              !scratch.element(b).is_vertex) {
            continue;
          }
          if (!scratch.element(a).dts.is_infinite() ||
              !scratch.element(b).dts.is_infinite()) {
            continue;
          }
          const std::string& ta = scratch.element(a).type;
          const std::string& tb = scratch.element(b).type;
          Op op;
          op.kind = Op::Edge;
          if (ta == "A" && tb == "A") {
            op.type = "aa";
          } else if (ta == "A") {
            op.type = "ab";
          } else if (tb == "A") {
            op.type = "ba";
          } else {
            continue;
          }
          op.a = a;
          op.b = b;
          std::int64_t lo = std::max(scratch.element(a).cts.ticks(),
                                     scratch.element(b).cts.ticks());
          op.at = lo + rng.below(std::max<std::int64_t>(1, 25 - lo));
          scratch.create_edge(op.type, a, b, TimePoint(op.at));
          ops.push_back(op);
        } else {
          auto ids = scratch.all_ids();
          ElementId victim = ids[rng.below(ids.size())];
          const Element& e = scratch.element(victim);
          if (!e.dts.is_infinite()) {
            continue;
          }
          std::int64_t lo = e.cts.ticks();
          if (e.is_vertex) {
            for (ElementId eid : scratch.out_edges(victim)) {
              lo = std::max(lo, scratch.element(eid).cts.ticks());
            }
            for (ElementId eid : scratch.in_edges(victim)) {
              lo = std::max(lo, scratch.element(eid).cts.ticks());
            }
          }
          if (lo >= 28) {
            continue;
          }
          Op op;
          op.kind = Op::Delete;
          op.a = victim;
          op.at = lo + rng.below(28 - lo);
          scratch.delete_element(victim, TimePoint(op.at));
          ops.push_back(op);
        }
      }
    }

    Query q =
        testgen::random_query(rng, static_cast<std::uint64_t>(trial), 3, 8);

    auto apply = [](HistoryGraph& g, const Op& op) {
      switch (op.kind) {
        case Op::Vertex:
          g.create_vertex(op.type, op.attrs, TimePoint(op.at));
          break;
        case Op::Edge:
          g.create_edge(op.type, op.a, op.b, TimePoint(op.at));
          break;
        case Op::Delete:
          g.delete_element(op.a, TimePoint(op.at));
          break;
      }
    };

    // Interleaved incremental execution over random journal batches.
    HistoryGraph g1(testgen::test_type_graph());
    GdnNetwork incremental(q, g1.types());
    incremental.execute_full(g1);
    std::size_t i = 0;
    while (i < ops.size()) {
      std::size_t batch = 1 + static_cast<std::size_t>(rng.below(4));
      for (std::size_t k = 0; k < batch && i < ops.size(); ++k, ++i) {
        apply(g1, ops[i]);
      }
      incremental.execute_incremental(g1, g1.drain_journal());
    }

    // One full execution over the final graph.
    HistoryGraph g2(testgen::test_type_graph());
    for (const Op& op : ops) {
      apply(g2, op);
    }
    GdnNetwork full(q, g2.types());
    full.execute_full(g2);

    if (incremental.dump_markings() != full.dump_markings()) {
      throw Failure("marking state diverges on sequence " +
                    std::to_string(trial));
    }
    auto report_key = [](const MatchReport& r) {
      std::map<Binding, std::string> out;
      for (const auto& m : r.matches) {
        out[m.binding] = m.lambda.to_string();
      }
      return out;
    };
    if (report_key(incremental.report()) != report_key(full.report())) {
      throw Failure("terminal report diverges on sequence " +
                    std::to_string(trial));
    }
  }
}

// Identical violation ledgers with and without pruning; bounded model size
// under pruning, monotone growth without.
void criterion_pruning_transparency() {
  QueryFile file = parse_queries(slurp(fixture("shs/queries.tq")));

  auto run_pair = [&](const std::vector<ShsEvent>& log, std::size_t query) {
    shs::LoopConfig base;
    base.period = 3600;
    base.record_timing = false;
    base.queries = {file.queries[query]};

    shs::LoopConfig plain = base;
    plain.variant = shs::Variant::Intempo;
    shs::AdaptationLoop plain_loop(plain);
    auto plain_rows = plain_loop.run(log);

    // The pruning variant is driven manually so the envelope can be
    // checked right after each maintenance step.
    shs::LoopConfig pruning = base;
    pruning.variant = shs::Variant::IntempoPlus;
    shs::AdaptationLoop loop(pruning);
    Duration window = loop.cutoff_window();
    std::int64_t last = log.empty() ? 0 : log.back().timestamp;
    std::int64_t end = last + loop.horizon();
    std::int64_t count = std::max<std::int64_t>(1, (end + 3599) / 3600);
    std::size_t next = 0;
    std::vector<std::size_t> plus_counts;
    for (std::int64_t k = 1; k <= count; ++k) {
      TimePoint now(k * 3600);
      while (next < log.size() && log[next].timestamp <= now.ticks()) {
        loop.monitor(log[next]);
        ++next;
      }
      loop.analyze(now);
      loop.plan(now);
      loop.execute(now);
      loop.maintain(now);
      std::size_t live_window = 0;
      for (ElementId id : loop.graph().all_ids()) {
        const Element& e = loop.graph().element(id);
        if (e.dts.is_infinite() || e.dts.ticks() + window >= now.ticks()) {
          ++live_window;
        }
      }
      std::size_t total = loop.graph().element_count();
      require(total <= live_window + 8,
              "post-maintain element count exceeds the live window envelope");
      plus_counts.push_back(total);
    }

    require(ledger_key(plain_loop.ledger()) == ledger_key(loop.ledger()),
            "violation ledgers differ between variants");
    for (std::size_t i = 1; i < plain_rows.size(); ++i) {
      require(
          plain_rows[i].model_elements >= plain_rows[i - 1].model_elements,
          "unpruned model size is not monotone");
    }
    return std::pair<std::size_t, std::size_t>(
        plain_rows.empty() ? 0 : plain_rows.back().model_elements,
        plus_counts.empty() ? 0 : plus_counts.back());
  };

  for (int trial = 0; trial < 50; ++trial) {
    testgen::Rng rng(7000 + static_cast<std::uint64_t>(trial));
    std::vector<ShsEvent> log =
        random_shs_log(rng, 3 + static_cast<int>(rng.below(8)));
    run_pair(log, trial % 2);
  }

  LogSpec spec;
  spec.trajectory_count = 100;
  spec.density_factor = 1;
  spec.seed = 7;
  spec.has_seed = true;
  std::vector<ShsEvent> synthetic = synthesize(spec);
  for (std::size_t query : {std::size_t{0}, std::size_t{1}}) {
    auto [plain_final, plus_final] = run_pair(synthetic, query);
    require(plus_final < plain_final,
            "pruning does not reduce the final model size");
  }
}

// Analysis time stays flat with pruning and grows without it.
void criterion_scalability_trend() {
  QueryFile file = parse_queries(slurp(fixture("shs/queries.tq")));

  auto deciles = [&](int k, shs::Variant variant) {
    LogSpec spec;
    spec.trajectory_count = 1049;
    spec.density_factor = k;
    spec.seed = 42;
    spec.has_seed = true;
    std::vector<ShsEvent> log = synthesize(spec);

    shs::LoopConfig config;
    config.period = 3600;
    config.variant = variant;
    config.queries = {file.queries[0]};
    config.record_timing = true;
    shs::AdaptationLoop loop(config);
    auto rows = loop.run(log);
    std::size_t n = rows.size();
    std::size_t d = std::max<std::size_t>(1, n / 10);
    auto mean = [&](std::size_t from, std::size_t to) {
      double total = 0;
      for (std::size_t i = from; i < to; ++i) {
        total += rows[i].analysis_us;
      }
      return total / static_cast<double>(to - from);
    };
    return std::pair<double, double>(mean(0, d), mean(n - d, n));
  };

  for (int k : {1, 10}) {
    auto [first, last] = deciles(k, shs::Variant::IntempoPlus);
    require(last <= 2.0 * first,
            "pruning variant is not flat on k=" + std::to_string(k) +
                " (first " + std::to_string(first) + "us, last " +
                std::to_string(last) + "us)");
  }
  auto [first, last] = deciles(10, shs::Variant::Intempo);
  require(last >= 3.0 * first,
          "unpruned variant does not degrade on k=10 (first " +
              std::to_string(first) + "us, last " + std::to_string(last) +
              "us)");
}

// Interval-algebra laws over exhaustive small universes.
void criterion_interval_laws() {
  std::vector<Interval> intervals;
  const std::int64_t kMax = 10;
  for (std::int64_t lo = 0; lo <= kMax; ++lo) {
    for (std::int64_t hi = lo; hi <= kMax; ++hi) {
      for (bool lc : {true, false}) {
        for (bool uc : {true, false}) {
          if (lo == hi && !(lc && uc)) {
            continue;
          }
          intervals.emplace_back(TimePoint(lo), lc, TimePoint(hi), uc);
        }
      }
    }
  }
  for (std::int64_t lo = 0; lo <= kMax; ++lo) {
    intervals.emplace_back(TimePoint(lo), true, TimePoint::infinity(), true);
  }
  const std::int64_t kLimit = 2 * kMax + 6;
  for (const Interval& x : intervals) {
    FragmentedInterval fx(x);
    require(FragmentedInterval(fx.parts()) == fx, "normalization unstable");
    for (const Interval& y : intervals) {
      FragmentedInterval fy(y);
      FragmentedInterval inter = intersect(fx, fy);
      FragmentedInterval uni = union_of(fx, fy);
      FragmentedInterval diff = difference(fx, fy);
      for (std::int64_t p = 0; p <= kLimit; ++p) {
        bool mx = fx.contains_position(p);
        bool my = fy.contains_position(p);
        require(inter.contains_position(p) == (mx && my),
                "intersection membership law violated");
        require(uni.contains_position(p) == (mx || my),
                "union membership law violated");
        require(diff.contains_position(p) == (mx && !my),
                "difference membership law violated");
      }
      require(adjacent(x, y) == adjacent(y, x), "adjacency not symmetric");
      require(uni.parts().size() == (adjacent(x, y) ? 1u : 2u),
              "adjacency does not match union part count");
      require(difference(fx, fx).empty(), "self-difference not empty");
    }
  }
}

// Definite violations appear at the first invocation past start + horizon.
void criterion_detection_delay() {
  QueryFile file = parse_queries(slurp(fixture("shs/queries.tq")));
  for (int trial = 0; trial < 20; ++trial) {
    testgen::Rng rng(8000 + static_cast<std::uint64_t>(trial));
    std::vector<ShsEvent> log =
        random_shs_log(rng, 3 + static_cast<int>(rng.below(6)));
    for (Duration period : {Duration{60}, Duration{3600}}) {
      for (std::size_t query : {std::size_t{0}, std::size_t{1}}) {
        shs::LoopConfig config;
        config.period = period;
        config.variant = shs::Variant::Intempo;
        config.record_timing = false;
        config.queries = {file.queries[query]};
        shs::AdaptationLoop loop(config);
        loop.run(log);
        Duration horizon = loop.horizon();
        for (const auto& v : loop.ledger()) {
          std::int64_t earliest = v.match_start + horizon;
          std::int64_t expected = ((earliest + period - 1) / period) * period;
          require(v.detected_at == expected,
                  "violation for " + v.patient + " detected at " +
                      std::to_string(v.detected_at) + ", expected " +
                      std::to_string(expected) + " (period " +
                      std::to_string(period) + ")");
        }
      }
    }
  }
}

// Sampler sanity against closed forms; density scaling of synthetic logs.
void criterion_distribution_sanity() {
  const int kDraws = 100000;
  {
    std::mt19937_64 rng(101);
    DistributionSpec weibull{DistributionSpec::Family::Weibull, 3.7e4, 0.9};
    double total = 0;
    for (int i = 0; i < kDraws; ++i) {
      total += sample(weibull, rng);
    }
    double mean = total / kDraws;
    double expected = 3.7e4 * std::tgamma(1.0 + 1.0 / 0.9);
    require(std::abs(expected - 38935.0) < 50.0,
            "analytic mean moved away from 38935 s");
    require(std::abs(mean - expected) / expected < 0.02,
            "weibull sample mean off by more than 2% (" +
                std::to_string(mean) + " vs " + std::to_string(expected) +
                ")");
  }
  {
    std::mt19937_64 rng(102);
    DistributionSpec lognormal{DistributionSpec::Family::Lognormal, 13.15,
                               0.53};
    std::vector<double> draws(kDraws);
    for (auto& d : draws) {
      d = sample(lognormal, rng);
    }
    std::nth_element(draws.begin(), draws.begin() + kDraws / 2, draws.end());
    double median = draws[kDraws / 2];
    double expected = std::exp(13.15);
    require(std::abs(median - expected) / expected < 0.02,
            "lognormal sample median off by more than 2% (" +
                std::to_string(median) + " vs " + std::to_string(expected) +
                ")");
  }
  {
    auto mean_iat = [](const std::vector<ShsEvent>& events) {
      std::vector<std::int64_t> ers;
      for (const auto& e : events) {
        if (e.kind == ShsEventKind::ER) {
          ers.push_back(e.timestamp);
        }
      }
      return static_cast<double>(ers.back() - ers.front()) /
             static_cast<double>(ers.size() - 1);
    };
    LogSpec spec;
    spec.trajectory_count = 1049;
    spec.seed = 11;
    spec.has_seed = true;
    spec.density_factor = 1;
    double base = mean_iat(synthesize(spec));
    spec.density_factor = 100;
    double dense = mean_iat(synthesize(spec));
    double ratio = base / 100.0 / dense;
    require(std::abs(ratio - 1.0) < 0.05,
            "k=100 mean inter-arrival time is off by more than 5% (" +
                std::to_string(dense) + " vs " +
                std::to_string(base / 100.0) + ")");
  }
}

struct Criterion {
  int id;
  std::string name;
  std::function<void()> run;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "worked-example golden values", criterion_worked_example},
      {2, "cut-off correctness", criterion_cutoff},
      {3, "oracle equivalence on 500 random instances",
       criterion_oracle_equivalence},
      {4, "incremental equals full on 200 change sequences",
       criterion_incremental_equals_full},
      {5, "pruning transparency and bounded model size",
       criterion_pruning_transparency},
      {6, "analysis-time scalability trend", criterion_scalability_trend},
      {7, "interval-algebra property suite", criterion_interval_laws},
      {8, "detection-delay bound", criterion_detection_delay},
      {9, "distribution sanity", criterion_distribution_sanity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL",
                c.id, c.name.c_str(), secs, ok ? "" : " - ",
                ok ? "" : detail.c_str());
    std::fflush(stdout);
    if (!ok) {
      ++failures;
    }
  }
  return failures;
}
