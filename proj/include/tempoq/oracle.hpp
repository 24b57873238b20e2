#ifndef TEMPOQ_ORACLE_HPP
#define TEMPOQ_ORACLE_HPP

#include <vector>

#include "json.hpp"
#include "tempoq/history_graph.hpp"
#include "tempoq/mtgc.hpp"

namespace tempoq {

struct OracleEntry {
  Binding binding;
  FragmentedInterval satisfaction;
};

struct OracleResult {
  std::string query;
  std::vector<OracleEntry> results;
};

/// Brute-force satisfaction checker: enumerates structural matches naively
/// and evaluates the condition pointwise on the half-unit position grid,
/// which is exact because all timestamps and window bounds are integers.
/// Deliberately shares no evaluation code with the network engine; may be
/// exponential in instance size. Results are clipped to [0, horizon]; all
/// element timestamps must lie at or before the horizon.
OracleResult evaluate(const HistoryGraph& graph, const Query& query,
                      TimePoint horizon);

nlohmann::ordered_json oracle_result_to_json(const OracleResult& result,
                                             TimePoint horizon);

}  // namespace tempoq

#endif  // TEMPOQ_ORACLE_HPP
