#ifndef TEMPOQ_GDN_HPP
#define TEMPOQ_GDN_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempoq/history_graph.hpp"
#include "tempoq/mtgc.hpp"

namespace tempoq {

enum class GdnNodeKind { Pattern, Alpha, Until, Since, Top };
enum class DepRole { Sole, Left, Right };
enum class Polarity { Positive, Negative };

using GdnNodeId = std::uint32_t;
using MarkingId = std::uint64_t;

struct GdnDependency {
  GdnNodeId node = 0;
  DepRole role = DepRole::Sole;
};

struct KernelVar {
  std::string name;
  std::string type;
};

/// One match of a network node: the matched elements (in the node's
/// signature order) and the fragmented interval of its temporal validity.
struct MarkingNode {
  MarkingId id = 0;
  FragmentedInterval lambda;
  std::vector<ElementId> elements;
  std::vector<MarkingId> dependency_markings;
};

struct GdnNodeInfo {
  GdnNodeId id = 0;
  GdnNodeKind kind = GdnNodeKind::Top;
  Pattern pattern;                // Pattern nodes
  std::vector<KernelVar> kernel;  // Alpha / Until / Since grouping
  Polarity polarity = Polarity::Positive;  // Alpha
  OperatorWindow window;                   // Until / Since
  std::vector<GdnDependency> deps;
  std::vector<std::string> signature;       // marking key slot names
  std::set<std::string> relevant_types;     // concrete types that dirty it
  // Auxiliary pattern node grouping a conjunction that appears outside a
  // pattern context; holds only bound vertices.
  bool synthetic = false;
};

struct ReportEntry {
  Binding binding;
  FragmentedInterval lambda;
};

struct MatchReport {
  std::string query;
  std::vector<ReportEntry> matches;
};

/// Core lifespan computations of the marking rules.

/// Intersection of the element lifetimes of a structural match; the empty
/// element list yields the universe.
FragmentedInterval match_lifespan(const HistoryGraph& graph,
                                  const std::vector<ElementId>& elements);
FragmentedInterval match_lifespan(const std::vector<FragmentedInterval>& spans);

/// Aggregation over the markings grouped under one kernel match: positive
/// dependencies intersect the kernel lifespan with the union of the grouped
/// lifespans, negative ones take the relative complement.
FragmentedInterval alpha_lifespan(const FragmentedInterval& kernel,
                                  const std::vector<FragmentedInterval>& deps,
                                  Polarity polarity);

/// Satisfaction lifespan of until: for every right part and adjacent left
/// part, the right part is clipped to the reachable prefix of the left part
/// and shifted by the operator window; a window with lower bound 0 also
/// admits the right lifespan itself.
FragmentedInterval until_satisfaction(const FragmentedInterval& left,
                                      const FragmentedInterval& right,
                                      OperatorWindow window);
/// Mirror of until_satisfaction for the past.
FragmentedInterval since_satisfaction(const FragmentedInterval& left,
                                      const FragmentedInterval& right,
                                      OperatorWindow window);

/// A query compiled to a network of pattern, aggregation and temporal nodes,
/// executable fully or incrementally against one history graph at a time.
class GdnNetwork {
 public:
  GdnNetwork(const Query& query, const TypeGraph& types);

  const std::string& query_name() const { return query_name_; }
  const std::vector<GdnNodeInfo>& nodes() const { return nodes_; }
  GdnNodeId terminal() const { return terminal_; }

  void execute_full(const HistoryGraph& graph);
  /// Recomputes exactly the nodes whose relevant types occur in the journal,
  /// plus their transitive parents. Assumes the marking state is consistent
  /// with the graph minus the journaled changes; run execute_full once to
  /// seed a fresh network.
  void execute_incremental(const HistoryGraph& graph,
                           const std::vector<ChangeRecord>& journal);

  MatchReport report() const;

  const std::map<std::vector<ElementId>, MarkingNode>& node_markings(
      GdnNodeId id) const;
  std::size_t marking_count() const;
  /// Canonical text form of the full marking state, for equality checks.
  std::string dump_markings() const;

 private:
  friend class GdnBuilder;

  void check_types(const HistoryGraph& graph) const;
  void recompute(GdnNodeId id, const HistoryGraph& graph);
  void recompute_pattern(const GdnNodeInfo& node, const HistoryGraph& graph);
  void recompute_alpha(const GdnNodeInfo& node, const HistoryGraph& graph);
  void recompute_temporal(const GdnNodeInfo& node, const HistoryGraph& graph);

  struct Computed {
    FragmentedInterval lambda;
    std::vector<MarkingId> dependency_markings;
  };
  void upsert_markings(GdnNodeId id,
                       const std::map<std::vector<ElementId>, Computed>& fresh);

  std::string query_name_;
  TypeGraph types_;
  std::vector<GdnNodeInfo> nodes_;  // creation order is a topological order
  GdnNodeId terminal_ = 0;
  std::vector<std::map<std::vector<ElementId>, MarkingNode>> markings_;
  MarkingId next_marking_ = 1;
};

struct ClassifiedMatches {
  std::vector<ReportEntry> definite;
  std::vector<ReportEntry> pending;
};

/// Splits reported matches by whether their validity already reaches into
/// the settled past: a match is definite once some part of its lifespan lies
/// at or before now minus the condition's future horizon.
ClassifiedMatches classify_matches(const MatchReport& report,
                                   const Mtgc& condition, TimePoint now);

nlohmann::ordered_json report_to_json(const MatchReport& report,
                                      const ClassifiedMatches& classified);

}  // namespace tempoq

#endif  // TEMPOQ_GDN_HPP
