#ifndef TEMPOQ_HISTORY_GRAPH_HPP
#define TEMPOQ_HISTORY_GRAPH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tempoq/interval.hpp"
#include "tempoq/type_graph.hpp"

namespace tempoq {

using ElementId = std::uint64_t;
inline constexpr ElementId kNoElement = 0;

struct Element {
  ElementId id = kNoElement;
  std::string type;
  bool is_vertex = true;
  AttrMap attrs;
  TimePoint cts;
  TimePoint dts = TimePoint::infinity();
  ElementId source = kNoElement;  // edges only
  ElementId target = kNoElement;  // edges only
};

struct ChangeRecord {
  enum class Kind { Created, Deleted, Pruned };
  Kind kind = Kind::Created;
  ElementId id = kNoElement;
  std::string type;
  bool is_vertex = true;
  TimePoint at;
};

/// Runtime model with history: a typed attributed graph whose elements keep
/// creation and deletion timestamps. Deleted elements remain queryable until
/// pruned. Structural changes are journaled for incremental query execution.
/// Single-writer; no internal locking.
class HistoryGraph {
 public:
  explicit HistoryGraph(TypeGraph types);

  const TypeGraph& types() const { return types_; }

  ElementId create_vertex(const std::string& type, AttrMap attrs,
                          TimePoint cts);
  ElementId create_edge(const std::string& type, ElementId source,
                        ElementId target, TimePoint cts);

  /// Sets the deletion timestamp. Deleting a vertex cascades to incident
  /// live edges.
  void delete_element(ElementId id, TimePoint dts);

  /// Physically removes a dead element; a vertex drags its (dead) incident
  /// edges along. Markings referencing it become stale on the next pass.
  void prune_element(ElementId id);

  bool contains(ElementId id) const;
  const Element& element(ElementId id) const;

  /// [cts, dts] as a closed interval.
  Interval lifetime(ElementId id) const;

  std::vector<ChangeRecord> drain_journal();

  /// Ids of elements whose concrete type is exactly `type`.
  const std::vector<ElementId>& instances_exact(const std::string& type) const;
  /// Ids of elements conforming to `type` (vertex subtyping; edge types
  /// match exactly). Deleted-but-unpruned elements are included.
  std::vector<ElementId> instances_conforming(const std::string& type) const;
  std::size_t count_conforming(const std::string& type) const;
  std::size_t live_count_conforming(const std::string& type) const;
  /// Conforming instances whose attribute equals `value` (index-backed).
  std::vector<ElementId> instances_with_attr(const std::string& type,
                                             const std::string& attr,
                                             const AttrValue& value) const;
  std::size_t count_with_attr(const std::string& type, const std::string& attr,
                              const AttrValue& value) const;

  const std::vector<ElementId>& out_edges(ElementId vertex) const;
  const std::vector<ElementId>& in_edges(ElementId vertex) const;

  std::size_t element_count() const { return elements_.size(); }
  std::vector<ElementId> all_ids() const;

  nlohmann::ordered_json to_json() const;
  static HistoryGraph from_json(const nlohmann::json& doc);

 private:
  void register_element(const Element& e);
  void unregister_element(const Element& e);
  ElementId insert_raw(Element e);  // snapshot loading

  TypeGraph types_;
  ElementId next_id_ = 1;
  std::unordered_map<ElementId, Element> elements_;
  std::map<std::string, std::vector<ElementId>> by_type_;
  // concrete type -> attr name -> value -> ids
  std::map<std::string, std::map<std::string, std::map<AttrValue, std::vector<ElementId>>>>
      attr_index_;
  std::unordered_map<ElementId, std::vector<ElementId>> out_edges_;
  std::unordered_map<ElementId, std::vector<ElementId>> in_edges_;
  std::vector<ChangeRecord> journal_;
};

}  // namespace tempoq

#endif  // TEMPOQ_HISTORY_GRAPH_HPP
