#ifndef TEMPOQ_PATTERN_HPP
#define TEMPOQ_PATTERN_HPP

#include <map>
#include <string>
#include <vector>

#include "tempoq/history_graph.hpp"
#include "tempoq/type_graph.hpp"

namespace tempoq {

struct AttrConstraint {
  enum class Kind { Const, Ref };
  Kind kind = Kind::Const;
  std::string attr;
  AttrValue value;          // Const
  std::string ref_vertex;   // Ref: other pattern vertex
  std::string ref_attr;     // Ref: its attribute

  friend bool operator==(const AttrConstraint&, const AttrConstraint&) = default;
};

struct PatternVertex {
  std::string name;
  std::string type;
  std::vector<AttrConstraint> constraints;
  /// Bound vertices refer to the same-named vertex of an enclosing pattern.
  bool bound = false;

  friend bool operator==(const PatternVertex&, const PatternVertex&) = default;
};

struct PatternEdge {
  std::string name;
  std::string type;
  std::string source;
  std::string target;

  friend bool operator==(const PatternEdge&, const PatternEdge&) = default;
};

/// A graph pattern: typed vertices with attribute constraints, typed edges,
/// and forbidden sub-patterns (negative application conditions). Forbid
/// fragments may reference enclosing pattern vertices by name.
struct Pattern {
  std::string name;
  std::vector<PatternVertex> vertices;
  std::vector<PatternEdge> edges;
  std::vector<Pattern> forbids;

  const PatternVertex* find_vertex(const std::string& vertex_name) const;
  std::vector<std::string> bound_names() const;
  bool has_vertex(const std::string& vertex_name) const {
    return find_vertex(vertex_name) != nullptr;
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// One structural occurrence; ids follow the declaration order of the
/// pattern's vertices and edges.
struct PatternMatch {
  std::vector<ElementId> vertex_ids;
  std::vector<ElementId> edge_ids;

  friend bool operator==(const PatternMatch&, const PatternMatch&) = default;
  friend auto operator<=>(const PatternMatch&, const PatternMatch&) = default;
};

using Binding = std::map<std::string, ElementId>;

/// All structural occurrences of the pattern: injective on pattern elements,
/// type-compatible including subtyping, attribute constraints satisfied, and
/// no forbid fragment extendable. Elements with a past dts are matched;
/// temporal validity is the query network's concern.
std::vector<PatternMatch> find_matches(const HistoryGraph& graph,
                                       const Pattern& pattern,
                                       const Binding& binding = {});

/// Structural validation against a type graph: types exist, edge endpoints
/// conform, attribute constraints are well-kinded.
void validate_pattern(const TypeGraph& types, const Pattern& pattern);

}  // namespace tempoq

#endif  // TEMPOQ_PATTERN_HPP
