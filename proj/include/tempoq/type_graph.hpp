#ifndef TEMPOQ_TYPE_GRAPH_HPP
#define TEMPOQ_TYPE_GRAPH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace tempoq {

enum class AttrKind { Integer, String, Timestamp };

/// Integer-kind and timestamp-kind attributes share the int64 alternative.
using AttrValue = std::variant<std::int64_t, std::string>;
using AttrMap = std::map<std::string, AttrValue>;

struct AttrDecl {
  std::string name;
  AttrKind kind = AttrKind::String;
};

struct VertexTypeDecl {
  std::string name;
  std::vector<AttrDecl> attributes;
  std::vector<std::string> supertypes;
};

struct EdgeTypeDecl {
  std::string name;
  std::string source;
  std::string target;
};

/// Metamodel of a runtime model: vertex types with attribute declarations
/// and an acyclic supertype relation, plus edge types with typed endpoints.
/// Every element additionally carries creation/deletion timestamps; those
/// are fields of the element itself, not declared attributes.
class TypeGraph {
 public:
  TypeGraph() = default;
  TypeGraph(std::vector<VertexTypeDecl> vertex_types,
            std::vector<EdgeTypeDecl> edge_types);

  bool has_vertex_type(const std::string& name) const;
  bool has_edge_type(const std::string& name) const;
  const VertexTypeDecl& vertex_type(const std::string& name) const;
  const EdgeTypeDecl& edge_type(const std::string& name) const;

  const std::vector<VertexTypeDecl>& vertex_types() const {
    return vertex_types_;
  }
  const std::vector<EdgeTypeDecl>& edge_types() const { return edge_types_; }

  /// Reflexive-transitive subtype check, precomputed at load time.
  bool conforms(const std::string& type, const std::string& ancestor) const;

  /// All vertex types conforming to `ancestor`, including itself.
  const std::vector<std::string>& conforming_types(
      const std::string& ancestor) const;

  /// Own or inherited attribute declaration; nullptr if absent.
  const AttrDecl* find_attribute(const std::string& vertex_type,
                                 const std::string& attr) const;

  bool same_as(const TypeGraph& other) const;

  nlohmann::ordered_json to_json() const;
  static TypeGraph from_json(const nlohmann::json& doc);

 private:
  std::vector<VertexTypeDecl> vertex_types_;
  std::vector<EdgeTypeDecl> edge_types_;
  std::map<std::string, std::size_t> vertex_index_;
  std::map<std::string, std::size_t> edge_index_;
  // type -> all ancestors including itself
  std::map<std::string, std::vector<std::string>> ancestors_;
  // type -> all conforming types including itself
  std::map<std::string, std::vector<std::string>> descendants_;
};

bool attr_value_matches_kind(const AttrValue& value, AttrKind kind);
nlohmann::ordered_json attr_value_to_json(const AttrValue& value);
AttrValue attr_value_from_json(const nlohmann::json& value);

}  // namespace tempoq

#endif  // TEMPOQ_TYPE_GRAPH_HPP
