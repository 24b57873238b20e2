#include "tempoq/type_graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tempoq {

TypeGraph::TypeGraph(std::vector<VertexTypeDecl> vertex_types,
                     std::vector<EdgeTypeDecl> edge_types)
    : vertex_types_(std::move(vertex_types)),
      edge_types_(std::move(edge_types)) {
  for (std::size_t i = 0; i < vertex_types_.size(); ++i) {
    const auto& vt = vertex_types_[i];
    if (!vertex_index_.emplace(vt.name, i).second) {
      throw std::invalid_argument("TypeGraph: duplicate vertex type " + vt.name);
    }
  }
  for (std::size_t i = 0; i < edge_types_.size(); ++i) {
    const auto& et = edge_types_[i];
    if (!edge_index_.emplace(et.name, i).second) {
      throw std::invalid_argument("TypeGraph: duplicate edge type " + et.name);
    }
    if (!vertex_index_.count(et.source) || !vertex_index_.count(et.target)) {
      throw std::invalid_argument("TypeGraph: edge type " + et.name +
                                  " references unknown vertex type");
    }
  }

  // Resolve ancestor sets with a cycle check.
  for (const auto& vt : vertex_types_) {
    std::vector<std::string> chain;
    std::set<std::string> seen;
    std::vector<std::string> stack{vt.name};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) {
        continue;
      }
      chain.push_back(cur);
      auto it = vertex_index_.find(cur);
      if (it == vertex_index_.end()) {
        throw std::invalid_argument("TypeGraph: unknown supertype " + cur);
      }
      for (const auto& super : vertex_types_[it->second].supertypes) {
        if (super == vt.name) {
          throw std::invalid_argument("TypeGraph: supertype cycle through " +
                                      vt.name);
        }
        stack.push_back(super);
      }
    }
    std::sort(chain.begin(), chain.end());
    ancestors_[vt.name] = std::move(chain);
  }
  // Deeper cycles (not through the starting type) show up as a type being
  // its own ancestor via another chain; verify pairwise asymmetry.
  for (const auto& vt : vertex_types_) {
    for (const auto& anc : ancestors_[vt.name]) {
      if (anc != vt.name && conforms(anc, vt.name)) {
        throw std::invalid_argument("TypeGraph: supertype cycle between " +
                                    vt.name + " and " + anc);
      }
    }
  }
  for (const auto& vt : vertex_types_) {
    for (const auto& anc : ancestors_[vt.name]) {
      descendants_[anc].push_back(vt.name);
    }
  }
}

bool TypeGraph::has_vertex_type(const std::string& name) const {
  return vertex_index_.count(name) > 0;
}

bool TypeGraph::has_edge_type(const std::string& name) const {
  return edge_index_.count(name) > 0;
}

const VertexTypeDecl& TypeGraph::vertex_type(const std::string& name) const {
  auto it = vertex_index_.find(name);
  if (it == vertex_index_.end()) {
    throw std::invalid_argument("TypeGraph: unknown vertex type " + name);
  }
  return vertex_types_[it->second];
}

const EdgeTypeDecl& TypeGraph::edge_type(const std::string& name) const {
  auto it = edge_index_.find(name);
  if (it == edge_index_.end()) {
    throw std::invalid_argument("TypeGraph: unknown edge type " + name);
  }
  return edge_types_[it->second];
}

bool TypeGraph::conforms(const std::string& type,
                         const std::string& ancestor) const {
  auto it = ancestors_.find(type);
  if (it == ancestors_.end()) {
    return false;
  }
  return std::binary_search(it->second.begin(), it->second.end(), ancestor);
}

const std::vector<std::string>& TypeGraph::conforming_types(
    const std::string& ancestor) const {
  static const std::vector<std::string> kEmpty;
  auto it = descendants_.find(ancestor);
  return it == descendants_.end() ? kEmpty : it->second;
}

const AttrDecl* TypeGraph::find_attribute(const std::string& vertex_type,
                                          const std::string& attr) const {
  auto it = ancestors_.find(vertex_type);
  if (it == ancestors_.end()) {
    return nullptr;
  }
  for (const auto& anc : it->second) {
    const auto& decl = vertex_types_[vertex_index_.at(anc)];
    for (const auto& a : decl.attributes) {
      if (a.name == attr) {
        return &a;
      }
    }
  }
  return nullptr;
}

bool TypeGraph::same_as(const TypeGraph& other) const {
  return to_json() == other.to_json();
}

namespace {

std::string kind_name(AttrKind kind) {
  switch (kind) {
    case AttrKind::Integer:
      return "integer";
    case AttrKind::String:
      return "string";
    case AttrKind::Timestamp:
      return "timestamp";
  }
  return "string";
}

AttrKind kind_from_name(const std::string& name) {
  if (name == "integer") return AttrKind::Integer;
  if (name == "string") return AttrKind::String;
  if (name == "timestamp") return AttrKind::Timestamp;
  throw std::invalid_argument("TypeGraph: unknown attribute kind " + name);
}

}  // namespace

nlohmann::ordered_json TypeGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["vertexTypes"] = nlohmann::ordered_json::array();
  for (const auto& vt : vertex_types_) {
    nlohmann::ordered_json v;
    v["name"] = vt.name;
    v["attributes"] = nlohmann::ordered_json::array();
    for (const auto& a : vt.attributes) {
      v["attributes"].push_back({{"name", a.name}, {"kind", kind_name(a.kind)}});
    }
    v["supertypes"] = vt.supertypes;
    doc["vertexTypes"].push_back(std::move(v));
  }
  doc["edgeTypes"] = nlohmann::ordered_json::array();
  for (const auto& et : edge_types_) {
    doc["edgeTypes"].push_back(
        {{"name", et.name}, {"source", et.source}, {"target", et.target}});
  }
  return doc;
}

TypeGraph TypeGraph::from_json(const nlohmann::json& doc) {
  std::vector<VertexTypeDecl> vts;
  for (const auto& v : doc.at("vertexTypes")) {
    VertexTypeDecl vt;
    vt.name = v.at("name").get<std::string>();
    if (v.contains("attributes")) {
      for (const auto& a : v.at("attributes")) {
        vt.attributes.push_back({a.at("name").get<std::string>(),
                                 kind_from_name(a.at("kind").get<std::string>())});
      }
    }
    if (v.contains("supertypes")) {
      vt.supertypes = v.at("supertypes").get<std::vector<std::string>>();
    }
    vts.push_back(std::move(vt));
  }
  std::vector<EdgeTypeDecl> ets;
  for (const auto& e : doc.at("edgeTypes")) {
    ets.push_back({e.at("name").get<std::string>(),
                   e.at("source").get<std::string>(),
                   e.at("target").get<std::string>()});
  }
  return TypeGraph(std::move(vts), std::move(ets));
}

bool attr_value_matches_kind(const AttrValue& value, AttrKind kind) {
  if (kind == AttrKind::String) {
    return std::holds_alternative<std::string>(value);
  }
  return std::holds_alternative<std::int64_t>(value);
}

nlohmann::ordered_json attr_value_to_json(const AttrValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) {
    return *s;
  }
  return std::get<std::int64_t>(value);
}

AttrValue attr_value_from_json(const nlohmann::json& value) {
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (value.is_number_integer()) {
    return value.get<std::int64_t>();
  }
  throw std::invalid_argument("attribute values must be strings or integers");
}

}  // namespace tempoq
