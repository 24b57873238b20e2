#include "tempoq/history_graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace tempoq {

namespace {

void erase_id(std::vector<ElementId>& ids, ElementId id) {
  ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
}

}  // namespace

HistoryGraph::HistoryGraph(TypeGraph types) : types_(std::move(types)) {}

ElementId HistoryGraph::create_vertex(const std::string& type, AttrMap attrs,
                                      TimePoint cts) {
  if (!types_.has_vertex_type(type)) {
    throw std::invalid_argument("create_vertex: unknown type " + type);
  }
  for (const auto& [name, value] : attrs) {
    const AttrDecl* decl = types_.find_attribute(type, name);
    if (decl == nullptr) {
      throw std::invalid_argument("create_vertex: type " + type +
                                  " has no attribute " + name);
    }
    if (!attr_value_matches_kind(value, decl->kind)) {
      throw std::invalid_argument("create_vertex: attribute " + name +
                                  " has wrong kind");
    }
  }
  Element e;
  e.id = next_id_++;
  e.type = type;
  e.is_vertex = true;
  e.attrs = std::move(attrs);
  e.cts = cts;
  register_element(e);
  journal_.push_back({ChangeRecord::Kind::Created, e.id, type, true, cts});
  ElementId id = e.id;
  elements_.emplace(id, std::move(e));
  return id;
}

ElementId HistoryGraph::create_edge(const std::string& type, ElementId source,
                                    ElementId target, TimePoint cts) {
  if (!types_.has_edge_type(type)) {
    throw std::invalid_argument("create_edge: unknown type " + type);
  }
  const EdgeTypeDecl& decl = types_.edge_type(type);
  if (!contains(source) || !contains(target)) {
    throw std::invalid_argument("create_edge: dangling endpoint");
  }
  const Element& src = element(source);
  const Element& tgt = element(target);
  if (!src.is_vertex || !tgt.is_vertex) {
    throw std::invalid_argument("create_edge: endpoints must be vertices");
  }
  if (!types_.conforms(src.type, decl.source) ||
      !types_.conforms(tgt.type, decl.target)) {
    throw std::invalid_argument("create_edge: endpoint type mismatch for " +
                                type);
  }
  if (cts < src.cts || cts < tgt.cts) {
    throw std::invalid_argument("create_edge: cts earlier than endpoint cts");
  }
  if (!src.dts.is_infinite() || !tgt.dts.is_infinite()) {
    throw std::invalid_argument("create_edge: endpoint already deleted");
  }
  Element e;
  e.id = next_id_++;
  e.type = type;
  e.is_vertex = false;
  e.cts = cts;
  e.source = source;
  e.target = target;
  register_element(e);
  journal_.push_back({ChangeRecord::Kind::Created, e.id, type, false, cts});
  ElementId id = e.id;
  elements_.emplace(id, std::move(e));
  return id;
}

void HistoryGraph::delete_element(ElementId id, TimePoint dts) {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw std::invalid_argument("delete_element: unknown element");
  }
  Element& e = it->second;
  if (!e.dts.is_infinite()) {
    throw std::invalid_argument("delete_element: already deleted");
  }
  if (dts < e.cts) {
    throw std::invalid_argument("delete_element: dts earlier than cts");
  }
  if (e.is_vertex) {
    std::vector<ElementId> incident = out_edges(id);
    const auto& in = in_edges(id);
    incident.insert(incident.end(), in.begin(), in.end());
    for (ElementId eid : incident) {
      const Element& edge = element(eid);
      if (edge.dts.is_infinite() && dts < edge.cts) {
        throw std::invalid_argument(
            "delete_element: dts earlier than incident edge cts");
      }
    }
    for (ElementId eid : incident) {
      Element& edge = elements_.at(eid);
      if (edge.dts.is_infinite()) {
        edge.dts = dts;
        journal_.push_back(
            {ChangeRecord::Kind::Deleted, eid, edge.type, false, dts});
      }
    }
  }
  e.dts = dts;
  journal_.push_back({ChangeRecord::Kind::Deleted, id, e.type, e.is_vertex, dts});
}

void HistoryGraph::prune_element(ElementId id) {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw std::invalid_argument("prune_element: unknown element");
  }
  if (it->second.dts.is_infinite()) {
    throw std::invalid_argument("prune_element: element is live");
  }
  if (it->second.is_vertex) {
    std::vector<ElementId> incident = out_edges(id);
    const auto& in = in_edges(id);
    incident.insert(incident.end(), in.begin(), in.end());
    for (ElementId eid : incident) {
      if (elements_.count(eid)) {
        prune_element(eid);
      }
    }
    it = elements_.find(id);
  }
  Element e = std::move(it->second);
  elements_.erase(it);
  unregister_element(e);
  journal_.push_back({ChangeRecord::Kind::Pruned, id, e.type, e.is_vertex, e.dts});
}

bool HistoryGraph::contains(ElementId id) const {
  return elements_.count(id) > 0;
}

const Element& HistoryGraph::element(ElementId id) const {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw std::invalid_argument("element: unknown id " + std::to_string(id));
  }
  return it->second;
}

Interval HistoryGraph::lifetime(ElementId id) const {
  const Element& e = element(id);
  return Interval(e.cts, true, e.dts, true);
}

std::vector<ChangeRecord> HistoryGraph::drain_journal() {
  std::vector<ChangeRecord> out;
  out.swap(journal_);
  return out;
}

const std::vector<ElementId>& HistoryGraph::instances_exact(
    const std::string& type) const {
  static const std::vector<ElementId> kEmpty;
  auto it = by_type_.find(type);
  return it == by_type_.end() ? kEmpty : it->second;
}

std::vector<ElementId> HistoryGraph::instances_conforming(
    const std::string& type) const {
  if (types_.has_edge_type(type)) {
    return instances_exact(type);
  }
  std::vector<ElementId> out;
  for (const auto& concrete : types_.conforming_types(type)) {
    const auto& ids = instances_exact(concrete);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t HistoryGraph::count_conforming(const std::string& type) const {
  if (types_.has_edge_type(type)) {
    return instances_exact(type).size();
  }
  std::size_t n = 0;
  for (const auto& concrete : types_.conforming_types(type)) {
    n += instances_exact(concrete).size();
  }
  return n;
}

std::size_t HistoryGraph::live_count_conforming(const std::string& type) const {
  std::size_t n = 0;
  for (const auto& concrete : types_.conforming_types(type)) {
    for (ElementId id : instances_exact(concrete)) {
      if (element(id).dts.is_infinite()) {
        ++n;
      }
    }
  }
  return n;
}

std::vector<ElementId> HistoryGraph::instances_with_attr(
    const std::string& type, const std::string& attr,
    const AttrValue& value) const {
  std::vector<ElementId> out;
  for (const auto& concrete : types_.conforming_types(type)) {
    auto t = attr_index_.find(concrete);
    if (t == attr_index_.end()) {
      continue;
    }
    auto a = t->second.find(attr);
    if (a == t->second.end()) {
      continue;
    }
    auto v = a->second.find(value);
    if (v == a->second.end()) {
      continue;
    }
    out.insert(out.end(), v->second.begin(), v->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t HistoryGraph::count_with_attr(const std::string& type,
                                          const std::string& attr,
                                          const AttrValue& value) const {
  std::size_t n = 0;
  for (const auto& concrete : types_.conforming_types(type)) {
    auto t = attr_index_.find(concrete);
    if (t == attr_index_.end()) {
      continue;
    }
    auto a = t->second.find(attr);
    if (a == t->second.end()) {
      continue;
    }
    auto v = a->second.find(value);
    if (v != a->second.end()) {
      n += v->second.size();
    }
  }
  return n;
}

const std::vector<ElementId>& HistoryGraph::out_edges(ElementId vertex) const {
  static const std::vector<ElementId> kEmpty;
  auto it = out_edges_.find(vertex);
  return it == out_edges_.end() ? kEmpty : it->second;
}

const std::vector<ElementId>& HistoryGraph::in_edges(ElementId vertex) const {
  static const std::vector<ElementId> kEmpty;
  auto it = in_edges_.find(vertex);
  return it == in_edges_.end() ? kEmpty : it->second;
}

std::vector<ElementId> HistoryGraph::all_ids() const {
  std::vector<ElementId> out;
  out.reserve(elements_.size());
  for (const auto& [id, e] : elements_) {
    out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void HistoryGraph::register_element(const Element& e) {
  by_type_[e.type].push_back(e.id);
  for (const auto& [name, value] : e.attrs) {
    attr_index_[e.type][name][value].push_back(e.id);
  }
  if (!e.is_vertex) {
    out_edges_[e.source].push_back(e.id);
    in_edges_[e.target].push_back(e.id);
  }
}

void HistoryGraph::unregister_element(const Element& e) {
  erase_id(by_type_[e.type], e.id);
  for (const auto& [name, value] : e.attrs) {
    erase_id(attr_index_[e.type][name][value], e.id);
  }
  if (!e.is_vertex) {
    erase_id(out_edges_[e.source], e.id);
    erase_id(in_edges_[e.target], e.id);
  }
}

ElementId HistoryGraph::insert_raw(Element e) {
  if (elements_.count(e.id)) {
    throw std::invalid_argument("snapshot: duplicate element id");
  }
  next_id_ = std::max(next_id_, e.id + 1);
  register_element(e);
  ElementId id = e.id;
  elements_.emplace(id, std::move(e));
  return id;
}

namespace {

nlohmann::ordered_json time_to_json(TimePoint t) {
  if (t.is_infinite()) {
    return "inf";
  }
  return t.ticks();
}

TimePoint time_from_json(const nlohmann::json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() != "inf") {
      throw std::invalid_argument("snapshot: bad timestamp");
    }
    return TimePoint::infinity();
  }
  return TimePoint(v.get<std::int64_t>());
}

}  // namespace

nlohmann::ordered_json HistoryGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["typeGraph"] = types_.to_json();
  doc["elements"] = nlohmann::ordered_json::array();
  for (ElementId id : all_ids()) {
    const Element& e = element(id);
    nlohmann::ordered_json el;
    el["id"] = e.id;
    el["kind"] = e.is_vertex ? "vertex" : "edge";
    el["type"] = e.type;
    if (!e.attrs.empty()) {
      nlohmann::ordered_json attrs;
      for (const auto& [name, value] : e.attrs) {
        attrs[name] = attr_value_to_json(value);
      }
      el["attrs"] = std::move(attrs);
    }
    el["cts"] = time_to_json(e.cts);
    el["dts"] = time_to_json(e.dts);
    if (!e.is_vertex) {
      el["source"] = e.source;
      el["target"] = e.target;
    }
    doc["elements"].push_back(std::move(el));
  }
  return doc;
}

HistoryGraph HistoryGraph::from_json(const nlohmann::json& doc) {
  HistoryGraph g(TypeGraph::from_json(doc.at("typeGraph")));
  // Two passes so edges can validate endpoints.
  for (const auto& el : doc.at("elements")) {
    if (el.at("kind").get<std::string>() != "vertex") {
      continue;
    }
    Element e;
    e.id = el.at("id").get<ElementId>();
    e.type = el.at("type").get<std::string>();
    e.is_vertex = true;
    if (el.contains("attrs")) {
      for (const auto& [name, value] : el.at("attrs").items()) {
        e.attrs[name] = attr_value_from_json(value);
      }
    }
    e.cts = time_from_json(el.at("cts"));
    e.dts = time_from_json(el.at("dts"));
    if (!g.types_.has_vertex_type(e.type)) {
      throw std::invalid_argument("snapshot: unknown vertex type " + e.type);
    }
    if (e.dts < e.cts) {
      throw std::invalid_argument("snapshot: dts earlier than cts");
    }
    g.insert_raw(std::move(e));
  }
  for (const auto& el : doc.at("elements")) {
    if (el.at("kind").get<std::string>() != "edge") {
      continue;
    }
    Element e;
    e.id = el.at("id").get<ElementId>();
    e.type = el.at("type").get<std::string>();
    e.is_vertex = false;
    e.cts = time_from_json(el.at("cts"));
    e.dts = time_from_json(el.at("dts"));
    e.source = el.at("source").get<ElementId>();
    e.target = el.at("target").get<ElementId>();
    if (!g.types_.has_edge_type(e.type)) {
      throw std::invalid_argument("snapshot: unknown edge type " + e.type);
    }
    if (e.dts < e.cts) {
      throw std::invalid_argument("snapshot: dts earlier than cts");
    }
    if (!g.contains(e.source) || !g.contains(e.target)) {
      throw std::invalid_argument("snapshot: dangling edge endpoint");
    }
    const Element& src = g.element(e.source);
    const Element& tgt = g.element(e.target);
    if (e.cts < src.cts || e.cts < tgt.cts || src.dts < e.dts ||
        tgt.dts < e.dts) {
      throw std::invalid_argument(
          "snapshot: edge lifetime not contained in endpoint lifetimes");
    }
    g.insert_raw(std::move(e));
  }
  g.journal_.clear();
  return g;
}

}  // namespace tempoq
