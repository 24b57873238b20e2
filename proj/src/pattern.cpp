#include "tempoq/pattern.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>

namespace tempoq {

const PatternVertex* Pattern::find_vertex(const std::string& vertex_name) const {
  for (const auto& v : vertices) {
    if (v.name == vertex_name) {
      return &v;
    }
  }
  return nullptr;
}

std::vector<std::string> Pattern::bound_names() const {
  std::vector<std::string> out;
  for (const auto& v : vertices) {
    if (v.bound) {
      out.push_back(v.name);
    }
  }
  return out;
}

namespace {

// Backtracking local-search matcher. The environment maps pattern vertex
// names to elements; forbid fragments extend the positive environment.
class Matcher {
 public:
  Matcher(const HistoryGraph& graph, const Pattern& pattern,
          const Binding& pre_bound, const Binding& outer_env)
      : graph_(graph), pattern_(pattern) {
    for (const auto& [name, id] : outer_env) {
      env_[name] = id;
    }
    for (const auto& v : pattern_.vertices) {
      auto it = pre_bound.find(v.name);
      if (it != pre_bound.end()) {
        if (!check_vertex(v, it->second)) {
          throw std::invalid_argument("find_matches: binding type mismatch for " +
                                      v.name);
        }
        env_[v.name] = it->second;
        used_.insert(it->second);
        assigned_.insert(v.name);
      }
    }
  }

  // Enumerates matches; the callback returns false to stop early.
  template <typename Fn>
  bool enumerate(Fn&& emit) {
    return assign_vertices(std::forward<Fn>(emit));
  }

 private:
  bool check_vertex(const PatternVertex& pv, ElementId id) const {
    if (!graph_.contains(id)) {
      return false;
    }
    const Element& e = graph_.element(id);
    if (!e.is_vertex || !graph_.types().conforms(e.type, pv.type)) {
      return false;
    }
    return constraints_hold(pv, id);
  }

  bool constraints_hold(const PatternVertex& pv, ElementId id) const {
    const Element& e = graph_.element(id);
    for (const auto& c : pv.constraints) {
      auto attr = e.attrs.find(c.attr);
      if (attr == e.attrs.end()) {
        return false;
      }
      if (c.kind == AttrConstraint::Kind::Const) {
        if (attr->second != c.value) {
          return false;
        }
      } else {
        auto other = env_.find(c.ref_vertex);
        if (other == env_.end()) {
          continue;  // counterpart unassigned yet; re-checked later
        }
        const Element& o = graph_.element(other->second);
        auto oattr = o.attrs.find(c.ref_attr);
        if (oattr == o.attrs.end() || attr->second != oattr->second) {
          return false;
        }
      }
    }
    return true;
  }

  // Cross-attribute constraints owned by other vertices pointing at `pv`.
  bool reverse_constraints_hold(const PatternVertex& pv) const {
    for (const auto& other : pattern_.vertices) {
      if (!env_.count(other.name)) {
        continue;
      }
      for (const auto& c : other.constraints) {
        if (c.kind == AttrConstraint::Kind::Ref && c.ref_vertex == pv.name) {
          if (!constraints_hold(other, env_.at(other.name))) {
            return false;
          }
        }
      }
    }
    return true;
  }

  // The narrowest available candidate source for an unassigned vertex: an
  // incident pattern edge with an assigned endpoint, an attribute-equality
  // link to an assigned vertex, or the full type extent.
  struct Guide {
    enum class Kind { Extent, EdgeIn, EdgeOut, Attr } kind = Kind::Extent;
    std::size_t estimate = 0;
    const PatternEdge* edge = nullptr;
    std::string attr;         // attribute of pv
    const AttrValue* value = nullptr;  // required value
  };

  Guide pick_guide(const PatternVertex& pv, bool start) const {
    Guide best;
    best.kind = Guide::Kind::Extent;
    best.estimate = start ? graph_.live_count_conforming(pv.type)
                          : graph_.count_conforming(pv.type);
    auto consider = [&](Guide g) {
      if (g.estimate < best.estimate) {
        best = std::move(g);
      }
    };
    for (const auto& pe : pattern_.edges) {
      if (pe.source == pv.name && env_.count(pe.target)) {
        Guide g;
        g.kind = Guide::Kind::EdgeIn;
        g.edge = &pe;
        g.estimate = graph_.in_edges(env_.at(pe.target)).size();
        consider(std::move(g));
      } else if (pe.target == pv.name && env_.count(pe.source)) {
        Guide g;
        g.kind = Guide::Kind::EdgeOut;
        g.edge = &pe;
        g.estimate = graph_.out_edges(env_.at(pe.source)).size();
        consider(std::move(g));
      }
    }
    auto consider_attr = [&](const std::string& own_attr,
                             const std::string& other_vertex,
                             const std::string& other_attr) {
      auto it = env_.find(other_vertex);
      if (it == env_.end()) {
        return;
      }
      const Element& o = graph_.element(it->second);
      auto oattr = o.attrs.find(other_attr);
      if (oattr == o.attrs.end()) {
        Guide g;
        g.kind = Guide::Kind::Attr;
        g.attr = own_attr;
        g.estimate = 0;
        consider(std::move(g));
        return;
      }
      Guide g;
      g.kind = Guide::Kind::Attr;
      g.attr = own_attr;
      g.value = &oattr->second;
      g.estimate = graph_.count_with_attr(pv.type, own_attr, oattr->second);
      consider(std::move(g));
    };
    for (const auto& c : pv.constraints) {
      if (c.kind == AttrConstraint::Kind::Ref) {
        consider_attr(c.attr, c.ref_vertex, c.ref_attr);
      }
    }
    for (const auto& other : pattern_.vertices) {
      if (&other == &pv || !env_.count(other.name)) {
        continue;
      }
      for (const auto& c : other.constraints) {
        if (c.kind == AttrConstraint::Kind::Ref && c.ref_vertex == pv.name) {
          // reversed link: other.attr must equal pv.ref_attr
          const Element& o = graph_.element(env_.at(other.name));
          auto oattr = o.attrs.find(c.attr);
          if (oattr != o.attrs.end()) {
            Guide g;
            g.kind = Guide::Kind::Attr;
            g.attr = c.ref_attr;
            g.value = &oattr->second;
            g.estimate =
                graph_.count_with_attr(pv.type, c.ref_attr, oattr->second);
            consider(std::move(g));
          }
        }
      }
    }
    return best;
  }

  std::vector<ElementId> candidates(const PatternVertex& pv,
                                    const Guide& guide) const {
    switch (guide.kind) {
      case Guide::Kind::EdgeIn: {
        std::vector<ElementId> out;
        for (ElementId eid : graph_.in_edges(env_.at(guide.edge->target))) {
          if (graph_.element(eid).type == guide.edge->type) {
            out.push_back(graph_.element(eid).source);
          }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
      case Guide::Kind::EdgeOut: {
        std::vector<ElementId> out;
        for (ElementId eid : graph_.out_edges(env_.at(guide.edge->source))) {
          if (graph_.element(eid).type == guide.edge->type) {
            out.push_back(graph_.element(eid).target);
          }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
      case Guide::Kind::Attr:
        if (guide.value == nullptr) {
          return {};
        }
        return graph_.instances_with_attr(pv.type, guide.attr, *guide.value);
      case Guide::Kind::Extent:
        break;
    }
    return graph_.instances_conforming(pv.type);
  }

  template <typename Fn>
  bool assign_vertices(Fn&& emit) {
    const PatternVertex* next = nullptr;
    Guide best_guide;
    bool start = assigned_.empty();
    for (const auto& pv : pattern_.vertices) {
      if (assigned_.count(pv.name)) {
        continue;
      }
      Guide g = pick_guide(pv, start);
      if (next == nullptr || g.estimate < best_guide.estimate) {
        next = &pv;
        best_guide = g;
      }
    }
    if (next == nullptr) {
      return assign_edges(0, {}, std::forward<Fn>(emit));
    }
    for (ElementId id : candidates(*next, best_guide)) {
      if (used_.count(id) || !check_vertex(*next, id)) {
        continue;
      }
      env_[next->name] = id;
      used_.insert(id);
      assigned_.insert(next->name);
      bool keep_going = true;
      if (reverse_constraints_hold(*next)) {
        keep_going = assign_vertices(std::forward<Fn>(emit));
      }
      env_.erase(next->name);
      used_.erase(id);
      assigned_.erase(next->name);
      if (!keep_going) {
        return false;
      }
    }
    return true;
  }

  template <typename Fn>
  bool assign_edges(std::size_t index, std::vector<ElementId> chosen,
                    Fn&& emit) {
    if (index == pattern_.edges.size()) {
      if (!passes_forbids()) {
        return true;
      }
      PatternMatch m;
      for (const auto& pv : pattern_.vertices) {
        m.vertex_ids.push_back(env_.at(pv.name));
      }
      m.edge_ids = chosen;
      return emit(m);
    }
    const PatternEdge& pe = pattern_.edges[index];
    ElementId src = env_.at(pe.source);
    ElementId tgt = env_.at(pe.target);
    // scan whichever endpoint has the smaller incidence list
    const auto& outs = graph_.out_edges(src);
    const auto& ins = graph_.in_edges(tgt);
    const auto& incidence = outs.size() <= ins.size() ? outs : ins;
    std::vector<ElementId> options;
    for (ElementId eid : incidence) {
      const Element& e = graph_.element(eid);
      if (e.type == pe.type && e.source == src && e.target == tgt &&
          std::find(chosen.begin(), chosen.end(), eid) == chosen.end()) {
        options.push_back(eid);
      }
    }
    std::sort(options.begin(), options.end());
    for (ElementId eid : options) {
      chosen.push_back(eid);
      if (!assign_edges(index + 1, chosen, std::forward<Fn>(emit))) {
        return false;
      }
      chosen.pop_back();
    }
    return true;
  }

  bool passes_forbids() const {
    for (const auto& forbid : pattern_.forbids) {
      Binding outer;
      for (const auto& [name, id] : env_) {
        outer[name] = id;
      }
      Matcher sub(graph_, forbid, {}, outer);
      // Forbid elements must be distinct from the positive match.
      for (ElementId id : used_) {
        sub.used_.insert(id);
      }
      bool found = false;
      sub.enumerate([&](const PatternMatch&) {
        found = true;
        return false;
      });
      if (found) {
        return false;
      }
    }
    return true;
  }

  const HistoryGraph& graph_;
  const Pattern& pattern_;
  Binding env_;
  std::set<ElementId> used_;
  std::set<std::string> assigned_;
};

}  // namespace

std::vector<PatternMatch> find_matches(const HistoryGraph& graph,
                                       const Pattern& pattern,
                                       const Binding& binding) {
  for (const auto& [name, id] : binding) {
    if (!pattern.has_vertex(name)) {
      throw std::invalid_argument("find_matches: binding names unknown vertex " +
                                  name);
    }
    (void)id;
  }
  Matcher m(graph, pattern, binding, {});
  std::vector<PatternMatch> out;
  m.enumerate([&](const PatternMatch& match) {
    out.push_back(match);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void validate_pattern_impl(const TypeGraph& types, const Pattern& pattern,
                           const Pattern* parent) {
  auto lookup_vertex = [&](const std::string& name) -> const PatternVertex* {
    if (const auto* v = pattern.find_vertex(name)) {
      return v;
    }
    if (parent != nullptr) {
      return parent->find_vertex(name);
    }
    return nullptr;
  };
  std::set<std::string> names;
  for (const auto& v : pattern.vertices) {
    if (!names.insert(v.name).second) {
      throw std::invalid_argument("pattern " + pattern.name +
                                  ": duplicate vertex " + v.name);
    }
    if (!types.has_vertex_type(v.type)) {
      throw std::invalid_argument("pattern " + pattern.name +
                                  ": unknown vertex type " + v.type);
    }
    for (const auto& c : v.constraints) {
      const AttrDecl* decl = types.find_attribute(v.type, c.attr);
      if (decl == nullptr) {
        throw std::invalid_argument("pattern " + pattern.name + ": type " +
                                    v.type + " has no attribute " + c.attr);
      }
      if (c.kind == AttrConstraint::Kind::Const) {
        if (!attr_value_matches_kind(c.value, decl->kind)) {
          throw std::invalid_argument("pattern " + pattern.name +
                                      ": constant kind mismatch on " + c.attr);
        }
      } else {
        const PatternVertex* other = lookup_vertex(c.ref_vertex);
        if (other == nullptr) {
          throw std::invalid_argument("pattern " + pattern.name +
                                      ": constraint references unknown vertex " +
                                      c.ref_vertex);
        }
        const AttrDecl* odecl = types.find_attribute(other->type, c.ref_attr);
        if (odecl == nullptr || odecl->kind != decl->kind) {
          throw std::invalid_argument("pattern " + pattern.name +
                                      ": incompatible attribute reference " +
                                      c.ref_vertex + "." + c.ref_attr);
        }
      }
    }
  }
  for (const auto& e : pattern.edges) {
    if (!types.has_edge_type(e.type)) {
      throw std::invalid_argument("pattern " + pattern.name +
                                  ": unknown edge type " + e.type);
    }
    const EdgeTypeDecl& decl = types.edge_type(e.type);
    const PatternVertex* src = lookup_vertex(e.source);
    const PatternVertex* tgt = lookup_vertex(e.target);
    if (src == nullptr || tgt == nullptr) {
      throw std::invalid_argument("pattern " + pattern.name + ": edge " +
                                  e.name + " references unknown vertex");
    }
    if (!types.conforms(src->type, decl.source) ||
        !types.conforms(tgt->type, decl.target)) {
      throw std::invalid_argument("pattern " + pattern.name + ": edge " +
                                  e.name + " endpoint types do not conform");
    }
  }
  for (const auto& forbid : pattern.forbids) {
    if (parent != nullptr) {
      throw std::invalid_argument("pattern " + pattern.name +
                                  ": nested forbid fragments are not supported");
    }
    for (const auto& v : forbid.vertices) {
      if (pattern.has_vertex(v.name)) {
        throw std::invalid_argument("pattern " + pattern.name +
                                    ": forbid vertex " + v.name +
                                    " shadows a pattern vertex");
      }
    }
    validate_pattern_impl(types, forbid, &pattern);
  }
}

}  // namespace

void validate_pattern(const TypeGraph& types, const Pattern& pattern) {
  validate_pattern_impl(types, pattern, nullptr);
}

}  // namespace tempoq
