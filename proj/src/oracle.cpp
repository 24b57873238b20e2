#include "tempoq/oracle.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tempoq {

namespace {

using Bitmap = std::vector<char>;

// Naive enumerator, kept separate from the engine's local-search matcher on
// purpose: vertices are assigned in declaration order from full type
// extents, edges afterwards from full edge extents.
class BruteMatcher {
 public:
  BruteMatcher(const HistoryGraph& graph, const Pattern& pattern,
               const Binding& env)
      : graph_(graph), pattern_(pattern), env_(env) {}

  template <typename Fn>
  bool enumerate(Fn&& emit) {
    std::vector<ElementId> vertices;
    return assign_vertex(0, vertices, std::forward<Fn>(emit));
  }

 private:
  template <typename Fn>
  bool assign_vertex(std::size_t index, std::vector<ElementId>& vertices,
                     Fn&& emit) {
    if (index == pattern_.vertices.size()) {
      std::vector<ElementId> edges;
      return assign_edge(0, vertices, edges, std::forward<Fn>(emit));
    }
    const PatternVertex& pv = pattern_.vertices[index];
    // Only declared-bound vertices take their element from the enclosing
    // environment; a local vertex may share a name with an outer one.
    auto preset = pv.bound ? env_.find(pv.name) : env_.end();
    std::vector<ElementId> candidates;
    if (preset != env_.end()) {
      candidates.push_back(preset->second);
    } else {
      candidates = graph_.instances_conforming(pv.type);
    }
    for (ElementId id : candidates) {
      if (!graph_.contains(id)) {
        continue;
      }
      const Element& e = graph_.element(id);
      if (!e.is_vertex || !graph_.types().conforms(e.type, pv.type)) {
        continue;
      }
      if (std::find(vertices.begin(), vertices.end(), id) != vertices.end()) {
        continue;
      }
      if (forbidden_.count(id)) {
        continue;
      }
      vertices.push_back(id);
      bool keep_going = true;
      if (constraints_ok(vertices)) {
        keep_going = assign_vertex(index + 1, vertices, std::forward<Fn>(emit));
      }
      vertices.pop_back();
      if (!keep_going) {
        return false;
      }
    }
    return true;
  }

  bool constraints_ok(const std::vector<ElementId>& vertices) const {
    auto value_of = [&](const std::string& vertex,
                        const std::string& attr) -> const AttrValue* {
      for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (pattern_.vertices[i].name == vertex) {
          const Element& e = graph_.element(vertices[i]);
          auto it = e.attrs.find(attr);
          return it == e.attrs.end() ? nullptr : &it->second;
        }
      }
      auto outer = env_.find(vertex);
      if (outer != env_.end() && graph_.contains(outer->second)) {
        const Element& e = graph_.element(outer->second);
        auto it = e.attrs.find(attr);
        return it == e.attrs.end() ? nullptr : &it->second;
      }
      return nullptr;
    };
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const PatternVertex& pv = pattern_.vertices[i];
      for (const auto& c : pv.constraints) {
        const AttrValue* own = value_of(pv.name, c.attr);
        if (own == nullptr) {
          return false;
        }
        if (c.kind == AttrConstraint::Kind::Const) {
          if (*own != c.value) {
            return false;
          }
        } else {
          bool other_assigned = env_.count(c.ref_vertex) > 0;
          for (std::size_t k = 0; k < vertices.size() && !other_assigned; ++k) {
            other_assigned = pattern_.vertices[k].name == c.ref_vertex;
          }
          if (!other_assigned) {
            continue;  // checked once the counterpart is picked
          }
          const AttrValue* other = value_of(c.ref_vertex, c.ref_attr);
          if (other == nullptr || *own != *other) {
            return false;
          }
        }
      }
    }
    return true;
  }

  template <typename Fn>
  bool assign_edge(std::size_t index, const std::vector<ElementId>& vertices,
                   std::vector<ElementId>& edges, Fn&& emit) {
    if (index == pattern_.edges.size()) {
      if (!passes_forbids(vertices, edges)) {
        return true;
      }
      PatternMatch m;
      m.vertex_ids = vertices;
      m.edge_ids = edges;
      return emit(m);
    }
    const PatternEdge& pe = pattern_.edges[index];
    ElementId src = resolve(pe.source, vertices);
    ElementId tgt = resolve(pe.target, vertices);
    for (ElementId id : graph_.instances_conforming(pe.type)) {
      const Element& e = graph_.element(id);
      if (e.is_vertex || e.source != src || e.target != tgt) {
        continue;
      }
      if (std::find(edges.begin(), edges.end(), id) != edges.end()) {
        continue;
      }
      if (forbidden_.count(id)) {
        continue;
      }
      edges.push_back(id);
      if (!assign_edge(index + 1, vertices, edges, std::forward<Fn>(emit))) {
        return false;
      }
      edges.pop_back();
    }
    return true;
  }

  ElementId resolve(const std::string& name,
                    const std::vector<ElementId>& vertices) const {
    for (std::size_t i = 0; i < pattern_.vertices.size(); ++i) {
      if (pattern_.vertices[i].name == name) {
        return vertices[i];
      }
    }
    auto it = env_.find(name);
    if (it == env_.end()) {
      throw std::logic_error("oracle: unresolved vertex " + name);
    }
    return it->second;
  }

  bool passes_forbids(const std::vector<ElementId>& vertices,
                      const std::vector<ElementId>& edges) const {
    for (const Pattern& forbid : pattern_.forbids) {
      Binding env = env_;
      for (std::size_t i = 0; i < pattern_.vertices.size(); ++i) {
        env[pattern_.vertices[i].name] = vertices[i];
      }
      BruteMatcher sub(graph_, forbid, env);
      for (ElementId id : vertices) {
        sub.forbidden_.insert(id);
      }
      for (ElementId id : edges) {
        sub.forbidden_.insert(id);
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
  std::set<ElementId> forbidden_;
};

class PointwiseEvaluator {
 public:
  PointwiseEvaluator(const HistoryGraph& graph, std::int64_t limit)
      : graph_(graph), limit_(limit) {}

  Bitmap alive(const std::vector<ElementId>& elements) const {
    Bitmap out(static_cast<std::size_t>(limit_) + 1, 1);
    for (ElementId id : elements) {
      const Element& e = graph_.element(id);
      std::int64_t lo = 2 * e.cts.ticks();
      std::int64_t hi = e.dts.is_infinite() ? limit_ : 2 * e.dts.ticks();
      for (std::int64_t p = 0; p <= limit_; ++p) {
        if (p < lo || p > hi) {
          out[static_cast<std::size_t>(p)] = 0;
        }
      }
    }
    return out;
  }

  Bitmap eval(const Mtgc& c, const Binding& env) const {
    switch (c.kind) {
      case Mtgc::Kind::Top:
        return Bitmap(static_cast<std::size_t>(limit_) + 1, 1);
      case Mtgc::Kind::Not: {
        Bitmap out = eval(*c.child, env);
        for (auto& b : out) {
          b = b ? 0 : 1;
        }
        return out;
      }
      case Mtgc::Kind::And: {
        Bitmap l = eval(*c.left, env);
        Bitmap r = eval(*c.right, env);
        for (std::size_t i = 0; i < l.size(); ++i) {
          l[i] = l[i] && r[i];
        }
        return l;
      }
      case Mtgc::Kind::Exists: {
        Bitmap out(static_cast<std::size_t>(limit_) + 1, 0);
        BruteMatcher matcher(graph_, c.pattern, env);
        matcher.enumerate([&](const PatternMatch& m) {
          std::vector<ElementId> all = m.vertex_ids;
          all.insert(all.end(), m.edge_ids.begin(), m.edge_ids.end());
          Bitmap present = alive(all);
          Binding inner = env;
          for (std::size_t i = 0; i < c.pattern.vertices.size(); ++i) {
            inner[c.pattern.vertices[i].name] = m.vertex_ids[i];
          }
          Bitmap sub = eval(*c.child, inner);
          for (std::size_t i = 0; i < out.size(); ++i) {
            if (present[i] && sub[i]) {
              out[i] = 1;
            }
          }
          return true;
        });
        return out;
      }
      case Mtgc::Kind::Until:
        return eval_until(c, env);
      case Mtgc::Kind::Since:
        return eval_since(c, env);
    }
    return Bitmap(static_cast<std::size_t>(limit_) + 1, 0);
  }

 private:
  // Odd positions stand for whole open unit segments: a witness inside such
  // a segment imposes the left obligation on the segment itself, so the
  // half-open scan range closes at odd witness positions.
  Bitmap eval_until(const Mtgc& c, const Binding& env) const {
    Bitmap left = eval(*c.left, env);
    Bitmap right = eval(*c.right, env);
    Bitmap out(static_cast<std::size_t>(limit_) + 1, 0);
    for (std::int64_t t = 0; t <= limit_; ++t) {
      std::int64_t from = t + 2 * c.window.lower;
      std::int64_t to = std::min(limit_, t + 2 * c.window.upper);
      for (std::int64_t tp = from; tp <= to && !out[t]; ++tp) {
        if (!right[static_cast<std::size_t>(tp)]) {
          continue;
        }
        std::int64_t end = tp % 2 == 0 ? tp - 1 : (tp == t ? t - 1 : tp);
        bool ok = true;
        for (std::int64_t u = t; u <= end && ok; ++u) {
          ok = left[static_cast<std::size_t>(u)] != 0;
        }
        if (ok) {
          out[static_cast<std::size_t>(t)] = 1;
        }
      }
    }
    return out;
  }

  Bitmap eval_since(const Mtgc& c, const Binding& env) const {
    Bitmap left = eval(*c.left, env);
    Bitmap right = eval(*c.right, env);
    Bitmap out(static_cast<std::size_t>(limit_) + 1, 0);
    for (std::int64_t t = 0; t <= limit_; ++t) {
      std::int64_t from = std::max<std::int64_t>(0, t - 2 * c.window.upper);
      std::int64_t to = t - 2 * c.window.lower;
      for (std::int64_t tp = from; tp <= to && !out[t]; ++tp) {
        if (!right[static_cast<std::size_t>(tp)]) {
          continue;
        }
        std::int64_t start = tp % 2 == 0 ? tp + 1 : (tp == t ? t + 1 : tp);
        bool ok = true;
        for (std::int64_t u = start; u <= t && ok; ++u) {
          ok = left[static_cast<std::size_t>(u)] != 0;
        }
        if (ok) {
          out[static_cast<std::size_t>(t)] = 1;
        }
      }
    }
    return out;
  }

  const HistoryGraph& graph_;
  std::int64_t limit_;
};

FragmentedInterval bitmap_to_interval(const Bitmap& bits) {
  std::vector<PosSpan> spans;
  std::int64_t start = -1;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] && start < 0) {
      start = static_cast<std::int64_t>(i);
    } else if (!bits[i] && start >= 0) {
      spans.push_back(PosSpan{start, static_cast<std::int64_t>(i) - 1});
      start = -1;
    }
  }
  if (start >= 0) {
    spans.push_back(PosSpan{start, static_cast<std::int64_t>(bits.size()) - 1});
  }
  return FragmentedInterval::from_positions(std::move(spans));
}

}  // namespace

OracleResult evaluate(const HistoryGraph& graph, const Query& query,
                      TimePoint horizon) {
  if (horizon.is_infinite()) {
    throw std::invalid_argument("oracle: horizon must be finite");
  }
  for (ElementId id : graph.all_ids()) {
    const Element& e = graph.element(id);
    if (e.cts > horizon || (!e.dts.is_infinite() && e.dts > horizon)) {
      throw std::invalid_argument(
          "oracle: element timestamps exceed the horizon");
    }
  }
  // Satisfaction at points up to the horizon can depend on sub-results as
  // far ahead as the condition's cut-off; evaluate on the extended grid and
  // clip afterwards.
  std::int64_t limit = 2 * (horizon.ticks() + cutoff(query));
  PointwiseEvaluator eval(graph, limit);

  OracleResult out;
  out.query = query.name;
  FragmentedInterval window(Interval::closed(0, horizon.ticks()));
  BruteMatcher matcher(graph, query.root_pattern, {});
  matcher.enumerate([&](const PatternMatch& m) {
    std::vector<ElementId> all = m.vertex_ids;
    all.insert(all.end(), m.edge_ids.begin(), m.edge_ids.end());
    Bitmap present = eval.alive(all);
    Binding env;
    for (std::size_t i = 0; i < query.root_pattern.vertices.size(); ++i) {
      env[query.root_pattern.vertices[i].name] = m.vertex_ids[i];
    }
    Bitmap sat = eval.eval(*query.condition, env);
    for (std::size_t i = 0; i < sat.size(); ++i) {
      sat[i] = sat[i] && present[i];
    }
    OracleEntry entry;
    entry.binding = env;
    for (std::size_t i = 0; i < query.root_pattern.edges.size(); ++i) {
      entry.binding[query.root_pattern.edges[i].name] = m.edge_ids[i];
    }
    entry.satisfaction = intersect(bitmap_to_interval(sat), window);
    if (!entry.satisfaction.empty()) {
      out.results.push_back(std::move(entry));
    }
    return true;
  });
  std::sort(out.results.begin(), out.results.end(),
            [](const OracleEntry& a, const OracleEntry& b) {
              return a.binding < b.binding;
            });
  return out;
}

nlohmann::ordered_json oracle_result_to_json(const OracleResult& result,
                                             TimePoint horizon) {
  nlohmann::ordered_json doc;
  doc["query"] = result.query;
  doc["horizon"] = horizon.is_infinite() ? nlohmann::ordered_json("inf")
                                         : nlohmann::ordered_json(horizon.ticks());
  doc["results"] = nlohmann::ordered_json::array();
  for (const auto& entry : result.results) {
    nlohmann::ordered_json r;
    r["elements"] = nlohmann::ordered_json::object();
    for (const auto& [name, id] : entry.binding) {
      r["elements"][name] = id;
    }
    r["lambda"] = entry.satisfaction.to_string();
    doc["results"].push_back(std::move(r));
  }
  return doc;
}

}  // namespace tempoq
