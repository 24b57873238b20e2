#include "tempoq/gdn.hpp"

#include <algorithm>
#include <cassert>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace tempoq {

FragmentedInterval match_lifespan(const HistoryGraph& graph,
                                  const std::vector<ElementId>& elements) {
  FragmentedInterval out = FragmentedInterval::universe();
  for (ElementId id : elements) {
    out = intersect(out, FragmentedInterval(graph.lifetime(id)));
    if (out.empty()) {
      break;
    }
  }
  return out;
}

FragmentedInterval match_lifespan(const std::vector<FragmentedInterval>& spans) {
  FragmentedInterval out = FragmentedInterval::universe();
  for (const auto& s : spans) {
    out = intersect(out, s);
    if (out.empty()) {
      break;
    }
  }
  return out;
}

FragmentedInterval alpha_lifespan(const FragmentedInterval& kernel,
                                  const std::vector<FragmentedInterval>& deps,
                                  Polarity polarity) {
  FragmentedInterval grouped;
  for (const auto& d : deps) {
    grouped = union_of(grouped, d);
  }
  return polarity == Polarity::Positive ? intersect(kernel, grouped)
                                        : difference(kernel, grouped);
}

namespace {

bool spans_adjacent(const PosSpan& a, const PosSpan& b) {
  if (a.lo <= b.lo) {
    return a.hi == kPosInfinity || b.lo <= a.hi + 1;
  }
  return b.hi == kPosInfinity || a.lo <= b.hi + 1;
}

std::int64_t shift_up(std::int64_t pos, std::int64_t delta) {
  if (pos == kPosInfinity || pos > kPosInfinity - delta) {
    return kPosInfinity;
  }
  return pos + delta;
}

}  // namespace

FragmentedInterval until_satisfaction(const FragmentedInterval& left,
                                      const FragmentedInterval& right,
                                      OperatorWindow window) {
  std::vector<PosSpan> out;
  for (const PosSpan& i : right.positions()) {
    for (const PosSpan& j : left.positions()) {
      if (!spans_adjacent(i, j)) {
        continue;
      }
      // The witness for the right operand must stay within reach of the
      // left part: t' <= u(j), with u(j) itself reachable even when the
      // part is right-open. Clipping before the pivot shift keeps open
      // endpoints exact.
      std::int64_t cap =
          j.hi == kPosInfinity ? kPosInfinity : (j.hi % 2 != 0 ? j.hi + 1 : j.hi);
      std::int64_t lo = i.lo;
      std::int64_t hi = std::min(i.hi, cap);
      if (lo > hi) {
        continue;
      }
      std::int64_t s_lo = lo - 2 * window.upper;
      if (s_lo < 0) {
        s_lo = 0;  // time domain starts at 0
      }
      std::int64_t s_hi = hi == kPosInfinity ? kPosInfinity : hi - 2 * window.lower;
      if (s_lo > s_hi) {
        continue;
      }
      PosSpan c{std::max(s_lo, j.lo), std::min(s_hi, j.hi)};
      if (c.lo <= c.hi) {
        out.push_back(c);
      }
    }
  }
  FragmentedInterval sat = FragmentedInterval::from_positions(std::move(out));
  if (window.lower == 0) {
    sat = union_of(sat, right);
  }
  return sat;
}

FragmentedInterval since_satisfaction(const FragmentedInterval& left,
                                      const FragmentedInterval& right,
                                      OperatorWindow window) {
  std::vector<PosSpan> out;
  for (const PosSpan& i : right.positions()) {
    for (const PosSpan& j : left.positions()) {
      if (!spans_adjacent(i, j)) {
        continue;
      }
      // Mirror of until: the witness must lie at or after l(j).
      std::int64_t floor_lo = j.lo % 2 != 0 ? j.lo - 1 : j.lo;
      std::int64_t lo = std::max(i.lo, floor_lo);
      std::int64_t hi = i.hi;
      if (lo > hi) {
        continue;
      }
      std::int64_t s_lo = lo + 2 * window.lower;
      std::int64_t s_hi = shift_up(hi, 2 * window.upper);
      PosSpan c{std::max(s_lo, j.lo), std::min(s_hi, j.hi)};
      if (c.lo <= c.hi) {
        out.push_back(c);
      }
    }
  }
  FragmentedInterval sat = FragmentedInterval::from_positions(std::move(out));
  if (window.lower == 0) {
    sat = union_of(sat, right);
  }
  return sat;
}

namespace {

std::set<std::string> free_vars(const Mtgc& c) {
  switch (c.kind) {
    case Mtgc::Kind::Top:
      return {};
    case Mtgc::Kind::Exists: {
      std::set<std::string> out;
      for (const auto& name : c.pattern.bound_names()) {
        out.insert(name);
      }
      return out;
    }
    case Mtgc::Kind::Not:
      return free_vars(*c.child);
    case Mtgc::Kind::And:
    case Mtgc::Kind::Until:
    case Mtgc::Kind::Since: {
      std::set<std::string> out = free_vars(*c.left);
      std::set<std::string> r = free_vars(*c.right);
      out.insert(r.begin(), r.end());
      return out;
    }
  }
  return {};
}

// Strips negations, tracking polarity parity.
std::pair<Polarity, const Mtgc*> strip_not(const Mtgc& c) {
  const Mtgc* cur = &c;
  Polarity pol = Polarity::Positive;
  while (cur->kind == Mtgc::Kind::Not) {
    pol = pol == Polarity::Positive ? Polarity::Negative : Polarity::Positive;
    cur = cur->child.get();
  }
  return {pol, cur};
}

void flatten_and(const MtgcPtr& c, std::vector<MtgcPtr>& out) {
  if (c->kind == Mtgc::Kind::And) {
    flatten_and(c->left, out);
    flatten_and(c->right, out);
  } else {
    out.push_back(c);
  }
}

}  // namespace

class GdnBuilder {
 public:
  GdnBuilder(GdnNetwork& net, const TypeGraph& types)
      : net_(net), types_(types) {}

  void build(const Query& query) {
    std::vector<const Pattern*> scope;
    net_.terminal_ = build_pattern_node(query.root_pattern, query.condition,
                                        scope);
  }

 private:
  GdnNodeId add_node(GdnNodeInfo node) {
    node.id = static_cast<GdnNodeId>(net_.nodes_.size());
    net_.nodes_.push_back(std::move(node));
    net_.markings_.emplace_back();
    return net_.nodes_.back().id;
  }

  GdnNodeId top_node() {
    if (!top_) {
      GdnNodeInfo node;
      node.kind = GdnNodeKind::Top;
      top_ = add_node(std::move(node));
    }
    return *top_;
  }

  void add_vertex_types(std::set<std::string>& out, const std::string& type) {
    for (const auto& concrete : types_.conforming_types(type)) {
      out.insert(concrete);
    }
  }

  std::set<std::string> pattern_types(const Pattern& p) {
    std::set<std::string> out;
    for (const auto& v : p.vertices) {
      add_vertex_types(out, v.type);
    }
    for (const auto& e : p.edges) {
      out.insert(e.type);
    }
    for (const auto& f : p.forbids) {
      auto sub = pattern_types(f);
      out.insert(sub.begin(), sub.end());
    }
    return out;
  }

  std::vector<KernelVar> kernel_for(const Mtgc& c,
                                    const std::vector<const Pattern*>& scope) {
    std::vector<KernelVar> out;
    for (const auto& name : free_vars(c)) {  // std::set: sorted, deterministic
      const PatternVertex* decl = nullptr;
      for (auto it = scope.rbegin(); it != scope.rend() && !decl; ++it) {
        decl = (*it)->find_vertex(name);
      }
      if (decl == nullptr) {
        throw std::invalid_argument("network build: unbound variable " + name);
      }
      out.push_back({name, decl->type});
    }
    return out;
  }

  GdnNodeId build_condition_node(const Mtgc& c,
                                 std::vector<const Pattern*>& scope) {
    switch (c.kind) {
      case Mtgc::Kind::Top:
        return top_node();
      case Mtgc::Kind::Exists:
        return build_pattern_node(c.pattern, c.child, scope);
      case Mtgc::Kind::Until:
      case Mtgc::Kind::Since:
        return build_temporal_node(c, scope);
      case Mtgc::Kind::And: {
        // A conjunction outside a pattern context is grouped under an
        // auxiliary pattern holding exactly the bound vertices.
        Pattern group;
        group.name = "!group" + std::to_string(group_counter_++);
        for (const auto& var : kernel_for(c, scope)) {
          PatternVertex v;
          v.name = var.name;
          v.type = var.type;
          v.bound = true;
          group.vertices.push_back(std::move(v));
        }
        MtgcPtr cond = std::make_shared<const Mtgc>(c);
        GdnNodeId id = build_pattern_node(group, cond, scope);
        net_.nodes_[id].synthetic = true;
        return id;
      }
      case Mtgc::Kind::Not:
        throw std::logic_error("network build: negation must reach an alpha");
    }
    throw std::logic_error("network build: unreachable");
  }

  GdnNodeId build_alpha(const MtgcPtr& operand,
                        std::vector<const Pattern*>& scope) {
    auto [polarity, core] = strip_not(*operand);
    GdnNodeId child = build_condition_node(*core, scope);
    GdnNodeInfo node;
    node.kind = GdnNodeKind::Alpha;
    node.polarity = polarity;
    node.kernel = kernel_for(*core, scope);
    for (const auto& var : node.kernel) {
      node.signature.push_back(var.name);
      add_vertex_types(node.relevant_types, var.type);
    }
    node.deps.push_back({child, DepRole::Sole});
    return add_node(std::move(node));
  }

  GdnNodeId build_temporal_node(const Mtgc& c,
                                std::vector<const Pattern*>& scope) {
    GdnNodeId left = build_alpha(c.left, scope);
    GdnNodeId right = build_alpha(c.right, scope);
    GdnNodeInfo node;
    node.kind = c.kind == Mtgc::Kind::Until ? GdnNodeKind::Until
                                            : GdnNodeKind::Since;
    node.window = c.window;
    node.kernel = kernel_for(c, scope);
    for (const auto& var : node.kernel) {
      node.signature.push_back(var.name);
      add_vertex_types(node.relevant_types, var.type);
    }
    node.deps.push_back({left, DepRole::Left});
    node.deps.push_back({right, DepRole::Right});
    return add_node(std::move(node));
  }

  GdnNodeId build_pattern_node(const Pattern& pattern, const MtgcPtr& condition,
                               std::vector<const Pattern*>& scope) {
    scope.push_back(&pattern);
    std::vector<MtgcPtr> conjuncts;
    flatten_and(condition, conjuncts);
    std::vector<GdnDependency> deps;
    for (const MtgcPtr& conjunct : conjuncts) {
      auto [polarity, core] = strip_not(*conjunct);
      if (core->kind == Mtgc::Kind::Top && polarity == Polarity::Positive) {
        if (conjuncts.size() == 1 && scope.size() == 1) {
          deps.push_back({top_node(), DepRole::Sole});
        }
        // A true conjunct adds nothing elsewhere.
        continue;
      }
      deps.push_back({build_alpha(conjunct, scope), DepRole::Sole});
    }
    scope.pop_back();

    GdnNodeInfo node;
    node.kind = GdnNodeKind::Pattern;
    node.pattern = pattern;
    for (const auto& v : pattern.vertices) {
      node.signature.push_back(v.name);
    }
    for (const auto& e : pattern.edges) {
      node.signature.push_back(e.name);
    }
    node.relevant_types = pattern_types(pattern);
    node.deps = std::move(deps);
    return add_node(std::move(node));
  }

  GdnNetwork& net_;
  const TypeGraph& types_;
  std::optional<GdnNodeId> top_;
  int group_counter_ = 0;
};

GdnNetwork::GdnNetwork(const Query& query, const TypeGraph& types)
    : query_name_(query.name), types_(types) {
  validate_query(types, query);
  GdnBuilder builder(*this, types_);
  builder.build(query);
  for (const auto& node : nodes_) {
    if (node.kind == GdnNodeKind::Top) {
      MarkingNode m;
      m.id = next_marking_++;
      m.lambda = FragmentedInterval::universe();
      markings_[node.id].emplace(std::vector<ElementId>{}, std::move(m));
    }
  }
}

void GdnNetwork::check_types(const HistoryGraph& graph) const {
  if (!types_.same_as(graph.types())) {
    throw std::invalid_argument(
        "execute: graph type graph differs from the network's");
  }
}

void GdnNetwork::execute_full(const HistoryGraph& graph) {
  check_types(graph);
  for (const auto& node : nodes_) {
    recompute(node.id, graph);
  }
}

void GdnNetwork::execute_incremental(const HistoryGraph& graph,
                                     const std::vector<ChangeRecord>& journal) {
  check_types(graph);
  std::set<std::string> changed;
  for (const auto& rec : journal) {
    changed.insert(rec.type);
  }
  std::vector<bool> dirty(nodes_.size(), false);
  for (const auto& node : nodes_) {
    bool d = false;
    for (const auto& t : node.relevant_types) {
      if (changed.count(t)) {
        d = true;
        break;
      }
    }
    if (!d) {
      for (const auto& dep : node.deps) {
        if (dirty[dep.node]) {
          d = true;
          break;
        }
      }
    }
    dirty[node.id] = d;
    if (d) {
      recompute(node.id, graph);
    }
  }
}

void GdnNetwork::recompute(GdnNodeId id, const HistoryGraph& graph) {
  const GdnNodeInfo& node = nodes_[id];
  switch (node.kind) {
    case GdnNodeKind::Top: {
      if (markings_[id].empty()) {
        MarkingNode m;
        m.id = next_marking_++;
        m.lambda = FragmentedInterval::universe();
        markings_[id].emplace(std::vector<ElementId>{}, std::move(m));
      }
      return;
    }
    case GdnNodeKind::Pattern:
      recompute_pattern(node, graph);
      return;
    case GdnNodeKind::Alpha:
      recompute_alpha(node, graph);
      return;
    case GdnNodeKind::Until:
    case GdnNodeKind::Since:
      recompute_temporal(node, graph);
      return;
  }
}

namespace {

// Position of each kernel variable in a child node's signature.
std::vector<std::size_t> projection_indices(
    const std::vector<KernelVar>& kernel,
    const std::vector<std::string>& signature) {
  std::vector<std::size_t> out;
  for (const auto& var : kernel) {
    auto it = std::find(signature.begin(), signature.end(), var.name);
    if (it == signature.end()) {
      throw std::logic_error("network: kernel variable " + var.name +
                             " missing from child signature");
    }
    out.push_back(static_cast<std::size_t>(it - signature.begin()));
  }
  return out;
}

std::vector<ElementId> project(const std::vector<ElementId>& elements,
                               const std::vector<std::size_t>& indices) {
  std::vector<ElementId> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(elements[i]);
  }
  return out;
}

// Injective assignments of graph elements to kernel variables.
void enumerate_assignments(const HistoryGraph& graph,
                           const std::vector<KernelVar>& vars, std::size_t index,
                           std::vector<ElementId>& current,
                           std::vector<std::vector<ElementId>>& out) {
  if (index == vars.size()) {
    out.push_back(current);
    return;
  }
  for (ElementId id : graph.instances_conforming(vars[index].type)) {
    if (std::find(current.begin(), current.end(), id) != current.end()) {
      continue;
    }
    current.push_back(id);
    enumerate_assignments(graph, vars, index + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

void GdnNetwork::recompute_pattern(const GdnNodeInfo& node,
                                   const HistoryGraph& graph) {
  std::map<std::vector<ElementId>, Computed> fresh;
  // Kernel projections per dependency, resolved against this pattern's
  // vertex order.
  struct DepInfo {
    const GdnNodeInfo* dep;
    std::vector<std::size_t> indices;  // into the match's vertex list
  };
  std::vector<DepInfo> deps;
  for (const auto& d : node.deps) {
    const GdnNodeInfo& dep = nodes_[d.node];
    DepInfo info{&dep, {}};
    if (dep.kind == GdnNodeKind::Alpha) {
      info.indices = projection_indices(dep.kernel, node.signature);
    }
    deps.push_back(std::move(info));
  }

  for (const PatternMatch& m : find_matches(graph, node.pattern)) {
    std::vector<ElementId> key = m.vertex_ids;
    key.insert(key.end(), m.edge_ids.begin(), m.edge_ids.end());
    FragmentedInterval lambda = match_lifespan(graph, key);
    std::vector<MarkingId> dep_ids;
    for (const DepInfo& info : deps) {
      if (lambda.empty()) {
        break;
      }
      if (info.dep->kind == GdnNodeKind::Top) {
        const auto& tm = markings_[info.dep->id];
        if (!tm.empty()) {
          dep_ids.push_back(tm.begin()->second.id);
        }
        continue;  // universe intersection is the identity
      }
      std::vector<ElementId> kernel_key = project(key, info.indices);
      const auto& store = markings_[info.dep->id];
      auto it = store.find(kernel_key);
      if (it == store.end()) {
        lambda = FragmentedInterval();
        break;
      }
      lambda = intersect(lambda, it->second.lambda);
      dep_ids.push_back(it->second.id);
    }
    if (!lambda.empty()) {
      fresh[key] = Computed{std::move(lambda), std::move(dep_ids)};
    }
  }
  upsert_markings(node.id, fresh);
}

void GdnNetwork::recompute_alpha(const GdnNodeInfo& node,
                                 const HistoryGraph& graph) {
  const GdnNodeInfo& child = nodes_[node.deps.front().node];
  const auto& child_markings = markings_[child.id];

  std::vector<std::size_t> indices =
      child.kind == GdnNodeKind::Top
          ? std::vector<std::size_t>{}
          : projection_indices(node.kernel, child.signature);

  std::map<std::vector<ElementId>, std::vector<const MarkingNode*>> groups;
  for (const auto& [key, marking] : child_markings) {
    groups[project(key, indices)].push_back(&marking);
  }

  std::vector<std::vector<ElementId>> kernel_keys;
  if (node.polarity == Polarity::Negative) {
    std::vector<ElementId> current;
    enumerate_assignments(graph, node.kernel, 0, current, kernel_keys);
  } else {
    kernel_keys.reserve(groups.size());
    for (const auto& [key, group] : groups) {
      kernel_keys.push_back(key);
    }
  }

  std::map<std::vector<ElementId>, Computed> fresh;
  for (const auto& key : kernel_keys) {
    FragmentedInterval kernel_span = match_lifespan(graph, key);
    if (kernel_span.empty()) {
      continue;
    }
    std::vector<FragmentedInterval> grouped;
    std::vector<MarkingId> dep_ids;
    auto it = groups.find(key);
    if (it != groups.end()) {
      for (const MarkingNode* m : it->second) {
        grouped.push_back(m->lambda);
        dep_ids.push_back(m->id);
      }
    }
    FragmentedInterval lambda =
        alpha_lifespan(kernel_span, grouped, node.polarity);
    if (!lambda.empty()) {
      fresh[key] = Computed{std::move(lambda), std::move(dep_ids)};
    }
  }
  upsert_markings(node.id, fresh);
}

namespace {

// Unrestricted truth set of a temporal operand, read through the operand's
// alpha from the child markings. The alpha's own markings restrict the
// aggregate to the kernel match's lifespan, which is right for pattern
// contexts but loses truth a temporal operator may still need: a negated
// operand is vacuously satisfied outside its bound elements' lifespans, and
// a grouped conjunction carries no aliveness requirement of its own.
class OperandReader {
 public:
  OperandReader(const std::vector<GdnNodeInfo>& nodes,
                const std::vector<std::map<std::vector<ElementId>, MarkingNode>>&
                    markings,
                const GdnNodeInfo& alpha,
                const std::vector<std::string>& outer_signature)
      : nodes_(nodes), markings_(markings), outer_(outer_signature) {
    root_ = from_alpha(alpha, /*conjunctive=*/true);
  }

  FragmentedInterval truth(const std::vector<ElementId>& key,
                           std::vector<MarkingId>* dep_ids) const {
    return eval(*root_, key, dep_ids);
  }

  // A group of markings whose keys bound the assignments for which the
  // operand can be satisfied. Only groups required conjunctively and never
  // under a negation qualify; negations and constants are satisfiable at
  // arbitrary assignments, so without a qualifying group there is no bound.
  struct Driver {
    std::vector<std::string> vars;
    std::vector<std::vector<ElementId>> keys;
  };
  const Driver* driver() const { return has_driver_ ? &driver_ : nullptr; }

 private:
  struct Expr {
    enum class Kind { Const, Group, Not, And } kind = Kind::Const;
    // Group
    std::vector<std::size_t> key_indices;  // outer signature -> group key
    std::map<std::vector<ElementId>, std::vector<const MarkingNode*>> groups;
    std::vector<std::unique_ptr<Expr>> children;
  };

  std::unique_ptr<Expr> from_alpha(const GdnNodeInfo& alpha,
                                   bool conjunctive) {
    bool negated = alpha.polarity == Polarity::Negative;
    std::unique_ptr<Expr> e = from_child(nodes_[alpha.deps.front().node],
                                         alpha.kernel,
                                         conjunctive && !negated);
    if (negated) {
      auto n = std::make_unique<Expr>();
      n->kind = Expr::Kind::Not;
      n->children.push_back(std::move(e));
      return n;
    }
    return e;
  }

  std::unique_ptr<Expr> from_child(const GdnNodeInfo& child,
                                   const std::vector<KernelVar>& vars,
                                   bool conjunctive) {
    auto e = std::make_unique<Expr>();
    if (child.kind == GdnNodeKind::Top) {
      e->kind = Expr::Kind::Const;
      return e;
    }
    if (child.kind == GdnNodeKind::Pattern && child.synthetic) {
      e->kind = Expr::Kind::And;
      for (const auto& dep : child.deps) {
        const GdnNodeInfo& d = nodes_[dep.node];
        if (d.kind == GdnNodeKind::Top) {
          continue;  // a true conjunct adds nothing
        }
        e->children.push_back(from_alpha(d, conjunctive));
      }
      return e;
    }
    e->kind = Expr::Kind::Group;
    e->key_indices = projection_indices(vars, outer_);
    std::vector<std::size_t> child_indices =
        projection_indices(vars, child.signature);
    for (const auto& [key, marking] : markings_[child.id]) {
      e->groups[project(key, child_indices)].push_back(&marking);
    }
    if (conjunctive && !has_driver_) {
      has_driver_ = true;
      for (const auto& var : vars) {
        driver_.vars.push_back(var.name);
      }
      for (const auto& [key, group] : e->groups) {
        driver_.keys.push_back(key);
      }
    }
    return e;
  }

  FragmentedInterval eval(const Expr& e, const std::vector<ElementId>& key,
                          std::vector<MarkingId>* dep_ids) const {
    switch (e.kind) {
      case Expr::Kind::Const:
        return FragmentedInterval::universe();
      case Expr::Kind::Group: {
        FragmentedInterval out;
        auto it = e.groups.find(project(key, e.key_indices));
        if (it != e.groups.end()) {
          for (const MarkingNode* m : it->second) {
            out = union_of(out, m->lambda);
            if (dep_ids != nullptr) {
              dep_ids->push_back(m->id);
            }
          }
        }
        return out;
      }
      case Expr::Kind::Not:
        return difference(FragmentedInterval::universe(),
                          eval(*e.children.front(), key, dep_ids));
      case Expr::Kind::And: {
        FragmentedInterval out = FragmentedInterval::universe();
        for (const auto& child : e.children) {
          out = intersect(out, eval(*child, key, dep_ids));
          if (out.empty()) {
            break;
          }
        }
        return out;
      }
    }
    return {};
  }

  const std::vector<GdnNodeInfo>& nodes_;
  const std::vector<std::map<std::vector<ElementId>, MarkingNode>>& markings_;
  const std::vector<std::string>& outer_;
  std::unique_ptr<Expr> root_;
  Driver driver_;
  bool has_driver_ = false;
};

}  // namespace

void GdnNetwork::recompute_temporal(const GdnNodeInfo& node,
                                    const HistoryGraph& graph) {
  const GdnNodeInfo* left = nullptr;
  const GdnNodeInfo* right = nullptr;
  for (const auto& d : node.deps) {
    if (d.role == DepRole::Left) {
      left = &nodes_[d.node];
    } else if (d.role == DepRole::Right) {
      right = &nodes_[d.node];
    }
  }
  assert(left != nullptr && right != nullptr);

  OperandReader left_reader(nodes_, markings_, *left, node.signature);
  OperandReader right_reader(nodes_, markings_, *right, node.signature);

  // Candidate kernel assignments. A satisfied until/since needs a non-empty
  // right operand; when the right operand is anchored in some group of
  // markings, its keys (extended over the remaining kernel variables) bound
  // the candidates. A negated or constant right operand has no such anchor
  // and forces the full extent.
  std::vector<std::vector<ElementId>> keys;
  const OperandReader::Driver* driver = right_reader.driver();
  if (driver == nullptr) {
    std::vector<ElementId> current;
    enumerate_assignments(graph, node.kernel, 0, current, keys);
  } else {
    std::vector<KernelVar> extension;
    std::vector<std::size_t> fixed_pos;
    for (std::size_t k = 0; k < node.kernel.size(); ++k) {
      const auto& var = node.kernel[k];
      bool fixed = std::find(driver->vars.begin(), driver->vars.end(),
                             var.name) != driver->vars.end();
      if (fixed) {
        fixed_pos.push_back(k);
      } else {
        extension.push_back(var);
      }
    }
    std::vector<std::vector<ElementId>> extensions;
    {
      std::vector<ElementId> current;
      enumerate_assignments(graph, extension, 0, current, extensions);
    }
    for (const auto& driver_key : driver->keys) {
      for (const auto& ext : extensions) {
        std::vector<ElementId> key(node.kernel.size(), kNoElement);
        for (std::size_t k = 0; k < fixed_pos.size(); ++k) {
          key[fixed_pos[k]] = driver_key[k];
        }
        std::size_t e = 0;
        for (std::size_t k = 0; k < key.size(); ++k) {
          if (key[k] == kNoElement) {
            key[k] = ext[e++];
          }
        }
        bool injective = true;
        for (std::size_t a = 0; a < key.size() && injective; ++a) {
          for (std::size_t b = a + 1; b < key.size(); ++b) {
            if (key[a] == key[b]) {
              injective = false;
              break;
            }
          }
        }
        if (injective) {
          keys.push_back(std::move(key));
        }
      }
    }
  }

  std::map<std::vector<ElementId>, Computed> fresh;
  for (const auto& key : keys) {
    if (fresh.count(key)) {
      continue;
    }
    std::vector<MarkingId> dep_ids;
    FragmentedInterval left_lambda = left_reader.truth(key, &dep_ids);
    FragmentedInterval right_lambda = right_reader.truth(key, &dep_ids);
    FragmentedInterval lambda =
        node.kind == GdnNodeKind::Until
            ? until_satisfaction(left_lambda, right_lambda, node.window)
            : since_satisfaction(left_lambda, right_lambda, node.window);
    if (!lambda.empty()) {
      fresh[key] = Computed{std::move(lambda), std::move(dep_ids)};
    }
  }
  upsert_markings(node.id, fresh);
}

void GdnNetwork::upsert_markings(
    GdnNodeId id, const std::map<std::vector<ElementId>, Computed>& fresh) {
  auto& store = markings_[id];
  for (auto it = store.begin(); it != store.end();) {
    if (!fresh.count(it->first)) {
      it = store.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [key, computed] : fresh) {
    auto it = store.find(key);
    if (it == store.end()) {
      MarkingNode m;
      m.id = next_marking_++;
      m.lambda = computed.lambda;
      m.elements = key;
      m.dependency_markings = computed.dependency_markings;
      store.emplace(key, std::move(m));
    } else {
      it->second.lambda = computed.lambda;
      it->second.dependency_markings = computed.dependency_markings;
    }
  }
}

MatchReport GdnNetwork::report() const {
  MatchReport out;
  out.query = query_name_;
  const GdnNodeInfo& term = nodes_[terminal_];
  for (const auto& [key, marking] : markings_[terminal_]) {
    ReportEntry entry;
    for (std::size_t i = 0; i < term.signature.size(); ++i) {
      entry.binding[term.signature[i]] = key[i];
    }
    entry.lambda = marking.lambda;
    out.matches.push_back(std::move(entry));
  }
  return out;
}

const std::map<std::vector<ElementId>, MarkingNode>& GdnNetwork::node_markings(
    GdnNodeId id) const {
  return markings_.at(id);
}

std::size_t GdnNetwork::marking_count() const {
  std::size_t n = 0;
  for (const auto& store : markings_) {
    n += store.size();
  }
  return n;
}

std::string GdnNetwork::dump_markings() const {
  std::ostringstream out;
  for (const auto& node : nodes_) {
    out << "node " << node.id << " kind " << static_cast<int>(node.kind)
        << "\n";
    for (const auto& [key, marking] : markings_[node.id]) {
      out << "  [";
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i > 0) {
          out << ",";
        }
        out << key[i];
      }
      out << "] " << marking.lambda.to_string() << "\n";
    }
  }
  return out.str();
}

ClassifiedMatches classify_matches(const MatchReport& report,
                                   const Mtgc& condition, TimePoint now) {
  Duration horizon = future_horizon(condition);
  ClassifiedMatches out;
  bool any_settled = !now.is_infinite() && now.ticks() >= horizon;
  FragmentedInterval settled;
  if (now.is_infinite()) {
    settled = FragmentedInterval::universe();
    any_settled = true;
  } else if (any_settled) {
    settled = FragmentedInterval(Interval::closed(0, now.ticks() - horizon));
  }
  for (const auto& entry : report.matches) {
    bool definite = any_settled && !intersect(entry.lambda, settled).empty();
    (definite ? out.definite : out.pending).push_back(entry);
  }
  return out;
}

nlohmann::ordered_json report_to_json(const MatchReport& report,
                                      const ClassifiedMatches& classified) {
  nlohmann::ordered_json doc;
  doc["query"] = report.query;
  doc["matches"] = nlohmann::ordered_json::array();
  auto emit = [&](const ReportEntry& entry, const char* classification) {
    nlohmann::ordered_json m;
    m["elements"] = nlohmann::ordered_json::object();
    for (const auto& [name, id] : entry.binding) {
      m["elements"][name] = id;
    }
    m["lambda"] = entry.lambda.to_string();
    m["classification"] = classification;
    doc["matches"].push_back(std::move(m));
  };
  for (const auto& entry : classified.definite) {
    emit(entry, "definite");
  }
  for (const auto& entry : classified.pending) {
    emit(entry, "pending");
  }
  return doc;
}

}  // namespace tempoq
