#include "tempoq/mtgc.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tempoq {

namespace {

void check_window(const OperatorWindow& w) {
  if (w.lower < 0 || w.lower > w.upper) {
    throw std::invalid_argument("operator interval is empty");
  }
}

MtgcPtr make(Mtgc node) { return std::make_shared<const Mtgc>(std::move(node)); }

}  // namespace

MtgcPtr Mtgc::top() {
  static MtgcPtr instance = make(Mtgc{});
  return instance;
}

MtgcPtr Mtgc::exists(Pattern pattern, MtgcPtr child) {
  Mtgc node;
  node.kind = Kind::Exists;
  node.pattern = std::move(pattern);
  node.child = std::move(child);
  return make(std::move(node));
}

MtgcPtr Mtgc::negation(MtgcPtr child) {
  Mtgc node;
  node.kind = Kind::Not;
  node.child = std::move(child);
  return make(std::move(node));
}

MtgcPtr Mtgc::conjunction(MtgcPtr left, MtgcPtr right) {
  Mtgc node;
  node.kind = Kind::And;
  node.left = std::move(left);
  node.right = std::move(right);
  return make(std::move(node));
}

MtgcPtr Mtgc::until(OperatorWindow window, MtgcPtr left, MtgcPtr right) {
  check_window(window);
  Mtgc node;
  node.kind = Kind::Until;
  node.window = window;
  node.left = std::move(left);
  node.right = std::move(right);
  return make(std::move(node));
}

MtgcPtr Mtgc::since(OperatorWindow window, MtgcPtr left, MtgcPtr right) {
  check_window(window);
  Mtgc node;
  node.kind = Kind::Since;
  node.window = window;
  node.left = std::move(left);
  node.right = std::move(right);
  return make(std::move(node));
}

MtgcPtr Mtgc::eventually(OperatorWindow window, MtgcPtr child) {
  return until(window, top(), std::move(child));
}

MtgcPtr Mtgc::once(OperatorWindow window, MtgcPtr child) {
  return since(window, top(), std::move(child));
}

Duration cutoff(const Mtgc& condition) {
  switch (condition.kind) {
    case Mtgc::Kind::Top:
      return 0;
    case Mtgc::Kind::Exists:
      return cutoff(*condition.child);
    case Mtgc::Kind::Not:
      return cutoff(*condition.child);
    case Mtgc::Kind::And:
      return std::max(cutoff(*condition.left), cutoff(*condition.right));
    case Mtgc::Kind::Until:
    case Mtgc::Kind::Since:
      return condition.window.upper +
             std::max(cutoff(*condition.left), cutoff(*condition.right));
  }
  return 0;
}

Duration cutoff(const Query& query) { return cutoff(*query.condition); }

Duration cutoff(const std::vector<Query>& queries) {
  Duration out = 0;
  for (const Query& q : queries) {
    out = std::max(out, cutoff(q));
  }
  return out;
}

Duration future_horizon(const Mtgc& condition) {
  switch (condition.kind) {
    case Mtgc::Kind::Top:
      return 0;
    case Mtgc::Kind::Exists:
    case Mtgc::Kind::Not:
      return future_horizon(*condition.child);
    case Mtgc::Kind::And:
      return std::max(future_horizon(*condition.left),
                      future_horizon(*condition.right));
    case Mtgc::Kind::Until:
      return condition.window.upper +
             std::max(future_horizon(*condition.left),
                      future_horizon(*condition.right));
    case Mtgc::Kind::Since:
      return std::max(future_horizon(*condition.left),
                      future_horizon(*condition.right));
  }
  return 0;
}

Duration future_horizon(const Query& query) {
  return future_horizon(*query.condition);
}

Duration future_horizon(const std::vector<Query>& queries) {
  Duration out = 0;
  for (const Query& q : queries) {
    out = std::max(out, future_horizon(q));
  }
  return out;
}

bool structurally_equal(const Mtgc& a, const Mtgc& b) {
  if (a.kind != b.kind || a.window != b.window) {
    return false;
  }
  switch (a.kind) {
    case Mtgc::Kind::Top:
      return true;
    case Mtgc::Kind::Exists:
      return a.pattern == b.pattern && structurally_equal(*a.child, *b.child);
    case Mtgc::Kind::Not:
      return structurally_equal(*a.child, *b.child);
    case Mtgc::Kind::And:
    case Mtgc::Kind::Until:
    case Mtgc::Kind::Since:
      return structurally_equal(*a.left, *b.left) &&
             structurally_equal(*a.right, *b.right);
  }
  return false;
}

namespace {

std::string window_text(const OperatorWindow& w) {
  return "<" + std::to_string(w.lower) + "," + std::to_string(w.upper) + ">";
}

bool is_top(const Mtgc& c) { return c.kind == Mtgc::Kind::Top; }

// Precedence: conjunction binds loosest, temporal operators next, prefix
// operators and atoms tightest.
std::string render_at(const Mtgc& c, int parent_level) {
  auto wrap = [&](const std::string& text, int level) {
    return level < parent_level ? "(" + text + ")" : text;
  };
  switch (c.kind) {
    case Mtgc::Kind::Top:
      return "TOP";
    case Mtgc::Kind::Exists:
      if (is_top(*c.child)) {
        return c.pattern.name;
      }
      return "(" + c.pattern.name + ", " + render_at(*c.child, 0) + ")";
    case Mtgc::Kind::Not:
      return "!" + render_at(*c.child, 2);
    case Mtgc::Kind::And:
      return wrap(render_at(*c.left, 0) + " & " + render_at(*c.right, 1), 0);
    case Mtgc::Kind::Until:
    case Mtgc::Kind::Since: {
      const char* op = c.kind == Mtgc::Kind::Until ? "U" : "S";
      if (is_top(*c.left)) {
        const char* sugar = c.kind == Mtgc::Kind::Until ? "E" : "O";
        return sugar + window_text(c.window) + " " + render_at(*c.right, 2);
      }
      return wrap(render_at(*c.left, 2) + " " + op + window_text(c.window) +
                      " " + render_at(*c.right, 2),
                  1);
    }
  }
  return "TOP";
}

}  // namespace

std::string render(const Mtgc& condition) { return render_at(condition, 0); }

std::string render_query(const Query& query) {
  return "query " + query.name + " = " + query.root_pattern.name + ", " +
         render(*query.condition);
}

namespace {

void validate_condition(const TypeGraph& types, const Mtgc& c,
                        std::vector<const Pattern*>& scope) {
  switch (c.kind) {
    case Mtgc::Kind::Top:
      return;
    case Mtgc::Kind::Exists: {
      validate_pattern(types, c.pattern);
      for (const auto& v : c.pattern.vertices) {
        if (!v.bound) {
          continue;
        }
        const PatternVertex* outer = nullptr;
        for (auto it = scope.rbegin(); it != scope.rend() && !outer; ++it) {
          outer = (*it)->find_vertex(v.name);
        }
        if (outer == nullptr) {
          throw std::invalid_argument("query: unbound pattern variable " +
                                      v.name + " in " + c.pattern.name);
        }
        if (outer->type != v.type) {
          throw std::invalid_argument("query: bound vertex " + v.name +
                                      " redeclared with different type");
        }
      }
      scope.push_back(&c.pattern);
      validate_condition(types, *c.child, scope);
      scope.pop_back();
      return;
    }
    case Mtgc::Kind::Not:
      validate_condition(types, *c.child, scope);
      return;
    case Mtgc::Kind::And:
    case Mtgc::Kind::Until:
    case Mtgc::Kind::Since:
      validate_condition(types, *c.left, scope);
      validate_condition(types, *c.right, scope);
      return;
  }
}

}  // namespace

void validate_query(const TypeGraph& types, const Query& query) {
  validate_pattern(types, query.root_pattern);
  for (const auto& v : query.root_pattern.vertices) {
    if (v.bound) {
      throw std::invalid_argument("query " + query.name +
                                  ": root pattern cannot bind outer vertices");
    }
  }
  std::vector<const Pattern*> scope{&query.root_pattern};
  validate_condition(types, *query.condition, scope);
}

}  // namespace tempoq
