#ifndef TEMPOQ_MTGC_HPP
#define TEMPOQ_MTGC_HPP

#include <memory>
#include <string>

#include "tempoq/interval.hpp"
#include "tempoq/pattern.hpp"

namespace tempoq {

/// Closed finite interval attached to a temporal operator.
struct OperatorWindow {
  Duration lower = 0;
  Duration upper = 0;

  friend bool operator==(const OperatorWindow&, const OperatorWindow&) = default;
};

struct Mtgc;
using MtgcPtr = std::shared_ptr<const Mtgc>;

/// Metric temporal graph condition. Eventually and once are sugar over
/// until/since with a true left operand and are desugared at construction.
struct Mtgc {
  enum class Kind { Top, Exists, Not, And, Until, Since };

  Kind kind = Kind::Top;
  Pattern pattern;      // Exists
  MtgcPtr child;        // Exists, Not
  MtgcPtr left, right;  // And, Until, Since
  OperatorWindow window;  // Until, Since

  static MtgcPtr top();
  static MtgcPtr exists(Pattern pattern, MtgcPtr child);
  static MtgcPtr negation(MtgcPtr child);
  static MtgcPtr conjunction(MtgcPtr left, MtgcPtr right);
  static MtgcPtr until(OperatorWindow window, MtgcPtr left, MtgcPtr right);
  static MtgcPtr since(OperatorWindow window, MtgcPtr left, MtgcPtr right);
  static MtgcPtr eventually(OperatorWindow window, MtgcPtr child);
  static MtgcPtr once(OperatorWindow window, MtgcPtr child);
};

struct Query {
  std::string name;
  Pattern root_pattern;
  MtgcPtr condition;
};

/// Upper bound on how long after its deletion an element can still affect
/// the condition's result: until/since add their window's upper bound,
/// conjunction takes the max, negation and nesting pass through.
Duration cutoff(const Mtgc& condition);
Duration cutoff(const Query& query);
Duration cutoff(const std::vector<Query>& queries);  // max over all

/// Like cutoff, but only future operators (until) contribute: the number of
/// time units after t by which every event affecting satisfaction at t has
/// arrived.
Duration future_horizon(const Mtgc& condition);
Duration future_horizon(const Query& query);
Duration future_horizon(const std::vector<Query>& queries);

bool structurally_equal(const Mtgc& a, const Mtgc& b);

/// Condition in the concrete query syntax; inverse of the parser.
std::string render(const Mtgc& condition);
std::string render_query(const Query& query);

void validate_query(const TypeGraph& types, const Query& query);

}  // namespace tempoq

#endif  // TEMPOQ_MTGC_HPP
