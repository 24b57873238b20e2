#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "tempoq/mtgc.hpp"
#include "tempoq/query_parser.hpp"
#include "tempoq/shs.hpp"

using namespace tempoq;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(TEMPOQ_FIXTURE_DIR) + "/" + rel;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

QueryFile shs_queries() { return parse_queries(slurp(fixture("shs/queries.tq"))); }

}  // namespace

TEST_CASE("parsing the guideline queries") {
  QueryFile file = shs_queries();
  REQUIRE(file.queries.size() == 2);
  const Query& phi1 = file.queries[0];
  const Query& phi2 = file.queries[1];

  // phi1 = p1, !(E<0,3600> p1_2): a negated eventually, i.e. a negated
  // until with a true left operand.
  CHECK(phi1.root_pattern.name == "p1");
  REQUIRE(phi1.condition->kind == Mtgc::Kind::Not);
  const Mtgc& ev = *phi1.condition->child;
  REQUIRE(ev.kind == Mtgc::Kind::Until);
  CHECK(ev.window == OperatorWindow{0, 3600});
  CHECK(ev.left->kind == Mtgc::Kind::Top);
  REQUIRE(ev.right->kind == Mtgc::Kind::Exists);
  CHECK(ev.right->pattern.name == "p1_2");
  CHECK(ev.right->child->kind == Mtgc::Kind::Top);

  // phi2 = p1, !(!p1_1 U<0,3600> p1_2)
  REQUIRE(phi2.condition->kind == Mtgc::Kind::Not);
  const Mtgc& until = *phi2.condition->child;
  REQUIRE(until.kind == Mtgc::Kind::Until);
  REQUIRE(until.left->kind == Mtgc::Kind::Not);
  CHECK(until.left->child->pattern.name == "p1_1");
  CHECK(until.right->pattern.name == "p1_2");

  validate_query(shs::default_type_graph(), phi1);
  validate_query(shs::default_type_graph(), phi2);
}

TEST_CASE("parsing the running example query") {
  QueryFile file = parse_queries(slurp(fixture("worked_example/queries.tq")));
  REQUIRE(file.queries.size() == 1);
  const Query& zeta = file.queries[0];
  CHECK(zeta.root_pattern.name == "n1");
  REQUIRE(zeta.condition->kind == Mtgc::Kind::Until);
  CHECK(zeta.condition->window == OperatorWindow{0, 2});
  CHECK(zeta.condition->left->pattern.name == "n1_1");
  CHECK(zeta.condition->right->pattern.name == "n1_2");
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_queries("pattern p { vertex ; }"), ParseError);
  try {
    parse_queries("pattern p {\n  vertex x X;\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  // unbound pattern variable
  CHECK_THROWS_AS(
      parse_queries("pattern a { vertex x: X; }\n"
                    "pattern b { vertex y: Y; bind y; }\n"
                    "query q = a, b"),
      ParseError);
  // empty operator interval
  CHECK_THROWS_AS(parse_queries("pattern a { vertex x: X; }\n"
                                "query q = a, E<5,3> a"),
                  ParseError);
  // unknown pattern reference
  CHECK_THROWS_AS(parse_queries("pattern a { vertex x: X; }\nquery q = a, zz"),
                  ParseError);
}

TEST_CASE("cut-off recursion") {
  QueryFile shs = shs_queries();
  QueryFile we = parse_queries(slurp(fixture("worked_example/queries.tq")));
  CHECK(cutoff(we.queries[0]) == 2);      // running example
  CHECK(cutoff(shs.queries[0]) == 3600);  // phi1
  CHECK(cutoff(shs.queries[1]) == 3600);  // phi2
  CHECK(cutoff(*Mtgc::top()) == 0);
  CHECK(cutoff(shs.queries) == 3600);

  // nesting accumulates upper bounds along a branch
  Pattern a;
  a.name = "a";
  MtgcPtr nested = Mtgc::until(
      {1, 5}, Mtgc::top(),
      Mtgc::since({2, 7}, Mtgc::top(), Mtgc::exists(a, Mtgc::top())));
  CHECK(cutoff(*nested) == 12);
  CHECK(cutoff(*Mtgc::conjunction(nested, Mtgc::top())) == 12);
  CHECK(cutoff(*Mtgc::negation(nested)) == 12);
}

TEST_CASE("future horizon counts only forward operators") {
  QueryFile shs = shs_queries();
  QueryFile we = parse_queries(slurp(fixture("worked_example/queries.tq")));
  CHECK(future_horizon(shs.queries[0]) == 3600);  // phi1
  CHECK(future_horizon(shs.queries[1]) == 3600);  // phi2
  CHECK(future_horizon(we.queries[0]) == 2);      // zeta

  Pattern a;
  a.name = "a";
  MtgcPtr past_only = Mtgc::once({0, 100}, Mtgc::exists(a, Mtgc::top()));
  CHECK(future_horizon(*past_only) == 0);
  CHECK(cutoff(*past_only) == 100);

  MtgcPtr mixed = Mtgc::until(
      {0, 10}, Mtgc::top(),
      Mtgc::since({0, 50}, Mtgc::top(), Mtgc::exists(a, Mtgc::top())));
  CHECK(future_horizon(*mixed) == 10);
  CHECK(cutoff(*mixed) == 60);
}

TEST_CASE("cut-off dominates the future horizon") {
  std::mt19937_64 rng(11);
  Pattern a;
  a.name = "a";
  std::function<MtgcPtr(int)> gen = [&](int depth) -> MtgcPtr {
    if (depth == 0 || rng() % 4 == 0) {
      return rng() % 2 == 0 ? Mtgc::top() : Mtgc::exists(a, Mtgc::top());
    }
    switch (rng() % 4) {
      case 0:
        return Mtgc::negation(gen(depth - 1));
      case 1:
        return Mtgc::conjunction(gen(depth - 1), gen(depth - 1));
      case 2: {
        Duration lo = static_cast<Duration>(rng() % 5);
        return Mtgc::until({lo, lo + static_cast<Duration>(rng() % 10)},
                           gen(depth - 1), gen(depth - 1));
      }
      default: {
        Duration lo = static_cast<Duration>(rng() % 5);
        return Mtgc::since({lo, lo + static_cast<Duration>(rng() % 10)},
                           gen(depth - 1), gen(depth - 1));
      }
    }
  };
  for (int i = 0; i < 500; ++i) {
    MtgcPtr c = gen(4);
    CHECK(cutoff(*c) >= future_horizon(*c));
    CHECK(future_horizon(*c) >= 0);
    CHECK(cutoff(*Mtgc::negation(Mtgc::negation(c))) == cutoff(*c));
    MtgcPtr d = gen(3);
    CHECK(cutoff(*Mtgc::conjunction(c, d)) ==
          cutoff(*Mtgc::conjunction(d, c)));
  }
}

TEST_CASE("render and reparse round trip") {
  const char* files[] = {"shs/queries.tq", "worked_example/queries.tq"};
  for (const char* rel : files) {
    std::string text = slurp(fixture(rel));
    QueryFile file = parse_queries(text);
    std::string patterns = text.substr(0, text.find("query"));
    for (const Query& q : file.queries) {
      std::string rendered = patterns + render_query(q) + "\n";
      QueryFile again = parse_queries(rendered);
      REQUIRE(again.queries.size() == 1);
      CHECK(again.queries[0].name == q.name);
      CHECK(again.queries[0].root_pattern == q.root_pattern);
      CHECK(structurally_equal(*again.queries[0].condition, *q.condition));
    }
  }
}

TEST_CASE("nested existentials with explicit conditions") {
  std::string text =
      "pattern a { vertex x: X; }\n"
      "pattern b { vertex x: X; vertex y: Y; edge e: xy(x -> y); bind x; }\n"
      "pattern c { vertex y: Y; bind y; }\n"
      "query q = a, (b, E<0,5> c)\n";
  QueryFile file = parse_queries(text);
  const Query& q = file.queries[0];
  REQUIRE(q.condition->kind == Mtgc::Kind::Exists);
  CHECK(q.condition->pattern.name == "b");
  REQUIRE(q.condition->child->kind == Mtgc::Kind::Until);
  CHECK(render(*q.condition) == "(b, E<0,5> c)");
}

TEST_CASE("variables referenced across levels are threaded through") {
  // c binds x from the root; the intermediate pattern b must carry x so the
  // network can group by it.
  std::string text =
      "pattern a { vertex x: X; }\n"
      "pattern b { vertex y: Y; }\n"
      "pattern c { vertex x: X; vertex z: Y; bind x; }\n"
      "query q = a, (b, !c)\n";
  QueryFile file = parse_queries(text);
  const Query& q = file.queries[0];
  REQUIRE(q.condition->kind == Mtgc::Kind::Exists);
  const Pattern& b = q.condition->pattern;
  REQUIRE(b.vertices.size() == 2);
  CHECK(b.vertices[1].name == "x");
  CHECK(b.vertices[1].type == "X");
  CHECK(b.vertices[1].bound);
}
