#include "tempoq/query_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

namespace tempoq {

namespace {

struct Token {
  enum class Kind { Ident, Int, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t number = 0;
  int line = 1;
  int column = 1;
};

const std::set<std::string> kReservedNames = {
    "pattern", "query", "vertex", "edge", "bind",
    "forbid",  "TOP",   "U",      "S",    "E",
    "O"};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    current_ = Token{};
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::Kind::End;
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        take();
      }
      current_.kind = Token::Kind::Ident;
      current_.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        take();
      }
      current_.kind = Token::Kind::Int;
      current_.text = std::string(text_.substr(start, pos_ - start));
      current_.number = std::stoll(current_.text);
      return;
    }
    if (c == '"') {
      take();
      std::string value;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\n') {
          throw ParseError("unterminated string", current_.line,
                           current_.column);
        }
        value += text_[pos_];
        take();
      }
      if (pos_ >= text_.size()) {
        throw ParseError("unterminated string", current_.line, current_.column);
      }
      take();  // closing quote
      current_.kind = Token::Kind::String;
      current_.text = std::move(value);
      return;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      take();
      take();
      current_.kind = Token::Kind::Punct;
      current_.text = "->";
      return;
    }
    static const std::string kSingles = "{}()[]<>:;,=.!&";
    if (kSingles.find(c) != std::string::npos) {
      take();
      current_.kind = Token::Kind::Punct;
      current_.text = std::string(1, c);
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line_,
                     column_);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {  // comment to end of line
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          take();
        }
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  void take() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  QueryFile parse_file() {
    QueryFile out;
    while (lex_.peek().kind != Token::Kind::End) {
      Token t = lex_.peek();
      if (t.kind != Token::Kind::Ident) {
        throw ParseError("expected 'pattern' or 'query'", t.line, t.column);
      }
      if (t.text == "pattern") {
        Pattern p = parse_pattern();
        if (pattern_index_.count(p.name)) {
          throw ParseError("duplicate pattern " + p.name, t.line, t.column);
        }
        pattern_index_[p.name] = out.patterns.size();
        out.patterns.push_back(std::move(p));
        patterns_ = &out.patterns;
      } else if (t.text == "query") {
        patterns_ = &out.patterns;
        out.queries.push_back(parse_query_decl());
      } else {
        throw ParseError("expected 'pattern' or 'query'", t.line, t.column);
      }
    }
    return out;
  }

 private:
  Token expect_ident() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident) {
      throw ParseError("expected identifier", t.line, t.column);
    }
    return t;
  }

  Token expect_punct(const std::string& text) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Punct || t.text != text) {
      throw ParseError("expected '" + text + "'", t.line, t.column);
    }
    return t;
  }

  bool accept_punct(const std::string& text) {
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == text) {
      lex_.next();
      return true;
    }
    return false;
  }

  std::string expect_name() {
    Token t = expect_ident();
    if (kReservedNames.count(t.text)) {
      throw ParseError("'" + t.text + "' is reserved", t.line, t.column);
    }
    return t.text;
  }

  Pattern parse_pattern() {
    lex_.next();  // 'pattern'
    Pattern p;
    p.name = expect_name();
    expect_punct("{");
    parse_pattern_body(p, /*allow_nested=*/true);
    return p;
  }

  void parse_pattern_body(Pattern& p, bool allow_nested) {
    while (true) {
      Token t = lex_.next();
      if (t.kind == Token::Kind::Punct && t.text == "}") {
        break;
      }
      if (t.kind != Token::Kind::Ident) {
        throw ParseError("expected pattern item", t.line, t.column);
      }
      if (t.text == "vertex") {
        PatternVertex v;
        v.name = expect_name();
        expect_punct(":");
        v.type = expect_ident().text;
        if (accept_punct("[")) {
          while (true) {
            v.constraints.push_back(parse_constraint());
            if (accept_punct("]")) {
              break;
            }
            expect_punct(",");
          }
        }
        expect_punct(";");
        if (p.has_vertex(v.name)) {
          throw ParseError("duplicate vertex " + v.name, t.line, t.column);
        }
        p.vertices.push_back(std::move(v));
      } else if (t.text == "edge") {
        PatternEdge e;
        e.name = expect_name();
        expect_punct(":");
        e.type = expect_ident().text;
        expect_punct("(");
        e.source = expect_ident().text;
        expect_punct("->");
        e.target = expect_ident().text;
        expect_punct(")");
        expect_punct(";");
        p.edges.push_back(std::move(e));
      } else if (t.text == "bind") {
        if (!allow_nested) {
          throw ParseError("bind is not allowed inside forbid", t.line,
                           t.column);
        }
        while (true) {
          Token name = expect_ident();
          auto* v = const_cast<PatternVertex*>(p.find_vertex(name.text));
          if (v == nullptr) {
            throw ParseError("bind references undeclared vertex " + name.text,
                             name.line, name.column);
          }
          v->bound = true;
          if (accept_punct(";")) {
            break;
          }
          expect_punct(",");
        }
      } else if (t.text == "forbid") {
        if (!allow_nested) {
          throw ParseError("nested forbid is not allowed", t.line, t.column);
        }
        expect_punct("{");
        Pattern forbidden;
        forbidden.name = p.name + "!forbid" + std::to_string(p.forbids.size());
        parse_pattern_body(forbidden, /*allow_nested=*/false);
        p.forbids.push_back(std::move(forbidden));
      } else {
        throw ParseError("unknown pattern item '" + t.text + "'", t.line,
                         t.column);
      }
    }
  }

  AttrConstraint parse_constraint() {
    AttrConstraint c;
    c.attr = expect_ident().text;
    expect_punct("=");
    Token t = lex_.next();
    if (t.kind == Token::Kind::String) {
      c.kind = AttrConstraint::Kind::Const;
      c.value = t.text;
    } else if (t.kind == Token::Kind::Int) {
      c.kind = AttrConstraint::Kind::Const;
      c.value = t.number;
    } else if (t.kind == Token::Kind::Ident) {
      c.kind = AttrConstraint::Kind::Ref;
      c.ref_vertex = t.text;
      expect_punct(".");
      c.ref_attr = expect_ident().text;
    } else {
      throw ParseError("expected constant or vertex.attribute", t.line,
                       t.column);
    }
    return c;
  }

  Query parse_query_decl() {
    Token kw = lex_.next();  // 'query'
    Query q;
    q.name = expect_name();
    expect_punct("=");
    Token root = expect_ident();
    q.root_pattern = lookup_pattern(root);
    expect_punct(",");
    q.condition = parse_condition();
    for (const auto& v : q.root_pattern.vertices) {
      if (v.bound) {
        throw ParseError("root pattern " + q.root_pattern.name +
                             " cannot bind outer vertices",
                         kw.line, kw.column);
      }
    }
    elaborate_query(q, kw);
    return q;
  }

  const Pattern& lookup_pattern(const Token& name) {
    auto it = pattern_index_.find(name.text);
    if (it == pattern_index_.end()) {
      throw ParseError("unknown pattern " + name.text, name.line, name.column);
    }
    return (*patterns_)[it->second];
  }

  OperatorWindow parse_window() {
    expect_punct("<");
    Token lo = lex_.next();
    if (lo.kind != Token::Kind::Int) {
      throw ParseError("expected interval bound", lo.line, lo.column);
    }
    expect_punct(",");
    Token hi = lex_.next();
    if (hi.kind != Token::Kind::Int) {
      throw ParseError("expected interval bound", hi.line, hi.column);
    }
    expect_punct(">");
    if (lo.number > hi.number) {
      throw ParseError("empty interval", lo.line, lo.column);
    }
    return OperatorWindow{lo.number, hi.number};
  }

  // condition := temporal ('&' temporal)*
  MtgcPtr parse_condition() {
    MtgcPtr left = parse_temporal();
    while (accept_punct("&")) {
      left = Mtgc::conjunction(left, parse_temporal());
    }
    return left;
  }

  // temporal := unary [('U'|'S') window unary]   (non-associative)
  MtgcPtr parse_temporal() {
    MtgcPtr left = parse_unary();
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident && (t.text == "U" || t.text == "S")) {
      bool is_until = t.text == "U";
      lex_.next();
      OperatorWindow w = parse_window();
      MtgcPtr right = parse_unary();
      return is_until ? Mtgc::until(w, left, right)
                      : Mtgc::since(w, left, right);
    }
    return left;
  }

  MtgcPtr parse_unary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Punct && t.text == "!") {
      lex_.next();
      return Mtgc::negation(parse_unary());
    }
    if (t.kind == Token::Kind::Ident && (t.text == "E" || t.text == "O")) {
      bool is_eventually = t.text == "E";
      lex_.next();
      OperatorWindow w = parse_window();
      MtgcPtr child = parse_unary();
      return is_eventually ? Mtgc::eventually(w, child) : Mtgc::once(w, child);
    }
    return parse_atom();
  }

  MtgcPtr parse_atom() {
    Token t = lex_.next();
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "TOP") {
        return Mtgc::top();
      }
      return Mtgc::exists(lookup_pattern(t), Mtgc::top());
    }
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      // `(name, condition)` is a nested existential; a bare `(` opens
      // grouping. The comma after a leading identifier disambiguates.
      if (lex_.peek().kind == Token::Kind::Ident &&
          !kReservedNames.count(lex_.peek().text)) {
        Token name = lex_.next();
        if (accept_punct(",")) {
          const Pattern& p = lookup_pattern(name);
          MtgcPtr child = parse_condition();
          expect_punct(")");
          return Mtgc::exists(p, child);
        }
        MtgcPtr inner = continue_condition_after_ident(name);
        expect_punct(")");
        return inner;
      }
      MtgcPtr inner = parse_condition();
      expect_punct(")");
      return inner;
    }
    throw ParseError("expected condition", t.line, t.column);
  }

  // Grouped condition whose first token (a pattern reference) was already
  // consumed during disambiguation.
  MtgcPtr continue_condition_after_ident(const Token& name) {
    MtgcPtr left = Mtgc::exists(lookup_pattern(name), Mtgc::top());
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident && (t.text == "U" || t.text == "S")) {
      bool is_until = t.text == "U";
      lex_.next();
      OperatorWindow w = parse_window();
      MtgcPtr right = parse_unary();
      left = is_until ? Mtgc::until(w, left, right)
                      : Mtgc::since(w, left, right);
    }
    while (accept_punct("&")) {
      left = Mtgc::conjunction(left, parse_temporal());
    }
    return left;
  }

  // --- elaboration: thread vertices referenced across nesting levels
  // through intermediate patterns as implicit bound vertices ---

  void elaborate_query(Query& q, const Token& at) {
    std::vector<const Pattern*> scope{&q.root_pattern};
    std::set<std::string> used;
    q.condition = elaborate(q.condition, scope, used, at);
  }

  MtgcPtr elaborate(const MtgcPtr& c, std::vector<const Pattern*>& scope,
                    std::set<std::string>& used, const Token& at) {
    switch (c->kind) {
      case Mtgc::Kind::Top:
        return c;
      case Mtgc::Kind::Not: {
        return Mtgc::negation(elaborate(c->child, scope, used, at));
      }
      case Mtgc::Kind::And: {
        MtgcPtr l = elaborate(c->left, scope, used, at);
        MtgcPtr r = elaborate(c->right, scope, used, at);
        return Mtgc::conjunction(l, r);
      }
      case Mtgc::Kind::Until:
      case Mtgc::Kind::Since: {
        MtgcPtr l = elaborate(c->left, scope, used, at);
        MtgcPtr r = elaborate(c->right, scope, used, at);
        return c->kind == Mtgc::Kind::Until ? Mtgc::until(c->window, l, r)
                                            : Mtgc::since(c->window, l, r);
      }
      case Mtgc::Kind::Exists: {
        Pattern p = c->pattern;
        for (const auto& v : p.vertices) {
          if (v.bound) {
            const PatternVertex* outer = find_outer(v.name, scope);
            if (outer == nullptr) {
              throw ParseError("unbound pattern variable " + v.name + " in " +
                                   p.name,
                               at.line, at.column);
            }
            if (outer->type != v.type) {
              throw ParseError("bound vertex " + v.name +
                                   " redeclared with different type in " +
                                   p.name,
                               at.line, at.column);
            }
          }
        }
        scope.push_back(&c->pattern);
        std::set<std::string> child_used;
        MtgcPtr child = elaborate(c->child, scope, child_used, at);
        scope.pop_back();
        for (const auto& name : child_used) {
          if (p.has_vertex(name)) {
            continue;
          }
          const PatternVertex* outer = find_outer(name, scope);
          if (outer == nullptr) {
            throw ParseError("unbound pattern variable " + name, at.line,
                             at.column);
          }
          PatternVertex implicit;
          implicit.name = name;
          implicit.type = outer->type;
          implicit.bound = true;
          p.vertices.push_back(std::move(implicit));
        }
        for (const auto& v : p.vertices) {
          if (v.bound) {
            used.insert(v.name);
          }
        }
        return Mtgc::exists(std::move(p), child);
      }
    }
    return c;
  }

  static const PatternVertex* find_outer(
      const std::string& name, const std::vector<const Pattern*>& scope) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
      if (const PatternVertex* v = (*it)->find_vertex(name)) {
        return v;
      }
    }
    return nullptr;
  }

  Lexer lex_;
  std::map<std::string, std::size_t> pattern_index_;
  std::vector<Pattern>* patterns_ = nullptr;
};

}  // namespace

QueryFile parse_queries(std::string_view text) {
  Parser parser(text);
  return parser.parse_file();
}

Query parse_query(std::string_view text) {
  QueryFile file = parse_queries(text);
  if (file.queries.size() != 1) {
    throw std::invalid_argument("expected exactly one query, found " +
                                std::to_string(file.queries.size()));
  }
  return std::move(file.queries.front());
}

}  // namespace tempoq
