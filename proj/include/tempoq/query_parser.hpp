#ifndef TEMPOQ_QUERY_PARSER_HPP
#define TEMPOQ_QUERY_PARSER_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tempoq/mtgc.hpp"

namespace tempoq {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(message + " at line " + std::to_string(line) +
                           ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct QueryFile {
  std::vector<Pattern> patterns;
  std::vector<Query> queries;
};

/// Parses pattern and query declarations. Patterns must be declared before
/// use. Nested conditions on referenced patterns use the `(name, condition)`
/// form; a bare pattern name abbreviates `(name, TOP)`. Queries come back
/// fully resolved: pattern references are inlined and vertices referenced
/// across nesting levels are threaded through intermediate patterns as bound
/// vertices.
QueryFile parse_queries(std::string_view text);

/// Convenience for files holding exactly one query.
Query parse_query(std::string_view text);

}  // namespace tempoq

#endif  // TEMPOQ_QUERY_PARSER_HPP
