#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "encpart/dsl/ast.hpp"

namespace encpart::dsl {

enum class ParseErrorKind { Syntax, DuplicateClass, DuplicateMethod, DuplicateField };

std::string_view to_string(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, SourceLoc loc, const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  SourceLoc loc() const { return loc_; }

 private:
  ParseErrorKind kind_;
  SourceLoc loc_;
};

// Parses a whole `.ep` source. Never crashes on malformed input: every
// failure is a ParseError carrying the 1-based line and column.
Program parse_program(std::string_view source);

// Parses a standalone type such as `list<Account>`; used by the image codec.
TypeRef parse_type(std::string_view text);

}  // namespace encpart::dsl
