#pragma once

#include <string>
#include <vector>

#include "encpart/dsl/ast.hpp"
#include "encpart/dsl/check.hpp"

namespace encpart::dsl {

struct Violation {
  Rule rule = Rule::TypeError;
  std::string class_name;
  std::string method;  // empty for class-level findings
  SourceLoc loc;
  std::string message;
};

// "RULE Class.method at L:C: message"
std::string format_violation(const Violation& v);

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Rule rule) const;
};

// Pure: the report depends only on the program.
ValidationReport validate(const Program& program);

}  // namespace encpart::dsl
