#pragma once

#include <string>

#include "encpart/dsl/ast.hpp"

namespace encpart::dsl {

// Canonical source rendering. parse_program(print_program(p)) yields an AST
// equal to p up to source locations.
std::string print_program(const Program& program);
std::string print_class(const ClassDecl& cls);
std::string print_expr(const Expr& e);
std::string print_signature(const MethodDecl& m);

// Structural equality that ignores source locations.
bool same_program(const Program& a, const Program& b);

}  // namespace encpart::dsl
