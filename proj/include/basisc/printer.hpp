#pragma once

#include <string>

#include "basisc/ast.hpp"

namespace basisc {

// Renders ASTs back to surface syntax. Output re-parses to a structurally
// equal tree (fully parenthesized where precedence could bite).
std::string print_expr(const Expr &e);
std::string print_basis(const BasisExprAst &b);
std::string print_classical(const ClassicalExpr &e);
std::string print_type(const TypeExpr &t);
std::string print_def(const Definition &d);
std::string print_program(const ProgramAst &p);

} // namespace basisc
