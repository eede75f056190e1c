#pragma once

#include <string>

#include "basisc/ast.hpp"
#include "basisc/lexer.hpp"

namespace basisc {

ProgramAst parse(const std::vector<Token> &tokens);
ProgramAst parse_source(const std::string &source);
ProgramAst parse_file(const std::string &path);

// Parses a single pipeline expression (used by `lower` and --arg fragments).
Expr parse_expression(const std::string &source);

// Converts an expression in basis position into a basis expression. Returns
// Kind::Invalid carrying the span when the expression cannot denote a basis.
BasisExprAst expr_to_basis(const Expr &e);

} // namespace basisc
