#pragma once

#include <map>
#include <string>
#include <vector>

#include "basisc/ast.hpp"
#include "basisc/classical.hpp"

namespace basisc {

// A program after monomorphization: every dimension is a constant, captures
// are inlined, repeats are unrolled, and references point at specialized
// definitions by name.
struct SpecProgram {
    std::map<std::string, Definition> defs;
    std::string entry;

    const Definition &def(const std::string &name) const;
};

// A capture value being threaded through monomorphization: a concrete bit
// string, an integer awaiting a declared width, or a (possibly partially
// instantiated) function reference.
struct CapValue {
    enum class Kind { Bits, Int, Func, Embed };

    Kind kind = Kind::Bits;
    BitWord bits;
    long long int_value = 0; // Int: encoded once the capture width is known

    std::string base;     // Func: source definition name
    DimBindings bound;    // Func: bound dimension variables of `base`
    std::vector<CapValue> caps; // Func: capture arguments already supplied

    EmbedKind embed = EmbedKind::Xor; // Embed
    std::vector<CapValue> fns;        // Embed: forward [, inverse]

    std::string key() const;
};

struct MonoConfig {
    DimBindings sets;                          // --set NAME=value (entry dims)
    std::map<std::string, std::string> args;   // --arg name=fragment (entry captures)
    std::vector<double> phases;                // --phases schedule
};

SpecProgram monomorphize(const ProgramAst &p, const std::string &entry,
                         const MonoConfig &cfg);

// Specializes a classical definition directly (used by `eval`): binds leading
// captures from cfg.args, infers a single free width from the input length.
const Definition &specialize_classical_for_eval(SpecProgram &out, const ProgramAst &p,
                                                const std::string &fn,
                                                const MonoConfig &cfg,
                                                long long input_width);

// Resolves a standalone expression against a program's definitions (used by
// the `lower` subcommand and tests). Returns the specializations it pulled in
// plus the fully constant expression.
std::pair<SpecProgram, Expr> monomorphize_expression(const ProgramAst &p,
                                                     const Expr &e,
                                                     const MonoConfig &cfg);

// Checks every definition of a monomorphized program under the linear type
// system. Returns the signature of each definition.
std::map<std::string, TypeExpr> check_program(const SpecProgram &p,
                                              double tol = 1e-9);

// Types a standalone expression (no free variables) against a program.
TypeExpr check_expression(const SpecProgram &p, const Expr &e, double tol = 1e-9);

// Standalone judgment pieces (also used by tests).
long long check_basis(const BasisExprAst &b);                     // -> qubit count
void check_translation(const BasisExprAst &b1, const BasisExprAst &b2, double tol = 1e-9);
void check_measure(const BasisExprAst &b);

// Signature of a definition as a function type (params tensor -> return).
TypeExpr def_signature(const Definition &d);

} // namespace basisc
