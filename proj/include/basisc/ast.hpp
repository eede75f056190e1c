#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "basisc/dims.hpp"

// Abstract syntax shared by every pass: types, quantum expressions, basis
// expressions, classical-function expressions, and top-level definitions.
// Nodes are plain value types; passes build new trees rather than mutating.

namespace basisc {

// ---------------------------------------------------------------------------
// Types

struct TypeExpr {
    enum class Kind { Qubit, Bit, Basis, Unit, Tensor, Pow, Func };

    Kind kind = Kind::Unit;
    std::vector<TypeExpr> elems; // Tensor: components; Pow: [base]; Func: [in, out]
    DimExpr dim;                 // Pow exponent
    bool reversible = false;     // Func

    TypeExpr() = default;
    static TypeExpr qubit();
    static TypeExpr bit();
    static TypeExpr basis();
    static TypeExpr unit();
    static TypeExpr tensor(std::vector<TypeExpr> es);
    static TypeExpr pow(TypeExpr base, DimExpr n);
    static TypeExpr func(TypeExpr in, TypeExpr out, bool rev);

    bool operator==(const TypeExpr &) const = default;

    bool is_func() const { return kind == Kind::Func; }
    std::string str() const;
};

// Flattens tensors (associativity), absorbs units, expands constant Pow
// nodes, and collapses singleton tensors. Idempotent.
TypeExpr normalize_type(const TypeExpr &t);
TypeExpr substitute_type(const TypeExpr &t, const DimBindings &b);

// True when the type holds a qubit as a tensor component (linear types).
// Qubits inside function signatures do not make the function linear.
bool type_is_linear(const TypeExpr &t);

// Counts of top-level components in a normalized tensor type. Throws on
// unresolved Pow nodes.
long long qubit_count(const TypeExpr &t);
long long bit_count(const TypeExpr &t);
long long basis_count(const TypeExpr &t);

TypeExpr qubits_type(long long n);
TypeExpr bits_type(long long n);

// ---------------------------------------------------------------------------
// Basis expressions

struct QubitSymbols {
    std::string syms;  // nonempty string over {0,1,+,-,i,j}
    DimExpr fold = DimExpr::constant(1);

    bool operator==(const QubitSymbols &) const = default;
};

struct BasisVectorAst {
    AngleExpr phase = AngleExpr::number(0.0); // e^{i*phase} factor
    QubitSymbols ql;
    Span span;

    bool operator==(const BasisVectorAst &) const = default;
};

struct BasisExprAst {
    enum class Kind {
        Std, Pm, Ij,
        Fourier,   // dim = qubit count
        Literal,   // vectors
        Tensor,    // sub
        Fold,      // sub[0], dim
        Reversed,  // sub[0]; internal (desugared .flip), never parsed
        Rotated,   // sub[0], phase; internal (desugared .rotate)
        Invalid,   // expression in basis position that is not a basis
    };

    Kind kind = Kind::Std;
    std::vector<BasisExprAst> sub;
    std::vector<BasisVectorAst> vectors;
    DimExpr dim;
    AngleExpr angle;
    Span span;

    bool operator==(const BasisExprAst &) const = default;
};

BasisExprAst substitute_basis(const BasisExprAst &b, const DimBindings &bind,
                              const std::vector<double> &phases);

// ---------------------------------------------------------------------------
// Quantum expressions

enum class BuiltinKind { Id, Discard, DiscardZ };
enum class SugarKind { Flip, Rotate, Prep };
enum class EmbedKind { Xor, Phase, InPlace };

struct Expr {
    enum class Kind {
        Apply,      // sub[0] = function, sub[1] = argument (input-first pipe)
        BuiltIn,    // builtin
        QubitLit,   // ql
        BitLit,     // bits
        Var,        // name
        Tensor,     // sub
        Fold,       // sub[0], dim
        Phase,      // angle, sub[0]
        BasisVal,   // basis (a basis expression used as a term)
        Translate,  // basis, basis2
        Measure,    // basis
        Pred,       // basis, sub[0] = reversible function
        Reverse,    // sub[0]
        Sugar,      // sugar; basis operand in `basis`, or value operand in sub[0]
        Embed,      // embed; sub[0] = classical fn ref, sub[1] = inverse ref (inplace)
        Instantiate,// name, inst_dims (nullopt = `...` hole)
        CallCaps,   // sub[0] = callee reference, sub[1..] = capture arguments
        Repeat,     // repeat_var, repeat_lo, repeat_hi, sub = pipeline stages
        Unit,
        FuncRef,    // name of a specialized definition (post-monomorphization)
    };

    Kind kind = Kind::Unit;
    Span span;

    std::vector<Expr> sub;
    BasisExprAst basis;
    BasisExprAst basis2;
    std::string name;
    QubitSymbols ql;
    std::vector<bool> bits;
    DimExpr dim;
    AngleExpr angle;
    std::vector<std::optional<DimExpr>> inst_dims;
    BuiltinKind builtin = BuiltinKind::Id;
    SugarKind sugar = SugarKind::Flip;
    EmbedKind embed = EmbedKind::Xor;
    std::string repeat_var;
    DimExpr repeat_lo, repeat_hi;
    bool from_repeat = false; // stage produced by unrolling a repeat

    bool operator==(const Expr &) const = default;

    static Expr make(Kind k, Span s = {});
};

// ---------------------------------------------------------------------------
// Classical expressions

struct ClassicalExpr {
    enum class Kind {
        InputRef,   // name
        Slice,      // sub[0], lo, hi  (half-open bit range, MSB first)
        BitConst,   // bits
        And, Or, Xor,  // sub[0], sub[1]
        Not,        // sub[0]
        Concat,     // sub
        RotL, RotR, // sub[0], lo = amount
        XorReduce, AndReduce, OrReduce, // sub[0]
        ZeroExtend, // sub[0], lo = target width
        EqConst,    // sub[0], bits
        MulConstMod,// sub[0], lo = c, hi = m
    };

    Kind kind = Kind::BitConst;
    Span span;
    std::vector<ClassicalExpr> sub;
    std::string name;
    std::vector<bool> bits;
    DimExpr lo, hi;

    bool operator==(const ClassicalExpr &) const = default;
};

ClassicalExpr substitute_classical(const ClassicalExpr &e, const DimBindings &b);

// ---------------------------------------------------------------------------
// Definitions and programs

struct Param {
    std::string name;
    TypeExpr type;
    Span span;
    bool operator==(const Param &) const = default;
};

struct Definition {
    enum class Kind { Quantum, Classical };

    Kind kind = Kind::Quantum;
    std::string name;
    bool reversible = false;
    std::vector<std::string> dim_vars;
    std::vector<Param> params;
    TypeExpr ret;
    Expr body;               // quantum kernels
    ClassicalExpr cbody;     // classical functions
    Span span;

    bool operator==(const Definition &) const = default;
};

struct ProgramAst {
    std::vector<Definition> defs;

    const Definition *find(const std::string &name) const;
    bool operator==(const ProgramAst &) const = default;
};

// ---------------------------------------------------------------------------
// Structural passes

// Flattens nested tensors, absorbs units, collapses singletons. Idempotent.
Expr normalize_tensors(const Expr &e);

// Replaces dimension variables throughout, evaluating folds, literal repeat
// counts, angles, and type dimensions to constants. `phases` feeds phases[i]
// references in angle positions.
Expr substitute_dims(const Expr &e, const DimBindings &b,
                     const std::vector<double> &phases = {});

} // namespace basisc
