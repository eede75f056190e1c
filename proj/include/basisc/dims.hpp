#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "basisc/diag.hpp"

namespace basisc {

using DimValue = long long;
using DimBindings = std::map<std::string, DimValue>;

// Integer dimension expression: constants, dimension variables, and the
// arithmetic the surface language needs (+, -, *, integer power, floor
// division). Evaluates to a non-negative integer once all variables are bound.
struct DimExpr {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow };

    Kind kind = Kind::Const;
    DimValue value = 0;          // Const
    std::string name;            // Var
    std::vector<DimExpr> args;   // binary ops: args[0], args[1]

    DimExpr() = default;
    static DimExpr constant(DimValue v);
    static DimExpr var(std::string n);
    static DimExpr binary(Kind k, DimExpr lhs, DimExpr rhs);

    bool is_const() const { return kind == Kind::Const; }
    bool operator==(const DimExpr &) const = default;

    // Collects free variable names into `out` (deduplicated by the caller).
    void free_vars(std::vector<std::string> &out) const;

    // Evaluates with all variables bound. Throws TypeError UnboundDimVar if a
    // variable is missing and NegativeDim if the result (or any exponent)
    // drops below zero. With `modulus` set, sums/products/powers are reduced
    // mod `modulus` (used for modular-multiplier constants, where the value is
    // only ever consumed modulo m).
    DimValue eval(const DimBindings &b, Span span = {},
                  std::optional<DimValue> modulus = std::nullopt) const;

    // Substitutes bound variables, folding to Const where possible.
    DimExpr substitute(const DimBindings &b) const;

    std::string str() const;
};

// Real-valued angle expression (radians). Appears in phase(theta)* and
// .rotate(theta); may reference dimension variables and the phase-schedule
// array `phases[i]` supplied at run time.
struct AngleExpr {
    enum class Kind { Num, Pi, Dim, PhaseRef, Neg, Add, Sub, Mul, Div, Pow };

    Kind kind = Kind::Num;
    double num = 0.0;             // Num
    DimExpr dim;                  // Dim (a dimension expression), PhaseRef index
    std::vector<AngleExpr> args;  // unary/binary operands

    AngleExpr() = default;
    static AngleExpr number(double v);
    static AngleExpr pi();
    static AngleExpr of_dim(DimExpr d);
    static AngleExpr phase_ref(DimExpr idx);
    static AngleExpr unary(Kind k, AngleExpr a);
    static AngleExpr binary(Kind k, AngleExpr lhs, AngleExpr rhs);

    bool operator==(const AngleExpr &) const = default;

    double eval(const DimBindings &b, const std::vector<double> &phases,
                Span span = {}) const;
    AngleExpr substitute(const DimBindings &b) const;
    std::string str() const;
};

} // namespace basisc
