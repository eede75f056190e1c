#include "basisc/dims.hpp"

#include <cmath>
#include <stdexcept>

namespace basisc {

std::string span_str(const Span &s) {
    if (!s.known())
        return "<unknown>";
    return std::to_string(s.line) + ":" + std::to_string(s.col);
}

DimExpr DimExpr::constant(DimValue v) {
    DimExpr e;
    e.kind = Kind::Const;
    e.value = v;
    return e;
}

DimExpr DimExpr::var(std::string n) {
    DimExpr e;
    e.kind = Kind::Var;
    e.name = std::move(n);
    return e;
}

DimExpr DimExpr::binary(Kind k, DimExpr lhs, DimExpr rhs) {
    DimExpr e;
    e.kind = k;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

void DimExpr::free_vars(std::vector<std::string> &out) const {
    if (kind == Kind::Var) {
        out.push_back(name);
        return;
    }
    for (const auto &a : args)
        a.free_vars(out);
}

namespace {

DimValue mod_reduce(DimValue v, std::optional<DimValue> m) {
    if (!m)
        return v;
    DimValue r = v % *m;
    if (r < 0)
        r += *m;
    return r;
}

DimValue pow_ll(DimValue base, DimValue exp, std::optional<DimValue> m, Span span) {
    if (exp < 0)
        throw TypeError("NegativeDim", "negative exponent in dimension expression", span);
    DimValue result = 1;
    DimValue b = m ? mod_reduce(base, m) : base;
    while (exp > 0) {
        if (exp & 1) {
            result = result * b;
            if (m)
                result = mod_reduce(result, m);
            else if (result < 0 || result > (1LL << 40))
                throw TypeError("NegativeDim", "dimension power overflows", span);
        }
        exp >>= 1;
        if (exp == 0)
            break;
        b = b * b;
        if (m)
            b = mod_reduce(b, m);
        else if (b < 0 || b > (1LL << 40))
            throw TypeError("NegativeDim", "dimension power overflows", span);
    }
    return result;
}

} // namespace

DimValue DimExpr::eval(const DimBindings &b, Span span,
                       std::optional<DimValue> modulus) const {
    switch (kind) {
    case Kind::Const:
        return value;
    case Kind::Var: {
        auto it = b.find(name);
        if (it == b.end())
            throw TypeError("UnboundDimVar", "dimension variable '" + name + "' is not bound", span);
        return it->second;
    }
    case Kind::Add:
        return mod_reduce(args[0].eval(b, span, modulus) + args[1].eval(b, span, modulus), modulus);
    case Kind::Sub: {
        DimValue v = args[0].eval(b, span, modulus) - args[1].eval(b, span, modulus);
        return mod_reduce(v, modulus);
    }
    case Kind::Mul:
        return mod_reduce(args[0].eval(b, span, modulus) * args[1].eval(b, span, modulus), modulus);
    case Kind::Div: {
        DimValue d = args[1].eval(b, span);
        if (d == 0)
            throw TypeError("NegativeDim", "division by zero in dimension expression", span);
        return args[0].eval(b, span) / d;
    }
    case Kind::Pow:
        // Exponents are evaluated without the modulus: x^(2^J) mod m needs
        // the true exponent.
        return pow_ll(args[0].eval(b, span, modulus), args[1].eval(b, span), modulus, span);
    }
    throw std::logic_error("unreachable DimExpr kind");
}

DimExpr DimExpr::substitute(const DimBindings &b) const {
    switch (kind) {
    case Kind::Const:
        return *this;
    case Kind::Var: {
        auto it = b.find(name);
        if (it != b.end())
            return constant(it->second);
        return *this;
    }
    default: {
        DimExpr out = *this;
        for (auto &a : out.args)
            a = a.substitute(b);
        if (out.args[0].is_const() && out.args[1].is_const())
            return constant(out.eval({}, {}));
        return out;
    }
    }
}

std::string DimExpr::str() const {
    switch (kind) {
    case Kind::Const:
        return std::to_string(value);
    case Kind::Var:
        return name;
    case Kind::Add:
        return "(" + args[0].str() + " + " + args[1].str() + ")";
    case Kind::Sub:
        return "(" + args[0].str() + " - " + args[1].str() + ")";
    case Kind::Mul:
        return "(" + args[0].str() + " * " + args[1].str() + ")";
    case Kind::Div:
        return "(" + args[0].str() + " / " + args[1].str() + ")";
    case Kind::Pow:
        return "(" + args[0].str() + " ^ " + args[1].str() + ")";
    }
    return "?";
}

AngleExpr AngleExpr::number(double v) {
    AngleExpr a;
    a.kind = Kind::Num;
    a.num = v;
    return a;
}

AngleExpr AngleExpr::pi() {
    AngleExpr a;
    a.kind = Kind::Pi;
    return a;
}

AngleExpr AngleExpr::of_dim(DimExpr d) {
    AngleExpr a;
    a.kind = Kind::Dim;
    a.dim = std::move(d);
    return a;
}

AngleExpr AngleExpr::phase_ref(DimExpr idx) {
    AngleExpr a;
    a.kind = Kind::PhaseRef;
    a.dim = std::move(idx);
    return a;
}

AngleExpr AngleExpr::unary(Kind k, AngleExpr sub) {
    AngleExpr a;
    a.kind = k;
    a.args.push_back(std::move(sub));
    return a;
}

AngleExpr AngleExpr::binary(Kind k, AngleExpr lhs, AngleExpr rhs) {
    AngleExpr a;
    a.kind = k;
    a.args.push_back(std::move(lhs));
    a.args.push_back(std::move(rhs));
    return a;
}

double AngleExpr::eval(const DimBindings &b, const std::vector<double> &phases,
                       Span span) const {
    switch (kind) {
    case Kind::Num:
        return num;
    case Kind::Pi:
        return 3.14159265358979323846;
    case Kind::Dim:
        return static_cast<double>(dim.eval(b, span));
    case Kind::PhaseRef: {
        DimValue i = dim.eval(b, span);
        if (i < 0 || static_cast<size_t>(i) >= phases.size())
            throw TypeError("UnboundDimVar",
                            "phase schedule index " + std::to_string(i) +
                                " out of range (schedule has " +
                                std::to_string(phases.size()) + " entries)",
                            span);
        return phases[static_cast<size_t>(i)];
    }
    case Kind::Neg:
        return -args[0].eval(b, phases, span);
    case Kind::Add:
        return args[0].eval(b, phases, span) + args[1].eval(b, phases, span);
    case Kind::Sub:
        return args[0].eval(b, phases, span) - args[1].eval(b, phases, span);
    case Kind::Mul:
        return args[0].eval(b, phases, span) * args[1].eval(b, phases, span);
    case Kind::Div:
        return args[0].eval(b, phases, span) / args[1].eval(b, phases, span);
    case Kind::Pow:
        return std::pow(args[0].eval(b, phases, span), args[1].eval(b, phases, span));
    }
    throw std::logic_error("unreachable AngleExpr kind");
}

AngleExpr AngleExpr::substitute(const DimBindings &b) const {
    AngleExpr out = *this;
    if (kind == Kind::Dim || kind == Kind::PhaseRef)
        out.dim = dim.substitute(b);
    for (auto &a : out.args)
        a = a.substitute(b);
    return out;
}

std::string AngleExpr::str() const {
    char buf[64];
    switch (kind) {
    case Kind::Num:
        snprintf(buf, sizeof buf, "%.17g", num);
        return buf;
    case Kind::Pi:
        return "pi";
    case Kind::Dim:
        return dim.str();
    case Kind::PhaseRef:
        return "phases[" + dim.str() + "]";
    case Kind::Neg:
        return "(-" + args[0].str() + ")";
    case Kind::Add:
        return "(" + args[0].str() + " + " + args[1].str() + ")";
    case Kind::Sub:
        return "(" + args[0].str() + " - " + args[1].str() + ")";
    case Kind::Mul:
        return "(" + args[0].str() + " * " + args[1].str() + ")";
    case Kind::Div:
        return "(" + args[0].str() + " / " + args[1].str() + ")";
    case Kind::Pow:
        return "(" + args[0].str() + " ^ " + args[1].str() + ")";
    }
    return "?";
}

} // namespace basisc
