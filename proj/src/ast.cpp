#include "basisc/ast.hpp"

#include <stdexcept>

namespace basisc {

// ---------------------------------------------------------------------------
// TypeExpr

TypeExpr TypeExpr::qubit() { TypeExpr t; t.kind = Kind::Qubit; return t; }
TypeExpr TypeExpr::bit() { TypeExpr t; t.kind = Kind::Bit; return t; }
TypeExpr TypeExpr::basis() { TypeExpr t; t.kind = Kind::Basis; return t; }
TypeExpr TypeExpr::unit() { TypeExpr t; t.kind = Kind::Unit; return t; }

TypeExpr TypeExpr::tensor(std::vector<TypeExpr> es) {
    TypeExpr t;
    t.kind = Kind::Tensor;
    t.elems = std::move(es);
    return t;
}

TypeExpr TypeExpr::pow(TypeExpr base, DimExpr n) {
    TypeExpr t;
    t.kind = Kind::Pow;
    t.elems.push_back(std::move(base));
    t.dim = std::move(n);
    return t;
}

TypeExpr TypeExpr::func(TypeExpr in, TypeExpr out, bool rev) {
    TypeExpr t;
    t.kind = Kind::Func;
    t.elems.push_back(std::move(in));
    t.elems.push_back(std::move(out));
    t.reversible = rev;
    return t;
}

std::string TypeExpr::str() const {
    switch (kind) {
    case Kind::Qubit: return "qubit";
    case Kind::Bit: return "bit";
    case Kind::Basis: return "basis";
    case Kind::Unit: return "()";
    case Kind::Pow:
        return elems[0].str() + "[" + dim.str() + "]";
    case Kind::Tensor: {
        std::string s = "(";
        for (size_t i = 0; i < elems.size(); i++) {
            if (i) s += ", ";
            s += elems[i].str();
        }
        return s + ")";
    }
    case Kind::Func:
        return elems[0].str() + (reversible ? " ->rev " : " -> ") + elems[1].str();
    }
    return "?";
}

TypeExpr normalize_type(const TypeExpr &t) {
    switch (t.kind) {
    case TypeExpr::Kind::Qubit:
    case TypeExpr::Kind::Bit:
    case TypeExpr::Kind::Basis:
    case TypeExpr::Kind::Unit:
        return t;
    case TypeExpr::Kind::Func: {
        TypeExpr out = t;
        out.elems[0] = normalize_type(t.elems[0]);
        out.elems[1] = normalize_type(t.elems[1]);
        return out;
    }
    case TypeExpr::Kind::Pow: {
        TypeExpr base = normalize_type(t.elems[0]);
        if (!t.dim.is_const()) {
            TypeExpr out = TypeExpr::pow(base, t.dim);
            return out;
        }
        DimValue n = t.dim.value;
        if (n < 0)
            throw TypeError("NegativeDim", "negative tensor power " + std::to_string(n));
        std::vector<TypeExpr> es;
        for (DimValue i = 0; i < n; i++)
            es.push_back(base);
        return normalize_type(TypeExpr::tensor(std::move(es)));
    }
    case TypeExpr::Kind::Tensor: {
        std::vector<TypeExpr> flat;
        for (const auto &e : t.elems) {
            TypeExpr n = normalize_type(e);
            if (n.kind == TypeExpr::Kind::Unit)
                continue;
            if (n.kind == TypeExpr::Kind::Tensor)
                flat.insert(flat.end(), n.elems.begin(), n.elems.end());
            else
                flat.push_back(std::move(n));
        }
        if (flat.empty())
            return TypeExpr::unit();
        if (flat.size() == 1)
            return flat[0];
        return TypeExpr::tensor(std::move(flat));
    }
    }
    throw std::logic_error("unreachable TypeExpr kind");
}

TypeExpr substitute_type(const TypeExpr &t, const DimBindings &b) {
    TypeExpr out = t;
    if (t.kind == TypeExpr::Kind::Pow)
        out.dim = t.dim.substitute(b);
    for (size_t i = 0; i < out.elems.size(); i++)
        out.elems[i] = substitute_type(t.elems[i], b);
    return out;
}

bool type_is_linear(const TypeExpr &t) {
    switch (t.kind) {
    case TypeExpr::Kind::Qubit:
        return true;
    case TypeExpr::Kind::Tensor:
    case TypeExpr::Kind::Pow: {
        for (const auto &e : t.elems)
            if (type_is_linear(e))
                return true;
        return false;
    }
    default:
        return false;
    }
}

namespace {

long long count_kind(const TypeExpr &t, TypeExpr::Kind k) {
    TypeExpr n = normalize_type(t);
    if (n.kind == k)
        return 1;
    if (n.kind == TypeExpr::Kind::Pow)
        throw TypeError("UnboundDimVar", "tensor power with unresolved dimension");
    if (n.kind != TypeExpr::Kind::Tensor)
        return 0;
    long long c = 0;
    for (const auto &e : n.elems)
        c += count_kind(e, k);
    return c;
}

} // namespace

long long qubit_count(const TypeExpr &t) { return count_kind(t, TypeExpr::Kind::Qubit); }
long long bit_count(const TypeExpr &t) { return count_kind(t, TypeExpr::Kind::Bit); }
long long basis_count(const TypeExpr &t) { return count_kind(t, TypeExpr::Kind::Basis); }

TypeExpr qubits_type(long long n) {
    return normalize_type(TypeExpr::pow(TypeExpr::qubit(), DimExpr::constant(n)));
}

TypeExpr bits_type(long long n) {
    return normalize_type(TypeExpr::pow(TypeExpr::bit(), DimExpr::constant(n)));
}

// ---------------------------------------------------------------------------
// Basis expressions

BasisExprAst substitute_basis(const BasisExprAst &b, const DimBindings &bind,
                              const std::vector<double> &phases) {
    BasisExprAst out = b;
    out.dim = b.dim.substitute(bind);
    out.angle = AngleExpr::number(b.angle.eval(bind, phases, b.span));
    for (auto &s : out.sub)
        s = substitute_basis(s, bind, phases);
    for (auto &v : out.vectors) {
        v.phase = AngleExpr::number(v.phase.eval(bind, phases, v.span));
        v.ql.fold = v.ql.fold.substitute(bind);
        if (v.ql.fold.is_const() && v.ql.fold.value < 0)
            throw TypeError("NegativeDim", "negative literal repeat", v.span);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::make(Kind k, Span s) {
    Expr e;
    e.kind = k;
    e.span = s;
    return e;
}

Expr normalize_tensors(const Expr &e) {
    Expr out = e;
    for (auto &s : out.sub)
        s = normalize_tensors(s);
    if (out.kind != Expr::Kind::Tensor)
        return out;
    std::vector<Expr> flat;
    for (auto &s : out.sub) {
        if (s.kind == Expr::Kind::Unit)
            continue;
        if (s.kind == Expr::Kind::Tensor)
            flat.insert(flat.end(), s.sub.begin(), s.sub.end());
        else
            flat.push_back(std::move(s));
    }
    if (flat.empty())
        return Expr::make(Expr::Kind::Unit, e.span);
    if (flat.size() == 1)
        return flat[0];
    out.sub = std::move(flat);
    return out;
}

Expr substitute_dims(const Expr &e, const DimBindings &b,
                     const std::vector<double> &phases) {
    Expr out = e;
    for (auto &s : out.sub)
        s = substitute_dims(s, b, phases);
    switch (e.kind) {
    case Expr::Kind::QubitLit: {
        out.ql.fold = DimExpr::constant(e.ql.fold.eval(b, e.span));
        if (out.ql.fold.value < 0)
            throw TypeError("NegativeDim", "negative literal repeat", e.span);
        break;
    }
    case Expr::Kind::Fold: {
        DimValue n = e.dim.eval(b, e.span);
        if (n < 0)
            throw TypeError("NegativeDim", "negative fold count", e.span);
        out.dim = DimExpr::constant(n);
        break;
    }
    case Expr::Kind::Phase:
        out.angle = AngleExpr::number(e.angle.eval(b, phases, e.span));
        break;
    case Expr::Kind::BasisVal:
    case Expr::Kind::Measure:
        out.basis = substitute_basis(e.basis, b, phases);
        break;
    case Expr::Kind::Translate:
        out.basis = substitute_basis(e.basis, b, phases);
        out.basis2 = substitute_basis(e.basis2, b, phases);
        break;
    case Expr::Kind::Pred:
        out.basis = substitute_basis(e.basis, b, phases);
        break;
    case Expr::Kind::Sugar:
        if (e.sugar != SugarKind::Prep)
            out.basis = substitute_basis(e.basis, b, phases);
        if (e.sugar == SugarKind::Rotate)
            out.angle = AngleExpr::number(e.angle.eval(b, phases, e.span));
        break;
    case Expr::Kind::Instantiate:
        for (auto &d : out.inst_dims)
            if (d)
                *d = d->substitute(b);
        break;
    case Expr::Kind::Repeat:
        out.repeat_lo = DimExpr::constant(e.repeat_lo.eval(b, e.span));
        out.repeat_hi = DimExpr::constant(e.repeat_hi.eval(b, e.span));
        break;
    default:
        break;
    }
    return out;
}

ClassicalExpr substitute_classical(const ClassicalExpr &e, const DimBindings &b) {
    ClassicalExpr out = e;
    for (auto &s : out.sub)
        s = substitute_classical(s, b);
    switch (e.kind) {
    case ClassicalExpr::Kind::MulConstMod: {
        // The multiplier constant is only ever used modulo the modulus, so
        // fold it with modular arithmetic; x^(2^j) stays in range.
        out.hi = e.hi.substitute(b);
        std::vector<std::string> vars;
        e.lo.free_vars(vars);
        bool all_bound = true;
        for (const auto &v : vars)
            all_bound = all_bound && b.count(v);
        if (out.hi.is_const() && all_bound)
            out.lo = DimExpr::constant(e.lo.eval(b, e.span, out.hi.value));
        break;
    }
    case ClassicalExpr::Kind::Slice:
        out.lo = e.lo.substitute(b);
        out.hi = e.hi.substitute(b);
        break;
    case ClassicalExpr::Kind::RotL:
    case ClassicalExpr::Kind::RotR:
    case ClassicalExpr::Kind::ZeroExtend:
        out.lo = e.lo.substitute(b);
        break;
    default:
        break;
    }
    return out;
}

const Definition *ProgramAst::find(const std::string &name) const {
    for (const auto &d : defs)
        if (d.name == name)
            return &d;
    return nullptr;
}

} // namespace basisc
