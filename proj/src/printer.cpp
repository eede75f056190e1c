#include "basisc/printer.hpp"

#include <sstream>
#include <stdexcept>

namespace basisc {

namespace {

std::string angle_src(const AngleExpr &a) { return a.str(); }

std::string bits_src(const std::vector<bool> &bits) {
    std::string s = "0b";
    for (bool b : bits)
        s += b ? '1' : '0';
    return s;
}

std::string vector_src(const BasisVectorAst &v) {
    std::string s;
    if (!(v.phase == AngleExpr::number(0.0)))
        s += "phase(" + angle_src(v.phase) + ")*";
    s += "'" + v.ql.syms + "'";
    if (!(v.ql.fold == DimExpr::constant(1)))
        s += "[" + v.ql.fold.str() + "]";
    return s;
}

} // namespace

std::string print_basis(const BasisExprAst &b) {
    switch (b.kind) {
    case BasisExprAst::Kind::Std: return "std";
    case BasisExprAst::Kind::Pm: return "pm";
    case BasisExprAst::Kind::Ij: return "ij";
    case BasisExprAst::Kind::Fourier:
        return "fourier[" + b.dim.str() + "]";
    case BasisExprAst::Kind::Literal: {
        std::string s = "{";
        for (size_t i = 0; i < b.vectors.size(); i++) {
            if (i) s += ", ";
            s += vector_src(b.vectors[i]);
        }
        return s + "}";
    }
    case BasisExprAst::Kind::Tensor: {
        std::string s = "(";
        for (size_t i = 0; i < b.sub.size(); i++) {
            if (i) s += " + ";
            s += print_basis(b.sub[i]);
        }
        return s + ")";
    }
    case BasisExprAst::Kind::Fold:
        return "(" + print_basis(b.sub[0]) + ")[" + b.dim.str() + "]";
    case BasisExprAst::Kind::Reversed:
        // Internal (desugared) forms: printable for diagnostics, not surface
        // syntax. Parsed programs never contain them.
        return "<reversed " + print_basis(b.sub[0]) + ">";
    case BasisExprAst::Kind::Rotated:
        return "<rotated " + angle_src(b.angle) + " " + print_basis(b.sub[0]) + ">";
    case BasisExprAst::Kind::Invalid:
        return "<invalid-basis>";
    }
    return "?";
}

std::string print_expr(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Apply:
        return "(" + print_expr(e.sub[1]) + " | " + print_expr(e.sub[0]) + ")";
    case Expr::Kind::BuiltIn:
        return e.builtin == BuiltinKind::Id        ? "id"
               : e.builtin == BuiltinKind::Discard ? "discard"
                                                   : "discardz";
    case Expr::Kind::QubitLit: {
        std::string s = "'" + e.ql.syms + "'";
        if (!(e.ql.fold == DimExpr::constant(1)))
            s += "[" + e.ql.fold.str() + "]";
        return s;
    }
    case Expr::Kind::BitLit:
        return bits_src(e.bits);
    case Expr::Kind::Var:
        return e.name;
    case Expr::Kind::Tensor: {
        std::string s = "(";
        for (size_t i = 0; i < e.sub.size(); i++) {
            if (i) s += " + ";
            s += print_expr(e.sub[i]);
        }
        return s + ")";
    }
    case Expr::Kind::Fold:
        return "(" + print_expr(e.sub[0]) + ")[" + e.dim.str() + "]";
    case Expr::Kind::Phase:
        return "(phase(" + angle_src(e.angle) + ")*" + print_expr(e.sub[0]) + ")";
    case Expr::Kind::BasisVal:
        return print_basis(e.basis);
    case Expr::Kind::Translate:
        return "(" + print_basis(e.basis) + " >> " + print_basis(e.basis2) + ")";
    case Expr::Kind::Measure:
        return "(" + print_basis(e.basis) + ").measure";
    case Expr::Kind::Pred:
        return "(" + print_basis(e.basis) + " & " + print_expr(e.sub[0]) + ")";
    case Expr::Kind::Reverse:
        return "(~" + print_expr(e.sub[0]) + ")";
    case Expr::Kind::Sugar: {
        std::string base = e.sugar == SugarKind::Prep
                               ? print_expr(e.sub[0])
                               : "(" + print_basis(e.basis) + ")";
        if (e.sugar == SugarKind::Flip)
            return base + ".flip";
        if (e.sugar == SugarKind::Rotate)
            return base + ".rotate(" + angle_src(e.angle) + ")";
        return base + ".prep";
    }
    case Expr::Kind::Embed: {
        std::string base = "(" + print_expr(e.sub[0]) + ")";
        if (e.embed == EmbedKind::Xor)
            return base + ".xor_embed";
        if (e.embed == EmbedKind::Phase)
            return base + ".phase";
        return base + ".inplace(" + print_expr(e.sub[1]) + ")";
    }
    case Expr::Kind::Instantiate: {
        std::string s = e.name + "[[";
        for (size_t i = 0; i < e.inst_dims.size(); i++) {
            if (i) s += ", ";
            s += e.inst_dims[i] ? e.inst_dims[i]->str() : "...";
        }
        return s + "]]";
    }
    case Expr::Kind::CallCaps: {
        std::string s = print_expr(e.sub[0]) + "(";
        for (size_t i = 1; i < e.sub.size(); i++) {
            if (i > 1) s += ", ";
            s += print_expr(e.sub[i]);
        }
        return s + ")";
    }
    case Expr::Kind::Repeat: {
        std::string s = "repeat " + e.repeat_var + " in " + e.repeat_lo.str() +
                        ".." + e.repeat_hi.str() + ": (";
        for (size_t i = 0; i < e.sub.size(); i++) {
            if (i) s += " | ";
            s += print_expr(e.sub[i]);
        }
        return s + ")";
    }
    case Expr::Kind::Unit:
        return "()";
    case Expr::Kind::FuncRef:
        return e.name;
    }
    return "?";
}

std::string print_classical(const ClassicalExpr &e) {
    switch (e.kind) {
    case ClassicalExpr::Kind::InputRef:
        return e.name;
    case ClassicalExpr::Kind::Slice:
        return print_classical(e.sub[0]) + "[" + e.lo.str() + ":" + e.hi.str() + "]";
    case ClassicalExpr::Kind::BitConst:
        return bits_src(e.bits);
    case ClassicalExpr::Kind::And:
        return "(" + print_classical(e.sub[0]) + " & " + print_classical(e.sub[1]) + ")";
    case ClassicalExpr::Kind::Or:
        return "(" + print_classical(e.sub[0]) + " | " + print_classical(e.sub[1]) + ")";
    case ClassicalExpr::Kind::Xor:
        return "(" + print_classical(e.sub[0]) + " ^ " + print_classical(e.sub[1]) + ")";
    case ClassicalExpr::Kind::Not:
        return "(~" + print_classical(e.sub[0]) + ")";
    case ClassicalExpr::Kind::Concat: {
        std::string s = "(";
        for (size_t i = 0; i < e.sub.size(); i++) {
            if (i) s += " + ";
            s += print_classical(e.sub[i]);
        }
        return s + ")";
    }
    case ClassicalExpr::Kind::RotL:
        return print_classical(e.sub[0]) + ".rotl(" + e.lo.str() + ")";
    case ClassicalExpr::Kind::RotR:
        return print_classical(e.sub[0]) + ".rotr(" + e.lo.str() + ")";
    case ClassicalExpr::Kind::XorReduce:
        return print_classical(e.sub[0]) + ".xor_reduce()";
    case ClassicalExpr::Kind::AndReduce:
        return print_classical(e.sub[0]) + ".and_reduce()";
    case ClassicalExpr::Kind::OrReduce:
        return print_classical(e.sub[0]) + ".or_reduce()";
    case ClassicalExpr::Kind::ZeroExtend:
        return print_classical(e.sub[0]) + ".zero_extend(" + e.lo.str() + ")";
    case ClassicalExpr::Kind::EqConst:
        return "(" + print_classical(e.sub[0]) + " == " + bits_src(e.bits) + ")";
    case ClassicalExpr::Kind::MulConstMod:
        return print_classical(e.sub[0]) + ".mul_const_mod(" + e.lo.str() + ", " +
               e.hi.str() + ")";
    }
    return "?";
}

std::string print_type(const TypeExpr &t) {
    switch (t.kind) {
    case TypeExpr::Kind::Qubit: return "qubit";
    case TypeExpr::Kind::Bit: return "bit";
    case TypeExpr::Kind::Basis: return "basis";
    case TypeExpr::Kind::Unit: return "()";
    case TypeExpr::Kind::Pow:
        return print_type(t.elems[0]) + "[" + t.dim.str() + "]";
    case TypeExpr::Kind::Tensor: {
        std::string s = "(";
        for (size_t i = 0; i < t.elems.size(); i++) {
            if (i) s += ", ";
            s += print_type(t.elems[i]);
        }
        return s + ")";
    }
    case TypeExpr::Kind::Func: {
        // Function types only arise from the qfunc/rev_qfunc/cfunc shorthands.
        const TypeExpr &in = t.elems[0];
        const TypeExpr &out = t.elems[1];
        auto arg_dim = [](const TypeExpr &x) -> std::string {
            if (x.kind == TypeExpr::Kind::Pow)
                return x.dim.str();
            if (x.kind == TypeExpr::Kind::Unit)
                return "0";
            return "1";
        };
        auto base_kind = [](const TypeExpr &x) {
            const TypeExpr *p = x.kind == TypeExpr::Kind::Pow ? &x.elems[0] : &x;
            return p->kind;
        };
        bool classical = base_kind(in) == TypeExpr::Kind::Bit;
        std::string name = classical ? "cfunc" : (t.reversible ? "rev_qfunc" : "qfunc");
        return name + "[" + arg_dim(in) + ", " + arg_dim(out) + "]";
    }
    }
    return "?";
}

std::string print_def(const Definition &d) {
    std::ostringstream s;
    s << (d.kind == Definition::Kind::Quantum ? "qpu" : "classical");
    if (d.reversible)
        s << " rev";
    s << " " << d.name;
    if (!d.dim_vars.empty()) {
        s << "[";
        for (size_t i = 0; i < d.dim_vars.size(); i++) {
            if (i) s << ", ";
            s << d.dim_vars[i];
        }
        s << "]";
    }
    s << "(";
    for (size_t i = 0; i < d.params.size(); i++) {
        if (i) s << ", ";
        s << d.params[i].name << ": " << print_type(d.params[i].type);
    }
    s << ") -> " << print_type(d.ret) << ":\n    ";
    if (d.kind == Definition::Kind::Quantum)
        s << print_expr(d.body);
    else
        s << print_classical(d.cbody);
    s << "\n";
    return s.str();
}

std::string print_program(const ProgramAst &p) {
    std::string s;
    for (const auto &d : p.defs) {
        s += print_def(d);
        s += "\n";
    }
    return s;
}

} // namespace basisc
