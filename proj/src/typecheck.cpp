#include "basisc/typecheck.hpp"

#include <algorithm>
#include <sstream>

#include "basisc/basis.hpp"
#include "basisc/parser.hpp"

namespace basisc {

const Definition &SpecProgram::def(const std::string &name) const {
    auto it = defs.find(name);
    if (it == defs.end())
        throw TypeError("UnknownName", "no definition named '" + name + "'");
    return it->second;
}

std::string CapValue::key() const {
    std::ostringstream s;
    switch (kind) {
    case Kind::Bits:
        s << "b:" << word_str(bits);
        break;
    case Kind::Int:
        s << "i:" << int_value;
        break;
    case Kind::Func: {
        s << "f:" << base << "{";
        for (const auto &[k, v] : bound)
            s << k << "=" << v << ",";
        s << "}(";
        for (const auto &c : caps)
            s << c.key() << ";";
        s << ")";
        break;
    }
    case Kind::Embed: {
        s << "e" << static_cast<int>(embed) << ":";
        for (const auto &f : fns)
            s << f.key() << ";";
        break;
    }
    }
    return s.str();
}

// ===========================================================================
// Monomorphization

namespace {

struct MonoCtx {
    const Definition *def = nullptr;
    DimBindings bound;
    std::map<std::string, CapValue> caps;
    std::map<std::string, bool> value_params; // remaining (qubit) params
};

class Mono {
public:
    Mono(const ProgramAst &src, std::vector<double> phases)
        : src_(src), phases_(std::move(phases)) {}

    SpecProgram run(const std::string &entry, const MonoConfig &cfg) {
        const Definition *e = src_.find(entry);
        if (!e)
            throw TypeError("UnknownName", "entry '" + entry + "' not found");
        DimBindings bound;
        for (const auto &[k, v] : cfg.sets) {
            if (std::find(e->dim_vars.begin(), e->dim_vars.end(), k) == e->dim_vars.end())
                throw TypeError("UnknownName",
                                "--set " + k + ": entry has no such dimension variable");
            bound[k] = v;
        }
        std::vector<CapValue> caps;
        for (const auto &p : e->params) {
            if (type_is_linear(p.type))
                break; // quantum arguments are not bindable from the CLI
            auto it = cfg.args.find(p.name);
            if (it == cfg.args.end())
                throw TypeError("UnknownName",
                                "capture '" + p.name + "' of entry '" + entry +
                                    "' is not bound; pass --arg " + p.name + "=...");
            caps.push_back(parse_arg_fragment(it->second));
        }
        SpecProgram out;
        out.entry = specialize(entry, bound, caps, e->span);
        out.defs = std::move(defs_);
        return out;
    }

    CapValue parse_arg_fragment(const std::string &text) {
        bool all_bits = !text.empty(), all_digits = !text.empty();
        for (char c : text) {
            if (c != '0' && c != '1')
                all_bits = false;
            if (!std::isdigit(static_cast<unsigned char>(c)))
                all_digits = false;
        }
        if (all_bits) {
            CapValue v;
            v.kind = CapValue::Kind::Bits;
            for (char c : text)
                v.bits.push_back(c == '1');
            return v;
        }
        if (all_digits) {
            // Plain integer: encoded at the declared capture width.
            CapValue v;
            v.kind = CapValue::Kind::Int;
            v.int_value = std::stoll(text);
            return v;
        }
        Expr e = parse_expression(text);
        MonoCtx empty;
        return resolve_cap(e, empty);
    }

    std::string specialize(const std::string &base, DimBindings bound,
                           std::vector<CapValue> caps, Span span) {
        const Definition *d = src_.find(base);
        if (!d)
            throw TypeError("UnknownName", "no definition named '" + base + "'", span);
        if (caps.size() > d->params.size())
            throw TypeError("ArityMismatch",
                            "'" + base + "' takes at most " +
                                std::to_string(d->params.size()) + " captures",
                            span);
        // Captures must be the leading non-qubit parameters.
        for (size_t i = 0; i < caps.size(); i++)
            if (type_is_linear(d->params[i].type))
                throw TypeError("ArityMismatch",
                                "parameter '" + d->params[i].name +
                                    "' of '" + base + "' is a quantum argument, not a capture",
                                span);
        for (size_t i = caps.size(); i < d->params.size(); i++)
            if (!type_is_linear(d->params[i].type) && d->kind == Definition::Kind::Quantum)
                throw TypeError("ArityMismatch",
                                "capture '" + d->params[i].name + "' of '" + base +
                                    "' left unbound",
                                span);

        // Infer remaining dimension variables from the capture type patterns,
        // in both directions: a concrete capture fixes the callee's variables
        // (cfunc[N,1] against bit[4] -> bit[1] gives N = 4), and a concrete
        // declared pattern fixes the capture's own free variables.
        for (size_t i = 0; i < caps.size(); i++) {
            coerce_int_cap(d->params[i].type, caps[i], bound, span);
            reverse_infer(d->params[i].type, caps[i], bound, span);
            unify_capture(d->params[i].type, caps[i], bound, span);
        }

        for (const auto &v : d->dim_vars)
            if (!bound.count(v))
                throw TypeError("UnboundDimVar",
                                "dimension variable '" + v + "' of '" + base +
                                    "' cannot be inferred",
                                span);

        DimBindings local;
        for (const auto &v : d->dim_vars)
            local[v] = bound.at(v);

        std::ostringstream key;
        key << base << "{";
        for (const auto &v : d->dim_vars)
            key << v << "=" << local[v] << ",";
        key << "}";
        for (const auto &c : caps)
            key << c.key() << ";";
        auto hit = memo_.find(key.str());
        if (hit != memo_.end())
            return hit->second;

        if (std::find(active_.begin(), active_.end(), base) != active_.end())
            throw TypeError("UnknownName", "recursive use of '" + base + "'", span);
        active_.push_back(base);

        std::string name = base;
        if (!local.empty() || !caps.empty())
            name += "$" + std::to_string(++counter_[base]);
        memo_[key.str()] = name;

        MonoCtx ctx;
        ctx.def = d;
        ctx.bound = local;
        for (size_t i = 0; i < caps.size(); i++)
            ctx.caps[d->params[i].name] = caps[i];
        for (size_t i = caps.size(); i < d->params.size(); i++)
            ctx.value_params[d->params[i].name] = true;

        Definition spec;
        spec.kind = d->kind;
        spec.name = name;
        spec.reversible = d->reversible;
        spec.ret = normalize_type(substitute_type(d->ret, local));
        spec.span = d->span;
        for (size_t i = caps.size(); i < d->params.size(); i++) {
            Param p = d->params[i];
            p.type = normalize_type(substitute_type(p.type, local));
            spec.params.push_back(std::move(p));
        }
        if (d->kind == Definition::Kind::Quantum)
            spec.body = normalize_tensors(resolve_expr(d->body, ctx));
        else
            spec.cbody = resolve_classical(d->cbody, ctx);

        defs_[name] = std::move(spec);
        active_.pop_back();
        return name;
    }

private:
    const ProgramAst &src_;
    std::vector<double> phases_;
    std::map<std::string, Definition> defs_;
    std::map<std::string, std::string> memo_;
    std::map<std::string, int> counter_;
    std::vector<std::string> active_;

    // --- capture typing -----------------------------------------------------

    // Encodes an integer capture at the width of its declared pattern.
    void coerce_int_cap(const TypeExpr &pattern, CapValue &v, const DimBindings &bound,
                        Span span) {
        if (v.kind != CapValue::Kind::Int)
            return;
        TypeExpr t = normalize_type(substitute_type(pattern, bound));
        long long w = -1;
        if (t.kind == TypeExpr::Kind::Bit)
            w = 1;
        else if (t.kind == TypeExpr::Kind::Tensor)
            w = bit_count(t);
        if (w <= 0)
            throw TypeError("UnboundDimVar",
                            "cannot infer the width of integer capture " +
                                std::to_string(v.int_value),
                            span);
        if (v.int_value < 0 || (w < 63 && v.int_value >= (1LL << w)))
            throw TypeError("DimMismatch",
                            std::to_string(v.int_value) + " does not fit in bit[" +
                                std::to_string(w) + "]",
                            span);
        v.kind = CapValue::Kind::Bits;
        v.bits = index_to_word(static_cast<uint64_t>(v.int_value), static_cast<int>(w));
    }

    TypeExpr cap_type(const CapValue &v, Span span) {
        switch (v.kind) {
        case CapValue::Kind::Bits:
            return bits_type(static_cast<long long>(v.bits.size()));
        case CapValue::Kind::Int:
            throw TypeError("UnboundDimVar",
                            "cannot infer the width of integer capture " +
                                std::to_string(v.int_value),
                            span);
        case CapValue::Kind::Func: {
            const Definition *d = src_.find(v.base);
            if (!d)
                throw TypeError("UnknownName", "no definition named '" + v.base + "'", span);
            std::vector<TypeExpr> ins;
            for (size_t i = v.caps.size(); i < d->params.size(); i++) {
                TypeExpr t = substitute_type(d->params[i].type, v.bound);
                ensure_concrete(t, v.base, span);
                ins.push_back(std::move(t));
            }
            TypeExpr in = normalize_type(TypeExpr::tensor(std::move(ins)));
            TypeExpr ret = substitute_type(d->ret, v.bound);
            ensure_concrete(ret, v.base, span);
            bool rev = d->kind == Definition::Kind::Quantum && d->reversible;
            return TypeExpr::func(in, normalize_type(ret), rev);
        }
        case CapValue::Kind::Embed: {
            auto [n_in, n_out] = embed_widths(v, span);
            long long total = v.embed == EmbedKind::Xor ? n_in + n_out : n_in;
            return TypeExpr::func(qubits_type(total), qubits_type(total), true);
        }
        }
        throw std::logic_error("unreachable CapValue kind");
    }

    std::pair<long long, long long> embed_widths(const CapValue &v, Span span) {
        const CapValue &f = v.fns.at(0);
        const Definition *d = src_.find(f.base);
        if (!d)
            throw TypeError("UnknownName", "no definition named '" + f.base + "'", span);
        if (d->kind != Definition::Kind::Classical)
            throw TypeError("UnknownName",
                            "'" + f.base + "' is not a classical function", span);
        long long n_in = 0;
        for (size_t i = f.caps.size(); i < d->params.size(); i++) {
            TypeExpr t = substitute_type(d->params[i].type, f.bound);
            ensure_concrete(t, f.base, span);
            n_in += bit_count(t);
        }
        TypeExpr rt = substitute_type(d->ret, f.bound);
        ensure_concrete(rt, f.base, span);
        return {n_in, bit_count(rt)};
    }

    void ensure_concrete(const TypeExpr &t, const std::string &who, Span span) {
        std::vector<std::string> vars;
        collect_type_vars(t, vars);
        if (!vars.empty())
            throw TypeError("UnboundDimVar",
                            "free dimension variable '" + vars[0] +
                                "' in the signature of '" + who + "'",
                            span);
    }

    static void collect_type_vars(const TypeExpr &t, std::vector<std::string> &out) {
        if (t.kind == TypeExpr::Kind::Pow)
            t.dim.free_vars(out);
        for (const auto &e : t.elems)
            collect_type_vars(e, out);
    }

    // Unifies a declared capture type pattern (over the callee's dimension
    // variables) against the concrete type of the supplied value.
    void unify_capture(const TypeExpr &pattern, const CapValue &v, DimBindings &bound,
                       Span span) {
        unify_type(pattern, cap_type(v, span), bound, span);
    }

    // Infers a function capture's own dimension variables from the captures
    // it has been given (e.g. dot_secret(0b1101) fixes N = 4).
    void infer_from_caps(CapValue &v, Span span) {
        if (v.kind != CapValue::Kind::Func || v.caps.empty())
            return;
        const Definition *d = src_.find(v.base);
        if (!d)
            throw TypeError("UnknownName", "no definition named '" + v.base + "'", span);
        if (v.caps.size() > d->params.size())
            throw TypeError("ArityMismatch",
                            "'" + v.base + "' takes at most " +
                                std::to_string(d->params.size()) + " captures",
                            span);
        for (size_t i = 0; i < v.caps.size(); i++) {
            coerce_int_cap(d->params[i].type, v.caps[i], v.bound, span);
            unify_capture(d->params[i].type, v.caps[i], v.bound, span);
        }
    }

    // Binds a function capture's own free dimension variables from the
    // caller's (already concrete) declared pattern.
    void reverse_infer(const TypeExpr &pattern, CapValue &v, const DimBindings &bound,
                       Span span) {
        if (v.kind != CapValue::Kind::Func)
            return;
        const Definition *d = src_.find(v.base);
        if (!d)
            throw TypeError("UnknownName", "no definition named '" + v.base + "'", span);
        bool open = false;
        for (const auto &dv : d->dim_vars)
            if (!v.bound.count(dv))
                open = true;
        if (!open)
            return;
        TypeExpr conc = substitute_type(pattern, bound);
        std::vector<std::string> vars;
        collect_type_vars(conc, vars);
        if (!vars.empty())
            return; // caller side not concrete; the forward pass may still work
        std::vector<TypeExpr> ins;
        for (size_t i = v.caps.size(); i < d->params.size(); i++)
            ins.push_back(substitute_type(d->params[i].type, v.bound));
        TypeExpr sig = TypeExpr::func(TypeExpr::tensor(std::move(ins)),
                                      substitute_type(d->ret, v.bound), false);
        unify_type(sig, normalize_type(conc), v.bound, span, false);
    }

    void unify_type(const TypeExpr &pat, const TypeExpr &conc, DimBindings &bound,
                    Span span, bool enforce_rev = true) {
        if (pat.kind == TypeExpr::Kind::Func) {
            if (conc.kind != TypeExpr::Kind::Func)
                throw TypeError("DimMismatch", "expected a function capture", span);
            if (enforce_rev && pat.reversible && !conc.reversible)
                throw TypeError("NotReversible",
                                "capture requires a reversible function", span);
            unify_type(pat.elems[0], conc.elems[0], bound, span, enforce_rev);
            unify_type(pat.elems[1], conc.elems[1], bound, span, enforce_rev);
            return;
        }
        if (conc.kind == TypeExpr::Kind::Func)
            throw TypeError("DimMismatch", "unexpected function capture", span);
        unify_counts(pat, qubit_count(conc), TypeExpr::Kind::Qubit, bound, span);
        unify_counts(pat, bit_count(conc), TypeExpr::Kind::Bit, bound, span);
    }

    // Solves sum-of-dims(pattern restricted to `kind`) == total for at most
    // one unbound variable.
    void unify_counts(const TypeExpr &pat, long long total, TypeExpr::Kind kind,
                      DimBindings &bound, Span span) {
        std::vector<DimExpr> terms;
        gather_dims(pat, kind, terms);
        long long known = 0;
        const DimExpr *open = nullptr;
        std::string open_var;
        for (const auto &t : terms) {
            DimExpr s = t.substitute(bound);
            if (s.is_const()) {
                known += s.value;
            } else if (s.kind == DimExpr::Kind::Var && !open) {
                open = &t;
                open_var = s.name;
            } else {
                throw TypeError("UnboundDimVar",
                                "cannot infer dimensions from pattern '" + t.str() + "'",
                                span);
            }
        }
        if (open) {
            long long val = total - known;
            if (val < 0)
                throw TypeError("DimMismatch", "capture width mismatch", span);
            auto it = bound.find(open_var);
            if (it != bound.end() && it->second != val)
                throw TypeError("DimMismatch",
                                "conflicting inference for '" + open_var + "': " +
                                    std::to_string(it->second) + " vs " +
                                    std::to_string(val),
                                span);
            bound[open_var] = val;
        } else if (known != total) {
            throw TypeError("DimMismatch",
                            "capture width mismatch: declared " + std::to_string(known) +
                                ", got " + std::to_string(total),
                            span);
        }
    }

    void gather_dims(const TypeExpr &t, TypeExpr::Kind kind, std::vector<DimExpr> &out) {
        switch (t.kind) {
        case TypeExpr::Kind::Qubit:
        case TypeExpr::Kind::Bit:
        case TypeExpr::Kind::Basis:
            if (t.kind == kind)
                out.push_back(DimExpr::constant(1));
            return;
        case TypeExpr::Kind::Unit:
            return;
        case TypeExpr::Kind::Pow:
            if (t.elems[0].kind == kind)
                out.push_back(t.dim);
            else if (t.elems[0].kind != TypeExpr::Kind::Qubit &&
                     t.elems[0].kind != TypeExpr::Kind::Bit)
                throw TypeError("DimMismatch", "unsupported capture pattern");
            return;
        case TypeExpr::Kind::Tensor:
            for (const auto &e : t.elems)
                gather_dims(e, kind, out);
            return;
        case TypeExpr::Kind::Func:
            throw TypeError("DimMismatch", "nested function capture patterns unsupported");
        }
    }

    // --- capture value resolution -------------------------------------------

    CapValue resolve_cap(const Expr &e, MonoCtx &ctx) {
        switch (e.kind) {
        case Expr::Kind::BitLit: {
            CapValue v;
            v.kind = CapValue::Kind::Bits;
            v.bits = e.bits;
            return v;
        }
        case Expr::Kind::Var: {
            auto it = ctx.caps.find(e.name);
            if (it != ctx.caps.end())
                return it->second;
            if (!src_.find(e.name))
                throw TypeError("UnknownName", "no definition named '" + e.name + "'",
                                e.span);
            CapValue v;
            v.kind = CapValue::Kind::Func;
            v.base = e.name;
            return v;
        }
        case Expr::Kind::Instantiate: {
            auto it = ctx.caps.find(e.name);
            if (it != ctx.caps.end())
                return bind_free(it->second, e, ctx);
            const Definition *d = src_.find(e.name);
            if (!d)
                throw TypeError("UnknownName", "no definition named '" + e.name + "'",
                                e.span);
            if (e.inst_dims.size() != d->dim_vars.size())
                throw TypeError("DimMismatch",
                                "'" + e.name + "' has " + std::to_string(d->dim_vars.size()) +
                                    " dimension variables, got " +
                                    std::to_string(e.inst_dims.size()),
                                e.span);
            CapValue v;
            v.kind = CapValue::Kind::Func;
            v.base = e.name;
            for (size_t i = 0; i < e.inst_dims.size(); i++) {
                if (!e.inst_dims[i])
                    continue; // `...` leaves the variable free
                v.bound[d->dim_vars[i]] = e.inst_dims[i]->eval(ctx.bound, e.span);
            }
            return v;
        }
        case Expr::Kind::CallCaps: {
            CapValue v = resolve_cap(e.sub[0], ctx);
            if (v.kind != CapValue::Kind::Func)
                throw TypeError("ArityMismatch", "only definitions take captures", e.span);
            for (size_t i = 1; i < e.sub.size(); i++)
                v.caps.push_back(resolve_cap(e.sub[i], ctx));
            infer_from_caps(v, e.span);
            return v;
        }
        case Expr::Kind::Embed: {
            CapValue v;
            v.kind = CapValue::Kind::Embed;
            v.embed = e.embed;
            v.fns.push_back(resolve_cap(e.sub[0], ctx));
            if (e.embed == EmbedKind::InPlace) {
                if (e.sub.size() < 2)
                    throw TypeError("ArityMismatch", ".inplace requires an inverse", e.span);
                v.fns.push_back(resolve_cap(e.sub[1], ctx));
            }
            return v;
        }
        default:
            throw TypeError("NotABasis",
                            "expression cannot be used as a capture value", e.span);
        }
    }

    // `f[[j]]` on a partially applied capture: binds its free dimension
    // variables positionally, in declaration order.
    CapValue bind_free(const CapValue &v0, const Expr &inst, MonoCtx &ctx) {
        CapValue v = v0;
        if (v.kind == CapValue::Kind::Embed) {
            for (auto &f : v.fns) {
                Expr e2 = inst;
                CapValue b = bind_free_one(f, e2, ctx);
                f = std::move(b);
            }
            return v;
        }
        return bind_free_one(v, inst, ctx);
    }

    CapValue bind_free_one(const CapValue &v0, const Expr &inst, MonoCtx &ctx) {
        CapValue v = v0;
        if (v.kind != CapValue::Kind::Func)
            throw TypeError("ArityMismatch", "cannot instantiate a bit capture", inst.span);
        const Definition *d = src_.find(v.base);
        std::vector<std::string> free;
        for (const auto &dv : d->dim_vars)
            if (!v.bound.count(dv))
                free.push_back(dv);
        if (inst.inst_dims.size() != free.size())
            throw TypeError("DimMismatch",
                            "'" + v.base + "' has " + std::to_string(free.size()) +
                                " free dimension variables, got " +
                                std::to_string(inst.inst_dims.size()),
                            inst.span);
        for (size_t i = 0; i < free.size(); i++) {
            if (!inst.inst_dims[i])
                continue;
            v.bound[free[i]] = inst.inst_dims[i]->eval(ctx.bound, inst.span);
        }
        return v;
    }

    // Turns a fully bound capture value into an expression node.
    Expr materialize(const CapValue &v, Span span) {
        switch (v.kind) {
        case CapValue::Kind::Bits: {
            Expr e = Expr::make(Expr::Kind::BitLit, span);
            e.bits = v.bits;
            return e;
        }
        case CapValue::Kind::Int:
            throw TypeError("UnboundDimVar",
                            "integer capture " + std::to_string(v.int_value) +
                                " was never given a width",
                            span);
        case CapValue::Kind::Func: {
            Expr e = Expr::make(Expr::Kind::FuncRef, span);
            e.name = specialize(v.base, v.bound, v.caps, span);
            return e;
        }
        case CapValue::Kind::Embed: {
            Expr e = Expr::make(Expr::Kind::Embed, span);
            e.embed = v.embed;
            Expr f = Expr::make(Expr::Kind::FuncRef, span);
            f.name = specialize(v.fns[0].base, v.fns[0].bound, v.fns[0].caps, span);
            e.sub.push_back(std::move(f));
            if (v.embed == EmbedKind::InPlace) {
                Expr g = Expr::make(Expr::Kind::FuncRef, span);
                g.name = specialize(v.fns[1].base, v.fns[1].bound, v.fns[1].caps, span);
                e.sub.push_back(std::move(g));
            }
            return e;
        }
        }
        throw std::logic_error("unreachable CapValue kind");
    }

    // --- body resolution ------------------------------------------------------

    Expr resolve_expr(const Expr &e, MonoCtx &ctx) {
        switch (e.kind) {
        case Expr::Kind::Var: {
            if (ctx.value_params.count(e.name)) {
                return e;
            }
            return materialize(resolve_cap(e, ctx), e.span);
        }
        case Expr::Kind::Instantiate:
        case Expr::Kind::CallCaps:
        case Expr::Kind::Embed:
            return materialize(resolve_cap(e, ctx), e.span);
        case Expr::Kind::Apply: {
            if (e.sub[0].kind == Expr::Kind::Repeat)
                return unroll_repeat(e.sub[0], e.sub[1], ctx);
            Expr out = Expr::make(Expr::Kind::Apply, e.span);
            out.from_repeat = e.from_repeat;
            out.sub.push_back(resolve_expr(e.sub[0], ctx));
            out.sub.push_back(resolve_expr(e.sub[1], ctx));
            return out;
        }
        case Expr::Kind::Repeat:
            throw TypeError("ArityMismatch",
                            "repeat is only valid as a pipeline stage", e.span);
        case Expr::Kind::Sugar: {
            Expr out = e;
            if (e.sugar == SugarKind::Prep) {
                out.sub[0] = resolve_expr(e.sub[0], ctx);
                return out;
            }
            out.basis = substitute_basis(e.basis, ctx.bound, phases_);
            if (e.sugar == SugarKind::Rotate)
                out.angle = AngleExpr::number(e.angle.eval(ctx.bound, phases_, e.span));
            return out;
        }
        default: {
            Expr out = e;
            for (auto &s : out.sub)
                s = resolve_expr(s, ctx);
            // Fold the node's own dimension/angle/basis fields to constants.
            Expr folded = substitute_one(out, ctx);
            return folded;
        }
        }
    }

    // Applies dim/angle substitution to a single node (children already done).
    Expr substitute_one(const Expr &e, MonoCtx &ctx) {
        Expr out = e;
        switch (e.kind) {
        case Expr::Kind::QubitLit:
            out.ql.fold = DimExpr::constant(e.ql.fold.eval(ctx.bound, e.span));
            if (out.ql.fold.value < 0)
                throw TypeError("NegativeDim", "negative literal repeat", e.span);
            break;
        case Expr::Kind::Fold: {
            DimValue n = e.dim.eval(ctx.bound, e.span);
            if (n < 0)
                throw TypeError("NegativeDim", "negative fold count", e.span);
            out.dim = DimExpr::constant(n);
            break;
        }
        case Expr::Kind::Phase:
            out.angle = AngleExpr::number(e.angle.eval(ctx.bound, phases_, e.span));
            break;
        case Expr::Kind::BasisVal:
        case Expr::Kind::Measure:
            out.basis = substitute_basis(e.basis, ctx.bound, phases_);
            break;
        case Expr::Kind::Translate:
            out.basis = substitute_basis(e.basis, ctx.bound, phases_);
            out.basis2 = substitute_basis(e.basis2, ctx.bound, phases_);
            break;
        case Expr::Kind::Pred:
            out.basis = substitute_basis(e.basis, ctx.bound, phases_);
            break;
        default:
            break;
        }
        return out;
    }

    Expr unroll_repeat(const Expr &rep, const Expr &input, MonoCtx &ctx) {
        DimValue lo = rep.repeat_lo.eval(ctx.bound, rep.span);
        DimValue hi = rep.repeat_hi.eval(ctx.bound, rep.span);
        if (lo < 0 || hi < lo)
            throw TypeError("NegativeDim",
                            "bad repeat bounds " + std::to_string(lo) + ".." +
                                std::to_string(hi),
                            rep.span);
        Expr cur = resolve_expr(input, ctx);
        for (DimValue j = lo; j < hi; j++) {
            MonoCtx iter = ctx;
            iter.bound[rep.repeat_var] = j;
            for (const auto &stage : rep.sub) {
                Expr app = Expr::make(Expr::Kind::Apply, rep.span);
                app.from_repeat = true;
                app.sub.push_back(resolve_expr(stage, iter));
                app.sub.push_back(std::move(cur));
                cur = std::move(app);
            }
        }
        return cur;
    }

    ClassicalExpr resolve_classical(const ClassicalExpr &e, MonoCtx &ctx) {
        if (e.kind == ClassicalExpr::Kind::InputRef) {
            auto it = ctx.caps.find(e.name);
            if (it != ctx.caps.end()) {
                if (it->second.kind != CapValue::Kind::Bits)
                    throw TypeError("DimMismatch",
                                    "classical capture '" + e.name + "' must be bits",
                                    e.span);
                ClassicalExpr c;
                c.kind = ClassicalExpr::Kind::BitConst;
                c.span = e.span;
                c.bits = it->second.bits;
                return c;
            }
            return e;
        }
        ClassicalExpr out = substitute_classical(e, ctx.bound);
        for (auto &s : out.sub)
            s = resolve_classical(s, ctx);
        // MulConstMod keeps its constant as a dim expression; reduce it mod m
        // here so huge powers never materialize.
        if (out.kind == ClassicalExpr::Kind::MulConstMod) {
            DimValue m = out.hi.eval(ctx.bound, out.span);
            if (m <= 0)
                throw TypeError("NegativeDim", "modulus must be positive", out.span);
            out.hi = DimExpr::constant(m);
            out.lo = DimExpr::constant(out.lo.eval(ctx.bound, out.span, m));
        }
        return out;
    }

public:
    std::string specialize_public(const std::string &base, DimBindings bound,
                                  std::vector<CapValue> caps, Span span) {
        return specialize(base, std::move(bound), std::move(caps), span);
    }
    std::map<std::string, Definition> take_defs() { return std::move(defs_); }
    CapValue arg_fragment(const std::string &s) { return parse_arg_fragment(s); }
    Expr resolve_standalone(const Expr &e, const DimBindings &bound) {
        MonoCtx ctx;
        ctx.bound = bound;
        return resolve_expr(e, ctx);
    }
};

} // namespace

SpecProgram monomorphize(const ProgramAst &p, const std::string &entry,
                         const MonoConfig &cfg) {
    Mono m(p, cfg.phases);
    return m.run(entry, cfg);
}

std::pair<SpecProgram, Expr> monomorphize_expression(const ProgramAst &p,
                                                     const Expr &e,
                                                     const MonoConfig &cfg) {
    Mono m(p, cfg.phases);
    Expr resolved = normalize_tensors(m.resolve_standalone(e, cfg.sets));
    SpecProgram out;
    out.defs = m.take_defs();
    return {std::move(out), std::move(resolved)};
}

const Definition &specialize_classical_for_eval(SpecProgram &out, const ProgramAst &p,
                                                const std::string &fn,
                                                const MonoConfig &cfg,
                                                long long input_width) {
    const Definition *d = p.find(fn);
    if (!d)
        throw TypeError("UnknownName", "no definition named '" + fn + "'");
    if (d->kind != Definition::Kind::Classical)
        throw TypeError("UnknownName", "'" + fn + "' is not a classical function");
    Mono m(p, cfg.phases);
    DimBindings bound;
    for (const auto &[k, v] : cfg.sets)
        if (std::find(d->dim_vars.begin(), d->dim_vars.end(), k) != d->dim_vars.end())
            bound[k] = v;
    std::vector<CapValue> caps;
    for (const auto &prm : d->params) {
        auto it = cfg.args.find(prm.name);
        if (it == cfg.args.end())
            break;
        caps.push_back(m.arg_fragment(it->second));
    }
    // Infer a single open width from the input length when possible.
    {
        DimBindings probe = bound;
        long long remaining = input_width;
        std::string open;
        bool solvable = true;
        for (size_t i = caps.size(); i < d->params.size(); i++) {
            DimExpr w = d->params[i].type.kind == TypeExpr::Kind::Pow
                            ? d->params[i].type.dim
                            : DimExpr::constant(1);
            DimExpr s = w.substitute(probe);
            if (s.is_const())
                remaining -= s.value;
            else if (s.kind == DimExpr::Kind::Var && open.empty())
                open = s.name;
            else
                solvable = false;
        }
        if (solvable && !open.empty() && remaining >= 0)
            bound[open] = remaining;
    }
    std::string name = m.specialize_public(fn, bound, caps, d->span);
    out.defs = m.take_defs();
    out.entry = name;
    return out.defs.at(name);
}

// ===========================================================================
// Type checking

namespace {

struct Binding {
    TypeExpr type;
    bool linear = false;
    bool consumed = false;
    Span span;
};

struct CheckCtx {
    const SpecProgram *prog = nullptr;
    std::map<std::string, Binding> env;
    bool in_rev = false;
    double tol = 1e-9;
};

char family_of(char sym) {
    switch (sym) {
    case '0': case '1': return 'z';
    case '+': case '-': return 'x';
    case 'i': case 'j': return 'y';
    }
    return '?';
}

void check_basis_rec(const BasisExprAst &b) {
    switch (b.kind) {
    case BasisExprAst::Kind::Std:
    case BasisExprAst::Kind::Pm:
    case BasisExprAst::Kind::Ij:
    case BasisExprAst::Kind::Fourier:
        return;
    case BasisExprAst::Kind::Literal: {
        if (b.vectors.empty())
            throw TypeError("NotABasis", "empty basis literal", b.span);
        basis_qubit_count(b); // equal-length check (DimMismatch)
        char family = 0;
        for (const auto &v : b.vectors)
            for (char c : v.ql.syms) {
                char f = family_of(c);
                if (!family)
                    family = f;
                else if (family != f)
                    throw TypeError("MixedEigenbasis",
                                    "basis literal mixes symbol families", v.span);
            }
        // Duplicate check up to global phase: canonicalize by the phase of
        // the first nonzero amplitude.
        BasisValue val = veclist(b);
        std::vector<Vec> canon;
        for (auto v : val.vectors) {
            for (const auto &x : v) {
                if (std::abs(x) > 1e-12) {
                    cplx ph = x / std::abs(x);
                    for (auto &y : v)
                        y /= ph;
                    break;
                }
            }
            canon.push_back(std::move(v));
        }
        for (size_t i = 0; i < canon.size(); i++)
            for (size_t j = i + 1; j < canon.size(); j++) {
                double diff = 0;
                for (size_t k = 0; k < canon[i].size(); k++)
                    diff += std::norm(canon[i][k] - canon[j][k]);
                if (std::sqrt(diff) < 1e-9)
                    throw TypeError("DuplicateBasisVector",
                                    "basis vectors " + std::to_string(i + 1) + " and " +
                                        std::to_string(j + 1) + " coincide up to phase",
                                    b.span);
            }
        return;
    }
    case BasisExprAst::Kind::Tensor:
    case BasisExprAst::Kind::Fold:
    case BasisExprAst::Kind::Reversed:
    case BasisExprAst::Kind::Rotated:
        for (const auto &s : b.sub)
            check_basis_rec(s);
        return;
    case BasisExprAst::Kind::Invalid:
        throw TypeError("NotABasis", "expression is not a basis", b.span);
    }
}

} // namespace

long long check_basis(const BasisExprAst &b) {
    check_basis_rec(b);
    return basis_qubit_count(b);
}

void check_translation(const BasisExprAst &b1, const BasisExprAst &b2, double tol) {
    long long m1 = check_basis(b1);
    long long m2 = check_basis(b2);
    if (m1 != m2)
        throw TypeError("DimMismatch",
                        "translation endpoints act on " + std::to_string(m1) + " vs " +
                            std::to_string(m2) + " qubits",
                        b1.span);
    if (basis_vector_count(b1) != basis_vector_count(b2))
        throw TypeError("DimMismatch", "translation endpoints differ in vector count",
                        b1.span);
    BasisValue v1 = veclist(b1), v2 = veclist(b2);
    if (!span_equal(v1, v2, tol))
        throw TypeError("SpanMismatch",
                        "translation endpoints span different subspaces", b1.span);
}

void check_measure(const BasisExprAst &b) {
    long long m = check_basis(b);
    if (basis_vector_count(b) != (1LL << m))
        throw TypeError("IncompleteMeasureBasis",
                        "measurement basis supplies " +
                            std::to_string(basis_vector_count(b)) + " of " +
                            std::to_string(1LL << m) + " vectors",
                        b.span);
}

namespace {

TypeExpr as_func_type(const TypeExpr &t, Span span) {
    if (t.kind == TypeExpr::Kind::Func)
        return t;
    if (t.kind == TypeExpr::Kind::Tensor) {
        std::vector<TypeExpr> ins, outs;
        bool rev = true;
        for (const auto &e : t.elems) {
            if (e.kind != TypeExpr::Kind::Func)
                throw TypeError("ArityMismatch",
                                "tensor mixes functions with non-functions", span);
            ins.push_back(e.elems[0]);
            outs.push_back(e.elems[1]);
            rev = rev && e.reversible;
        }
        return TypeExpr::func(normalize_type(TypeExpr::tensor(ins)),
                              normalize_type(TypeExpr::tensor(outs)), rev);
    }
    throw TypeError("ArityMismatch", "cannot apply a non-function value", span);
}

bool is_qubits_only(const TypeExpr &t) {
    TypeExpr n = normalize_type(t);
    if (n.kind == TypeExpr::Kind::Unit || n.kind == TypeExpr::Kind::Qubit)
        return true;
    if (n.kind != TypeExpr::Kind::Tensor)
        return false;
    for (const auto &e : n.elems)
        if (e.kind != TypeExpr::Kind::Qubit)
            return false;
    return true;
}

TypeExpr check_expr(const Expr &e, CheckCtx &ctx);

TypeExpr check_apply(const Expr &e, CheckCtx &ctx) {
    TypeExpr arg_t = check_expr(e.sub[1], ctx);
    TypeExpr fn_raw = check_expr(e.sub[0], ctx);
    TypeExpr fn = as_func_type(fn_raw, e.span);
    if (ctx.in_rev && !fn.reversible)
        throw TypeError("NotReversible",
                        "irreversible operation inside a rev kernel", e.span);
    if (e.from_repeat && !(normalize_type(fn.elems[0]) == normalize_type(fn.elems[1])))
        throw TypeError("DimMismatch",
                        "repeat body must map its qubit tuple to itself", e.span);
    if (!(normalize_type(arg_t) == normalize_type(fn.elems[0])))
        throw TypeError("ArityMismatch",
                        "function expects " + fn.elems[0].str() + ", got " + arg_t.str(),
                        e.span);
    return normalize_type(fn.elems[1]);
}

TypeExpr check_expr(const Expr &e, CheckCtx &ctx) {
    switch (e.kind) {
    case Expr::Kind::Apply:
        return check_apply(e, ctx);
    case Expr::Kind::BuiltIn:
        switch (e.builtin) {
        case BuiltinKind::Id:
            return TypeExpr::func(TypeExpr::qubit(), TypeExpr::qubit(), true);
        case BuiltinKind::Discard:
            return TypeExpr::func(TypeExpr::qubit(), TypeExpr::unit(), false);
        case BuiltinKind::DiscardZ:
            if (!ctx.in_rev)
                throw TypeError("NotReversible",
                                "discardz is only legal inside rev kernels", e.span);
            // Shape guards abuse: ~discardz and b & discardz still fail on
            // the qubit -> () shape.
            return TypeExpr::func(TypeExpr::qubit(), TypeExpr::unit(), true);
        }
        break;
    case Expr::Kind::QubitLit: {
        DimValue fold = e.ql.fold.value;
        return qubits_type(fold * static_cast<DimValue>(e.ql.syms.size()));
    }
    case Expr::Kind::BitLit:
        return bits_type(static_cast<long long>(e.bits.size()));
    case Expr::Kind::Var: {
        auto it = ctx.env.find(e.name);
        if (it == ctx.env.end())
            throw TypeError("UnknownName", "unknown name '" + e.name + "'", e.span);
        if (it->second.linear) {
            if (it->second.consumed)
                throw TypeError("LinearityViolation",
                                "'" + e.name + "' is used more than once", e.span);
            it->second.consumed = true;
        }
        return it->second.type;
    }
    case Expr::Kind::Tensor: {
        std::vector<TypeExpr> ts;
        for (const auto &s : e.sub)
            ts.push_back(check_expr(s, ctx));
        return normalize_type(TypeExpr::tensor(std::move(ts)));
    }
    case Expr::Kind::Fold: {
        TypeExpr t = check_expr(e.sub[0], ctx);
        if (type_is_linear(t))
            throw TypeError("LinearityViolation",
                            "cannot fold a value containing qubits", e.span);
        return normalize_type(TypeExpr::pow(t, e.dim));
    }
    case Expr::Kind::Phase: {
        TypeExpr t = check_expr(e.sub[0], ctx);
        if (t.kind == TypeExpr::Kind::Func ||
            (t.kind == TypeExpr::Kind::Tensor && t.elems[0].kind == TypeExpr::Kind::Func)) {
            TypeExpr f = as_func_type(t, e.span);
            if (!f.reversible)
                throw TypeError("NotReversible",
                                "phase(theta)* applies to reversible functions only",
                                e.span);
            return t;
        }
        if (!is_qubits_only(t) || qubit_count(t) == 0)
            throw TypeError("ArityMismatch", "phase(theta)* needs qubits or a function",
                            e.span);
        return t;
    }
    case Expr::Kind::BasisVal: {
        long long m = check_basis(e.basis);
        return normalize_type(TypeExpr::pow(TypeExpr::basis(), DimExpr::constant(m)));
    }
    case Expr::Kind::Translate: {
        check_translation(e.basis, e.basis2, ctx.tol);
        long long m = basis_qubit_count(e.basis);
        return TypeExpr::func(qubits_type(m), qubits_type(m), true);
    }
    case Expr::Kind::Measure: {
        check_measure(e.basis);
        long long m = basis_qubit_count(e.basis);
        return TypeExpr::func(qubits_type(m), bits_type(m), false);
    }
    case Expr::Kind::Pred: {
        long long m1 = check_basis(e.basis);
        TypeExpr ft = as_func_type(check_expr(e.sub[0], ctx), e.span);
        if (!ft.reversible)
            throw TypeError("NotReversible",
                            "the predicated function must be reversible", e.span);
        if (!is_qubits_only(ft.elems[0]) || !is_qubits_only(ft.elems[1]) ||
            qubit_count(ft.elems[0]) != qubit_count(ft.elems[1]))
            throw TypeError("ArityMismatch",
                            "predication needs a qubit[m] ->rev qubit[m] function",
                            e.span);
        long long m = m1 + qubit_count(ft.elems[0]);
        return TypeExpr::func(qubits_type(m), qubits_type(m), true);
    }
    case Expr::Kind::Reverse: {
        TypeExpr ft = as_func_type(check_expr(e.sub[0], ctx), e.span);
        if (!ft.reversible)
            throw TypeError("NotReversible", "~ needs a reversible function", e.span);
        if (!is_qubits_only(ft.elems[0]) || !is_qubits_only(ft.elems[1]) ||
            qubit_count(ft.elems[0]) != qubit_count(ft.elems[1]))
            throw TypeError("NotReversible",
                            "~ needs a qubit[m] ->rev qubit[m] function", e.span);
        return ft;
    }
    case Expr::Kind::Sugar: {
        if (e.sugar == SugarKind::Prep) {
            const Expr &op = e.sub[0];
            long long n;
            if (op.kind == Expr::Kind::QubitLit)
                n = op.ql.fold.value * static_cast<long long>(op.ql.syms.size());
            else if (op.kind == Expr::Kind::BitLit)
                n = static_cast<long long>(op.bits.size());
            else
                throw TypeError("NotABasis",
                                ".prep needs a qubit literal or bit capture", e.span);
            return TypeExpr::func(qubits_type(n), qubits_type(n), true);
        }
        long long m = check_basis(e.basis);
        if (basis_vector_count(e.basis) != 2)
            throw TypeError("FlipArity",
                            std::string(e.sugar == SugarKind::Flip ? ".flip" : ".rotate") +
                                " needs a two-vector basis",
                            e.span);
        return TypeExpr::func(qubits_type(m), qubits_type(m), true);
    }
    case Expr::Kind::Embed: {
        const Definition &fwd = ctx.prog->def(e.sub[0].name);
        long long n_in = 0;
        for (const auto &p : fwd.params)
            n_in += bit_count(p.type);
        long long n_out = bit_count(fwd.ret);
        switch (e.embed) {
        case EmbedKind::Xor:
            return TypeExpr::func(qubits_type(n_in + n_out), qubits_type(n_in + n_out),
                                  true);
        case EmbedKind::Phase:
            if (n_out != 1)
                throw TypeError("PhaseNeedsOneOutput",
                                "'" + fwd.name + "' returns " + std::to_string(n_out) +
                                    " bits; .phase needs exactly one",
                                e.span);
            return TypeExpr::func(qubits_type(n_in), qubits_type(n_in), true);
        case EmbedKind::InPlace: {
            const Definition &inv = ctx.prog->def(e.sub[1].name);
            long long i_in = 0;
            for (const auto &p : inv.params)
                i_in += bit_count(p.type);
            long long i_out = bit_count(inv.ret);
            if (n_in != n_out || i_in != i_out || n_in != i_in)
                throw TypeError("DimMismatch",
                                ".inplace needs matching n-to-n functions", e.span);
            return TypeExpr::func(qubits_type(n_in), qubits_type(n_in), true);
        }
        }
        break;
    }
    case Expr::Kind::FuncRef: {
        const Definition &d = ctx.prog->def(e.name);
        if (d.kind == Definition::Kind::Classical)
            throw TypeError("UnknownName",
                            "'" + e.name + "' is classical; embed it with .xor_embed, "
                            ".phase, or .inplace",
                            e.span);
        return def_signature(d);
    }
    case Expr::Kind::Unit:
        return TypeExpr::unit();
    case Expr::Kind::Instantiate:
    case Expr::Kind::CallCaps:
    case Expr::Kind::Repeat:
        throw TypeError("UnknownName", "unresolved node survived monomorphization",
                        e.span);
    }
    throw std::logic_error("unreachable Expr kind in check_expr");
}

void check_classical_def(const Definition &d) {
    std::map<std::string, long long> widths;
    for (const auto &p : d.params) {
        if (type_is_linear(p.type) || qubit_count(p.type) != 0)
            throw TypeError("DimMismatch",
                            "classical parameter '" + p.name + "' must be bits", p.span);
        widths[p.name] = bit_count(p.type);
    }
    long long w = classical_width(d.cbody, widths);
    long long want = bit_count(d.ret);
    if (w != want)
        throw TypeError("WidthMismatch",
                        "'" + d.name + "' produces " + std::to_string(w) +
                            " bits, declared " + std::to_string(want),
                        d.span);
}

} // namespace

TypeExpr def_signature(const Definition &d) {
    std::vector<TypeExpr> ins;
    for (const auto &p : d.params)
        ins.push_back(p.type);
    TypeExpr in = normalize_type(TypeExpr::tensor(std::move(ins)));
    bool rev = d.kind == Definition::Kind::Quantum && d.reversible;
    return TypeExpr::func(in, normalize_type(d.ret), rev);
}

std::map<std::string, TypeExpr> check_program(const SpecProgram &p, double tol) {
    std::map<std::string, TypeExpr> sigs;
    for (const auto &[name, d] : p.defs) {
        if (d.kind == Definition::Kind::Classical) {
            check_classical_def(d);
            sigs[name] = def_signature(d);
            continue;
        }
        CheckCtx ctx;
        ctx.prog = &p;
        ctx.in_rev = d.reversible;
        ctx.tol = tol;
        for (const auto &prm : d.params) {
            Binding b;
            b.type = normalize_type(prm.type);
            b.linear = type_is_linear(prm.type);
            b.span = prm.span;
            ctx.env[prm.name] = std::move(b);
        }
        TypeExpr body_t = check_expr(d.body, ctx);
        TypeExpr want = normalize_type(d.ret);
        if (!(normalize_type(body_t) == want))
            throw TypeError("DimMismatch",
                            "'" + name + "' returns " + body_t.str() + ", declared " +
                                want.str(),
                            d.span);
        for (const auto &[pname, b] : ctx.env)
            if (b.linear && !b.consumed)
                throw TypeError("LinearityViolation",
                                "qubit parameter '" + pname + "' is never used", b.span);
        if (d.reversible) {
            TypeExpr sig = def_signature(d);
            if (!is_qubits_only(sig.elems[0]) || !is_qubits_only(sig.elems[1]) ||
                qubit_count(sig.elems[0]) != qubit_count(sig.elems[1]))
                throw TypeError("NotReversible",
                                "rev kernel '" + name +
                                    "' must map qubit[m] to qubit[m]",
                                d.span);
        }
        sigs[name] = def_signature(d);
    }
    return sigs;
}

TypeExpr check_expression(const SpecProgram &p, const Expr &e, double tol) {
    CheckCtx ctx;
    ctx.prog = &p;
    ctx.tol = tol;
    ctx.in_rev = false;
    return check_expr(e, ctx);
}

} // namespace basisc
