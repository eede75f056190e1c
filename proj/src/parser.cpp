#include "basisc/parser.hpp"

#include <fstream>
#include <sstream>

// Recursive-descent parser for the .qw surface syntax. Operator precedence,
// tightest to loosest: postfix ([n], [[...]], (...), .method) > prefix
// (~, unary -, phase(theta)*) > tensor + > translation >> (non-associative) >
// predication & > pipe |.

namespace basisc {

namespace {

struct Parser {
    const std::vector<Token> &toks;
    size_t pos = 0;

    explicit Parser(const std::vector<Token> &t) : toks(t) {}

    const Token &cur() const { return toks[pos]; }
    const Token &peek(size_t n = 1) const {
        return toks[std::min(pos + n, toks.size() - 1)];
    }
    Token next() { return toks[pos++]; }
    bool at_end() const { return cur().kind == Token::Kind::End; }

    [[noreturn]] void fail(const std::string &msg, std::vector<std::string> exp = {}) {
        throw ParseError(msg + " (found '" + cur().lexeme + "')", cur().span,
                         std::move(exp));
    }

    bool eat_op(const char *op) {
        if (cur().is_op(op)) {
            pos++;
            return true;
        }
        return false;
    }
    void expect_op(const char *op) {
        if (!eat_op(op))
            fail(std::string("expected '") + op + "'", {op});
    }
    bool eat_kw(const char *kw) {
        if (cur().is_kw(kw)) {
            pos++;
            return true;
        }
        return false;
    }
    void expect_kw(const char *kw) {
        if (!eat_kw(kw))
            fail(std::string("expected '") + kw + "'", {kw});
    }
    std::string expect_ident() {
        if (cur().kind != Token::Kind::Ident)
            fail("expected identifier", {"identifier"});
        return next().lexeme;
    }

    // --- dimension expressions ------------------------------------------
    DimExpr parse_dim() {
        DimExpr lhs = parse_dim_term();
        while (cur().is_op("+") || cur().is_op("-")) {
            auto k = cur().is_op("+") ? DimExpr::Kind::Add : DimExpr::Kind::Sub;
            pos++;
            lhs = DimExpr::binary(k, std::move(lhs), parse_dim_term());
        }
        return lhs;
    }
    DimExpr parse_dim_term() {
        DimExpr lhs = parse_dim_pow();
        while (cur().is_op("*") || cur().is_op("/")) {
            auto k = cur().is_op("*") ? DimExpr::Kind::Mul : DimExpr::Kind::Div;
            pos++;
            lhs = DimExpr::binary(k, std::move(lhs), parse_dim_pow());
        }
        return lhs;
    }
    DimExpr parse_dim_pow() {
        DimExpr base = parse_dim_atom();
        if (eat_op("^"))
            return DimExpr::binary(DimExpr::Kind::Pow, std::move(base), parse_dim_pow());
        return base;
    }
    DimExpr parse_dim_atom() {
        if (cur().kind == Token::Kind::Int) {
            return DimExpr::constant(next().int_value);
        }
        if (cur().kind == Token::Kind::Ident) {
            return DimExpr::var(next().lexeme);
        }
        if (eat_op("(")) {
            DimExpr d = parse_dim();
            expect_op(")");
            return d;
        }
        fail("expected dimension expression", {"integer", "identifier", "("});
    }

    // --- angle expressions ----------------------------------------------
    AngleExpr parse_angle() {
        AngleExpr lhs = parse_angle_term();
        while (cur().is_op("+") || cur().is_op("-")) {
            auto k = cur().is_op("+") ? AngleExpr::Kind::Add : AngleExpr::Kind::Sub;
            pos++;
            lhs = AngleExpr::binary(k, std::move(lhs), parse_angle_term());
        }
        return lhs;
    }
    AngleExpr parse_angle_term() {
        AngleExpr lhs = parse_angle_unary();
        while (cur().is_op("*") || cur().is_op("/")) {
            auto k = cur().is_op("*") ? AngleExpr::Kind::Mul : AngleExpr::Kind::Div;
            pos++;
            lhs = AngleExpr::binary(k, std::move(lhs), parse_angle_unary());
        }
        return lhs;
    }
    AngleExpr parse_angle_unary() {
        if (eat_op("-"))
            return AngleExpr::unary(AngleExpr::Kind::Neg, parse_angle_unary());
        return parse_angle_pow();
    }
    AngleExpr parse_angle_pow() {
        AngleExpr base = parse_angle_atom();
        if (eat_op("^"))
            return AngleExpr::binary(AngleExpr::Kind::Pow, std::move(base),
                                     parse_angle_unary());
        return base;
    }
    AngleExpr parse_angle_atom() {
        if (cur().kind == Token::Kind::Float)
            return AngleExpr::number(next().float_value);
        if (cur().kind == Token::Kind::Int)
            return AngleExpr::number(static_cast<double>(next().int_value));
        if (eat_kw("pi"))
            return AngleExpr::pi();
        if (eat_kw("phases")) {
            expect_op("[");
            DimExpr idx = parse_dim();
            expect_op("]");
            return AngleExpr::phase_ref(std::move(idx));
        }
        if (cur().kind == Token::Kind::Ident)
            return AngleExpr::of_dim(DimExpr::var(next().lexeme));
        if (eat_op("(")) {
            AngleExpr a = parse_angle();
            expect_op(")");
            return a;
        }
        fail("expected angle expression");
    }

    // --- types -------------------------------------------------------------
    TypeExpr parse_type() {
        Span here = cur().span;
        if (eat_kw("qubit"))
            return parse_type_dim_suffix(TypeExpr::qubit());
        if (eat_kw("bit"))
            return parse_type_dim_suffix(TypeExpr::bit());
        if (eat_kw("basis"))
            return parse_type_dim_suffix(TypeExpr::basis());
        if (cur().is_kw("qfunc") || cur().is_kw("rev_qfunc") || cur().is_kw("cfunc")) {
            std::string kw = next().lexeme;
            expect_op("[");
            DimExpr n1 = parse_dim();
            expect_op(",");
            DimExpr n2 = parse_dim();
            expect_op("]");
            TypeExpr base = kw == "cfunc" ? TypeExpr::bit() : TypeExpr::qubit();
            return TypeExpr::func(TypeExpr::pow(base, n1), TypeExpr::pow(base, n2),
                                  kw == "rev_qfunc");
        }
        if (eat_op("(")) {
            if (eat_op(")"))
                return TypeExpr::unit();
            std::vector<TypeExpr> es;
            es.push_back(parse_type());
            while (eat_op(","))
                es.push_back(parse_type());
            expect_op(")");
            if (es.size() == 1)
                return es[0];
            return TypeExpr::tensor(std::move(es));
        }
        (void)here;
        fail("expected type", {"qubit", "bit", "basis", "qfunc", "rev_qfunc", "cfunc", "("});
    }
    TypeExpr parse_type_dim_suffix(TypeExpr base) {
        if (eat_op("[")) {
            DimExpr d = parse_dim();
            expect_op("]");
            return TypeExpr::pow(std::move(base), std::move(d));
        }
        return base;
    }

    // --- quantum expressions ---------------------------------------------
    bool at_def_start() const {
        return cur().is_kw("qpu") || cur().is_kw("classical");
    }

    Expr parse_pipeline() {
        Expr lhs = parse_stage();
        while (cur().is_op("|")) {
            Span sp = cur().span;
            pos++;
            Expr stage = parse_stage();
            Expr app = Expr::make(Expr::Kind::Apply, sp);
            app.sub.push_back(std::move(stage)); // sub[0] = function
            app.sub.push_back(std::move(lhs));   // sub[1] = argument
            lhs = std::move(app);
        }
        return lhs;
    }

    Expr parse_stage() {
        if (cur().is_kw("repeat")) {
            Span sp = next().span;
            Expr rep = Expr::make(Expr::Kind::Repeat, sp);
            rep.repeat_var = expect_ident();
            expect_kw("in");
            rep.repeat_lo = parse_dim();
            expect_op("..");
            rep.repeat_hi = parse_dim();
            expect_op(":");
            expect_op("(");
            rep.sub.push_back(parse_stage());
            while (eat_op("|"))
                rep.sub.push_back(parse_stage());
            expect_op(")");
            return rep;
        }
        return parse_pred();
    }

    Expr parse_pred() {
        Expr lhs = parse_trans();
        if (cur().is_op("&")) {
            Span sp = next().span;
            Expr rhs = parse_pred(); // right-associative
            Expr pred = Expr::make(Expr::Kind::Pred, sp);
            // Accept both `b & f` and `f & b` (the predicate side is the one
            // that reads as a basis).
            BasisExprAst bl = expr_to_basis(lhs);
            if (bl.kind != BasisExprAst::Kind::Invalid) {
                pred.basis = std::move(bl);
                pred.sub.push_back(std::move(rhs));
            } else {
                pred.basis = expr_to_basis(rhs);
                pred.sub.push_back(std::move(lhs));
            }
            return pred;
        }
        return lhs;
    }

    Expr parse_trans() {
        Expr lhs = parse_tensor();
        if (cur().is_op(">>")) {
            Span sp = next().span;
            Expr rhs = parse_tensor();
            if (cur().is_op(">>"))
                fail("'>>' is not associative; parenthesize");
            Expr tr = Expr::make(Expr::Kind::Translate, sp);
            tr.basis = expr_to_basis(lhs);
            tr.basis2 = expr_to_basis(rhs);
            return tr;
        }
        return lhs;
    }

    Expr parse_tensor() {
        Expr lhs = parse_prefix();
        if (!cur().is_op("+"))
            return lhs;
        Expr t = Expr::make(Expr::Kind::Tensor, cur().span);
        t.sub.push_back(std::move(lhs));
        while (eat_op("+"))
            t.sub.push_back(parse_prefix());
        return t;
    }

    Expr parse_prefix() {
        Span sp = cur().span;
        if (eat_op("~")) {
            Expr r = Expr::make(Expr::Kind::Reverse, sp);
            r.sub.push_back(parse_prefix());
            return r;
        }
        if (eat_op("-")) {
            // Unary minus is sugar for phase(pi)*.
            Expr p = Expr::make(Expr::Kind::Phase, sp);
            p.angle = AngleExpr::pi();
            p.sub.push_back(parse_prefix());
            return p;
        }
        if (cur().is_kw("phase") && peek().is_op("(")) {
            pos++;
            expect_op("(");
            AngleExpr a = parse_angle();
            expect_op(")");
            expect_op("*");
            Expr p = Expr::make(Expr::Kind::Phase, sp);
            p.angle = std::move(a);
            p.sub.push_back(parse_prefix());
            return p;
        }
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr e = parse_primary();
        for (;;) {
            if (cur().is_op("[") ) {
                Span sp = next().span;
                DimExpr d = parse_dim();
                expect_op("]");
                if (e.kind == Expr::Kind::QubitLit &&
                    e.ql.fold == DimExpr::constant(1)) {
                    e.ql.fold = std::move(d); // Tqlit's own repeat count
                } else if (e.kind == Expr::Kind::BasisVal) {
                    BasisExprAst f;
                    f.kind = BasisExprAst::Kind::Fold;
                    f.span = sp;
                    f.sub.push_back(std::move(e.basis));
                    f.dim = std::move(d);
                    e.basis = std::move(f);
                } else {
                    Expr f = Expr::make(Expr::Kind::Fold, sp);
                    f.sub.push_back(std::move(e));
                    f.dim = std::move(d);
                    e = std::move(f);
                }
                continue;
            }
            if (cur().is_op("[[")) {
                Span sp = next().span;
                if (e.kind != Expr::Kind::Var)
                    fail("'[[...]]' instantiation requires a name");
                Expr inst = Expr::make(Expr::Kind::Instantiate, sp);
                inst.name = e.name;
                if (!cur().is_op("]]")) {
                    inst.inst_dims.push_back(parse_inst_dim());
                    while (eat_op(","))
                        inst.inst_dims.push_back(parse_inst_dim());
                }
                expect_op("]]");
                e = std::move(inst);
                continue;
            }
            if (cur().is_op("(")) {
                Span sp = next().span;
                if (eat_op(")")) {
                    // f() is sugar for () | f
                    Expr app = Expr::make(Expr::Kind::Apply, sp);
                    app.sub.push_back(std::move(e));
                    app.sub.push_back(Expr::make(Expr::Kind::Unit, sp));
                    e = std::move(app);
                } else {
                    Expr call = Expr::make(Expr::Kind::CallCaps, sp);
                    call.sub.push_back(std::move(e));
                    call.sub.push_back(parse_pipeline());
                    while (eat_op(","))
                        call.sub.push_back(parse_pipeline());
                    expect_op(")");
                    e = std::move(call);
                }
                continue;
            }
            if (cur().is_op(".")) {
                Span sp = next().span;
                std::string method;
                if (cur().kind == Token::Kind::Ident || cur().kind == Token::Kind::Keyword)
                    method = next().lexeme;
                else
                    fail("expected method name after '.'");
                if (method == "measure") {
                    Expr m = Expr::make(Expr::Kind::Measure, sp);
                    m.basis = expr_to_basis(e);
                    e = std::move(m);
                } else if (method == "flip" || method == "prep" || method == "rotate") {
                    Expr s = Expr::make(Expr::Kind::Sugar, sp);
                    if (method == "flip") {
                        s.sugar = SugarKind::Flip;
                        s.basis = expr_to_basis(e);
                    } else if (method == "rotate") {
                        s.sugar = SugarKind::Rotate;
                        expect_op("(");
                        s.angle = parse_angle();
                        expect_op(")");
                        s.basis = expr_to_basis(e);
                    } else {
                        s.sugar = SugarKind::Prep;
                        s.basis.kind = BasisExprAst::Kind::Invalid;
                        s.sub.push_back(std::move(e)); // qubit literal or bit capture
                    }
                    e = std::move(s);
                } else if (method == "xor_embed" || method == "phase" || method == "inplace") {
                    Expr em = Expr::make(Expr::Kind::Embed, sp);
                    em.sub.push_back(std::move(e));
                    if (method == "xor_embed") {
                        em.embed = EmbedKind::Xor;
                    } else if (method == "phase") {
                        em.embed = EmbedKind::Phase;
                    } else {
                        em.embed = EmbedKind::InPlace;
                        expect_op("(");
                        em.sub.push_back(parse_pipeline());
                        expect_op(")");
                    }
                    e = std::move(em);
                } else {
                    fail("unknown method '." + method + "'");
                }
                continue;
            }
            break;
        }
        return e;
    }

    std::optional<DimExpr> parse_inst_dim() {
        if (eat_op("..."))
            return std::nullopt;
        return parse_dim();
    }

    Expr parse_primary() {
        Span sp = cur().span;
        if (cur().kind == Token::Kind::QubitStr) {
            Expr e = Expr::make(Expr::Kind::QubitLit, sp);
            e.ql.syms = next().lexeme;
            return e;
        }
        if (cur().kind == Token::Kind::BitStr) {
            Expr e = Expr::make(Expr::Kind::BitLit, sp);
            for (char c : next().lexeme)
                e.bits.push_back(c == '1');
            return e;
        }
        if (cur().is_op("(")) {
            pos++;
            if (eat_op(")"))
                return Expr::make(Expr::Kind::Unit, sp);
            Expr inner = parse_pipeline();
            expect_op(")");
            return inner;
        }
        if (cur().is_op("{")) {
            pos++;
            Expr e = Expr::make(Expr::Kind::BasisVal, sp);
            e.basis.kind = BasisExprAst::Kind::Literal;
            e.basis.span = sp;
            e.basis.vectors.push_back(parse_basis_vector());
            while (eat_op(","))
                e.basis.vectors.push_back(parse_basis_vector());
            expect_op("}");
            return e;
        }
        if (cur().is_kw("std") || cur().is_kw("pm") || cur().is_kw("ij")) {
            std::string kw = next().lexeme;
            Expr e = Expr::make(Expr::Kind::BasisVal, sp);
            e.basis.kind = kw == "std" ? BasisExprAst::Kind::Std
                         : kw == "pm"  ? BasisExprAst::Kind::Pm
                                       : BasisExprAst::Kind::Ij;
            e.basis.span = sp;
            return e;
        }
        if (eat_kw("fourier")) {
            expect_op("[");
            DimExpr d = parse_dim();
            expect_op("]");
            Expr e = Expr::make(Expr::Kind::BasisVal, sp);
            e.basis.kind = BasisExprAst::Kind::Fourier;
            e.basis.dim = std::move(d);
            e.basis.span = sp;
            return e;
        }
        if (cur().is_kw("id") || cur().is_kw("discard") || cur().is_kw("discardz")) {
            std::string kw = next().lexeme;
            Expr e = Expr::make(Expr::Kind::BuiltIn, sp);
            e.builtin = kw == "id"      ? BuiltinKind::Id
                      : kw == "discard" ? BuiltinKind::Discard
                                        : BuiltinKind::DiscardZ;
            return e;
        }
        if (cur().kind == Token::Kind::Ident) {
            Expr e = Expr::make(Expr::Kind::Var, sp);
            e.name = next().lexeme;
            return e;
        }
        fail("expected expression");
    }

    BasisVectorAst parse_basis_vector() {
        BasisVectorAst v;
        v.span = cur().span;
        AngleExpr phase = AngleExpr::number(0.0);
        bool have_phase = false;
        for (;;) {
            if (cur().is_kw("phase") && peek().is_op("(")) {
                pos++;
                expect_op("(");
                AngleExpr a = parse_angle();
                expect_op(")");
                expect_op("*");
                phase = have_phase
                            ? AngleExpr::binary(AngleExpr::Kind::Add, phase, a)
                            : a;
                have_phase = true;
                continue;
            }
            if (cur().is_op("-")) {
                pos++;
                phase = have_phase
                            ? AngleExpr::binary(AngleExpr::Kind::Add, phase, AngleExpr::pi())
                            : AngleExpr::pi();
                have_phase = true;
                continue;
            }
            break;
        }
        if (cur().kind != Token::Kind::QubitStr)
            fail("expected qubit literal in basis vector");
        v.ql.syms = next().lexeme;
        if (eat_op("[")) {
            v.ql.fold = parse_dim();
            expect_op("]");
        }
        v.phase = std::move(phase);
        return v;
    }

    // --- classical expressions ---------------------------------------------
    // Precedence: postfix > ~ > concat + > & > ^ > |
    ClassicalExpr parse_cexpr() { return parse_cor(); }

    ClassicalExpr parse_cor() {
        ClassicalExpr lhs = parse_cxor();
        while (cur().is_op("|")) {
            Span sp = next().span;
            ClassicalExpr n;
            n.kind = ClassicalExpr::Kind::Or;
            n.span = sp;
            n.sub.push_back(std::move(lhs));
            n.sub.push_back(parse_cxor());
            lhs = std::move(n);
        }
        return lhs;
    }
    ClassicalExpr parse_cxor() {
        ClassicalExpr lhs = parse_cand();
        while (cur().is_op("^")) {
            Span sp = next().span;
            ClassicalExpr n;
            n.kind = ClassicalExpr::Kind::Xor;
            n.span = sp;
            n.sub.push_back(std::move(lhs));
            n.sub.push_back(parse_cand());
            lhs = std::move(n);
        }
        return lhs;
    }
    ClassicalExpr parse_cand() {
        ClassicalExpr lhs = parse_cconcat();
        while (cur().is_op("&")) {
            Span sp = next().span;
            ClassicalExpr n;
            n.kind = ClassicalExpr::Kind::And;
            n.span = sp;
            n.sub.push_back(std::move(lhs));
            n.sub.push_back(parse_cconcat());
            lhs = std::move(n);
        }
        return lhs;
    }
    ClassicalExpr parse_cconcat() {
        ClassicalExpr lhs = parse_cunary();
        if (!cur().is_op("+"))
            return lhs;
        ClassicalExpr n;
        n.kind = ClassicalExpr::Kind::Concat;
        n.span = cur().span;
        n.sub.push_back(std::move(lhs));
        while (eat_op("+"))
            n.sub.push_back(parse_cunary());
        return n;
    }
    ClassicalExpr parse_cunary() {
        if (cur().is_op("~")) {
            Span sp = next().span;
            ClassicalExpr n;
            n.kind = ClassicalExpr::Kind::Not;
            n.span = sp;
            n.sub.push_back(parse_cunary());
            return n;
        }
        return parse_cpostfix();
    }
    ClassicalExpr parse_cpostfix() {
        ClassicalExpr e = parse_cprimary();
        for (;;) {
            if (cur().is_op("[")) {
                Span sp = next().span;
                DimExpr lo = parse_dim();
                ClassicalExpr n;
                n.span = sp;
                n.kind = ClassicalExpr::Kind::Slice;
                if (eat_op(":")) {
                    n.lo = std::move(lo);
                    n.hi = parse_dim();
                } else {
                    // x[i] is the one-bit slice x[i:i+1]
                    n.hi = DimExpr::binary(DimExpr::Kind::Add, lo, DimExpr::constant(1));
                    n.lo = std::move(lo);
                }
                expect_op("]");
                n.sub.push_back(std::move(e));
                e = std::move(n);
                continue;
            }
            if (cur().is_op("==")) {
                Span sp = next().span;
                if (cur().kind != Token::Kind::BitStr)
                    fail("expected 0b... constant after '=='");
                ClassicalExpr n;
                n.kind = ClassicalExpr::Kind::EqConst;
                n.span = sp;
                for (char c : next().lexeme)
                    n.bits.push_back(c == '1');
                n.sub.push_back(std::move(e));
                e = std::move(n);
                continue;
            }
            if (cur().is_op(".")) {
                Span sp = next().span;
                std::string method;
                if (cur().kind == Token::Kind::Ident || cur().kind == Token::Kind::Keyword)
                    method = next().lexeme;
                else
                    fail("expected method name after '.'");
                ClassicalExpr n;
                n.span = sp;
                if (method == "xor_reduce" || method == "and_reduce" || method == "or_reduce") {
                    expect_op("(");
                    expect_op(")");
                    n.kind = method == "xor_reduce" ? ClassicalExpr::Kind::XorReduce
                           : method == "and_reduce" ? ClassicalExpr::Kind::AndReduce
                                                    : ClassicalExpr::Kind::OrReduce;
                } else if (method == "rotl" || method == "rotr") {
                    expect_op("(");
                    n.lo = parse_dim();
                    expect_op(")");
                    n.kind = method == "rotl" ? ClassicalExpr::Kind::RotL
                                              : ClassicalExpr::Kind::RotR;
                } else if (method == "zero_extend") {
                    expect_op("(");
                    n.lo = parse_dim();
                    expect_op(")");
                    n.kind = ClassicalExpr::Kind::ZeroExtend;
                } else if (method == "mul_const_mod") {
                    expect_op("(");
                    n.lo = parse_dim();
                    expect_op(",");
                    n.hi = parse_dim();
                    expect_op(")");
                    n.kind = ClassicalExpr::Kind::MulConstMod;
                } else {
                    fail("unknown classical method '." + method + "'");
                }
                n.sub.push_back(std::move(e));
                e = std::move(n);
                continue;
            }
            break;
        }
        return e;
    }
    ClassicalExpr parse_cprimary() {
        Span sp = cur().span;
        if (cur().kind == Token::Kind::BitStr) {
            ClassicalExpr e;
            e.kind = ClassicalExpr::Kind::BitConst;
            e.span = sp;
            for (char c : next().lexeme)
                e.bits.push_back(c == '1');
            return e;
        }
        if (cur().kind == Token::Kind::Ident) {
            ClassicalExpr e;
            e.kind = ClassicalExpr::Kind::InputRef;
            e.span = sp;
            e.name = next().lexeme;
            return e;
        }
        if (eat_op("(")) {
            ClassicalExpr e = parse_cexpr();
            expect_op(")");
            return e;
        }
        fail("expected classical expression");
    }

    // --- definitions -------------------------------------------------------
    Definition parse_def() {
        Definition d;
        d.span = cur().span;
        if (eat_kw("qpu"))
            d.kind = Definition::Kind::Quantum;
        else if (eat_kw("classical"))
            d.kind = Definition::Kind::Classical;
        else
            fail("expected 'qpu' or 'classical'", {"qpu", "classical"});
        d.reversible = eat_kw("rev");
        d.name = expect_ident();
        if (eat_op("[")) {
            d.dim_vars.push_back(expect_ident());
            while (eat_op(","))
                d.dim_vars.push_back(expect_ident());
            expect_op("]");
        }
        for (size_t i = 0; i < d.dim_vars.size(); i++)
            for (size_t j = i + 1; j < d.dim_vars.size(); j++)
                if (d.dim_vars[i] == d.dim_vars[j])
                    fail("duplicate dimension variable '" + d.dim_vars[i] + "'");
        expect_op("(");
        if (!cur().is_op(")")) {
            do {
                Param p;
                p.span = cur().span;
                p.name = expect_ident();
                expect_op(":");
                p.type = parse_type();
                d.params.push_back(std::move(p));
            } while (eat_op(","));
        }
        expect_op(")");
        for (size_t i = 0; i < d.params.size(); i++)
            for (size_t j = i + 1; j < d.params.size(); j++)
                if (d.params[i].name == d.params[j].name)
                    fail("duplicate parameter '" + d.params[i].name + "'");
        expect_op("->");
        d.ret = parse_type();
        expect_op(":");
        if (d.kind == Definition::Kind::Quantum)
            d.body = normalize_tensors(parse_pipeline());
        else
            d.cbody = parse_cexpr();
        return d;
    }

    ProgramAst parse_program() {
        ProgramAst p;
        while (!at_end())
            p.defs.push_back(parse_def());
        return p;
    }
};

} // namespace

BasisExprAst expr_to_basis(const Expr &e) {
    BasisExprAst invalid;
    invalid.kind = BasisExprAst::Kind::Invalid;
    invalid.span = e.span;

    switch (e.kind) {
    case Expr::Kind::BasisVal:
        return e.basis;
    case Expr::Kind::QubitLit: {
        // Bare qubit literal promotes to a singleton basis literal.
        BasisExprAst b;
        b.kind = BasisExprAst::Kind::Literal;
        b.span = e.span;
        BasisVectorAst v;
        v.ql = e.ql;
        v.span = e.span;
        b.vectors.push_back(std::move(v));
        return b;
    }
    case Expr::Kind::Phase: {
        BasisExprAst inner = expr_to_basis(e.sub[0]);
        if (inner.kind == BasisExprAst::Kind::Literal && inner.vectors.size() == 1) {
            BasisVectorAst v = inner.vectors[0];
            v.phase = v.phase == AngleExpr::number(0.0)
                          ? e.angle
                          : AngleExpr::binary(AngleExpr::Kind::Add, v.phase, e.angle);
            inner.vectors[0] = std::move(v);
            return inner;
        }
        return invalid;
    }
    case Expr::Kind::Tensor: {
        BasisExprAst b;
        b.kind = BasisExprAst::Kind::Tensor;
        b.span = e.span;
        for (const auto &s : e.sub) {
            BasisExprAst c = expr_to_basis(s);
            if (c.kind == BasisExprAst::Kind::Invalid)
                return invalid;
            b.sub.push_back(std::move(c));
        }
        return b;
    }
    case Expr::Kind::Fold: {
        BasisExprAst inner = expr_to_basis(e.sub[0]);
        if (inner.kind == BasisExprAst::Kind::Invalid)
            return invalid;
        BasisExprAst b;
        b.kind = BasisExprAst::Kind::Fold;
        b.span = e.span;
        b.sub.push_back(std::move(inner));
        b.dim = e.dim;
        return b;
    }
    default:
        return invalid;
    }
}

ProgramAst parse(const std::vector<Token> &tokens) {
    Parser p(tokens);
    return p.parse_program();
}

ProgramAst parse_source(const std::string &source) {
    return parse(lex(source));
}

ProgramAst parse_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_source(ss.str());
}

Expr parse_expression(const std::string &source) {
    auto toks = lex(source);
    Parser p(toks);
    Expr e = p.parse_pipeline();
    if (!p.at_end())
        throw ParseError("trailing input after expression", p.cur().span);
    return normalize_tensors(e);
}

} // namespace basisc
