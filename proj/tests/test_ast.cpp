#include <doctest.h>

#include <random>

#include "basisc/ast.hpp"
#include "basisc/parser.hpp"

using namespace basisc;

namespace {

Expr tensor_of(std::vector<Expr> es) {
    Expr t = Expr::make(Expr::Kind::Tensor);
    t.sub = std::move(es);
    return t;
}

Expr var(const std::string &n) {
    Expr v = Expr::make(Expr::Kind::Var);
    v.name = n;
    return v;
}

// Random expression trees over tensors, units, vars and folds, for the
// idempotence / commutation properties.
Expr random_expr(std::mt19937_64 &rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 4);
    switch (pick(rng)) {
    case 0:
        return Expr::make(Expr::Kind::Unit);
    case 1:
        return var("x" + std::to_string(rng() % 3));
    case 2: {
        Expr q = Expr::make(Expr::Kind::QubitLit);
        q.ql.syms = "+";
        q.ql.fold = DimExpr::var("N");
        return q;
    }
    case 3: {
        std::uniform_int_distribution<int> n(0, 3);
        std::vector<Expr> es;
        for (int i = n(rng); i > 0; i--)
            es.push_back(random_expr(rng, depth - 1));
        return tensor_of(std::move(es));
    }
    default: {
        Expr f = Expr::make(Expr::Kind::Fold);
        f.sub.push_back(random_expr(rng, depth - 1));
        f.dim = DimExpr::binary(DimExpr::Kind::Add, DimExpr::var("N"),
                                DimExpr::constant(1));
        return f;
    }
    }
}

long long slow_pow_mod(long long b, long long e, long long m) {
    long long r = 1 % m;
    for (long long i = 0; i < e; i++)
        r = r * b % m;
    return r;
}

} // namespace

TEST_CASE("normalize_tensors flattens nested tensors") {
    Expr nested = tensor_of({var("a"), tensor_of({var("b"), var("c")})});
    Expr flat = normalize_tensors(nested);
    REQUIRE(flat.kind == Expr::Kind::Tensor);
    REQUIRE(flat.sub.size() == 3);
    CHECK(flat.sub[0].name == "a");
    CHECK(flat.sub[1].name == "b");
    CHECK(flat.sub[2].name == "c");
}

TEST_CASE("normalize_tensors collapses singleton tensors") {
    Expr single = tensor_of({var("a")});
    CHECK(normalize_tensors(single) == var("a"));
}

TEST_CASE("normalize_tensors absorbs unit") {
    Expr t = tensor_of({Expr::make(Expr::Kind::Unit), var("a")});
    CHECK(normalize_tensors(t) == var("a"));
    Expr all_units =
        tensor_of({Expr::make(Expr::Kind::Unit), Expr::make(Expr::Kind::Unit)});
    CHECK(normalize_tensors(all_units).kind == Expr::Kind::Unit);
}

TEST_CASE("normalize_tensors is idempotent on random trees") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 300; i++) {
        Expr e = random_expr(rng, 4);
        Expr once = normalize_tensors(e);
        CHECK(normalize_tensors(once) == once);
    }
}

TEST_CASE("substitute_dims evaluates literal repeats") {
    Expr q = Expr::make(Expr::Kind::QubitLit);
    q.ql.syms = "+";
    q.ql.fold = DimExpr::var("N");
    Expr got = substitute_dims(q, {{"N", 3}});
    CHECK(got.ql.fold == DimExpr::constant(3));
}

TEST_CASE("substitute_dims with no variables leaves the tree unchanged") {
    Expr e = parse_expression("'01' + '1'[2]");
    CHECK(substitute_dims(e, {}) == e);
}

TEST_CASE("substitute_dims evaluates power arithmetic") {
    Expr f = Expr::make(Expr::Kind::Fold);
    f.sub.push_back(var("a"));
    f.dim = DimExpr::binary(DimExpr::Kind::Pow, DimExpr::constant(2), DimExpr::var("J"));
    Expr got = substitute_dims(f, {{"J", 3}});
    CHECK(got.dim == DimExpr::constant(8));
}

TEST_CASE("substitute_dims reports unbound and negative dimensions") {
    Expr q = Expr::make(Expr::Kind::QubitLit);
    q.ql.syms = "0";
    q.ql.fold = DimExpr::var("M");
    CHECK_THROWS_WITH_AS(substitute_dims(q, {{"N", 1}}),
                         doctest::Contains("UnboundDimVar"), TypeError);
    q.ql.fold =
        DimExpr::binary(DimExpr::Kind::Sub, DimExpr::var("N"), DimExpr::constant(5));
    CHECK_THROWS_WITH_AS(substitute_dims(q, {{"N", 1}}),
                         doctest::Contains("NegativeDim"), TypeError);
}

TEST_CASE("substitute_dims commutes with normalize_tensors") {
    std::mt19937_64 rng(7);
    DimBindings b{{"N", 2}};
    for (int i = 0; i < 300; i++) {
        Expr e = random_expr(rng, 4);
        CHECK(substitute_dims(normalize_tensors(e), b) ==
              normalize_tensors(substitute_dims(e, b)));
    }
}

TEST_CASE("type normalization flattens and expands powers") {
    TypeExpr t = TypeExpr::tensor(
        {TypeExpr::qubit(), TypeExpr::tensor({TypeExpr::qubit(), TypeExpr::unit()}),
         TypeExpr::pow(TypeExpr::bit(), DimExpr::constant(2))});
    TypeExpr n = normalize_type(t);
    REQUIRE(n.kind == TypeExpr::Kind::Tensor);
    CHECK(n.elems.size() == 4);
    CHECK(qubit_count(n) == 2);
    CHECK(bit_count(n) == 2);
    CHECK(normalize_type(n) == n);
}

TEST_CASE("linearity depends on qubit components, not function signatures") {
    CHECK(type_is_linear(TypeExpr::qubit()));
    CHECK(type_is_linear(qubits_type(3)));
    CHECK_FALSE(type_is_linear(bits_type(4)));
    CHECK_FALSE(
        type_is_linear(TypeExpr::func(TypeExpr::qubit(), TypeExpr::qubit(), true)));
}

TEST_CASE("dim expression arithmetic, including modular power evaluation") {
    DimExpr e = DimExpr::binary(
        DimExpr::Kind::Div,
        DimExpr::binary(DimExpr::Kind::Mul, DimExpr::var("N"), DimExpr::constant(3)),
        DimExpr::constant(2));
    CHECK(e.eval({{"N", 5}}) == 7);

    DimExpr p = DimExpr::binary(
        DimExpr::Kind::Pow, DimExpr::constant(7),
        DimExpr::binary(DimExpr::Kind::Pow, DimExpr::constant(2), DimExpr::var("J")));
    CHECK(p.eval({{"J", 9}}, {}, 15) == slow_pow_mod(7, 512, 15));
    CHECK(p.eval({{"J", 3}}, {}, 15) == slow_pow_mod(7, 8, 15));
}
