#include <doctest.h>

#include <random>

#include "basisc/basis.hpp"
#include "basisc/parser.hpp"

using namespace basisc;

namespace {

BasisExprAst basis_of(const std::string &src) {
    Expr e = parse_expression(src);
    BasisExprAst b = expr_to_basis(e);
    REQUIRE(b.kind != BasisExprAst::Kind::Invalid);
    return substitute_basis(b, {}, {});
}

Mat dense_of(const std::string &b1, const std::string &b2) {
    return translation_unitary(veclist(basis_of(b1)), veclist(basis_of(b2))).dense();
}

bool vec_close(const Vec &a, const Vec &b, double tol = 1e-9) {
    if (a.size() != b.size())
        return false;
    double d = 0;
    for (size_t i = 0; i < a.size(); i++)
        d += std::norm(a[i] - b[i]);
    return std::sqrt(d) < tol;
}

constexpr double kPi = 3.14159265358979323846;

Mat mat2(cplx a, cplx b, cplx c, cplx d) {
    Mat m(2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    return m;
}

} // namespace

TEST_CASE("veclist of the built-in bases") {
    BasisValue std_b = veclist(basis_of("std"));
    CHECK(std_b.m == 1);
    CHECK(vec_close(std_b.vectors[0], {1.0, 0.0}));
    CHECK(vec_close(std_b.vectors[1], {0.0, 1.0}));

    const double s = 1.0 / std::sqrt(2.0);
    BasisValue ij_b = veclist(basis_of("ij"));
    CHECK(vec_close(ij_b.vectors[0], {s, cplx(0, s)}));
    CHECK(vec_close(ij_b.vectors[1], {s, cplx(0, -s)})); // 'j' is |-i>
}

TEST_CASE("pm[2] orders vectors by the pairwise product") {
    BasisValue v = veclist(basis_of("pm[2]"));
    REQUIRE(v.count() == 4);
    const double h = 0.5;
    CHECK(vec_close(v.vectors[0], {h, h, h, h}));     // ++
    CHECK(vec_close(v.vectors[1], {h, -h, h, -h}));   // +-
    CHECK(vec_close(v.vectors[2], {h, h, -h, -h}));   // -+
    CHECK(vec_close(v.vectors[3], {h, -h, -h, h}));   // --
}

TEST_CASE("fourier[2] vector F_1 is (1, i, -1, -i)/2") {
    BasisValue v = veclist(basis_of("fourier[2]"));
    REQUIRE(v.count() == 4);
    CHECK(vec_close(v.vectors[1], {0.5, cplx(0, 0.5), -0.5, cplx(0, -0.5)}));
}

TEST_CASE("orthonormality of corpus-style bases") {
    for (const char *b : {"std", "pm", "ij", "fourier[3]", "pm[2]",
                          "{'0', phase(0.7)*'1'}", "{'00','11'}"}) {
        BasisValue v = veclist(basis_of(b));
        for (size_t i = 0; i < v.count(); i++)
            for (size_t j = 0; j < v.count(); j++) {
                cplx ip = 0;
                for (size_t k = 0; k < v.vectors[i].size(); k++)
                    ip += std::conj(v.vectors[i][k]) * v.vectors[j][k];
                CHECK(std::abs(ip - (i == j ? cplx(1) : cplx(0))) < 1e-9);
            }
    }
}

TEST_CASE("span equality: std vs pm, fourier[1] vs pm") {
    CHECK(span_equal(veclist(basis_of("std")), veclist(basis_of("pm"))));
    CHECK(span_equal(veclist(basis_of("fourier[1]")), veclist(basis_of("pm"))));
    // F_0 = |+>, F_1 = |->
    BasisValue f1 = veclist(basis_of("fourier[1]"));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(vec_close(f1.vectors[0], {s, s}));
    CHECK(vec_close(f1.vectors[1], {s, -s}));
}

TEST_CASE("span distance of {'0'} vs {'1'} is sqrt(2)") {
    BasisValue a = veclist(basis_of("{'0'}")), b = veclist(basis_of("{'1'}"));
    CHECK_FALSE(span_equal(a, b));
    CHECK(span_distance(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("span difference of two 2-dim subspaces is detected") {
    BasisValue a = veclist(basis_of("{'00','11'}"));
    BasisValue b = veclist(basis_of("{'++','--'}"));
    CHECK_FALSE(span_equal(a, b));
    CHECK(span_distance(a, b) > 0.5);
}

TEST_CASE("std >> {'1','0'} lowers to the Pauli X matrix") {
    Mat u = dense_of("std", "{'1','0'}");
    CHECK(u.max_abs_diff(mat2(0, 1, 1, 0)) < 1e-9);
}

TEST_CASE("std >> std is the identity") {
    Mat u = dense_of("std", "std");
    CHECK(u.max_abs_diff(Mat::identity(2)) < 1e-9);
}

TEST_CASE("a subspace translation in the '1' sector gives CNOT") {
    Mat u = dense_of("'1' + std", "'1' + {'1','0'}");
    Mat cnot(4);
    cnot.at(0, 0) = cnot.at(1, 1) = 1.0; // identity outside the '1' subspace
    cnot.at(2, 3) = cnot.at(3, 2) = 1.0;
    CHECK(u.max_abs_diff(cnot) < 1e-9);
}

TEST_CASE("std >> fourier at one qubit is the Hadamard") {
    Mat u = dense_of("std", "fourier[1]");
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(u.max_abs_diff(mat2(s, s, s, -s)) < 1e-9);
}

TEST_CASE("std[n] >> fourier[n] columns are the Fourier vectors") {
    BasisValue f = veclist(basis_of("fourier[3]"));
    Mat u = dense_of("std[3]", "fourier[3]");
    for (size_t j = 0; j < 8; j++) {
        Vec col(8);
        for (size_t r = 0; r < 8; r++)
            col[r] = u.at(r, j);
        CHECK(vec_close(col, f.vectors[j]));
    }
}

TEST_CASE("translations are unitary and act elementwise") {
    std::pair<const char *, const char *> cases[] = {
        {"std", "pm"},
        {"pm", "ij"},
        {"std[2]", "fourier[2]"},
        {"{'00','11'}", "{'11','00'}"},
        {"{'+'}", "{-'+'}"},
        {"fourier[2]", "std[2]"},
        {"{'0', phase(0.3)*'1'}", "{phase(1.1)*'1', '0'}"},
    };
    for (auto [s1, s2] : cases) {
        CAPTURE(s1);
        CAPTURE(s2);
        BasisValue b1 = veclist(basis_of(s1)), b2 = veclist(basis_of(s2));
        UnitaryBlock u = translation_unitary(b1, b2);
        Mat m = u.dense();
        CHECK(m.is_unitary(1e-9));
        for (size_t k = 0; k < b1.count(); k++)
            CHECK(vec_close(m.apply(b1.vectors[k]), b2.vectors[k]));
    }
}

TEST_CASE("translation endpoint mismatches raise the designated errors") {
    CHECK_THROWS_WITH_AS(
        translation_unitary(veclist(basis_of("{'00','11'}")),
                            veclist(basis_of("{'++','--'}"))),
        doctest::Contains("SpanMismatch"), TypeError);
    CHECK_THROWS_WITH_AS(
        translation_unitary(veclist(basis_of("std")), veclist(basis_of("std[2]"))),
        doctest::Contains("DimMismatch"), TypeError);
}

TEST_CASE("Gram-Schmidt extension is deterministic") {
    Mat a = dense_of("{'+'}", "{-'+'}");
    Mat b = dense_of("{'+'}", "{-'+'}");
    CHECK(a.max_abs_diff(b) == 0.0);
    // I - 2|+><+| in the standard basis
    Mat expect = mat2(0, -1, -1, 0);
    CHECK(a.max_abs_diff(expect) < 1e-9);
}

TEST_CASE("rotate composes additively and reverses by negation") {
    auto rot = [](double theta) {
        Expr tr = desugar_rotate(basis_of("std"), theta);
        return translation_unitary(veclist(tr.basis), veclist(tr.basis2)).dense();
    };
    double t1 = 0.7, t2 = 1.1;
    Mat composed = rot(t2).mul(rot(t1));
    CHECK(composed.max_abs_diff(rot(t1 + t2)) < 1e-9);
    // ~std.rotate(pi/4) == std.rotate(-pi/4)
    Mat fwd = rot(kPi / 4);
    CHECK(fwd.dagger().max_abs_diff(rot(-kPi / 4)) < 1e-9);
}

namespace {

// {sym1, sym2} >> {phase(t1)*sym1, phase(t2)*sym2} built with exact angles.
Mat phased_pair_translation(const char *syms, double t1, double t2) {
    BasisExprAst from;
    from.kind = BasisExprAst::Kind::Literal;
    BasisExprAst to = from;
    for (int i = 0; i < 2; i++) {
        BasisVectorAst v;
        v.ql.syms = std::string(1, syms[i]);
        from.vectors.push_back(v);
        v.phase = AngleExpr::number(i == 0 ? t1 : t2);
        to.vectors.push_back(v);
    }
    return translation_unitary(veclist(from), veclist(to)).dense();
}

} // namespace

TEST_CASE("universality: Rz, Ry, global phase, CNOT") {
    for (double theta : {kPi / 7, kPi / 3, 1.0}) {
        CAPTURE(theta);
        cplx em = std::polar(1.0, -theta / 2), ep = std::polar(1.0, theta / 2);

        Mat urz = phased_pair_translation("01", -theta / 2, theta / 2);
        CHECK(urz.max_abs_diff(mat2(em, 0, 0, ep)) < 1e-9);

        Mat ury = phased_pair_translation("ij", -theta / 2, theta / 2);
        double c = std::cos(theta / 2), s = std::sin(theta / 2);
        CHECK(ury.max_abs_diff(mat2(c, -s, s, c)) < 1e-9);

        Mat ugp = phased_pair_translation("01", theta, theta);
        Mat expect_gp(2);
        expect_gp.at(0, 0) = expect_gp.at(1, 1) = std::polar(1.0, theta);
        CHECK(ugp.max_abs_diff(expect_gp) < 1e-9);
    }
}

TEST_CASE("predication builds C_bU") {
    BasisValue one = veclist(basis_of("{'1'}"));
    UnitaryBlock x;
    x.m = 1;
    x.matrix = mat2(0, 1, 1, 0);
    Mat cnot = predicated_unitary(one, x).dense();
    Mat expect(4);
    expect.at(0, 0) = expect.at(1, 1) = 1.0;
    expect.at(2, 3) = expect.at(3, 2) = 1.0;
    CHECK(cnot.max_abs_diff(expect) < 1e-9);
}

TEST_CASE("a full-span predicate is no predicate") {
    BasisValue full = veclist(basis_of("std"));
    UnitaryBlock x;
    x.m = 1;
    x.matrix = mat2(0, 1, 1, 0);
    Mat u = predicated_unitary(full, x).dense();
    Mat expect(4); // I (x) X
    expect.at(0, 1) = expect.at(1, 0) = 1.0;
    expect.at(2, 3) = expect.at(3, 2) = 1.0;
    CHECK(u.max_abs_diff(expect) < 1e-9);
}

TEST_CASE("a |-> input stays outside a {'+'} predicate") {
    BasisValue plus = veclist(basis_of("{'+'}"));
    UnitaryBlock z;
    z.m = 1;
    z.matrix = mat2(1, 0, 0, -1);
    Mat u = predicated_unitary(plus, z).dense();
    const double s = 1.0 / std::sqrt(2.0);
    Vec minus_zero = {s, 0.0, -s, 0.0}; // |-> (x) |0>
    CHECK(vec_close(u.apply(minus_zero), minus_zero));
}

TEST_CASE("measurement projectors are complete") {
    for (const char *b : {"std[2]", "pm", "fourier[3]"}) {
        CAPTURE(b);
        MeasurementSpec spec = measurement_spec(veclist(basis_of(b)));
        auto ps = spec.projectors();
        size_t dim = size_t(1) << spec.basis.m;
        Mat sum(dim);
        for (const auto &p : ps)
            for (size_t i = 0; i < dim * dim; i++)
                sum.a[i] += p.a[i];
        CHECK(sum.max_abs_diff(Mat::identity(dim)) < 1e-9);
    }
    CHECK_THROWS_WITH_AS(measurement_spec(veclist(basis_of("{'+'}"))),
                         doctest::Contains("IncompleteMeasureBasis"), TypeError);
}

TEST_CASE("desugar: flip, rotate, prep, non-std measure") {
    // std.flip == std >> {'1','0'} as a matrix
    Expr flip = desugar_flip(basis_of("std"));
    REQUIRE(flip.kind == Expr::Kind::Translate);
    Mat u = translation_unitary(veclist(flip.basis), veclist(flip.basis2)).dense();
    CHECK(u.max_abs_diff(dense_of("std", "{'1','0'}")) < 1e-9);
    CHECK_THROWS_WITH_AS(desugar_flip(basis_of("std[2]")),
                         doctest::Contains("FlipArity"), RunError);

    // '10+'.prep == std.flip + id + (std >> pm)
    Expr prep = desugar_prep("10+", 1);
    REQUIRE(prep.kind == Expr::Kind::Tensor);
    REQUIRE(prep.sub.size() == 3);
    CHECK(prep.sub[0].kind == Expr::Kind::Sugar);
    CHECK(prep.sub[0].sugar == SugarKind::Flip);
    CHECK(prep.sub[1].kind == Expr::Kind::BuiltIn);
    REQUIRE(prep.sub[2].kind == Expr::Kind::Translate);
    CHECK(prep.sub[2].basis2.kind == BasisExprAst::Kind::Pm);

    // bit-valued prep maps 1 -> flip, 0 -> id
    Expr bprep = desugar_prep_bits({true, false});
    CHECK(bprep.sub[0].sugar == SugarKind::Flip);
    CHECK(bprep.sub[1].kind == Expr::Kind::BuiltIn);

    // pm[2].measure -> (pm[2] >> std[2]) | std[2].measure
    auto [trans, meas] = desugar_measure(basis_of("pm[2]"));
    REQUIRE(trans.kind == Expr::Kind::Translate);
    CHECK(basis_is_std_fold(trans.basis2));
    REQUIRE(meas.kind == Expr::Kind::Measure);
    CHECK(basis_qubit_count(meas.basis) == 2);
}

TEST_CASE("random literal bases produce unitary translations") {
    std::mt19937_64 rng(23);
    const char *families[] = {"01", "+-", "ij"};
    for (int trial = 0; trial < 40; trial++) {
        int m = 1 + static_cast<int>(rng() % 2);
        int family = static_cast<int>(rng() % 3);
        // Random distinct symbol strings over one family.
        std::vector<std::string> pool;
        for (int i = 0; i < (1 << m); i++) {
            std::string s;
            for (int b = 0; b < m; b++)
                s += families[family][(i >> b) & 1];
            pool.push_back(s);
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        int count = 1 + static_cast<int>(rng() % pool.size());
        auto mk = [&](bool phases) {
            std::string src = "{";
            for (int i = 0; i < count; i++) {
                if (i)
                    src += ", ";
                if (phases)
                    src += "phase(" +
                           std::to_string(static_cast<double>(rng() % 628) / 100.0) +
                           ")*";
                src += "'" + pool[i] + "'";
            }
            return src + "}";
        };
        BasisValue b1 = veclist(basis_of(mk(false)));
        BasisValue b2 = veclist(basis_of(mk(true)));
        UnitaryBlock u = translation_unitary(b1, b2);
        CHECK(u.dense().is_unitary(1e-9));
        for (size_t k = 0; k < b1.count(); k++)
            CHECK(vec_close(u.dense().apply(b1.vectors[k]), b2.vectors[k]));
    }
}
