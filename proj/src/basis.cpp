#include "basisc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace basisc {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx inner(const Vec &a, const Vec &b) {
    cplx s = 0;
    for (size_t i = 0; i < a.size(); i++)
        s += std::conj(a[i]) * b[i];
    return s;
}

double norm2(const Vec &a) {
    double s = 0;
    for (const auto &x : a)
        s += std::norm(x);
    return s;
}

Vec tensor_vec(const Vec &a, const Vec &b) {
    Vec r(a.size() * b.size());
    for (size_t i = 0; i < a.size(); i++)
        for (size_t j = 0; j < b.size(); j++)
            r[i * b.size() + j] = a[i] * b[j];
    return r;
}

DimValue const_dim(const DimExpr &d, Span span) {
    if (!d.is_const())
        throw TypeError("UnboundDimVar", "unresolved dimension '" + d.str() + "'", span);
    return d.value;
}

double const_angle(const AngleExpr &a, Span span) {
    return a.eval({}, {}, span);
}

} // namespace

// ---------------------------------------------------------------------------
// Mat / MonomialBlock / UnitaryBlock

Mat Mat::identity(size_t n) {
    Mat m(n);
    for (size_t i = 0; i < n; i++)
        m.at(i, i) = 1.0;
    return m;
}

Mat Mat::dagger() const {
    Mat m(n);
    for (size_t r = 0; r < n; r++)
        for (size_t c = 0; c < n; c++)
            m.at(r, c) = std::conj(at(c, r));
    return m;
}

Mat Mat::mul(const Mat &rhs) const {
    Mat m(n);
    for (size_t r = 0; r < n; r++)
        for (size_t k = 0; k < n; k++) {
            cplx v = at(r, k);
            if (v == cplx(0.0))
                continue;
            for (size_t c = 0; c < n; c++)
                m.at(r, c) += v * rhs.at(k, c);
        }
    return m;
}

Vec Mat::apply(const Vec &v) const {
    Vec out(n);
    for (size_t r = 0; r < n; r++) {
        cplx s = 0;
        for (size_t c = 0; c < n; c++)
            s += at(r, c) * v[c];
        out[r] = s;
    }
    return out;
}

bool Mat::is_unitary(double tol) const {
    Mat p = dagger().mul(*this);
    double frob = 0;
    for (size_t r = 0; r < n; r++)
        for (size_t c = 0; c < n; c++) {
            cplx want = r == c ? cplx(1.0) : cplx(0.0);
            frob += std::norm(p.at(r, c) - want);
        }
    return std::sqrt(frob) < tol;
}

double Mat::max_abs_diff(const Mat &rhs) const {
    double d = 0;
    for (size_t i = 0; i < a.size(); i++)
        d = std::max(d, std::abs(a[i] - rhs.a[i]));
    return d;
}

MonomialBlock MonomialBlock::identity(int m) {
    MonomialBlock b;
    b.m = m;
    uint64_t size = uint64_t(1) << m;
    b.perm.resize(size);
    b.phase.assign(size, cplx(1.0));
    for (uint64_t i = 0; i < size; i++)
        b.perm[i] = i;
    return b;
}

MonomialBlock MonomialBlock::adjoint() const {
    MonomialBlock b;
    b.m = m;
    b.perm.resize(perm.size());
    b.phase.resize(phase.size());
    for (uint64_t t = 0; t < perm.size(); t++) {
        b.perm[perm[t]] = t;
        b.phase[perm[t]] = std::conj(phase[t]);
    }
    return b;
}

Mat MonomialBlock::dense() const {
    Mat mat(perm.size());
    for (uint64_t t = 0; t < perm.size(); t++)
        mat.at(perm[t], t) = phase[t];
    return mat;
}

Mat UnitaryBlock::dense() const {
    if (matrix)
        return *matrix;
    return mono->dense();
}

UnitaryBlock UnitaryBlock::adjoint() const {
    UnitaryBlock b;
    b.m = m;
    if (mono)
        b.mono = mono->adjoint();
    else
        b.matrix = matrix->dagger();
    return b;
}

std::vector<Mat> MeasurementSpec::projectors() const {
    std::vector<Mat> ps;
    size_t dim = size_t(1) << basis.m;
    for (const auto &v : basis.vectors) {
        Mat p(dim);
        for (size_t r = 0; r < dim; r++)
            for (size_t c = 0; c < dim; c++)
                p.at(r, c) = v[r] * std::conj(v[c]);
        ps.push_back(std::move(p));
    }
    return ps;
}

// ---------------------------------------------------------------------------
// veclist and friends

Vec symbol_state(char sym) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (sym) {
    case '0': return {1.0, 0.0};
    case '1': return {0.0, 1.0};
    case '+': return {s, s};
    case '-': return {s, -s};
    case 'i': return {s, cplx(0.0, s)};
    case 'j': return {s, cplx(0.0, -s)}; // 'j' denotes |-i>
    }
    throw std::logic_error("bad qubit symbol");
}

namespace {

Vec literal_vector(const BasisVectorAst &v) {
    DimValue fold = const_dim(v.ql.fold, v.span);
    Vec acc{1.0};
    for (DimValue rep = 0; rep < fold; rep++)
        for (char c : v.ql.syms)
            acc = tensor_vec(acc, symbol_state(c));
    double theta = const_angle(v.phase, v.span);
    cplx ph = std::polar(1.0, theta);
    for (auto &x : acc)
        x *= ph;
    return acc;
}

} // namespace

long long basis_vector_count(const BasisExprAst &b) {
    switch (b.kind) {
    case BasisExprAst::Kind::Std:
    case BasisExprAst::Kind::Pm:
    case BasisExprAst::Kind::Ij:
        return 2;
    case BasisExprAst::Kind::Fourier:
        return 1LL << const_dim(b.dim, b.span);
    case BasisExprAst::Kind::Literal:
        return static_cast<long long>(b.vectors.size());
    case BasisExprAst::Kind::Tensor: {
        long long c = 1;
        for (const auto &s : b.sub)
            c *= basis_vector_count(s);
        return c;
    }
    case BasisExprAst::Kind::Fold: {
        DimValue n = const_dim(b.dim, b.span);
        long long c = 1, inner = basis_vector_count(b.sub[0]);
        for (DimValue i = 0; i < n; i++)
            c *= inner;
        return c;
    }
    case BasisExprAst::Kind::Reversed:
    case BasisExprAst::Kind::Rotated:
        return basis_vector_count(b.sub[0]);
    case BasisExprAst::Kind::Invalid:
        throw TypeError("NotABasis", "expression is not a basis", b.span);
    }
    throw std::logic_error("unreachable basis kind");
}

long long basis_qubit_count(const BasisExprAst &b) {
    switch (b.kind) {
    case BasisExprAst::Kind::Std:
    case BasisExprAst::Kind::Pm:
    case BasisExprAst::Kind::Ij:
        return 1;
    case BasisExprAst::Kind::Fourier:
        return const_dim(b.dim, b.span);
    case BasisExprAst::Kind::Literal: {
        if (b.vectors.empty())
            throw TypeError("NotABasis", "empty basis literal", b.span);
        long long m = -1;
        for (const auto &v : b.vectors) {
            long long len = static_cast<long long>(v.ql.syms.size()) *
                            const_dim(v.ql.fold, v.span);
            if (m < 0)
                m = len;
            else if (m != len)
                throw TypeError("DimMismatch",
                                "basis vectors have different lengths (" +
                                    std::to_string(m) + " vs " + std::to_string(len) + ")",
                                v.span);
        }
        return m;
    }
    case BasisExprAst::Kind::Tensor: {
        long long m = 0;
        for (const auto &s : b.sub)
            m += basis_qubit_count(s);
        return m;
    }
    case BasisExprAst::Kind::Fold:
        return const_dim(b.dim, b.span) * basis_qubit_count(b.sub[0]);
    case BasisExprAst::Kind::Reversed:
    case BasisExprAst::Kind::Rotated:
        return basis_qubit_count(b.sub[0]);
    case BasisExprAst::Kind::Invalid:
        throw TypeError("NotABasis", "expression is not a basis", b.span);
    }
    throw std::logic_error("unreachable basis kind");
}

BasisValue veclist(const BasisExprAst &b) {
    BasisValue out;
    switch (b.kind) {
    case BasisExprAst::Kind::Std:
        out.m = 1;
        out.vectors = {symbol_state('0'), symbol_state('1')};
        break;
    case BasisExprAst::Kind::Pm:
        out.m = 1;
        out.vectors = {symbol_state('+'), symbol_state('-')};
        break;
    case BasisExprAst::Kind::Ij:
        out.m = 1;
        out.vectors = {symbol_state('i'), symbol_state('j')};
        break;
    case BasisExprAst::Kind::Fourier: {
        DimValue n = const_dim(b.dim, b.span);
        out.m = static_cast<int>(n);
        uint64_t dim = uint64_t(1) << n;
        double amp = 1.0 / std::sqrt(static_cast<double>(dim));
        for (uint64_t j = 0; j < dim; j++) {
            Vec v(dim);
            for (uint64_t k = 0; k < dim; k++)
                v[k] = std::polar(amp, 2.0 * kPi * double(j) * double(k) / double(dim));
            out.vectors.push_back(std::move(v));
        }
        break;
    }
    case BasisExprAst::Kind::Literal: {
        out.m = static_cast<int>(basis_qubit_count(b));
        for (const auto &v : b.vectors)
            out.vectors.push_back(literal_vector(v));
        break;
    }
    case BasisExprAst::Kind::Tensor: {
        out.m = 0;
        out.vectors = {Vec{1.0}};
        for (const auto &s : b.sub) {
            BasisValue part = veclist(s);
            std::vector<Vec> next;
            next.reserve(out.vectors.size() * part.vectors.size());
            for (const auto &a : out.vectors)
                for (const auto &c : part.vectors)
                    next.push_back(tensor_vec(a, c));
            out.vectors = std::move(next);
            out.m += part.m;
        }
        break;
    }
    case BasisExprAst::Kind::Fold: {
        DimValue n = const_dim(b.dim, b.span);
        BasisValue part = veclist(b.sub[0]);
        out.m = 0;
        out.vectors = {Vec{1.0}};
        for (DimValue i = 0; i < n; i++) {
            std::vector<Vec> next;
            next.reserve(out.vectors.size() * part.vectors.size());
            for (const auto &a : out.vectors)
                for (const auto &c : part.vectors)
                    next.push_back(tensor_vec(a, c));
            out.vectors = std::move(next);
            out.m += part.m;
        }
        break;
    }
    case BasisExprAst::Kind::Reversed: {
        out = veclist(b.sub[0]);
        std::reverse(out.vectors.begin(), out.vectors.end());
        break;
    }
    case BasisExprAst::Kind::Rotated: {
        out = veclist(b.sub[0]);
        if (out.vectors.size() != 2)
            throw RunError("FlipArity", "rotate requires a two-vector basis");
        double theta = const_angle(b.angle, b.span);
        cplx p0 = std::polar(1.0, -theta / 2.0), p1 = std::polar(1.0, theta / 2.0);
        for (auto &x : out.vectors[0])
            x *= p0;
        for (auto &x : out.vectors[1])
            x *= p1;
        break;
    }
    case BasisExprAst::Kind::Invalid:
        throw TypeError("NotABasis", "expression is not a basis", b.span);
    }
    out.full_span = out.vectors.size() == (size_t(1) << out.m);
    return out;
}

// ---------------------------------------------------------------------------
// Span comparison

double span_distance(const BasisValue &a, const BasisValue &b) {
    // ||P_a - P_b||_F^2 equals the summed squared residuals of projecting
    // each list onto the other's span; computing residual vectors avoids the
    // cancellation that the Gram-trace identity suffers near zero.
    auto residuals = [](const std::vector<Vec> &xs, const std::vector<Vec> &onto) {
        double acc = 0;
        for (const auto &x : xs) {
            Vec r = x;
            for (const auto &u : onto) {
                cplx proj = inner(u, x);
                for (size_t i = 0; i < r.size(); i++)
                    r[i] -= proj * u[i];
            }
            acc += norm2(r);
        }
        return acc;
    };
    double sq = residuals(b.vectors, a.vectors) + residuals(a.vectors, b.vectors);
    return std::sqrt(std::max(0.0, sq));
}

bool span_equal(const BasisValue &a, const BasisValue &b, double tol) {
    if (a.m != b.m)
        return false;
    if (a.full_span && b.full_span)
        return true;
    return span_distance(a, b) < tol;
}

// ---------------------------------------------------------------------------
// Translation lowering

std::optional<std::vector<uint64_t>> std_index_set(const BasisValue &b, double tol) {
    std::vector<uint64_t> idx;
    for (const auto &v : b.vectors) {
        int nz = -1;
        for (size_t i = 0; i < v.size(); i++) {
            if (std::abs(v[i]) > tol) {
                if (nz >= 0)
                    return std::nullopt;
                nz = static_cast<int>(i);
            }
        }
        if (nz < 0)
            return std::nullopt;
        idx.push_back(static_cast<uint64_t>(nz));
    }
    return idx;
}

namespace {

// Index and phase of each standard-family vector, or nullopt.
struct StdVectors {
    std::vector<uint64_t> idx;
    Vec phase;
};

std::optional<StdVectors> std_vectors(const BasisValue &b, double tol) {
    StdVectors sv;
    for (const auto &v : b.vectors) {
        int nz = -1;
        for (size_t i = 0; i < v.size(); i++) {
            if (std::abs(v[i]) > tol) {
                if (nz >= 0)
                    return std::nullopt;
                nz = static_cast<int>(i);
            }
        }
        if (nz < 0)
            return std::nullopt;
        sv.idx.push_back(static_cast<uint64_t>(nz));
        sv.phase.push_back(v[nz]);
    }
    return sv;
}

// Extends the orthonormal list `vs` to a full basis with standard basis
// vectors taken in ascending index order, skipping candidates whose residual
// norm falls below 1e-9. Deterministic.
std::vector<Vec> gram_schmidt_extension(const std::vector<Vec> &vs, size_t dim) {
    std::vector<Vec> accepted = vs;
    std::vector<Vec> extension;
    for (size_t cand = 0; cand < dim && accepted.size() < dim; cand++) {
        Vec v(dim);
        v[cand] = 1.0;
        for (const auto &u : accepted) {
            cplx proj = inner(u, v);
            for (size_t i = 0; i < dim; i++)
                v[i] -= proj * u[i];
        }
        double nn = std::sqrt(norm2(v));
        if (nn < 1e-9)
            continue;
        for (auto &x : v)
            x /= nn;
        accepted.push_back(v);
        extension.push_back(std::move(v));
    }
    return extension;
}

} // namespace

UnitaryBlock translation_unitary(const BasisValue &b1, const BasisValue &b2,
                                 double tol) {
    if (b1.m != b2.m || b1.count() != b2.count())
        throw TypeError("DimMismatch", "translation endpoints differ in size");
    if (!span_equal(b1, b2, tol))
        throw TypeError("SpanMismatch", "translation endpoints span different subspaces");

    UnitaryBlock out;
    out.m = b1.m;

    // Standard-family pairs lower to a monomial operator.
    auto s1 = std_vectors(b1, tol), s2 = std_vectors(b2, tol);
    if (s1 && s2) {
        MonomialBlock mono = MonomialBlock::identity(b1.m);
        for (size_t k = 0; k < s1->idx.size(); k++) {
            mono.perm[s1->idx[k]] = s2->idx[k];
            mono.phase[s1->idx[k]] = s2->phase[k] * std::conj(s1->phase[k]);
        }
        out.mono = std::move(mono);
        return out;
    }

    if (b1.m > kMaxDenseQubits)
        throw RunError("MatrixTooLarge",
                       "dense translation over " + std::to_string(b1.m) + " qubits");

    size_t dim = size_t(1) << b1.m;
    Mat u(dim);
    auto add_outer = [&](const Vec &lhs, const Vec &rhs) {
        for (size_t r = 0; r < dim; r++) {
            if (lhs[r] == cplx(0.0))
                continue;
            for (size_t c = 0; c < dim; c++)
                u.at(r, c) += lhs[r] * std::conj(rhs[c]);
        }
    };
    for (size_t k = 0; k < b1.count(); k++)
        add_outer(b2.vectors[k], b1.vectors[k]);
    if (!b1.full_span) {
        std::vector<Vec> ext = gram_schmidt_extension(b1.vectors, dim);
        for (const auto &v : ext)
            add_outer(v, v);
    }
    // Construction from orthonormal full lists is unitary by algebra; guard
    // with column norms always and the full Gram check only at small sizes,
    // where the O(dim^3) product is affordable on every lowering.
    for (size_t c = 0; c < dim; c++) {
        double n = 0;
        for (size_t r = 0; r < dim; r++)
            n += std::norm(u.at(r, c));
        if (std::abs(std::sqrt(n) - 1.0) > std::max(tol, 1e-9))
            throw RunError("MatrixTooLarge", "translation did not produce a unitary");
    }
    if (dim <= 64 && !u.is_unitary(std::max(tol, 1e-9)))
        throw RunError("MatrixTooLarge", "translation did not produce a unitary");
    out.matrix = std::move(u);
    return out;
}

namespace {

void flatten_basis_factors(const BasisExprAst &b, std::vector<const BasisExprAst *> &out) {
    if (b.kind == BasisExprAst::Kind::Tensor) {
        for (const auto &s : b.sub)
            flatten_basis_factors(s, out);
        return;
    }
    if (b.kind == BasisExprAst::Kind::Fold) {
        DimValue n = const_dim(b.dim, b.span);
        for (DimValue i = 0; i < n; i++)
            flatten_basis_factors(b.sub[0], out);
        return;
    }
    out.push_back(&b);
}

bool factor_full_span(const BasisExprAst &b) {
    return basis_vector_count(b) == (1LL << basis_qubit_count(b));
}

} // namespace

std::vector<std::pair<UnitaryBlock, int>>
lower_translation(const BasisExprAst &b1, const BasisExprAst &b2, double tol) {
    std::vector<const BasisExprAst *> f1, f2;
    flatten_basis_factors(b1, f1);
    flatten_basis_factors(b2, f2);

    bool aligned = f1.size() == f2.size() && f1.size() > 1;
    if (aligned) {
        for (size_t i = 0; i < f1.size(); i++) {
            if (basis_qubit_count(*f1[i]) != basis_qubit_count(*f2[i]) ||
                !factor_full_span(*f1[i]) || !factor_full_span(*f2[i])) {
                aligned = false;
                break;
            }
        }
    }

    std::vector<std::pair<UnitaryBlock, int>> blocks;
    if (aligned) {
        int off = 0;
        for (size_t i = 0; i < f1.size(); i++) {
            BasisValue v1 = veclist(*f1[i]), v2 = veclist(*f2[i]);
            blocks.emplace_back(translation_unitary(v1, v2, tol), off);
            off += v1.m;
        }
        return blocks;
    }
    BasisValue v1 = veclist(b1), v2 = veclist(b2);
    blocks.emplace_back(translation_unitary(v1, v2, tol), 0);
    return blocks;
}

UnitaryBlock predicated_unitary(const BasisValue &b, const UnitaryBlock &u, double tol) {
    int total = b.m + u.m;
    if (total > kMaxDenseQubits)
        throw RunError("MatrixTooLarge",
                       "dense predicated block over " + std::to_string(total) + " qubits");
    size_t pd = size_t(1) << b.m, ud = size_t(1) << u.m, dim = pd * ud;

    // P = sum_k |b^k><b^k| over the predicate qubits.
    Mat p(pd);
    for (const auto &v : b.vectors)
        for (size_t r = 0; r < pd; r++)
            for (size_t c = 0; c < pd; c++)
                p.at(r, c) += v[r] * std::conj(v[c]);

    Mat um = u.dense();
    Mat out(dim);
    for (size_t pr = 0; pr < pd; pr++)
        for (size_t pc = 0; pc < pd; pc++) {
            cplx pv = p.at(pr, pc);
            cplx iv = (pr == pc ? cplx(1.0) : cplx(0.0)) - pv;
            for (size_t ur = 0; ur < ud; ur++) {
                for (size_t uc = 0; uc < ud; uc++) {
                    cplx val = pv * um.at(ur, uc);
                    if (ur == uc)
                        val += iv;
                    if (val != cplx(0.0))
                        out.at(pr * ud + ur, pc * ud + uc) += val;
                }
            }
        }
    if (!out.is_unitary(std::max(tol, 1e-9)))
        throw RunError("MatrixTooLarge", "predication did not produce a unitary");
    UnitaryBlock blk;
    blk.m = total;
    blk.matrix = std::move(out);
    return blk;
}

MeasurementSpec measurement_spec(const BasisValue &b) {
    if (!b.full_span)
        throw TypeError("IncompleteMeasureBasis",
                        "measurement basis must span the full space");
    MeasurementSpec spec;
    spec.basis = b;
    return spec;
}

// ---------------------------------------------------------------------------
// Desugaring

bool basis_is_std_fold(const BasisExprAst &b) {
    switch (b.kind) {
    case BasisExprAst::Kind::Std:
        return true;
    case BasisExprAst::Kind::Fold:
        return basis_is_std_fold(b.sub[0]);
    case BasisExprAst::Kind::Tensor:
        for (const auto &s : b.sub)
            if (!basis_is_std_fold(s))
                return false;
        return true;
    default:
        return false;
    }
}

namespace {

BasisExprAst std_fold(long long m) {
    BasisExprAst b;
    b.kind = BasisExprAst::Kind::Fold;
    BasisExprAst std_b;
    std_b.kind = BasisExprAst::Kind::Std;
    b.sub.push_back(std_b);
    b.dim = DimExpr::constant(m);
    return b;
}

BasisExprAst literal_of(std::initializer_list<std::pair<double, const char *>> vs) {
    BasisExprAst b;
    b.kind = BasisExprAst::Kind::Literal;
    for (const auto &[theta, s] : vs) {
        BasisVectorAst v;
        v.phase = AngleExpr::number(theta);
        v.ql.syms = s;
        b.vectors.push_back(std::move(v));
    }
    return b;
}

Expr translate_expr(BasisExprAst from, BasisExprAst to) {
    Expr e = Expr::make(Expr::Kind::Translate);
    e.basis = std::move(from);
    e.basis2 = std::move(to);
    return e;
}

// Per-symbol preparation stage from |0>: '0' -> id, '1' -> std.flip,
// '+' -> std >> pm, '-' -> std >> {'-','+'}, 'i' -> std >> ij,
// 'j' -> std >> {'j','i'}.
Expr prep_stage(char sym) {
    BasisExprAst std_b;
    std_b.kind = BasisExprAst::Kind::Std;
    switch (sym) {
    case '0': {
        Expr e = Expr::make(Expr::Kind::BuiltIn);
        e.builtin = BuiltinKind::Id;
        return e;
    }
    case '1': {
        Expr s = Expr::make(Expr::Kind::Sugar);
        s.sugar = SugarKind::Flip;
        s.basis = std_b;
        return s;
    }
    case '+': {
        BasisExprAst pm;
        pm.kind = BasisExprAst::Kind::Pm;
        return translate_expr(std_b, pm);
    }
    case '-':
        return translate_expr(std_b, literal_of({{0.0, "-"}, {0.0, "+"}}));
    case 'i': {
        BasisExprAst ij;
        ij.kind = BasisExprAst::Kind::Ij;
        return translate_expr(std_b, ij);
    }
    case 'j':
        return translate_expr(std_b, literal_of({{0.0, "j"}, {0.0, "i"}}));
    }
    throw std::logic_error("bad prep symbol");
}

} // namespace

Expr desugar_flip(const BasisExprAst &b) {
    if (basis_vector_count(b) != 2)
        throw RunError("FlipArity", "flip requires a two-vector basis");
    BasisExprAst rev;
    rev.kind = BasisExprAst::Kind::Reversed;
    rev.span = b.span;
    rev.sub.push_back(b);
    return translate_expr(b, std::move(rev));
}

Expr desugar_rotate(const BasisExprAst &b, double theta) {
    if (basis_vector_count(b) != 2)
        throw RunError("FlipArity", "rotate requires a two-vector basis");
    BasisExprAst rot;
    rot.kind = BasisExprAst::Kind::Rotated;
    rot.span = b.span;
    rot.sub.push_back(b);
    rot.angle = AngleExpr::number(theta);
    return translate_expr(b, std::move(rot));
}

Expr desugar_prep(const std::string &syms, long long fold) {
    Expr t = Expr::make(Expr::Kind::Tensor);
    for (long long i = 0; i < fold; i++)
        for (char c : syms)
            t.sub.push_back(prep_stage(c));
    return normalize_tensors(t);
}

Expr desugar_prep_bits(const std::vector<bool> &bits) {
    Expr t = Expr::make(Expr::Kind::Tensor);
    for (bool b : bits)
        t.sub.push_back(prep_stage(b ? '1' : '0'));
    return normalize_tensors(t);
}

std::pair<Expr, Expr> desugar_measure(const BasisExprAst &b) {
    long long m = basis_qubit_count(b);
    Expr trans = translate_expr(b, std_fold(m));
    Expr meas = Expr::make(Expr::Kind::Measure);
    meas.basis = std_fold(m);
    return {std::move(trans), std::move(meas)};
}

} // namespace basisc
