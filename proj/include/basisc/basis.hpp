#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "basisc/ast.hpp"

namespace basisc {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

constexpr double kDefaultTol = 1e-9;
constexpr int kMaxDenseQubits = 14;

// Dense square matrix over 2^m-dimensional space, row-major.
struct Mat {
    size_t n = 0;
    Vec a;

    Mat() = default;
    explicit Mat(size_t n_) : n(n_), a(n_ * n_) {}
    cplx &at(size_t r, size_t c) { return a[r * n + c]; }
    const cplx &at(size_t r, size_t c) const { return a[r * n + c]; }

    static Mat identity(size_t n);
    Mat dagger() const;
    Mat mul(const Mat &rhs) const;
    Vec apply(const Vec &v) const;
    bool is_unitary(double tol = kDefaultTol) const;
    double max_abs_diff(const Mat &rhs) const;
};

// Resolved basis: ordered orthonormal vectors over m qubits.
struct BasisValue {
    int m = 0;
    std::vector<Vec> vectors;
    bool full_span = false; // vectors.size() == 2^m

    size_t count() const { return vectors.size(); }
};

// Monomial operator: U|t> = phase[t] |perm[t]>. Covers classical embeddings,
// standard-family translations, and phase masks without dense matrices.
struct MonomialBlock {
    int m = 0;
    std::vector<uint64_t> perm;
    Vec phase;

    static MonomialBlock identity(int m);
    MonomialBlock adjoint() const;
    Mat dense() const;
};

// A lowered unitary: either monomial or dense, on m qubits.
struct UnitaryBlock {
    int m = 0;
    std::optional<MonomialBlock> mono;
    std::optional<Mat> matrix;

    Mat dense() const;
    UnitaryBlock adjoint() const;
};

struct MeasurementSpec {
    BasisValue basis; // full span
    std::vector<Mat> projectors() const;
};

Vec symbol_state(char sym);

// Number of vectors a basis expression denotes (dims must be constant).
long long basis_vector_count(const BasisExprAst &b);
// Number of qubits; checks literal vector lengths agree (DimMismatch).
long long basis_qubit_count(const BasisExprAst &b);

BasisValue veclist(const BasisExprAst &b);

bool span_equal(const BasisValue &a, const BasisValue &b, double tol = kDefaultTol);
// Frobenius norm of P_a - P_b, computed from inner products.
double span_distance(const BasisValue &a, const BasisValue &b);

UnitaryBlock translation_unitary(const BasisValue &b1, const BasisValue &b2,
                                 double tol = kDefaultTol);
// Full lowering of a translation expression; factorizes aligned full-span
// tensor components so pm[N] >> std[N] stays N separate one-qubit blocks.
std::vector<std::pair<UnitaryBlock, int>> /* (block, qubit offset) */
lower_translation(const BasisExprAst &b1, const BasisExprAst &b2,
                  double tol = kDefaultTol);

UnitaryBlock predicated_unitary(const BasisValue &b, const UnitaryBlock &u,
                                double tol = kDefaultTol);

MeasurementSpec measurement_spec(const BasisValue &b);

// If every vector of the basis is a standard-basis vector up to phase,
// returns the (ascending-sorted) index set; used for efficient predication.
std::optional<std::vector<uint64_t>> std_index_set(const BasisValue &b,
                                                   double tol = kDefaultTol);

// Desugarings. flip/rotate yield the equivalent translation expression;
// FlipArity if the basis does not have exactly two vectors.
Expr desugar_flip(const BasisExprAst &b);
Expr desugar_rotate(const BasisExprAst &b, double theta);
// '10+'.prep -> std.flip + id + (std >> pm); bit-operand prep likewise.
Expr desugar_prep(const std::string &syms, long long fold);
Expr desugar_prep_bits(const std::vector<bool> &bits);
// b.measure for non-std b -> (b >> std[m]) | std[m].measure, returned as the
// two pipeline stages.
std::pair<Expr, Expr> desugar_measure(const BasisExprAst &b);

bool basis_is_std_fold(const BasisExprAst &b);

} // namespace basisc
