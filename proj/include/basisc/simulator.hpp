#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "basisc/basis.hpp"
#include "basisc/typecheck.hpp"

namespace basisc {

// Deterministic per-shot random stream: identical (seed, shot) pairs yield
// identical draw sequences on every platform.
struct RngStream {
    std::mt19937_64 gen;
    std::vector<double> forced; // test hook: consumed before the generator

    RngStream(uint64_t seed, uint64_t shot);
    double uniform(); // [0, 1)
};

// Global quantum state with qubit-index bookkeeping and an ancilla pool.
// Qubit q occupies bit (total-1-q) of an amplitude index: qubit 0 is the
// most significant (leftmost) position.
struct StateVector {
    int total = 0;
    std::vector<cplx> amp{cplx(1.0)};
    std::vector<char> live;
    std::vector<int> pool; // dead indices, reset to |0>, ascending
    int max_qubits = 20;

    int live_count() const;
    double norm() const;

    // Takes k indices (pool first, then fresh), all in state |0>.
    std::vector<int> alloc_zero(int k);
    void check_targets(const std::vector<int> &targets) const;

    void apply_matrix(const Mat &u, const std::vector<int> &targets);
    void apply_monomial(const MonomialBlock &b, const std::vector<int> &targets);
    void apply_global_phase(double theta);
    // Controlled variants: `ctrl_set` is a 2^|ctrl| membership mask over the
    // standard-basis values of the control qubits.
    void apply_ctrl_matrix(const Mat &u, const std::vector<int> &targets,
                           const std::vector<int> &ctrls,
                           const std::vector<char> &ctrl_set);
    void apply_ctrl_monomial(const MonomialBlock &b, const std::vector<int> &targets,
                             const std::vector<int> &ctrls,
                             const std::vector<char> &ctrl_set);
    void apply_ctrl_phase(double theta, const std::vector<int> &ctrls,
                          const std::vector<char> &ctrl_set);

    // Standard-basis measurement: one uniform draw, inverse CDF in index
    // order; collapses, resets targets to |0>, recycles them, returns bits.
    BitWord measure_std(const std::vector<int> &targets, RngStream &rng);
    void discard(int target, RngStream &rng);
    void discardz(int target);

    void assert_norm() const;
};

struct Histogram {
    std::map<std::string, long long> counts;
    long long shots = 0;
};

struct RunStats {
    long long embed_applications = 0; // oracle calls across all shots
};

struct RunOptions {
    long long shots = 1;
    uint64_t seed = 0;
    uint64_t shot_base = 0; // offsets the per-shot stream index
    double tol = kDefaultTol;
    int max_qubits = 20;
};

Histogram run_kernel(const SpecProgram &prog, const RunOptions &opt,
                     RunStats *stats = nullptr);

// Runs a single shot and returns the final state plus the result tuple
// (qubit indices in return order, and any returned bits). Used for
// state-level assertions on kernels that return qubits.
struct StateResult {
    StateVector state;
    std::vector<int> qubits;
    BitWord bits;
};
StateResult evaluate_state(const SpecProgram &prog, const RunOptions &opt);

// Lowers a reversible function expression to its dense unitary (column by
// column through the simulator). The expression is checked first.
Mat lower_expr_matrix(const SpecProgram &prog, const Expr &fn, double tol = kDefaultTol);

} // namespace basisc
