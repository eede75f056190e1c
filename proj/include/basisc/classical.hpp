#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "basisc/ast.hpp"

namespace basisc {

// Bits are stored most-significant first throughout: bit 0 of a BitWord is
// the leftmost qubit / leftmost character of a literal.
using BitWord = std::vector<bool>;

uint64_t word_to_index(const BitWord &w);
BitWord index_to_word(uint64_t v, int width);
std::string word_str(const BitWord &w);

// Exhaustive input/output table of a classical function at desk scale.
struct TruthTable {
    int n_in = 0;
    int n_out = 0;
    std::vector<uint64_t> out; // out[x] for x in [0, 2^n_in)

    uint64_t size() const { return uint64_t(1) << n_in; }
};

// A classical embedding realized as a monomial action: an index permutation
// (xor / inplace) or a +-1 phase mask (phase) over 2^width basis states.
struct EmbeddingAction {
    EmbedKind kind = EmbedKind::Xor;
    int width = 0;                 // qubits acted on
    std::vector<uint64_t> perm;    // xor / inplace
    std::vector<int8_t> mask;      // phase: +1 / -1 per index
};

// Computes the static bit width of a classical expression given the widths of
// its inputs. Throws TypeError WidthMismatch on inconsistent operand widths.
long long classical_width(const ClassicalExpr &e,
                          const std::map<std::string, long long> &inputs);

// Big-step evaluation with named inputs. All dimensions must be constant.
BitWord eval_classical_expr(const ClassicalExpr &e,
                            const std::map<std::string, BitWord> &inputs);

// Evaluates a monomorphized classical definition on a single input word
// formed by concatenating its parameters in order.
BitWord eval_classical(const Definition &f, const BitWord &input);

TruthTable truth_table(const Definition &f);

EmbeddingAction xor_embedding(const TruthTable &t);
EmbeddingAction phase_embedding(const TruthTable &t);
EmbeddingAction inplace_embedding(const TruthTable &fwd, const TruthTable &inv);

} // namespace basisc
