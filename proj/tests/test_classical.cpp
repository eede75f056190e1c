#include <doctest.h>

#include <random>

#include "basisc/basis.hpp"
#include "basisc/classical.hpp"
#include "basisc/parser.hpp"

using namespace basisc;

namespace {

Definition classical_def(const std::string &src, const std::string &name) {
    ProgramAst p = parse_source(src);
    const Definition *d = p.find(name);
    REQUIRE(d != nullptr);
    return *d;
}

BitWord bits(const std::string &s) {
    BitWord w;
    for (char c : s)
        w.push_back(c == '1');
    return w;
}

TruthTable table_from(std::vector<uint64_t> out, int n_in, int n_out) {
    TruthTable t;
    t.n_in = n_in;
    t.n_out = n_out;
    t.out = std::move(out);
    return t;
}

// Dense matrix of a Bennett embedding, used as the independent oracle for
// the permutation route.
Mat bennett_matrix(const TruthTable &t) {
    int w = t.n_in + t.n_out;
    Mat m(size_t(1) << w);
    for (uint64_t x = 0; x < t.size(); x++)
        for (uint64_t y = 0; y < (uint64_t(1) << t.n_out); y++) {
            uint64_t in = (x << t.n_out) | y;
            uint64_t out = (x << t.n_out) | (y ^ t.out[x]);
            m.at(out, in) = 1.0;
        }
    return m;
}

} // namespace

TEST_CASE("xor_reduce folds bits") {
    Definition d = classical_def(
        "classical f(x: bit[4]) -> bit[1]:\n    x.xor_reduce()\n", "f");
    CHECK(eval_classical(d, bits("1101")) == bits("1"));
    CHECK(eval_classical(d, bits("0000")) == bits("0"));
}

TEST_CASE("the dot-product oracle evaluates classically") {
    Definition d = classical_def(
        "classical f(s: bit[3], x: bit[3]) -> bit[1]:\n    (x & s).xor_reduce()\n",
        "f");
    // s = 110, x = 100: one overlapping 1 bit, parity 1.
    CHECK(eval_classical(d, bits("110100")) == bits("1"));
    CHECK(eval_classical(d, bits("110010")) == bits("1"));
    CHECK(eval_classical(d, bits("110001")) == bits("0"));
}

TEST_CASE("mul_const_mod multiplies residues and fixes out-of-range inputs") {
    Definition d = classical_def(
        "classical f(y: bit[4]) -> bit[4]:\n    y.mul_const_mod(7, 15)\n", "f");
    CHECK(eval_classical(d, bits("0001")) == bits("0111")); // 1*7 mod 15 = 7
    CHECK(eval_classical(d, bits("0010")) == bits("1110")); // 2*7 = 14
    CHECK(eval_classical(d, bits("1111")) == bits("1111")); // 15 >= m: identity
}

TEST_CASE("slices, rotations, concat, extensions, comparisons") {
    Definition d = classical_def(
        "classical f(x: bit[4]) -> bit[6]:\n"
        "    x[1:3] + x.rotl(1)[0:1] + (x == 0b1010) + x[0:2].zero_extend(2)\n",
        "f");
    // x = 1010: x[1:3]=01, rotl(1)=0101 so [0:1]=0, (x==1010)=1, zero_extend(10,2)=10
    CHECK(eval_classical(d, bits("1010")) == bits("010110"));
    Definition r = classical_def(
        "classical g(x: bit[4]) -> bit[4]:\n    x.rotr(1)\n", "g");
    CHECK(eval_classical(r, bits("1010")) == bits("0101"));
}

TEST_CASE("width mismatches are rejected statically") {
    Definition d = classical_def(
        "classical f(x: bit[3]) -> bit[3]:\n    x & 0b01\n", "f");
    CHECK_THROWS_WITH_AS(classical_width(d.cbody, {{"x", 3}}),
                         doctest::Contains("WidthMismatch"), TypeError);
    CHECK_THROWS_AS(eval_classical(d, bits("101")), TypeError);
}

TEST_CASE("eval_classical rejects wrong input widths") {
    Definition d = classical_def(
        "classical f(x: bit[2]) -> bit[2]:\n    x\n", "f");
    CHECK_THROWS_WITH_AS(eval_classical(d, bits("101")),
                         doctest::Contains("WidthMismatch"), TypeError);
}

TEST_CASE("truth tables enumerate every input") {
    Definition ident = classical_def(
        "classical f(x: bit[1]) -> bit[1]:\n    x\n", "f");
    TruthTable t = truth_table(ident);
    CHECK(t.out == std::vector<uint64_t>{0, 1});

    Definition all1 = classical_def(
        "classical f(x: bit[2]) -> bit[1]:\n    x.and_reduce()\n", "f");
    CHECK(truth_table(all1).out == std::vector<uint64_t>{0, 0, 0, 1});

    Definition const1 = classical_def(
        "classical f(x: bit[2]) -> bit[1]:\n    0b1\n", "f");
    CHECK(truth_table(const1).out == std::vector<uint64_t>{1, 1, 1, 1});
}

TEST_CASE("xor embedding of the 1-bit identity is the CNOT permutation") {
    EmbeddingAction a = xor_embedding(table_from({0, 1}, 1, 1));
    CHECK(a.width == 2);
    CHECK(a.perm == std::vector<uint64_t>{0, 1, 3, 2});
}

TEST_CASE("xor embedding of all_ones maps (11,0)->(11,1) and (10,0)->(10,0)") {
    EmbeddingAction a = xor_embedding(table_from({0, 0, 0, 1}, 2, 1));
    CHECK(a.perm[0b110] == 0b111);
    CHECK(a.perm[0b111] == 0b110);
    CHECK(a.perm[0b100] == 0b100);
}

TEST_CASE("xor embedding is an involution") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; trial++) {
        int n_in = 1 + static_cast<int>(rng() % 3);
        int n_out = 1 + static_cast<int>(rng() % 3);
        std::vector<uint64_t> out(uint64_t(1) << n_in);
        for (auto &o : out)
            o = rng() & ((uint64_t(1) << n_out) - 1);
        EmbeddingAction a = xor_embedding(table_from(out, n_in, n_out));
        for (uint64_t z = 0; z < a.perm.size(); z++)
            CHECK(a.perm[a.perm[z]] == z);
    }
}

TEST_CASE("phase embedding masks") {
    EmbeddingAction grover = phase_embedding(table_from({0, 0, 0, 1}, 2, 1));
    CHECK(grover.mask == std::vector<int8_t>{1, 1, 1, -1});
    EmbeddingAction constant = phase_embedding(table_from({0, 0}, 1, 1));
    CHECK(constant.mask == std::vector<int8_t>{1, 1});
    CHECK_THROWS_WITH_AS(phase_embedding(table_from({0, 1, 2, 3}, 2, 2)),
                         doctest::Contains("PhaseNeedsOneOutput"), RunError);
}

TEST_CASE("inplace embedding validates the supplied inverse") {
    // 7 * 13 = 91 = 1 (mod 15): a valid inverse pair on 4 bits.
    auto mul_table = [](long long c) {
        std::vector<uint64_t> out(16);
        for (uint64_t x = 0; x < 16; x++)
            out[x] = x < 15 ? (x * c) % 15 : x;
        return table_from(out, 4, 4);
    };
    EmbeddingAction a = inplace_embedding(mul_table(7), mul_table(13));
    std::vector<char> seen(16, 0);
    for (uint64_t z : a.perm)
        seen[z] = 1;
    for (char s : seen)
        CHECK(s == 1);

    EmbeddingAction ident = inplace_embedding(table_from({0, 1}, 1, 1),
                                              table_from({0, 1}, 1, 1));
    CHECK(ident.perm == std::vector<uint64_t>{0, 1});

    CHECK_THROWS_WITH_AS(
        inplace_embedding(table_from({0, 0}, 1, 1), table_from({0, 1}, 1, 1)),
        doctest::Contains("NotABijection"), RunError);
    CHECK_THROWS_WITH_AS(inplace_embedding(mul_table(7), mul_table(11)),
                         doctest::Contains("NotABijection"), RunError);
}

TEST_CASE("permutation action equals dense Bennett-matrix action") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; trial++) {
        int n_in = 1 + static_cast<int>(rng() % 4);
        int n_out = 1 + static_cast<int>(rng() % 4);
        std::vector<uint64_t> out(uint64_t(1) << n_in);
        for (auto &o : out)
            o = rng() & ((uint64_t(1) << n_out) - 1);
        TruthTable t = table_from(out, n_in, n_out);
        EmbeddingAction a = xor_embedding(t);
        Mat dense = bennett_matrix(t);

        size_t dim = size_t(1) << a.width;
        Vec state(dim);
        double nn = 0;
        for (auto &x : state) {
            x = cplx(static_cast<double>(rng() % 1000) / 1000.0 - 0.5,
                     static_cast<double>(rng() % 1000) / 1000.0 - 0.5);
            nn += std::norm(x);
        }
        for (auto &x : state)
            x /= std::sqrt(nn);

        Vec via_perm(dim);
        for (uint64_t z = 0; z < dim; z++)
            via_perm[a.perm[z]] = state[z];
        Vec via_dense = dense.apply(state);
        double max_diff = 0;
        for (uint64_t z = 0; z < dim; z++)
            max_diff = std::max(max_diff, std::abs(via_perm[z] - via_dense[z]));
        CHECK(max_diff < 1e-12);
    }
}

TEST_CASE("phase embedding equals the |-> ancilla construction") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; trial++) {
        int n = 3;
        std::vector<uint64_t> out(uint64_t(1) << n);
        for (auto &o : out)
            o = rng() & 1;
        TruthTable t = table_from(out, n, 1);
        EmbeddingAction ph = phase_embedding(t);
        Mat bf = bennett_matrix(t);

        // (I (x) <-|) B_f (I (x) |->): the ancilla sandwich.
        size_t dim = size_t(1) << n;
        const double s = 1.0 / std::sqrt(2.0);
        for (uint64_t x = 0; x < dim; x++) {
            // column x of the sandwiched operator
            Vec col(dim * 2, 0.0);
            col[x * 2] = s;
            col[x * 2 + 1] = -s;
            Vec big = bf.apply(col);
            for (uint64_t r = 0; r < dim; r++) {
                cplx val = s * big[r * 2] - s * big[r * 2 + 1];
                cplx want = r == x ? cplx(ph.mask[x], 0.0) : cplx(0.0);
                CHECK(std::abs(val - want) < 1e-9);
            }
        }
    }
}
