#include <doctest.h>

#include <random>

#include "basisc/parser.hpp"
#include "basisc/simulator.hpp"

using namespace basisc;

namespace {

SpecProgram program(const std::string &src, const std::string &entry = "kernel",
                    MonoConfig cfg = {}) {
    ProgramAst p = parse_source(src);
    SpecProgram spec = monomorphize(p, entry, cfg);
    check_program(spec);
    return spec;
}

bool close(cplx a, cplx b, double tol = 1e-9) { return std::abs(a - b) < tol; }

constexpr double kPi = 3.14159265358979323846;

} // namespace

TEST_CASE("allocating literals prepares the advertised states") {
    SpecProgram p = program("qpu kernel() -> qubit:\n    '+'\n");
    StateResult r = evaluate_state(p, {});
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(r.state.amp.size() == 2);
    CHECK(close(r.state.amp[0], s));
    CHECK(close(r.state.amp[1], s));

    SpecProgram p2 = program("qpu kernel() -> qubit[3]:\n    '110'\n");
    StateResult r2 = evaluate_state(p2, {});
    CHECK(close(r2.state.amp[0b110], 1.0));

    SpecProgram p3 = program("qpu kernel() -> qubit[3]:\n    '0'[3]\n");
    StateResult r3 = evaluate_state(p3, {});
    CHECK(close(r3.state.amp[0], 1.0));
}

TEST_CASE("X on the first qubit of |00>") {
    SpecProgram p = program(
        "qpu kernel() -> qubit[2]:\n    '00' | std.flip + id\n");
    StateResult r = evaluate_state(p, {});
    CHECK(close(r.state.amp[0b10], 1.0));
}

TEST_CASE("the QFT block maps |00> to the uniform all-plus state") {
    SpecProgram p = program(
        "qpu kernel() -> qubit[2]:\n    '00' | std[2] >> fourier[2]\n");
    StateResult r = evaluate_state(p, {});
    for (int z = 0; z < 4; z++)
        CHECK(close(r.state.amp[z], 0.5));
}

TEST_CASE("std >> pm maps |1> to |->") {
    SpecProgram p = program("qpu kernel() -> qubit:\n    '1' | std >> pm\n");
    StateResult r = evaluate_state(p, {});
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(close(r.state.amp[0], s));
    CHECK(close(r.state.amp[1], -s));
}

TEST_CASE("embeddings run as permutations and masks") {
    SpecProgram p = program(
        "classical f(x: bit[1]) -> bit[1]:\n    x\n"
        "qpu kernel() -> qubit[2]:\n    '10' | f.xor_embed\n");
    StateResult r = evaluate_state(p, {});
    CHECK(close(r.state.amp[0b11], 1.0)); // CNOT on |10>

    SpecProgram p2 = program(
        "classical all1(x: bit[2]) -> bit[1]:\n    x.and_reduce()\n"
        "qpu kernel() -> qubit[2]:\n    '1' + '+' | all1.phase\n");
    StateResult r2 = evaluate_state(p2, {});
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(close(r2.state.amp[0b10], s));
    CHECK(close(r2.state.amp[0b11], -s));
}

TEST_CASE("measurement samples outcomes by inverse CDF in basis order") {
    // sqrt(0.9)|00> + sqrt(0.1)|11>, measured in std[2]
    StateVector st;
    st.alloc_zero(2);
    st.amp = {std::sqrt(0.9), 0.0, 0.0, std::sqrt(0.1)};
    RngStream rng(0, 0);
    rng.forced = {0.5}; // below 0.9: outcome 00
    BitWord w = st.measure_std({0, 1}, rng);
    CHECK(word_str(w) == "00");

    StateVector st2;
    st2.alloc_zero(2);
    st2.amp = {std::sqrt(0.9), 0.0, 0.0, std::sqrt(0.1)};
    RngStream rng2(0, 0);
    rng2.forced = {0.95}; // above 0.9: outcome 11
    BitWord w2 = st2.measure_std({0, 1}, rng2);
    CHECK(word_str(w2) == "11");
    // measured qubits park at |0>, renormalized, and join the pool
    CHECK(close(st2.amp[0b00], 1.0));
    CHECK(close(st2.amp[0b11], 0.0));
    CHECK(st2.norm() == doctest::Approx(1.0));
    CHECK(st2.pool.size() == 2);
}

TEST_CASE("|+> measured in pm yields 0 with certainty; |1> in std yields 1") {
    SpecProgram p = program("qpu kernel() -> bit[1]:\n    '+' | pm.measure\n");
    Histogram h = run_kernel(p, {.shots = 64, .seed = 5});
    CHECK(h.counts.at("0") == 64);

    SpecProgram p2 = program("qpu kernel() -> bit[1]:\n    '1' | std.measure\n");
    Histogram h2 = run_kernel(p2, {.shots = 16, .seed = 5});
    CHECK(h2.counts.at("1") == 16);
}

TEST_CASE("discardz frees clean ancillas and rejects dirty ones") {
    SpecProgram p = program(
        "qpu rev inner(q: qubit) -> qubit:\n    q + '0' | id + discardz\n"
        "qpu kernel() -> qubit:\n    '+' | inner\n");
    StateResult r = evaluate_state(p, {});
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(close(r.state.amp[0b00], s)); // ancilla freed, |psi> intact
    CHECK(close(r.state.amp[0b10], s));
    CHECK(r.state.pool.size() == 1);

    SpecProgram bad = program(
        "qpu rev inner(q: qubit) -> qubit:\n    q + '+' | id + discardz\n"
        "qpu kernel() -> qubit:\n    '0' | inner\n");
    CHECK_THROWS_WITH_AS(evaluate_state(bad, {}), doctest::Contains("DirtyDiscardZ"),
                         RunError);
}

TEST_CASE("discarding half an entangled pair collapses the rest") {
    SpecProgram p = program(
        "qpu kernel() -> qubit:\n"
        "    '+' + '0' | '1' & std.flip | discard + id\n");
    for (uint64_t seed = 0; seed < 8; seed++) {
        RunOptions opt;
        opt.seed = seed;
        StateResult r = evaluate_state(p, opt);
        bool zero = std::abs(r.state.amp[0b00]) > 0.9;
        bool one = std::abs(r.state.amp[0b01]) > 0.9;
        CHECK(zero != one); // collapsed to |0> or |1> on the surviving qubit
    }
}

TEST_CASE("ancilla indices are recycled through the pool") {
    SpecProgram p = program(
        "qpu rev inner(q: qubit) -> qubit:\n    q + '0' | id + discardz\n"
        "qpu kernel() -> qubit[2]:\n    ('0' | inner) + ('0' | inner)\n");
    StateResult r = evaluate_state(p, {});
    CHECK(r.state.total == 3); // second ancilla reused the freed index
}

TEST_CASE("duplicate targets and dead indices are runtime errors") {
    StateVector st;
    st.alloc_zero(2);
    Mat x(2);
    x.at(0, 1) = x.at(1, 0) = 1.0;
    CHECK_THROWS_WITH_AS(st.apply_matrix(x, {0, 0}),
                         doctest::Contains("IndexCollision"), RunError);
    RngStream rng(1, 0);
    st.measure_std({1}, rng);
    CHECK_THROWS_WITH_AS(st.apply_matrix(x, {1}), doctest::Contains("DeadQubit"),
                         RunError);
}

TEST_CASE("an over-cap allocation is a CapacityExceeded error") {
    SpecProgram p = program("qpu kernel() -> qubit[4]:\n    '0'[4]\n");
    RunOptions opt;
    opt.max_qubits = 3;
    CHECK_THROWS_WITH_AS(evaluate_state(p, opt), doctest::Contains("CapacityExceeded"),
                         RunError);
}

TEST_CASE("GHZ: outcomes are all-zeros or all-ones") {
    MonoConfig cfg;
    cfg.sets["N"] = 3;
    SpecProgram p = program(
        "qpu kernel[N]() -> bit[N]:\n"
        "    '+' + '0'[N-1]\n"
        "    | repeat k in 0..N-1: (id[k] + ('1' & std.flip) + id[N-2-k])\n"
        "    | std[N].measure\n",
        "kernel", cfg);
    Histogram h = run_kernel(p, {.shots = 500, .seed = 9});
    long long total = 0;
    for (const auto &[k, v] : h.counts) {
        CHECK((k == "000" || k == "111"));
        total += v;
    }
    CHECK(total == 500);
}

TEST_CASE("determinism: identical options give identical histograms") {
    MonoConfig cfg;
    cfg.sets["N"] = 3;
    SpecProgram p = program(
        "qpu kernel[N]() -> bit[N]:\n"
        "    '+'[N] | std[N].measure\n",
        "kernel", cfg);
    RunOptions opt;
    opt.shots = 200;
    opt.seed = 123;
    Histogram a = run_kernel(p, opt);
    Histogram b = run_kernel(p, opt);
    CHECK(a.counts == b.counts);
    opt.seed = 124;
    Histogram c = run_kernel(p, opt);
    CHECK(a.counts != c.counts); // different seed, different samples
}

TEST_CASE("applying f then ~f restores the state") {
    const char *funcs[] = {
        "std >> pm",
        "std[2] >> fourier[2]",
        "'1' & std.flip",
        "(std >> pm) + id",
        "phase(0.8)*id",
        "pm.rotate(0.9)",
    };
    for (const char *f : funcs) {
        CAPTURE(f);
        std::string src =
            "qpu kernel() -> qubit[2]:\n    '0' + '1' | (std >> pm) + (std >> ij) | ";
        src += std::string("(") + f + ") | ~(" + f + ")\n";
        // pad one-qubit functions to two qubits
        if (std::string(f).find('2') == std::string::npos &&
            std::string(f).find('&') == std::string::npos &&
            std::string(f).find('+') == std::string::npos) {
            src = "qpu kernel() -> qubit[2]:\n    '0' + '1' | (std >> pm) + (std >> ij) | (";
            src += std::string(f) + ") + id | (~(" + f + ")) + id\n";
        }
        SpecProgram p = program(src);
        StateResult r = evaluate_state(p, {});
        // reference: the state right after the preparation stage
        SpecProgram q = program(
            "qpu kernel() -> qubit[2]:\n    '0' + '1' | (std >> pm) + (std >> ij)\n");
        StateResult ref = evaluate_state(q, {});
        REQUIRE(r.state.amp.size() == ref.state.amp.size());
        for (size_t i = 0; i < ref.state.amp.size(); i++)
            CHECK(close(r.state.amp[i], ref.state.amp[i]));
    }
}

TEST_CASE("phase(theta)* multiplies the global state; minus sugar is pi") {
    SpecProgram p = program("qpu kernel() -> qubit:\n    phase(0.6)*'0'\n");
    StateResult r = evaluate_state(p, {});
    CHECK(close(r.state.amp[0], std::polar(1.0, 0.6)));

    SpecProgram m = program("qpu kernel() -> qubit:\n    -'0'\n");
    StateResult rm = evaluate_state(m, {});
    CHECK(close(rm.state.amp[0], std::polar(1.0, kPi)));

    // density-matrix equality: global phase is unobservable in outcomes
    SpecProgram h1 = program("qpu kernel() -> bit[1]:\n    phase(1.3)*'+' | std.measure\n");
    SpecProgram h2 = program("qpu kernel() -> bit[1]:\n    '+' | std.measure\n");
    RunOptions opt;
    opt.shots = 300;
    opt.seed = 77;
    CHECK(run_kernel(h1, opt).counts == run_kernel(h2, opt).counts);
}

TEST_CASE("tensor application peels arity left to right") {
    MonoConfig cfg;
    SpecProgram p = program(
        "qpu kernel() -> bit[2]:\n"
        "    '0' + '1' + '0' | std.measure + discard + std.measure\n",
        "kernel", cfg);
    Histogram h = run_kernel(p, {.shots = 10, .seed = 1});
    CHECK(h.counts.at("00") == 10);
}

TEST_CASE("progress and preservation hold on random well-typed pipelines") {
    std::mt19937_64 rng(2024);
    const char *one_qubit_rev[] = {"std >> pm", "pm >> std", "std.flip",
                                   "std.rotate(0.4)", "ij >> std", "id",
                                   "phase(0.25)*id", "~(std >> ij)"};
    for (int trial = 0; trial < 1000; trial++) {
        int n = 1 + static_cast<int>(rng() % 4);
        std::string lits = "";
        const char *syms = "01+-ij";
        for (int i = 0; i < n; i++)
            lits += syms[rng() % 6];
        std::string src = "qpu kernel() -> bit[" + std::to_string(n) + "]:\n    '" +
                          lits + "'";
        int stages = static_cast<int>(rng() % 4);
        for (int s = 0; s < stages; s++) {
            src += " | ";
            if (n >= 2 && rng() % 4 == 0) {
                // a predicated stage on the first two qubits
                src += "('1' & " + std::string(one_qubit_rev[rng() % 8]) + ")";
                for (int q = 2; q < n; q++)
                    src += " + id";
            } else {
                std::string t;
                for (int q = 0; q < n; q++) {
                    if (q)
                        t += " + ";
                    t += "(" + std::string(one_qubit_rev[rng() % 8]) + ")";
                }
                src += t;
            }
        }
        src += " | std[" + std::to_string(n) + "].measure\n";
        CAPTURE(src);
        SpecProgram p = program(src);
        RunOptions opt;
        opt.shots = 2;
        opt.seed = trial;
        // Must never throw StuckExpression / DeadQubit / norm errors.
        Histogram h = run_kernel(p, opt);
        long long total = 0;
        for (const auto &[k, v] : h.counts) {
            CHECK(k.size() == static_cast<size_t>(n));
            total += v;
        }
        CHECK(total == 2);
    }
}

TEST_CASE("controlled powers accumulate exactly the eigenphase per index") {
    // Phase estimation state before measurement, for eigenphase 1/3: the
    // precision register must hold sum_k e^{2 pi i k/3} |k> / sqrt(8),
    // independently constructed here.
    const std::string src =
        "qpu rev op[J](q: qubit[1]) -> qubit[1]:\n"
        "    q | std.rotate(2^J * 4 * pi / 3)\n"
        "qpu kernel[M]() -> qubit[M+1]:\n"
        "    '+'[M] + '1'\n"
        "    | repeat j in 0..M: ((std[M-1-j] + '1' + std[j]) & op[[j]])\n";
    MonoConfig cfg;
    cfg.sets["M"] = 3;
    SpecProgram p = monomorphize(parse_source(src), "kernel", cfg);
    check_program(p);
    StateResult r = evaluate_state(p, {});
    REQUIRE(r.state.amp.size() == 16);
    const double amp = 1.0 / std::sqrt(8.0);
    for (uint64_t k = 0; k < 8; k++) {
        cplx want = std::polar(amp, 2.0 * kPi * double(k) / 3.0);
        CHECK(close(r.state.amp[k * 2 + 1], want)); // eigenvector qubit is |1>
        CHECK(close(r.state.amp[k * 2], 0.0));
    }
}

TEST_CASE("corpus rev blocks undo themselves, including ancilla users") {
    // flag_rot allocates and cleanly discards an ancilla; f then ~f must
    // restore the statevector exactly.
    const std::string src =
        "classical all_ones[N](x: bit[N]) -> bit[1]:\n    x.and_reduce()\n"
        "qpu rev had_all[N](q: qubit[N]) -> qubit[N]:\n    q | (std >> pm)[N]\n"
        "qpu rev flag_rot[N, K](f: cfunc[N, 1], q: qubit[N]) -> qubit[N]:\n"
        "    q + '0' | f.xor_embed | id[N] + std.rotate(phases[2*K]) | f.xor_embed\n"
        "    | id[N] + discardz\n"
        "qpu kernel[N](f: cfunc[N, 1]) -> qubit[N]:\n"
        "    '0'[N] | had_all[[N]]\n"
        "    | flag_rot[[N, 0]](f) | ~(flag_rot[[N, 0]](f))\n";
    MonoConfig cfg;
    cfg.sets["N"] = 3;
    cfg.args["f"] = "all_ones";
    cfg.phases = {1.234, 0.0};
    ProgramAst ast = parse_source(src);
    SpecProgram p = monomorphize(ast, "kernel", cfg);
    check_program(p);
    StateResult got = evaluate_state(p, {});

    const std::string ref_src =
        "qpu rev had_all[N](q: qubit[N]) -> qubit[N]:\n    q | (std >> pm)[N]\n"
        "qpu kernel[N]() -> qubit[N]:\n    '0'[N] | had_all[[N]]\n";
    MonoConfig rcfg;
    rcfg.sets["N"] = 3;
    SpecProgram ref = monomorphize(parse_source(ref_src), "kernel", rcfg);
    check_program(ref);
    StateResult want = evaluate_state(ref, {});

    // got has a freed ancilla sitting at |0>; restrict to the result qubits.
    auto extract = [](const StateResult &r) {
        int m = static_cast<int>(r.qubits.size());
        Vec out(size_t(1) << m, 0.0);
        for (uint64_t z = 0; z < r.state.amp.size(); z++) {
            if (r.state.amp[z] == cplx(0.0))
                continue;
            uint64_t sub = 0;
            for (int i = 0; i < m; i++)
                sub |= ((z >> (r.state.total - 1 - r.qubits[i])) & 1) << (m - 1 - i);
            out[sub] += r.state.amp[z];
        }
        return out;
    };
    Vec got_amp = extract(got), want_amp = extract(want);
    for (size_t i = 0; i < want_amp.size(); i++)
        CHECK(close(got_amp[i], want_amp[i]));
}

TEST_CASE("the oracle counter counts embedding applications per run") {
    MonoConfig cfg;
    cfg.args["f"] = "dot_secret(0b101)";
    SpecProgram p = program(
        "classical dot_secret[N](s: bit[N], x: bit[N]) -> bit[1]:\n"
        "    (x & s).xor_reduce()\n"
        "qpu kernel[N](f: cfunc[N, 1]) -> bit[N]:\n"
        "    '+'[N] | f.phase | pm[N] >> std[N] | std[N].measure\n",
        "kernel", cfg);
    RunStats stats;
    RunOptions opt;
    opt.shots = 17;
    run_kernel(p, opt, &stats);
    CHECK(stats.embed_applications == 17); // exactly one oracle call per shot
}
