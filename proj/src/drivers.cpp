#include "basisc/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "basisc/corpus.hpp"
#include "basisc/parser.hpp"
#include "basisc/post.hpp"

namespace basisc {

namespace {

long long get_set(const DriverConfig &cfg, const std::string &k, long long dflt) {
    auto it = cfg.sets.find(k);
    return it == cfg.sets.end() ? dflt : it->second;
}

std::string get_arg(const DriverConfig &cfg, const std::string &k,
                    const std::string &dflt) {
    auto it = cfg.args.find(k);
    return it == cfg.args.end() ? dflt : it->second;
}

std::vector<double> all_pi(long long iterations) {
    return std::vector<double>(2 * iterations, 3.14159265358979323846);
}

RunOptions run_options(const DriverConfig &cfg, long long shots, uint64_t shot_base = 0) {
    RunOptions opt;
    opt.shots = shots;
    opt.seed = cfg.seed;
    opt.shot_base = shot_base;
    opt.tol = cfg.tol;
    opt.max_qubits = cfg.max_qubits;
    return opt;
}

std::string modal_outcome(const Histogram &h) {
    std::string best;
    long long count = -1;
    for (const auto &[k, v] : h.counts)
        if (v > count) {
            best = k;
            count = v;
        }
    return best;
}

BitWord parse_bits(const std::string &s) {
    BitWord w;
    for (char c : s)
        w.push_back(c == '1');
    return w;
}

// --- individual drivers ----------------------------------------------------

DriverResult drive_deutsch(const DriverConfig &cfg) {
    MonoConfig mono;
    mono.args["f"] = get_arg(cfg, "f", "f_id");
    SpecProgram prog = prepare_corpus("deutsch", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    bool constant = r.histogram.counts.count("0") == 1;
    bool balanced = r.histogram.counts.count("1") == 1;
    r.success = constant != balanced;
    r.answer = constant ? "constant" : "balanced";
    return r;
}

DriverResult drive_dj(const DriverConfig &cfg) {
    long long n = get_set(cfg, "N", 4);
    MonoConfig mono;
    mono.sets["N"] = n;
    mono.args["f"] = get_arg(cfg, "f", "balanced_first");
    SpecProgram prog = prepare_corpus("dj", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    std::string zeros(n, '0');
    long long zero_shots = 0;
    auto it = r.histogram.counts.find(zeros);
    if (it != r.histogram.counts.end())
        zero_shots = it->second;
    r.success = zero_shots == 0 || zero_shots == cfg.shots;
    r.answer = zero_shots == cfg.shots ? "constant" : "balanced";
    return r;
}

DriverResult drive_bv(const DriverConfig &cfg) {
    std::string s = get_arg(cfg, "s", "110");
    MonoConfig mono;
    mono.args["f"] = get_arg(cfg, "f", "dot_secret(0b" + s + ")");
    SpecProgram prog = prepare_corpus("bv", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    r.answer = modal_outcome(r.histogram);
    r.success = r.histogram.counts.size() == 1;
    return r;
}

DriverResult drive_ghz(const DriverConfig &cfg) {
    long long n = get_set(cfg, "N", 3);
    MonoConfig mono;
    mono.sets["N"] = n;
    SpecProgram prog = prepare_corpus("ghz", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    std::string zeros(n, '0'), ones(n, '1');
    r.success = true;
    for (const auto &[k, v] : r.histogram.counts)
        if (k != zeros && k != ones)
            r.success = false;
    r.answer = "support {" + zeros + ", " + ones + "}";
    return r;
}

bool table_has_period(const TruthTable &t, long long r) {
    if (r <= 0 || r >= static_cast<long long>(t.size()))
        return false;
    for (uint64_t x = 0; x + r < t.size(); x++)
        if (t.out[x] != t.out[x + r])
            return false;
    // Minimality: no proper divisor of r is itself a period.
    for (long long d = 1; d < r; d++) {
        if (r % d)
            continue;
        bool period = true;
        for (uint64_t x = 0; x + d < t.size() && period; x++)
            period = t.out[x] == t.out[x + d];
        if (period)
            return false;
    }
    return true;
}

DriverResult drive_period(const DriverConfig &cfg) {
    long long m = get_set(cfg, "M", 5);
    long long n = get_set(cfg, "N", 3);
    long long k = get_set(cfg, "K", 2);
    long long budget = get_set(cfg, "retries", 10);
    MonoConfig mono;
    std::ostringstream f;
    f << "low_bits[[" << m << ", " << n << ", " << k << "]]";
    mono.args["f"] = get_arg(cfg, "f", f.str());
    SpecProgram prog = prepare_corpus("period", "kernel", mono, cfg.tol);

    // Classical view of the same black box, for verifying candidates.
    SpecProgram cls;
    ProgramAst ast = parse_source(corpus_source("period"));
    MonoConfig cm;
    cm.sets = {{"M", m}, {"N", n}, {"K", k}};
    const Definition &fdef = specialize_classical_for_eval(cls, ast, "low_bits", cm, m);
    TruthTable table = truth_table(fdef);

    DriverResult r;
    long long acc = 0;
    for (long long attempt = 0; attempt < budget; attempt++) {
        Histogram h = run_kernel(prog, run_options(cfg, 1, attempt), &r.stats);
        r.invocations++;
        BitWord y = parse_bits(h.counts.begin()->first);
        Rational frac = as_bin_frac(y);
        if (frac.num == 0)
            continue;
        Rational best = last_convergent_with_denominator_below(
            cfrac_convergents(frac), 1LL << m);
        acc = acc == 0 ? best.den : lcm_ll(acc, best.den);
        if (table_has_period(table, acc)) {
            r.success = true;
            r.answer = std::to_string(acc);
            return r;
        }
    }
    r.answer = "no period found";
    return r;
}

DriverResult drive_simon(const DriverConfig &cfg) {
    long long budget = get_set(cfg, "budget", 25);
    MonoConfig mono;
    mono.args["f"] = get_arg(cfg, "f", "pair_mask");
    SpecProgram prog = prepare_corpus("simon", "kernel", mono, cfg.tol);

    SpecProgram cls;
    ProgramAst ast = parse_source(corpus_source("simon"));
    MonoConfig cm;
    const Definition &fdef = specialize_classical_for_eval(
        cls, ast, get_arg(cfg, "f", "pair_mask"), cm, 3);

    DriverResult r;
    std::vector<BitWord> rows;
    for (long long attempt = 0; attempt < budget; attempt++) {
        Histogram h = run_kernel(prog, run_options(cfg, 1, attempt), &r.stats);
        r.invocations++;
        BitWord y = parse_bits(h.counts.begin()->first);
        if (word_to_index(y) == 0)
            continue;
        rows.push_back(y);
        auto s = gf2_solve_nullspace(rows);
        if (!s)
            continue;
        // Verify the candidate against the black box (f(0) == f(s)).
        BitWord zero(s->size(), false);
        if (word_to_index(*s) != 0 && eval_classical(fdef, zero) == eval_classical(fdef, *s)) {
            r.success = true;
            r.answer = word_str(*s);
            r.rows = rows;
            return r;
        }
        rows.pop_back(); // inconsistent with the promise; drop and retry
    }
    r.rows = rows;
    r.answer = "no mask found";
    return r;
}

DriverResult drive_qpe(const DriverConfig &cfg) {
    long long m = get_set(cfg, "M", 3);
    long long e = get_set(cfg, "E", 1);
    MonoConfig mono;
    mono.sets["M"] = m;
    mono.sets["E"] = e;
    mono.args["prep"] = get_arg(cfg, "prep", "prep_one[[" + std::to_string(e) + "]]");
    mono.args["op"] = get_arg(cfg, "op", "rot_op[[...]]");
    SpecProgram prog = prepare_corpus("qpe", "qpe", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    std::string top = modal_outcome(r.histogram);
    Rational phase = as_bin_frac(parse_bits(top));
    r.answer = std::to_string(phase.num) + "/" + std::to_string(phase.den);
    r.success = true;
    return r;
}

struct OrderOutcome {
    bool found = false;
    long long order = 0;
    long long invocations = 0;
};

OrderOutcome find_order(long long x, long long modulus, const DriverConfig &cfg,
                        uint64_t shot_base, RunStats &stats) {
    long long l = 1;
    while ((1LL << l) < modulus)
        l++;
    long long t = 2 * l + 1;
    MonoConfig mono;
    mono.sets = {{"X", x},
                 {"XI", modinv(x, modulus)},
                 {"N", modulus},
                 {"L", l},
                 {"T", t}};
    SpecProgram prog = prepare_corpus("order_finding", "kernel", mono, cfg.tol);
    OrderOutcome out;
    long long acc = 0;
    long long budget = get_set(cfg, "retries", 10);
    for (long long attempt = 0; attempt < budget; attempt++) {
        RunOptions opt = run_options(cfg, 1, shot_base + attempt);
        Histogram h = run_kernel(prog, opt, &stats);
        out.invocations++;
        BitWord y = parse_bits(h.counts.begin()->first);
        Rational frac = as_bin_frac(y);
        if (frac.num == 0)
            continue;
        Rational conv = last_convergent_with_denominator_below(
            cfrac_convergents(frac), modulus);
        acc = acc == 0 ? conv.den : lcm_ll(acc, conv.den);
        if (acc > 0 && pow_mod(x, acc, modulus) == 1) {
            // Reduce to the smallest exponent that works.
            for (long long d = 1; d <= acc; d++)
                if (acc % d == 0 && pow_mod(x, d, modulus) == 1) {
                    out.order = d;
                    break;
                }
            out.found = true;
            return out;
        }
    }
    return out;
}

DriverResult drive_order_finding(const DriverConfig &cfg) {
    long long x = get_set(cfg, "x", 7);
    long long n = get_set(cfg, "N", 15);
    DriverResult r;
    OrderOutcome o = find_order(x, n, cfg, 0, r.stats);
    r.invocations = o.invocations;
    r.success = o.found;
    r.answer = o.found ? std::to_string(o.order) : "no order found";
    return r;
}

DriverResult drive_shors(const DriverConfig &cfg) {
    long long n = get_set(cfg, "N", 15);
    DriverResult r;
    if (n % 2 == 0) {
        r.success = true;
        r.answer = "2";
        return r;
    }
    RngStream rng(cfg.seed, 0x5105u);
    long long budget = get_set(cfg, "attempts", 8);
    for (long long attempt = 0; attempt < budget; attempt++) {
        long long a = 2 + static_cast<long long>(rng.uniform() * static_cast<double>(n - 3));
        long long g = gcd_ll(a, n);
        if (g > 1 && g < n) {
            r.success = true;
            r.answer = std::to_string(g);
            return r;
        }
        OrderOutcome o = find_order(a, n, cfg, (attempt + 1) * 1000, r.stats);
        r.invocations += o.invocations;
        if (!o.found || o.order % 2 != 0)
            continue;
        long long half = pow_mod(a, o.order / 2, n);
        if (half == n - 1)
            continue;
        for (long long f : {gcd_ll(half - 1, n), gcd_ll(half + 1, n)}) {
            if (f > 1 && f < n && n % f == 0) {
                r.success = true;
                r.answer = std::to_string(f);
                return r;
            }
        }
    }
    r.answer = "no factor found";
    return r;
}

DriverResult drive_grover(const DriverConfig &cfg) {
    long long n = get_set(cfg, "N", 3);
    long long answers = get_set(cfg, "answers", 1);
    long long iters = get_set(cfg, "I", grover_iterations(static_cast<int>(n), answers));
    MonoConfig mono;
    mono.sets = {{"N", n}, {"I", iters}};
    std::string fname = get_arg(cfg, "f", "all_ones");
    mono.args["f"] = fname;
    SpecProgram prog = prepare_corpus("grover", "kernel", mono, cfg.tol);

    SpecProgram cls;
    ProgramAst ast = parse_source(corpus_source("grover"));
    MonoConfig cm;
    cm.sets["N"] = n;
    const Definition &fdef = specialize_classical_for_eval(cls, ast, fname, cm, n);

    DriverResult r;
    r.histogram = run_kernel(prog, run_options(cfg, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    // Classical post-filter: keep only outcomes the oracle accepts.
    std::map<std::string, long long> hits;
    for (const auto &[k, v] : r.histogram.counts)
        if (eval_classical(fdef, parse_bits(k))[0])
            hits[k] += v;
    std::string out;
    for (const auto &[k, v] : hits) {
        if (!out.empty())
            out += " ";
        out += k;
    }
    r.success = !hits.empty();
    r.answer = out.empty() ? "no answers observed" : out;
    return r;
}

DriverResult drive_fixpoint(const DriverConfig &cfg) {
    long long n = get_set(cfg, "N", 3);
    long long iters = get_set(cfg, "I", 2);
    DriverConfig local = cfg;
    if (local.phases.empty())
        local.phases = all_pi(iters);
    MonoConfig mono;
    mono.sets = {{"N", n}, {"I", iters}};
    mono.args["f"] = get_arg(cfg, "f", "not_all_ones_prefix");
    mono.args["a"] = get_arg(cfg, "a", "had_all[[" + std::to_string(n) + "]]");
    mono.phases = local.phases;
    SpecProgram prog = prepare_corpus("fix_pt_amp", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(local, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    r.answer = modal_outcome(r.histogram);
    r.success = true;
    return r;
}

DriverResult drive_match(const DriverConfig &cfg) {
    std::string hay = get_arg(cfg, "haystack", "01110000");
    std::string needle = get_arg(cfg, "needle", "11");
    long long iters = get_set(cfg, "I", 1);
    DriverConfig local = cfg;
    if (local.phases.empty())
        local.phases = all_pi(iters);
    MonoConfig mono;
    mono.sets = {{"I", iters}};
    mono.args["f"] = "is_match";
    mono.args["a"] = "prep_rotations(0b" + hay + ", 0b" + needle +
                     ", shift_cmp.inplace(shift_cmp))";
    mono.phases = local.phases;
    SpecProgram prog = prepare_corpus("match", "kernel", mono, cfg.tol);
    DriverResult r;
    r.histogram = run_kernel(prog, run_options(local, cfg.shots), &r.stats);
    r.invocations = cfg.shots;
    // Filter outcomes by classically re-checking the window.
    auto window_matches = [&](long long k) {
        for (size_t i = 0; i < needle.size(); i++)
            if (hay[(k + i) % hay.size()] != needle[i])
                return false;
        return true;
    };
    std::string out;
    for (const auto &[bits, count] : r.histogram.counts) {
        long long k = static_cast<long long>(word_to_index(parse_bits(bits)));
        if (window_matches(k)) {
            if (!out.empty())
                out += " ";
            out += std::to_string(k);
        }
    }
    r.success = !out.empty();
    r.answer = out.empty() ? "no match" : out;
    return r;
}

} // namespace

SpecProgram prepare_corpus(const std::string &corpus_name, const std::string &entry,
                           const MonoConfig &mono, double tol) {
    ProgramAst ast = parse_source(corpus_source(corpus_name));
    SpecProgram prog = monomorphize(ast, entry, mono);
    check_program(prog, tol);
    return prog;
}

std::vector<std::string> driver_names() {
    return {"deutsch", "dj",     "bv",    "ghz",      "period",   "simon",
            "qpe",     "order_finding", "shors", "grover", "fixpoint", "match"};
}

DriverResult run_driver(const std::string &name, const DriverConfig &cfg) {
    if (name == "deutsch") return drive_deutsch(cfg);
    if (name == "dj") return drive_dj(cfg);
    if (name == "bv") return drive_bv(cfg);
    if (name == "ghz") return drive_ghz(cfg);
    if (name == "period") return drive_period(cfg);
    if (name == "simon") return drive_simon(cfg);
    if (name == "qpe") return drive_qpe(cfg);
    if (name == "order_finding") return drive_order_finding(cfg);
    if (name == "shors") return drive_shors(cfg);
    if (name == "grover") return drive_grover(cfg);
    if (name == "fixpoint") return drive_fixpoint(cfg);
    if (name == "match") return drive_match(cfg);
    throw RunError("StuckExpression", "unknown driver '" + name + "'");
}

} // namespace basisc
