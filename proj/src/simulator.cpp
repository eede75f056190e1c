#include "basisc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace basisc {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Mat prep_matrix(char sym) {
    // Column 0 is the prepared state, column 1 an orthogonal completion.
    Mat m(2);
    Vec v = symbol_state(sym);
    m.at(0, 0) = v[0];
    m.at(1, 0) = v[1];
    m.at(0, 1) = std::conj(v[1]);
    m.at(1, 1) = -std::conj(v[0]);
    return m;
}

} // namespace

RngStream::RngStream(uint64_t seed, uint64_t shot)
    : gen(splitmix64(seed ^ splitmix64(shot + 0x51f0a74d1c631e09ULL))) {}

double RngStream::uniform() {
    if (!forced.empty()) {
        double v = forced.front();
        forced.erase(forced.begin());
        return v;
    }
    return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

// ---------------------------------------------------------------------------
// StateVector

int StateVector::live_count() const {
    int n = 0;
    for (char l : live)
        n += l ? 1 : 0;
    return n;
}

double StateVector::norm() const {
    double s = 0;
    for (const auto &a : amp)
        s += std::norm(a);
    return std::sqrt(s);
}

void StateVector::assert_norm() const {
    double n = norm();
    if (std::abs(n - 1.0) > 1e-9)
        throw RunError("DegenerateState",
                       "state norm drifted to " + std::to_string(n));
}

std::vector<int> StateVector::alloc_zero(int k) {
    std::vector<int> out;
    while (k > 0 && !pool.empty()) {
        out.push_back(pool.front());
        pool.erase(pool.begin());
        live[out.back()] = 1;
        k--;
    }
    if (k > 0) {
        if (total + k > max_qubits)
            throw RunError("CapacityExceeded",
                           "allocation exceeds the qubit cap of " +
                               std::to_string(max_qubits));
        // New qubits extend on the right (less significant bits), in |0>.
        size_t old_size = amp.size();
        std::vector<cplx> next(old_size << k, cplx(0.0));
        for (size_t z = 0; z < old_size; z++)
            next[z << k] = amp[z];
        amp = std::move(next);
        for (int i = 0; i < k; i++) {
            out.push_back(total + i);
            live.push_back(1);
        }
        total += k;
    }
    return out;
}

void StateVector::check_targets(const std::vector<int> &targets) const {
    for (size_t i = 0; i < targets.size(); i++) {
        int q = targets[i];
        if (q < 0 || q >= total || !live[q])
            throw RunError("DeadQubit",
                           "operation touches dead qubit index " + std::to_string(q));
        for (size_t j = i + 1; j < targets.size(); j++)
            if (targets[j] == q)
                throw RunError("IndexCollision",
                               "duplicate target qubit index " + std::to_string(q));
    }
}

namespace {

// Gathers the shift amount of each target qubit (MSB-first block order).
std::vector<int> target_shifts(int total, const std::vector<int> &targets) {
    std::vector<int> s(targets.size());
    for (size_t i = 0; i < targets.size(); i++)
        s[i] = total - 1 - targets[i];
    return s;
}

// Enumerates base indices with all target bits clear by spreading a counter
// over the non-target bit positions.
struct BaseIter {
    std::vector<int> free_shifts; // ascending
    uint64_t count;

    BaseIter(int total, const std::vector<int> &shifts) {
        std::vector<char> used(total, 0);
        for (int s : shifts)
            used[s] = 1;
        for (int s = 0; s < total; s++)
            if (!used[s])
                free_shifts.push_back(s);
        count = uint64_t(1) << free_shifts.size();
    }
    uint64_t base(uint64_t i) const {
        uint64_t z = 0;
        for (size_t b = 0; b < free_shifts.size(); b++)
            if ((i >> b) & 1)
                z |= uint64_t(1) << free_shifts[b];
        return z;
    }
};

} // namespace

void StateVector::apply_matrix(const Mat &u, const std::vector<int> &targets) {
    check_targets(targets);
    int m = static_cast<int>(targets.size());
    auto shifts = target_shifts(total, targets);
    if (m == 1) {
        const uint64_t bit = uint64_t(1) << shifts[0];
        const cplx u00 = u.at(0, 0), u01 = u.at(0, 1), u10 = u.at(1, 0), u11 = u.at(1, 1);
        for (uint64_t z = 0; z < amp.size(); z++) {
            if (z & bit)
                continue;
            cplx a0 = amp[z], a1 = amp[z | bit];
            amp[z] = u00 * a0 + u01 * a1;
            amp[z | bit] = u10 * a0 + u11 * a1;
        }
        assert_norm();
        return;
    }
    uint64_t dim = uint64_t(1) << m;
    BaseIter it(total, shifts);
    Vec in(dim), out(dim);
    for (uint64_t i = 0; i < it.count; i++) {
        uint64_t base = it.base(i);
        for (uint64_t t = 0; t < dim; t++) {
            uint64_t z = base;
            for (int b = 0; b < m; b++)
                if ((t >> (m - 1 - b)) & 1)
                    z |= uint64_t(1) << shifts[b];
            in[t] = amp[z];
        }
        for (uint64_t r = 0; r < dim; r++) {
            cplx s = 0;
            for (uint64_t c = 0; c < dim; c++)
                s += u.at(r, c) * in[c];
            out[r] = s;
        }
        for (uint64_t t = 0; t < dim; t++) {
            uint64_t z = base;
            for (int b = 0; b < m; b++)
                if ((t >> (m - 1 - b)) & 1)
                    z |= uint64_t(1) << shifts[b];
            amp[z] = out[t];
        }
    }
    assert_norm();
}

namespace {

inline uint64_t extract_sub(uint64_t z, const std::vector<int> &shifts) {
    uint64_t t = 0;
    int m = static_cast<int>(shifts.size());
    for (int b = 0; b < m; b++)
        t |= ((z >> shifts[b]) & 1) << (m - 1 - b);
    return t;
}

inline uint64_t replace_sub(uint64_t z, const std::vector<int> &shifts, uint64_t t) {
    int m = static_cast<int>(shifts.size());
    for (int b = 0; b < m; b++) {
        uint64_t bit = (t >> (m - 1 - b)) & 1;
        z = (z & ~(uint64_t(1) << shifts[b])) | (bit << shifts[b]);
    }
    return z;
}

} // namespace

void StateVector::apply_monomial(const MonomialBlock &b, const std::vector<int> &targets) {
    check_targets(targets);
    auto shifts = target_shifts(total, targets);
    std::vector<cplx> next(amp.size(), cplx(0.0));
    for (uint64_t z = 0; z < amp.size(); z++) {
        if (amp[z] == cplx(0.0))
            continue;
        uint64_t t = extract_sub(z, shifts);
        next[replace_sub(z, shifts, b.perm[t])] += b.phase[t] * amp[z];
    }
    amp = std::move(next);
    assert_norm();
}

void StateVector::apply_global_phase(double theta) {
    cplx ph = std::polar(1.0, theta);
    for (auto &a : amp)
        a *= ph;
}

void StateVector::apply_ctrl_matrix(const Mat &u, const std::vector<int> &targets,
                                    const std::vector<int> &ctrls,
                                    const std::vector<char> &ctrl_set) {
    std::vector<int> all = ctrls;
    all.insert(all.end(), targets.begin(), targets.end());
    check_targets(all);
    auto tsh = target_shifts(total, targets);
    auto csh = target_shifts(total, ctrls);
    int m = static_cast<int>(targets.size());
    uint64_t dim = uint64_t(1) << m;
    BaseIter it(total, [&] {
        std::vector<int> sh = tsh;
        sh.insert(sh.end(), csh.begin(), csh.end());
        return sh;
    }());
    Vec in(dim), out(dim);
    uint64_t cdim = uint64_t(1) << ctrls.size();
    for (uint64_t i = 0; i < it.count; i++) {
        uint64_t base0 = it.base(i);
        for (uint64_t cv = 0; cv < cdim; cv++) {
            uint64_t base = replace_sub(base0, csh, cv);
            if (!ctrl_set[cv])
                continue;
            for (uint64_t t = 0; t < dim; t++)
                in[t] = amp[replace_sub(base, tsh, t)];
            for (uint64_t r = 0; r < dim; r++) {
                cplx s = 0;
                for (uint64_t c = 0; c < dim; c++)
                    s += u.at(r, c) * in[c];
                out[r] = s;
            }
            for (uint64_t t = 0; t < dim; t++)
                amp[replace_sub(base, tsh, t)] = out[t];
        }
    }
    assert_norm();
}

void StateVector::apply_ctrl_monomial(const MonomialBlock &b,
                                      const std::vector<int> &targets,
                                      const std::vector<int> &ctrls,
                                      const std::vector<char> &ctrl_set) {
    std::vector<int> all = ctrls;
    all.insert(all.end(), targets.begin(), targets.end());
    check_targets(all);
    auto tsh = target_shifts(total, targets);
    auto csh = target_shifts(total, ctrls);
    std::vector<cplx> next(amp.size(), cplx(0.0));
    for (uint64_t z = 0; z < amp.size(); z++) {
        if (amp[z] == cplx(0.0))
            continue;
        if (!ctrl_set[extract_sub(z, csh)]) {
            next[z] += amp[z];
            continue;
        }
        uint64_t t = extract_sub(z, tsh);
        next[replace_sub(z, tsh, b.perm[t])] += b.phase[t] * amp[z];
    }
    amp = std::move(next);
    assert_norm();
}

void StateVector::apply_ctrl_phase(double theta, const std::vector<int> &ctrls,
                                   const std::vector<char> &ctrl_set) {
    check_targets(ctrls);
    auto csh = target_shifts(total, ctrls);
    cplx ph = std::polar(1.0, theta);
    for (uint64_t z = 0; z < amp.size(); z++)
        if (ctrl_set[extract_sub(z, csh)])
            amp[z] *= ph;
    assert_norm();
}

BitWord StateVector::measure_std(const std::vector<int> &targets, RngStream &rng) {
    check_targets(targets);
    int m = static_cast<int>(targets.size());
    auto shifts = target_shifts(total, targets);
    uint64_t dim = uint64_t(1) << m;
    std::vector<double> prob(dim, 0.0);
    for (uint64_t z = 0; z < amp.size(); z++)
        prob[extract_sub(z, shifts)] += std::norm(amp[z]);
    double sum = 0;
    for (double p : prob)
        sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw RunError("DegenerateState",
                       "outcome probabilities sum to " + std::to_string(sum));
    double u = rng.uniform() * sum;
    uint64_t outcome = dim - 1;
    double cum = 0;
    for (uint64_t j = 0; j < dim; j++) {
        cum += prob[j];
        if (u < cum) {
            outcome = j;
            break;
        }
    }
    while (prob[outcome] <= 0.0 && outcome > 0)
        outcome--; // numeric edge: land on a supported outcome
    double scale = 1.0 / std::sqrt(prob[outcome]);
    // Collapse, renormalize, and park the measured qubits back at |0>.
    std::vector<cplx> next(amp.size(), cplx(0.0));
    for (uint64_t z = 0; z < amp.size(); z++) {
        if (amp[z] == cplx(0.0))
            continue;
        if (extract_sub(z, shifts) != outcome)
            continue;
        next[replace_sub(z, shifts, 0)] += amp[z] * scale;
    }
    amp = std::move(next);
    for (int q : targets) {
        live[q] = 0;
        pool.insert(std::lower_bound(pool.begin(), pool.end(), q), q);
    }
    assert_norm();
    return index_to_word(outcome, m);
}

void StateVector::discard(int target, RngStream &rng) {
    // Reset-by-measurement; result dropped, index recycled.
    (void)measure_std({target}, rng);
}

void StateVector::discardz(int target) {
    check_targets({target});
    int shift = total - 1 - target;
    double one_mass = 0;
    for (uint64_t z = 0; z < amp.size(); z++)
        if ((z >> shift) & 1)
            one_mass += std::norm(amp[z]);
    if (one_mass > 1e-9)
        throw RunError("DirtyDiscardZ",
                       "discardz on a qubit with |1> mass " + std::to_string(one_mass));
    for (uint64_t z = 0; z < amp.size(); z++)
        if ((z >> shift) & 1)
            amp[z] = 0.0;
    double n = norm();
    if (n > 0)
        for (auto &a : amp)
            a /= n;
    live[target] = 0;
    pool.insert(std::lower_bound(pool.begin(), pool.end(), target), target);
}

// ===========================================================================
// Reversible lowering

namespace {

struct RevAction {
    enum class Kind {
        Alloc,      // slots enter holding the literal `syms`
        Dealloc,    // slots leave; must hold `syms` (checked per qubit)
        Unitary,
        Monomial,
        GlobalPhase,
    };

    Kind kind = Kind::Unitary;
    std::vector<int> slots;
    std::string syms;
    Mat matrix;
    MonomialBlock mono;
    double theta = 0.0;
    std::vector<int> ctrl_slots;  // empty when unconditioned
    std::vector<char> ctrl_set;
    bool is_embed = false;
};

struct RevProgram {
    int n_slots = 0;
    std::vector<int> in_slots;
    std::vector<int> out_slots;
    std::vector<RevAction> actions;

    int arity_in() const { return static_cast<int>(in_slots.size()); }
    int arity_out() const { return static_cast<int>(out_slots.size()); }
};

RevAction adjoint_action(const RevAction &a) {
    RevAction r = a;
    switch (a.kind) {
    case RevAction::Kind::Alloc:
        r.kind = RevAction::Kind::Dealloc;
        break;
    case RevAction::Kind::Dealloc:
        r.kind = RevAction::Kind::Alloc;
        break;
    case RevAction::Kind::Unitary:
        r.matrix = a.matrix.dagger();
        break;
    case RevAction::Kind::Monomial:
        r.mono = a.mono.adjoint();
        break;
    case RevAction::Kind::GlobalPhase:
        r.theta = -a.theta;
        break;
    }
    return r;
}

RevProgram adjoint_program(const RevProgram &p) {
    if (p.arity_in() != p.arity_out())
        throw RunError("StuckExpression", "adjoint of an unbalanced function");
    RevProgram r;
    r.n_slots = p.n_slots;
    r.in_slots = p.out_slots;
    r.out_slots = p.in_slots;
    for (auto it = p.actions.rbegin(); it != p.actions.rend(); ++it)
        r.actions.push_back(adjoint_action(*it));
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Evaluator

namespace {

struct VComp {
    bool is_bit = false;
    int qubit = -1;
    bool bit = false;
};
using Value = std::vector<VComp>;

Value bits_value(const BitWord &w) {
    Value v;
    for (bool b : w) {
        VComp c;
        c.is_bit = true;
        c.bit = b;
        v.push_back(c);
    }
    return v;
}

std::vector<int> value_qubits(const Value &v) {
    std::vector<int> q;
    for (const auto &c : v) {
        if (c.is_bit)
            throw RunError("StuckExpression", "expected qubits, found bits");
        q.push_back(c.qubit);
    }
    return q;
}

// Lowered artifacts shared across the shots of one run: truth tables,
// embeddings, and reversible action programs keyed by expression identity.
struct LowerCache {
    std::map<const Expr *, std::shared_ptr<RevProgram>> rev;
    std::map<std::string, std::shared_ptr<RevProgram>> kernels;
    std::map<std::string, EmbeddingAction> embeds;
    std::map<std::string, TruthTable> tables;
};

class Evaluator {
public:
    Evaluator(const SpecProgram &prog, RngStream &rng, RunStats &stats,
              const RunOptions &opt, LowerCache &cache)
        : prog_(prog), rng_(rng), stats_(stats), tol_(opt.tol), cache_(cache) {
        state_.max_qubits = opt.max_qubits;
    }

    StateVector &state() { return state_; }

    Value eval_kernel(const Definition &d, std::vector<Value> args) {
        std::map<std::string, Value> env;
        if (args.size() != d.params.size())
            throw RunError("StuckExpression", "kernel argument count mismatch");
        for (size_t i = 0; i < d.params.size(); i++)
            env[d.params[i].name] = std::move(args[i]);
        return eval(d.body, env);
    }

private:
    const SpecProgram &prog_;
    StateVector state_;
    RngStream &rng_;
    RunStats &stats_;
    double tol_;
    LowerCache &cache_;

    // --- classical embedding support ------------------------------------

    const TruthTable &table_of(const std::string &name) {
        auto it = cache_.tables.find(name);
        if (it != cache_.tables.end())
            return it->second;
        return cache_.tables.emplace(name, truth_table(prog_.def(name))).first->second;
    }

    const EmbeddingAction &embedding_of(const Expr &e) {
        std::string key = std::to_string(static_cast<int>(e.embed)) + ":" +
                          e.sub[0].name +
                          (e.sub.size() > 1 ? ":" + e.sub[1].name : "");
        auto it = cache_.embeds.find(key);
        if (it != cache_.embeds.end())
            return it->second;
        EmbeddingAction act;
        switch (e.embed) {
        case EmbedKind::Xor:
            act = xor_embedding(table_of(e.sub[0].name));
            break;
        case EmbedKind::Phase:
            act = phase_embedding(table_of(e.sub[0].name));
            break;
        case EmbedKind::InPlace:
            act = inplace_embedding(table_of(e.sub[0].name), table_of(e.sub[1].name));
            break;
        }
        return cache_.embeds.emplace(key, std::move(act)).first->second;
    }

    static MonomialBlock embed_monomial(const EmbeddingAction &a) {
        MonomialBlock b = MonomialBlock::identity(a.width);
        if (a.kind == EmbedKind::Phase) {
            for (uint64_t i = 0; i < b.phase.size(); i++)
                b.phase[i] = a.mask[i] < 0 ? cplx(-1.0) : cplx(1.0);
        } else {
            for (uint64_t i = 0; i < b.perm.size(); i++)
                b.perm[i] = a.perm[i];
        }
        return b;
    }

    // --- arity of a function expression ----------------------------------

    long long fn_arity(const Expr &e) {
        switch (e.kind) {
        case Expr::Kind::BuiltIn:
            return 1;
        case Expr::Kind::Translate:
        case Expr::Kind::Sugar: {
            if (e.kind == Expr::Kind::Sugar && e.sugar == SugarKind::Prep) {
                const Expr &op = e.sub[0];
                if (op.kind == Expr::Kind::QubitLit)
                    return op.ql.fold.value * static_cast<long long>(op.ql.syms.size());
                return static_cast<long long>(op.bits.size());
            }
            return basis_qubit_count(e.basis);
        }
        case Expr::Kind::Measure:
            return basis_qubit_count(e.basis);
        case Expr::Kind::Pred:
            return basis_qubit_count(e.basis) + fn_arity(e.sub[0]);
        case Expr::Kind::Reverse:
        case Expr::Kind::Phase:
            return fn_arity(e.sub[0]);
        case Expr::Kind::Fold:
            return e.dim.value * fn_arity(e.sub[0]);
        case Expr::Kind::Tensor: {
            long long n = 0;
            for (const auto &s : e.sub)
                n += fn_arity(s);
            return n;
        }
        case Expr::Kind::Embed: {
            const Definition &fwd = prog_.def(e.sub[0].name);
            long long n_in = 0;
            for (const auto &p : fwd.params)
                n_in += bit_count(p.type);
            if (e.embed == EmbedKind::Xor)
                return n_in + bit_count(fwd.ret);
            return n_in;
        }
        case Expr::Kind::FuncRef: {
            const Definition &d = prog_.def(e.name);
            long long n = 0;
            for (const auto &p : d.params)
                n += qubit_count(p.type);
            return n;
        }
        default:
            throw RunError("StuckExpression", "expression is not a function");
        }
    }

    // --- reversible lowering ----------------------------------------------

    std::shared_ptr<RevProgram> lower_rev(const Expr &e) {
        auto it = cache_.rev.find(&e);
        if (it != cache_.rev.end())
            return it->second;
        auto p = std::make_shared<RevProgram>(lower_rev_fresh(e));
        cache_.rev[&e] = p;
        return p;
    }

    RevProgram lower_rev_fresh(const Expr &e) {
        switch (e.kind) {
        case Expr::Kind::BuiltIn: {
            if (e.builtin == BuiltinKind::Id) {
                RevProgram p;
                p.n_slots = 1;
                p.in_slots = {0};
                p.out_slots = {0};
                return p;
            }
            if (e.builtin == BuiltinKind::DiscardZ) {
                RevProgram p;
                p.n_slots = 1;
                p.in_slots = {0};
                RevAction a;
                a.kind = RevAction::Kind::Dealloc;
                a.slots = {0};
                a.syms = "0";
                p.actions.push_back(std::move(a));
                return p;
            }
            throw RunError("StuckExpression", "discard is not reversible");
        }
        case Expr::Kind::Translate: {
            auto blocks = lower_translation(e.basis, e.basis2, tol_);
            long long m = basis_qubit_count(e.basis);
            RevProgram p;
            p.n_slots = static_cast<int>(m);
            for (int i = 0; i < m; i++) {
                p.in_slots.push_back(i);
                p.out_slots.push_back(i);
            }
            for (auto &[blk, off] : blocks) {
                RevAction a;
                for (int i = 0; i < blk.m; i++)
                    a.slots.push_back(off + i);
                if (blk.mono) {
                    a.kind = RevAction::Kind::Monomial;
                    a.mono = std::move(*blk.mono);
                } else {
                    a.kind = RevAction::Kind::Unitary;
                    a.matrix = std::move(*blk.matrix);
                }
                p.actions.push_back(std::move(a));
            }
            return p;
        }
        case Expr::Kind::Sugar: {
            if (e.sugar == SugarKind::Flip)
                return lower_rev_fresh(desugar_flip(e.basis));
            if (e.sugar == SugarKind::Rotate)
                return lower_rev_fresh(desugar_rotate(e.basis, e.angle.num));
            // prep: per-symbol one-qubit preparations
            std::string syms;
            const Expr &op = e.sub[0];
            if (op.kind == Expr::Kind::QubitLit) {
                for (DimValue i = 0; i < op.ql.fold.value; i++)
                    syms += op.ql.syms;
            } else {
                for (bool b : op.bits)
                    syms += b ? '1' : '0';
            }
            RevProgram p;
            p.n_slots = static_cast<int>(syms.size());
            for (int i = 0; i < p.n_slots; i++) {
                p.in_slots.push_back(i);
                p.out_slots.push_back(i);
                if (syms[i] == '0')
                    continue;
                RevAction a;
                a.kind = RevAction::Kind::Unitary;
                a.slots = {i};
                a.matrix = prep_matrix(syms[i]);
                p.actions.push_back(std::move(a));
            }
            return p;
        }
        case Expr::Kind::Phase: {
            RevProgram p = lower_rev_fresh(e.sub[0]);
            RevAction a;
            a.kind = RevAction::Kind::GlobalPhase;
            a.theta = e.angle.num;
            p.actions.push_back(std::move(a));
            return p;
        }
        case Expr::Kind::Reverse:
            return adjoint_program(*lower_rev(e.sub[0]));
        case Expr::Kind::Pred:
            return lower_pred(e);
        case Expr::Kind::Embed: {
            const EmbeddingAction &act = embedding_of(e);
            RevProgram p;
            p.n_slots = act.width;
            for (int i = 0; i < act.width; i++) {
                p.in_slots.push_back(i);
                p.out_slots.push_back(i);
            }
            RevAction a;
            a.kind = RevAction::Kind::Monomial;
            a.mono = embed_monomial(act);
            a.is_embed = true;
            for (int i = 0; i < act.width; i++)
                a.slots.push_back(i);
            p.actions.push_back(std::move(a));
            return p;
        }
        case Expr::Kind::Tensor: {
            RevProgram p;
            for (const auto &s : e.sub)
                merge_tensor(p, *lower_rev(s));
            return p;
        }
        case Expr::Kind::Fold: {
            RevProgram p;
            auto part = lower_rev(e.sub[0]);
            for (DimValue i = 0; i < e.dim.value; i++)
                merge_tensor(p, *part);
            return p;
        }
        case Expr::Kind::FuncRef: {
            auto it = cache_.kernels.find(e.name);
            if (it != cache_.kernels.end())
                return *it->second;
            const Definition &d = prog_.def(e.name);
            if (d.kind != Definition::Kind::Quantum || !d.reversible)
                throw RunError("StuckExpression",
                               "'" + e.name + "' cannot be lowered as reversible");
            RevProgram p = lower_kernel(d);
            cache_.kernels[e.name] = std::make_shared<RevProgram>(p);
            return p;
        }
        default:
            throw RunError("StuckExpression", "expression is not a reversible function");
        }
    }

    void merge_tensor(RevProgram &p, const RevProgram &part) {
        int off = p.n_slots;
        p.n_slots += part.n_slots;
        for (int s : part.in_slots)
            p.in_slots.push_back(s + off);
        for (int s : part.out_slots)
            p.out_slots.push_back(s + off);
        for (RevAction a : part.actions) {
            for (auto &s : a.slots)
                s += off;
            for (auto &s : a.ctrl_slots)
                s += off;
            p.actions.push_back(std::move(a));
        }
    }

    RevProgram lower_pred(const Expr &e) {
        BasisValue pb = veclist(e.basis);
        RevProgram inner = *lower_rev(e.sub[0]);
        if (inner.arity_in() != inner.arity_out())
            throw RunError("StuckExpression", "predicated function is unbalanced");
        auto idx = std_index_set(pb, tol_);
        if (!idx) {
            // Non-diagonal predicate: collapse the inner function to a dense
            // block and build (I-P) (x) I + P (x) U directly.
            Mat u = program_matrix(inner);
            UnitaryBlock ub;
            ub.m = inner.arity_in();
            ub.matrix = std::move(u);
            UnitaryBlock cb = predicated_unitary(pb, ub, tol_);
            RevProgram p;
            p.n_slots = cb.m;
            for (int i = 0; i < cb.m; i++) {
                p.in_slots.push_back(i);
                p.out_slots.push_back(i);
            }
            RevAction a;
            a.kind = RevAction::Kind::Unitary;
            a.matrix = cb.dense();
            for (int i = 0; i < cb.m; i++)
                a.slots.push_back(i);
            p.actions.push_back(std::move(a));
            return p;
        }
        // Diagonal predicate: wrap every action with the control set.
        std::vector<char> in_set(uint64_t(1) << pb.m, 0);
        for (uint64_t i : *idx)
            in_set[i] = 1;
        RevProgram p;
        p.n_slots = inner.n_slots + pb.m;
        std::vector<int> pred_slots;
        for (int i = 0; i < pb.m; i++) {
            pred_slots.push_back(inner.n_slots + i);
            p.in_slots.push_back(inner.n_slots + i);
        }
        for (int s : inner.in_slots)
            p.in_slots.push_back(s);
        for (int i = 0; i < pb.m; i++)
            p.out_slots.push_back(inner.n_slots + i);
        for (int s : inner.out_slots)
            p.out_slots.push_back(s);
        for (RevAction a : inner.actions) {
            switch (a.kind) {
            case RevAction::Kind::Alloc:
            case RevAction::Kind::Dealloc:
                break; // ancillas of the inner function run unconditionally
            case RevAction::Kind::GlobalPhase: {
                // A controlled global phase becomes a phase on the predicate.
                RevAction c;
                c.kind = RevAction::Kind::GlobalPhase;
                c.theta = a.theta;
                c.ctrl_slots = pred_slots;
                c.ctrl_set = in_set;
                prepend_ctrl(c, a);
                a = std::move(c);
                break;
            }
            default: {
                RevAction c = a;
                c.ctrl_slots = pred_slots;
                c.ctrl_set = in_set;
                prepend_ctrl(c, a);
                a = std::move(c);
                break;
            }
            }
            p.actions.push_back(std::move(a));
        }
        return p;
    }

    // Combines an outer control with any control the action already carries.
    void prepend_ctrl(RevAction &c, const RevAction &orig) {
        if (orig.ctrl_slots.empty())
            return;
        std::vector<int> slots = c.ctrl_slots;
        slots.insert(slots.end(), orig.ctrl_slots.begin(), orig.ctrl_slots.end());
        size_t outer = c.ctrl_set.size() ? c.ctrl_set.size() : 1;
        size_t inner = orig.ctrl_set.size();
        std::vector<char> merged(outer * inner, 0);
        for (size_t a = 0; a < outer; a++)
            for (size_t b = 0; b < inner; b++)
                merged[a * inner + b] = c.ctrl_set[a] && orig.ctrl_set[b];
        c.ctrl_slots = std::move(slots);
        c.ctrl_set = std::move(merged);
    }

    // Lowers a rev kernel body to actions by symbolic evaluation over slots.
    RevProgram lower_kernel(const Definition &d) {
        RevProgram p;
        std::map<std::string, std::vector<int>> env;
        for (const auto &prm : d.params) {
            long long n = qubit_count(prm.type);
            std::vector<int> slots;
            for (long long i = 0; i < n; i++)
                slots.push_back(p.n_slots++);
            env[prm.name] = slots;
            for (int s : slots)
                p.in_slots.push_back(s);
        }
        p.out_slots = lower_eval(d.body, env, p);
        return p;
    }

    std::vector<int> lower_eval(const Expr &e, std::map<std::string, std::vector<int>> &env,
                                RevProgram &p) {
        switch (e.kind) {
        case Expr::Kind::Unit:
            return {};
        case Expr::Kind::Var: {
            auto it = env.find(e.name);
            if (it == env.end())
                throw RunError("StuckExpression", "unbound '" + e.name + "'");
            auto slots = it->second;
            env.erase(it);
            return slots;
        }
        case Expr::Kind::QubitLit: {
            std::string syms;
            for (DimValue i = 0; i < e.ql.fold.value; i++)
                syms += e.ql.syms;
            RevAction a;
            a.kind = RevAction::Kind::Alloc;
            a.syms = syms;
            std::vector<int> slots;
            for (size_t i = 0; i < syms.size(); i++) {
                slots.push_back(p.n_slots);
                a.slots.push_back(p.n_slots++);
            }
            p.actions.push_back(std::move(a));
            return slots;
        }
        case Expr::Kind::Tensor: {
            std::vector<int> out;
            for (const auto &s : e.sub) {
                auto part = lower_eval(s, env, p);
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        case Expr::Kind::Phase: {
            auto slots = lower_eval(e.sub[0], env, p);
            RevAction a;
            a.kind = RevAction::Kind::GlobalPhase;
            a.theta = e.angle.num;
            p.actions.push_back(std::move(a));
            return slots;
        }
        case Expr::Kind::Apply: {
            auto arg = lower_eval(e.sub[1], env, p);
            RevProgram sub = *lower_rev(e.sub[0]);
            return inline_program(p, sub, arg);
        }
        default:
            throw RunError("StuckExpression",
                           "unsupported form inside a reversible kernel");
        }
    }

    std::vector<int> inline_program(RevProgram &p, const RevProgram &sub,
                                    const std::vector<int> &arg) {
        if (static_cast<size_t>(sub.arity_in()) != arg.size())
            throw RunError("StuckExpression", "arity mismatch inlining function");
        std::map<int, int> remap;
        for (int i = 0; i < sub.arity_in(); i++)
            remap[sub.in_slots[i]] = arg[i];
        auto map_slot = [&](int s) {
            auto it = remap.find(s);
            if (it != remap.end())
                return it->second;
            int fresh = p.n_slots++;
            remap[s] = fresh;
            return fresh;
        };
        for (RevAction a : sub.actions) {
            for (auto &s : a.slots)
                s = map_slot(s);
            for (auto &s : a.ctrl_slots)
                s = map_slot(s);
            p.actions.push_back(std::move(a));
        }
        std::vector<int> out;
        for (int s : sub.out_slots)
            out.push_back(map_slot(s));
        return out;
    }

    // Dense matrix of a balanced reversible program, built column by column
    // through a scratch state.
    Mat program_matrix(const RevProgram &p) {
        int m = p.arity_in();
        if (m > kMaxDenseQubits)
            throw RunError("MatrixTooLarge",
                           "dense lowering over " + std::to_string(m) + " qubits");
        uint64_t dim = uint64_t(1) << m;
        Mat u(dim);
        for (uint64_t col = 0; col < dim; col++) {
            StateVector scratch;
            scratch.max_qubits = std::max(32, m + 8);
            auto qubits = scratch.alloc_zero(m);
            // Set |col> by flipping bits.
            MonomialBlock x = MonomialBlock::identity(1);
            std::swap(x.perm[0], x.perm[1]);
            for (int b = 0; b < m; b++)
                if ((col >> (m - 1 - b)) & 1)
                    scratch.apply_monomial(x, {qubits[b]});
            std::map<int, int> slot_map;
            for (int i = 0; i < m; i++)
                slot_map[p.in_slots[i]] = qubits[i];
            run_program_on(scratch, p, slot_map, nullptr);
            std::vector<int> out_q;
            for (int s : p.out_slots)
                out_q.push_back(slot_map.at(s));
            // Read the column: amplitudes over the result qubits.
            auto shifts = target_shifts(scratch.total, out_q);
            for (uint64_t z = 0; z < scratch.amp.size(); z++) {
                if (scratch.amp[z] == cplx(0.0))
                    continue;
                u.at(extract_sub(z, shifts), col) += scratch.amp[z];
            }
        }
        return u;
    }

    void run_program_on(StateVector &st, const RevProgram &p,
                        std::map<int, int> &slot_map, RunStats *stats) {
        for (const auto &a : p.actions) {
            switch (a.kind) {
            case RevAction::Kind::Alloc: {
                auto fresh = st.alloc_zero(static_cast<int>(a.slots.size()));
                for (size_t i = 0; i < a.slots.size(); i++) {
                    slot_map[a.slots[i]] = fresh[i];
                    if (a.syms[i] != '0')
                        st.apply_matrix(prep_matrix(a.syms[i]), {fresh[i]});
                }
                break;
            }
            case RevAction::Kind::Dealloc: {
                for (size_t i = 0; i < a.slots.size(); i++) {
                    int q = slot_map.at(a.slots[i]);
                    if (a.syms[i] != '0')
                        st.apply_matrix(prep_matrix(a.syms[i]).dagger(), {q});
                    st.discardz(q);
                    slot_map.erase(a.slots[i]);
                }
                break;
            }
            case RevAction::Kind::Unitary:
            case RevAction::Kind::Monomial: {
                std::vector<int> targets;
                for (int s : a.slots)
                    targets.push_back(slot_map.at(s));
                if (a.is_embed && stats)
                    stats->embed_applications++;
                if (a.ctrl_slots.empty()) {
                    if (a.kind == RevAction::Kind::Unitary)
                        st.apply_matrix(a.matrix, targets);
                    else
                        st.apply_monomial(a.mono, targets);
                } else {
                    std::vector<int> ctrls;
                    for (int s : a.ctrl_slots)
                        ctrls.push_back(slot_map.at(s));
                    if (a.kind == RevAction::Kind::Unitary)
                        st.apply_ctrl_matrix(a.matrix, targets, ctrls, a.ctrl_set);
                    else
                        st.apply_ctrl_monomial(a.mono, targets, ctrls, a.ctrl_set);
                }
                break;
            }
            case RevAction::Kind::GlobalPhase: {
                if (a.ctrl_slots.empty()) {
                    st.apply_global_phase(a.theta);
                } else {
                    std::vector<int> ctrls;
                    for (int s : a.ctrl_slots)
                        ctrls.push_back(slot_map.at(s));
                    st.apply_ctrl_phase(a.theta, ctrls, a.ctrl_set);
                }
                break;
            }
            }
        }
    }

    // --- big-step evaluation ------------------------------------------------

    Value eval(const Expr &e, std::map<std::string, Value> &env) {
        switch (e.kind) {
        case Expr::Kind::Unit:
            return {};
        case Expr::Kind::BitLit:
            return bits_value(e.bits);
        case Expr::Kind::QubitLit: {
            std::string syms;
            for (DimValue i = 0; i < e.ql.fold.value; i++)
                syms += e.ql.syms;
            auto qubits = state_.alloc_zero(static_cast<int>(syms.size()));
            for (size_t i = 0; i < syms.size(); i++)
                if (syms[i] != '0')
                    state_.apply_matrix(prep_matrix(syms[i]), {qubits[i]});
            Value v;
            for (int q : qubits) {
                VComp c;
                c.qubit = q;
                v.push_back(c);
            }
            return v;
        }
        case Expr::Kind::Var: {
            auto it = env.find(e.name);
            if (it == env.end())
                throw RunError("StuckExpression", "unbound variable '" + e.name + "'");
            Value v = std::move(it->second);
            env.erase(it);
            return v;
        }
        case Expr::Kind::Tensor: {
            Value v;
            for (const auto &s : e.sub) {
                Value part = eval(s, env);
                v.insert(v.end(), part.begin(), part.end());
            }
            return v;
        }
        case Expr::Kind::Fold: {
            Value v;
            for (DimValue i = 0; i < e.dim.value; i++) {
                Value part = eval(e.sub[0], env);
                v.insert(v.end(), part.begin(), part.end());
            }
            return v;
        }
        case Expr::Kind::Phase: {
            Value v = eval(e.sub[0], env);
            state_.apply_global_phase(e.angle.num);
            return v;
        }
        case Expr::Kind::Apply: {
            Value arg = eval(e.sub[1], env);
            return apply_fn(e.sub[0], std::move(arg), env);
        }
        default:
            throw RunError("StuckExpression", "expression is not a value form");
        }
    }

    Value apply_fn(const Expr &fn, Value arg, std::map<std::string, Value> &env) {
        switch (fn.kind) {
        case Expr::Kind::BuiltIn: {
            if (fn.builtin == BuiltinKind::Id)
                return arg;
            auto q = value_qubits(arg);
            if (q.size() != 1)
                throw RunError("StuckExpression", "discard expects one qubit");
            if (fn.builtin == BuiltinKind::Discard)
                state_.discard(q[0], rng_);
            else
                state_.discardz(q[0]);
            return {};
        }
        case Expr::Kind::Measure: {
            auto q = value_qubits(arg);
            if (!basis_is_std_fold(fn.basis)) {
                auto [trans, meas] = desugar_measure(fn.basis);
                RevProgram tp = *lower_rev_inline(trans);
                std::map<int, int> slot_map;
                for (size_t i = 0; i < q.size(); i++)
                    slot_map[tp.in_slots[i]] = q[i];
                run_program_on(state_, tp, slot_map, &stats_);
            }
            BitWord bits = state_.measure_std(q, rng_);
            return bits_value(bits);
        }
        case Expr::Kind::Tensor: {
            Value out;
            size_t off = 0;
            for (const auto &comp : fn.sub) {
                long long n = fn_arity(comp);
                if (off + n > arg.size())
                    throw RunError("StuckExpression", "tensor application underflow");
                Value piece(arg.begin() + off, arg.begin() + off + n);
                off += n;
                Value r = apply_fn(comp, std::move(piece), env);
                out.insert(out.end(), r.begin(), r.end());
            }
            if (off != arg.size())
                throw RunError("StuckExpression", "tensor application leftover qubits");
            return out;
        }
        case Expr::Kind::Fold: {
            Value out;
            size_t off = 0;
            long long n = fn_arity(fn.sub[0]);
            for (DimValue i = 0; i < fn.dim.value; i++) {
                Value piece(arg.begin() + off, arg.begin() + off + n);
                off += n;
                Value r = apply_fn(fn.sub[0], std::move(piece), env);
                out.insert(out.end(), r.begin(), r.end());
            }
            return out;
        }
        case Expr::Kind::FuncRef: {
            const Definition &d = prog_.def(fn.name);
            if (d.reversible)
                break; // lowered below
            std::vector<Value> args;
            size_t off = 0;
            for (const auto &p : d.params) {
                long long n = qubit_count(p.type);
                args.emplace_back(arg.begin() + off, arg.begin() + off + n);
                off += n;
            }
            return eval_kernel(d, std::move(args));
        }
        case Expr::Kind::Translate:
        case Expr::Kind::Pred:
        case Expr::Kind::Reverse:
        case Expr::Kind::Sugar:
        case Expr::Kind::Embed:
        case Expr::Kind::Phase:
            break; // reversible path below
        default:
            throw RunError("StuckExpression", "expression is not applicable");
        }
        // Reversible path: run the lowered action list in place.
        auto q = value_qubits(arg);
        RevProgram p = *lower_rev(fn);
        if (static_cast<size_t>(p.arity_in()) != q.size())
            throw RunError("StuckExpression", "reversible arity mismatch");
        std::map<int, int> slot_map;
        for (size_t i = 0; i < q.size(); i++)
            slot_map[p.in_slots[i]] = q[i];
        run_program_on(state_, p, slot_map, &stats_);
        Value out;
        for (int s : p.out_slots) {
            VComp c;
            c.qubit = slot_map.at(s);
            out.push_back(c);
        }
        return out;
    }

    // lower_rev for a temporary expression that has no stable address.
    std::shared_ptr<RevProgram> lower_rev_inline(const Expr &e) {
        return std::make_shared<RevProgram>(lower_rev_fresh(e));
    }

public:
    Mat expr_matrix(const Expr &fn) { return program_matrix(*lower_rev(fn)); }
};

std::string value_bits_string(const Value &v) {
    std::string s;
    for (const auto &c : v) {
        if (!c.is_bit)
            throw RunError("StuckExpression", "kernel returned unmeasured qubits");
        s += c.bit ? '1' : '0';
    }
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Entry points

Histogram run_kernel(const SpecProgram &prog, const RunOptions &opt, RunStats *stats) {
    const Definition &entry = prog.def(prog.entry);
    if (!entry.params.empty())
        throw RunError("StuckExpression",
                       "entry kernel still expects quantum arguments");
    Histogram h;
    h.shots = opt.shots;
    RunStats local;
    RunStats &st = stats ? *stats : local;
    LowerCache cache;
    for (long long i = 0; i < opt.shots; i++) {
        RngStream rng(opt.seed, opt.shot_base + static_cast<uint64_t>(i));
        Evaluator ev(prog, rng, st, opt, cache);
        Value result = ev.eval_kernel(entry, {});
        h.counts[value_bits_string(result)]++;
    }
    return h;
}

StateResult evaluate_state(const SpecProgram &prog, const RunOptions &opt) {
    const Definition &entry = prog.def(prog.entry);
    if (!entry.params.empty())
        throw RunError("StuckExpression",
                       "entry kernel still expects quantum arguments");
    RngStream rng(opt.seed, opt.shot_base);
    RunStats st;
    LowerCache cache;
    Evaluator ev(prog, rng, st, opt, cache);
    Value result = ev.eval_kernel(entry, {});
    StateResult out;
    for (const auto &c : result) {
        if (c.is_bit)
            out.bits.push_back(c.bit);
        else
            out.qubits.push_back(c.qubit);
    }
    out.state = std::move(ev.state());
    return out;
}

Mat lower_expr_matrix(const SpecProgram &prog, const Expr &fn, double tol) {
    RunOptions opt;
    opt.tol = tol;
    opt.max_qubits = 32;
    RngStream rng(0, 0);
    RunStats st;
    LowerCache cache;
    Evaluator ev(prog, rng, st, opt, cache);
    return ev.expr_matrix(fn);
}

} // namespace basisc
