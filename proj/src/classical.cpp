#include "basisc/classical.hpp"

#include <stdexcept>

namespace basisc {

namespace {

constexpr int kTableCapBits = 20;

DimValue const_dim(const DimExpr &d, Span span) {
    if (!d.is_const())
        throw TypeError("UnboundDimVar", "unresolved dimension '" + d.str() + "'", span);
    return d.value;
}

} // namespace

uint64_t word_to_index(const BitWord &w) {
    uint64_t v = 0;
    for (bool b : w)
        v = (v << 1) | (b ? 1 : 0);
    return v;
}

BitWord index_to_word(uint64_t v, int width) {
    BitWord w(width);
    for (int i = 0; i < width; i++)
        w[i] = (v >> (width - 1 - i)) & 1;
    return w;
}

std::string word_str(const BitWord &w) {
    std::string s;
    for (bool b : w)
        s += b ? '1' : '0';
    return s;
}

long long classical_width(const ClassicalExpr &e,
                          const std::map<std::string, long long> &inputs) {
    auto sub_width = [&](size_t i) { return classical_width(e.sub[i], inputs); };
    switch (e.kind) {
    case ClassicalExpr::Kind::InputRef: {
        auto it = inputs.find(e.name);
        if (it == inputs.end())
            throw TypeError("UnknownName", "unknown input '" + e.name + "'", e.span);
        return it->second;
    }
    case ClassicalExpr::Kind::Slice: {
        long long w = sub_width(0);
        DimValue lo = const_dim(e.lo, e.span), hi = const_dim(e.hi, e.span);
        if (lo < 0 || hi > w || lo >= hi)
            throw TypeError("WidthMismatch",
                            "slice [" + std::to_string(lo) + ":" + std::to_string(hi) +
                                "] out of range for width " + std::to_string(w),
                            e.span);
        return hi - lo;
    }
    case ClassicalExpr::Kind::BitConst:
        return static_cast<long long>(e.bits.size());
    case ClassicalExpr::Kind::And:
    case ClassicalExpr::Kind::Or:
    case ClassicalExpr::Kind::Xor: {
        long long a = sub_width(0), b = sub_width(1);
        if (a != b)
            throw TypeError("WidthMismatch",
                            "bitwise operands have widths " + std::to_string(a) +
                                " and " + std::to_string(b),
                            e.span);
        return a;
    }
    case ClassicalExpr::Kind::Not:
        return sub_width(0);
    case ClassicalExpr::Kind::Concat: {
        long long total = 0;
        for (size_t i = 0; i < e.sub.size(); i++)
            total += sub_width(i);
        return total;
    }
    case ClassicalExpr::Kind::RotL:
    case ClassicalExpr::Kind::RotR:
        const_dim(e.lo, e.span);
        return sub_width(0);
    case ClassicalExpr::Kind::XorReduce:
    case ClassicalExpr::Kind::AndReduce:
    case ClassicalExpr::Kind::OrReduce:
        sub_width(0);
        return 1;
    case ClassicalExpr::Kind::ZeroExtend: {
        long long w = sub_width(0);
        DimValue target = const_dim(e.lo, e.span);
        if (target < w)
            throw TypeError("WidthMismatch",
                            "zero_extend target " + std::to_string(target) +
                                " below operand width " + std::to_string(w),
                            e.span);
        return target;
    }
    case ClassicalExpr::Kind::EqConst: {
        long long w = sub_width(0);
        if (w != static_cast<long long>(e.bits.size()))
            throw TypeError("WidthMismatch",
                            "compared widths differ: " + std::to_string(w) + " vs " +
                                std::to_string(e.bits.size()),
                            e.span);
        return 1;
    }
    case ClassicalExpr::Kind::MulConstMod:
        const_dim(e.hi, e.span);
        return sub_width(0);
    }
    throw std::logic_error("unreachable ClassicalExpr kind");
}

BitWord eval_classical_expr(const ClassicalExpr &e,
                            const std::map<std::string, BitWord> &inputs) {
    switch (e.kind) {
    case ClassicalExpr::Kind::InputRef: {
        auto it = inputs.find(e.name);
        if (it == inputs.end())
            throw TypeError("UnknownName", "unknown input '" + e.name + "'", e.span);
        return it->second;
    }
    case ClassicalExpr::Kind::Slice: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        DimValue lo = const_dim(e.lo, e.span), hi = const_dim(e.hi, e.span);
        return BitWord(v.begin() + lo, v.begin() + hi);
    }
    case ClassicalExpr::Kind::BitConst:
        return e.bits;
    case ClassicalExpr::Kind::And:
    case ClassicalExpr::Kind::Or:
    case ClassicalExpr::Kind::Xor: {
        BitWord a = eval_classical_expr(e.sub[0], inputs);
        BitWord b = eval_classical_expr(e.sub[1], inputs);
        if (a.size() != b.size())
            throw TypeError("WidthMismatch", "bitwise operand widths differ", e.span);
        BitWord r(a.size());
        for (size_t i = 0; i < a.size(); i++) {
            if (e.kind == ClassicalExpr::Kind::And)
                r[i] = a[i] && b[i];
            else if (e.kind == ClassicalExpr::Kind::Or)
                r[i] = a[i] || b[i];
            else
                r[i] = a[i] != b[i];
        }
        return r;
    }
    case ClassicalExpr::Kind::Not: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        for (size_t i = 0; i < v.size(); i++)
            v[i] = !v[i];
        return v;
    }
    case ClassicalExpr::Kind::Concat: {
        BitWord r;
        for (const auto &s : e.sub) {
            BitWord v = eval_classical_expr(s, inputs);
            r.insert(r.end(), v.begin(), v.end());
        }
        return r;
    }
    case ClassicalExpr::Kind::RotL:
    case ClassicalExpr::Kind::RotR: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        if (v.empty())
            return v;
        DimValue n = const_dim(e.lo, e.span) % static_cast<DimValue>(v.size());
        if (e.kind == ClassicalExpr::Kind::RotR)
            n = (static_cast<DimValue>(v.size()) - n) % static_cast<DimValue>(v.size());
        BitWord r(v.size());
        for (size_t i = 0; i < v.size(); i++)
            r[i] = v[(i + n) % v.size()];
        return r;
    }
    case ClassicalExpr::Kind::XorReduce:
    case ClassicalExpr::Kind::AndReduce:
    case ClassicalExpr::Kind::OrReduce: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        bool acc = e.kind == ClassicalExpr::Kind::AndReduce;
        for (bool b : v) {
            if (e.kind == ClassicalExpr::Kind::XorReduce)
                acc = acc != b;
            else if (e.kind == ClassicalExpr::Kind::AndReduce)
                acc = acc && b;
            else
                acc = acc || b;
        }
        return BitWord{acc};
    }
    case ClassicalExpr::Kind::ZeroExtend: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        DimValue target = const_dim(e.lo, e.span);
        BitWord r(target - v.size(), false);
        r.insert(r.end(), v.begin(), v.end());
        return r;
    }
    case ClassicalExpr::Kind::EqConst: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        return BitWord{v == e.bits};
    }
    case ClassicalExpr::Kind::MulConstMod: {
        BitWord v = eval_classical_expr(e.sub[0], inputs);
        DimValue m = const_dim(e.hi, e.span);
        if (m <= 0)
            throw TypeError("WidthMismatch", "modulus must be positive", e.span);
        // The multiplier constant is reduced mod m while evaluating, so forms
        // like x^(2^j) stay in range.
        DimValue c = e.lo.eval({}, e.span, m);
        uint64_t x = word_to_index(v);
        uint64_t y;
        if (x < static_cast<uint64_t>(m)) {
            y = (x * static_cast<uint64_t>(c)) % static_cast<uint64_t>(m);
        } else {
            // Inputs outside the residue ring pass through unchanged, keeping
            // the map a bijection when gcd(c, m) = 1.
            y = x;
        }
        return index_to_word(y, static_cast<int>(v.size()));
    }
    }
    throw std::logic_error("unreachable ClassicalExpr kind");
}

BitWord eval_classical(const Definition &f, const BitWord &input) {
    if (f.kind != Definition::Kind::Classical)
        throw TypeError("UnknownName", "'" + f.name + "' is not a classical function", f.span);
    std::map<std::string, BitWord> env;
    size_t off = 0;
    for (const auto &p : f.params) {
        long long w = bit_count(p.type);
        if (off + w > input.size())
            throw TypeError("WidthMismatch",
                            "input width " + std::to_string(input.size()) +
                                " below parameter widths of '" + f.name + "'",
                            f.span);
        env[p.name] = BitWord(input.begin() + off, input.begin() + off + w);
        off += w;
    }
    if (off != input.size())
        throw TypeError("WidthMismatch",
                        "input width " + std::to_string(input.size()) +
                            " does not match '" + f.name + "' (expects " +
                            std::to_string(off) + ")",
                        f.span);
    BitWord out = eval_classical_expr(f.cbody, env);
    long long want = bit_count(f.ret);
    if (static_cast<long long>(out.size()) != want)
        throw TypeError("WidthMismatch",
                        "'" + f.name + "' produced " + std::to_string(out.size()) +
                            " bits, declared " + std::to_string(want),
                        f.span);
    return out;
}

TruthTable truth_table(const Definition &f) {
    long long n_in = 0;
    for (const auto &p : f.params)
        n_in += bit_count(p.type);
    long long n_out = bit_count(f.ret);
    if (n_in > kTableCapBits)
        throw RunError("TableTooLarge",
                       "truth table over " + std::to_string(n_in) + " input bits");
    TruthTable t;
    t.n_in = static_cast<int>(n_in);
    t.n_out = static_cast<int>(n_out);
    t.out.resize(uint64_t(1) << n_in);
    for (uint64_t x = 0; x < t.out.size(); x++)
        t.out[x] = word_to_index(eval_classical(f, index_to_word(x, t.n_in)));
    return t;
}

EmbeddingAction xor_embedding(const TruthTable &t) {
    EmbeddingAction a;
    a.kind = EmbedKind::Xor;
    a.width = t.n_in + t.n_out;
    uint64_t size = uint64_t(1) << a.width;
    a.perm.resize(size);
    for (uint64_t x = 0; x < t.size(); x++) {
        uint64_t fx = t.out[x];
        for (uint64_t y = 0; y < (uint64_t(1) << t.n_out); y++)
            a.perm[(x << t.n_out) | y] = (x << t.n_out) | (y ^ fx);
    }
    return a;
}

EmbeddingAction phase_embedding(const TruthTable &t) {
    if (t.n_out != 1)
        throw RunError("PhaseNeedsOneOutput",
                       "phase embedding requires a single output bit, got " +
                           std::to_string(t.n_out));
    EmbeddingAction a;
    a.kind = EmbedKind::Phase;
    a.width = t.n_in;
    a.mask.resize(t.size());
    for (uint64_t x = 0; x < t.size(); x++)
        a.mask[x] = t.out[x] ? -1 : 1;
    return a;
}

EmbeddingAction inplace_embedding(const TruthTable &fwd, const TruthTable &inv) {
    if (fwd.n_in != fwd.n_out || inv.n_in != inv.n_out || fwd.n_in != inv.n_in)
        throw TypeError("DimMismatch",
                        "in-place embedding requires matching n-to-n widths");
    for (uint64_t x = 0; x < fwd.size(); x++) {
        if (inv.out[fwd.out[x]] != x)
            throw RunError("NotABijection",
                           "inverse check failed at input " +
                               word_str(index_to_word(x, fwd.n_in)));
    }
    EmbeddingAction a;
    a.kind = EmbedKind::InPlace;
    a.width = fwd.n_in;
    a.perm.assign(fwd.out.begin(), fwd.out.end());
    return a;
}

} // namespace basisc
