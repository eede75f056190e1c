#include "basisc/post.hpp"

#include <cmath>

#include "basisc/diag.hpp"

namespace basisc {

long long gcd_ll(long long a, long long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

long long lcm_ll(long long a, long long b) {
    if (a == 0 || b == 0)
        return 0;
    return a / gcd_ll(a, b) * b;
}

long long modinv(long long a, long long m) {
    long long g = gcd_ll(a, m);
    if (g != 1)
        throw RunError("NotABijection",
                       "no inverse of " + std::to_string(a) + " mod " + std::to_string(m));
    long long r0 = m, r1 = ((a % m) + m) % m;
    long long s0 = 0, s1 = 1;
    while (r1) {
        long long q = r0 / r1;
        long long r2 = r0 - q * r1;
        long long s2 = s0 - q * s1;
        r0 = r1; r1 = r2;
        s0 = s1; s1 = s2;
    }
    return ((s0 % m) + m) % m;
}

long long pow_mod(long long base, long long exp, long long mod) {
    long long r = 1;
    long long b = ((base % mod) + mod) % mod;
    while (exp > 0) {
        if (exp & 1)
            r = (__int128)r * b % mod;
        b = (__int128)b * b % mod;
        exp >>= 1;
    }
    return r;
}

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0)
        throw RunError("NoConvergent", "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long long g = gcd_ll(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational as_bin_frac(const BitWord &bits) {
    long long num = 0;
    long long den = 1;
    for (bool b : bits) {
        den <<= 1;
        num = (num << 1) | (b ? 1 : 0);
    }
    return Rational(num, den);
}

std::vector<Rational> cfrac_convergents(const Rational &x) {
    std::vector<Rational> cs;
    // h_k = a_k h_{k-1} + h_{k-2}; first term a_0 = floor(x) = 0 for x in [0,1).
    long long p = x.num, q = x.den;
    long long h0 = 1, h1 = 0; // h_{-1}, h_{-2} style seeds
    long long k0 = 0, k1 = 1;
    while (true) {
        long long a = p / q;
        long long h = a * h0 + h1;
        long long k = a * k0 + k1;
        cs.push_back(Rational(h, k));
        long long r = p % q;
        if (r == 0)
            break;
        p = q;
        q = r;
        h1 = h0; h0 = h;
        k1 = k0; k0 = k;
    }
    return cs;
}

Rational last_convergent_with_denominator_below(const std::vector<Rational> &cs,
                                                long long n) {
    const Rational *best = nullptr;
    for (const auto &c : cs)
        if (c.den < n)
            best = &c;
    if (!best)
        throw RunError("NoConvergent",
                       "no convergent with denominator below " + std::to_string(n));
    return *best;
}

bool gf2_dot(const BitWord &a, const BitWord &b) {
    bool acc = false;
    for (size_t i = 0; i < a.size(); i++)
        acc = acc != (a[i] && b[i]);
    return acc;
}

std::optional<BitWord> gf2_solve_nullspace(const std::vector<BitWord> &rows) {
    if (rows.empty())
        return std::nullopt;
    size_t n = rows[0].size();
    std::vector<BitWord> m = rows;
    for (const auto &r : m)
        if (r.size() != n)
            throw RunError("WidthMismatch", "rows of unequal width");

    // Row-reduce to echelon form.
    size_t rank = 0;
    std::vector<int> pivot_col;
    for (size_t col = 0; col < n && rank < m.size(); col++) {
        size_t sel = rank;
        while (sel < m.size() && !m[sel][col])
            sel++;
        if (sel == m.size())
            continue;
        std::swap(m[rank], m[sel]);
        for (size_t r = 0; r < m.size(); r++) {
            if (r != rank && m[r][col])
                for (size_t c = 0; c < n; c++)
                    m[r][c] = m[r][c] != m[rank][c];
        }
        pivot_col.push_back(static_cast<int>(col));
        rank++;
    }
    if (rank != n - 1)
        return std::nullopt;

    // One free column: set it to 1, back-substitute the pivots.
    std::vector<char> is_pivot(n, 0);
    for (int c : pivot_col)
        is_pivot[c] = 1;
    size_t free_col = 0;
    while (free_col < n && is_pivot[free_col])
        free_col++;
    BitWord s(n, false);
    s[free_col] = true;
    for (size_t r = 0; r < rank; r++) {
        // pivot value = sum over free columns of row entries
        bool v = m[r][free_col];
        s[pivot_col[r]] = v;
    }
    return s;
}

long long grover_iterations(int n_qubits, long long n_answers) {
    double space = std::pow(2.0, n_qubits);
    double theta = std::asin(std::sqrt(static_cast<double>(n_answers) / space));
    auto success = [&](long long k) {
        double a = std::sin((2.0 * static_cast<double>(k) + 1.0) * theta);
        return a * a;
    };
    long long guess = std::llround(std::max(0.0, 3.14159265358979323846 / (4.0 * theta) - 0.5));
    long long best = std::max<long long>(0, guess - 1);
    for (long long k = best; k <= guess + 1; k++)
        if (success(k) > success(best) + 1e-12)
            best = k;
    return best;
}

} // namespace basisc
