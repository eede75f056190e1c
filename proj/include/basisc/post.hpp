#pragma once

#include <optional>
#include <vector>

#include "basisc/classical.hpp"

namespace basisc {

// Canonical rational: gcd-reduced, positive denominator.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d);
    bool operator==(const Rational &) const = default;
};

long long gcd_ll(long long a, long long b);
long long lcm_ll(long long a, long long b);
// Modular inverse; throws RunError NotABijection when gcd(a, m) != 1.
long long modinv(long long a, long long m);
long long pow_mod(long long base, long long exp, long long mod);

// Bits read as a binary fraction: sum of b_k 2^-(k+1), left to right.
Rational as_bin_frac(const BitWord &bits);

// Continued-fraction convergents of x in [0, 1), ending with x itself.
std::vector<Rational> cfrac_convergents(const Rational &x);

// Last convergent whose denominator is < n; RunError NoConvergent otherwise.
Rational last_convergent_with_denominator_below(const std::vector<Rational> &cs,
                                                long long n);

// GF(2) Gaussian elimination: given rows of width N, returns the unique
// nonzero nullspace vector when the rank is N-1, nullopt otherwise (caller
// retries with more rows).
std::optional<BitWord> gf2_solve_nullspace(const std::vector<BitWord> &rows);

bool gf2_dot(const BitWord &a, const BitWord &b);

// Grover iteration count maximizing sin^2((2k+1) asin(sqrt(M/2^n))).
long long grover_iterations(int n_qubits, long long n_answers);

} // namespace basisc
