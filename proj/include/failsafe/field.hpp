#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "failsafe/errors.hpp"

#if !defined(__SIZEOF_INT128__)
#error "failsafe requires unsigned __int128 (GCC/Clang)"
#endif

namespace failsafe {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// 2^64 - 2^32 + 1. Its multiplicative group has 2-adic order 32.
inline constexpr u64 kGoldilocksPrime = 0xFFFFFFFF00000001ULL;

namespace detail {

inline u64 mulmod_generic(u64 a, u64 b, u64 p) noexcept {
    return static_cast<u64>(static_cast<u128>(a) * b % p);
}

// Reduction modulo 2^64 - 2^32 + 1 using 2^64 = 2^32 - 1 and 2^96 = -1.
inline u64 reduce_goldilocks(u128 x) noexcept {
    constexpr u64 eps = 0xFFFFFFFFULL;
    const u64 lo = static_cast<u64>(x);
    const u64 hi = static_cast<u64>(x >> 64);
    const u64 hi_hi = hi >> 32;
    const u64 hi_lo = hi & eps;

    u64 t0 = lo - hi_hi;
    if (lo < hi_hi) t0 -= eps;
    const u64 t1 = hi_lo * eps;
    u64 t2 = t0 + t1;
    if (t2 < t1) t2 += eps;
    if (t2 >= kGoldilocksPrime) t2 -= kGoldilocksPrime;
    return t2;
}

inline u64 powmod_generic(u64 base, u64 exp, u64 p) noexcept {
    u64 result = 1 % p;
    base %= p;
    while (exp > 0) {
        if (exp & 1) result = mulmod_generic(result, base, p);
        base = mulmod_generic(base, base, p);
        exp >>= 1;
    }
    return result;
}

}  // namespace detail

// Deterministic Miller-Rabin; the base set is exact for all 64-bit inputs.
inline bool is_prime_u64(u64 n) noexcept {
    if (n < 2) return false;
    for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % small == 0) return n == small;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = detail::powmod_generic(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = detail::mulmod_generic(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// Uniform integer in [0, bound) from a 64-bit engine, by rejection. Unlike
// std::uniform_int_distribution the output sequence is fixed by the engine.
inline u64 uniform_below(std::mt19937_64& rng, u64 bound) {
    if (bound == 0) throw ContractViolation("uniform_below: empty range");
    const u64 limit = bound * (~0ULL / bound);  // largest multiple of bound that fits
    for (;;) {
        const u64 x = rng();
        if (limit == 0 || x < limit) return x % bound;
    }
}

// The prime field Z_p. Elements are plain u64 values kept in [0, p).
class PrimeField {
public:
    explicit PrimeField(u64 modulus = kGoldilocksPrime) : p_(modulus) {
        if (!is_prime_u64(modulus)) {
            throw ContractViolation("PrimeField: modulus " + std::to_string(modulus) + " is not prime");
        }
        goldilocks_ = (p_ == kGoldilocksPrime);
        init_roots();
        const u64 two_64 = static_cast<u64>((static_cast<u128>(1) << 64) % p_);
        two_pow_128_ = mul(two_64, two_64);
    }

    u64 modulus() const noexcept { return p_; }

    u64 reduce(u64 x) const noexcept { return x % p_; }

    u64 reduce_u128(u128 x) const noexcept {
        if (goldilocks_) return detail::reduce_goldilocks(x);
        return static_cast<u64>(x % p_);
    }

    // 2^128 mod p.
    u64 two_pow_128() const noexcept { return two_pow_128_; }

    u64 from_int(std::int64_t x) const noexcept {
        __int128 r = static_cast<__int128>(x) % static_cast<__int128>(p_);
        if (r < 0) r += p_;
        return static_cast<u64>(r);
    }

    u64 add(u64 a, u64 b) const noexcept {
        const u64 threshold = p_ - b;
        return a >= threshold ? a - threshold : a + b;
    }

    u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + (p_ - b); }

    u64 neg(u64 a) const noexcept { return a == 0 ? 0 : p_ - a; }

    u64 mul(u64 a, u64 b) const noexcept {
        if (goldilocks_) return detail::reduce_goldilocks(static_cast<u128>(a) * b);
        return detail::mulmod_generic(a, b, p_);
    }

    u64 pow(u64 base, u64 exp) const noexcept {
        u64 result = 1;
        while (exp > 0) {
            if (exp & 1) result = mul(result, base);
            base = mul(base, base);
            exp >>= 1;
        }
        return result;
    }

    u64 inv(u64 a) const {
        if (a == 0) throw NotAUnit("PrimeField::inv: zero has no inverse");
        return pow(a, p_ - 2);
    }

    u64 random_element(std::mt19937_64& rng) const { return uniform_below(rng, p_); }

    // Largest k with 2^k | p - 1; NTT lengths up to 2^k are supported.
    int two_adicity() const noexcept { return two_adicity_; }

    // A primitive 2^k-th root of unity for k <= two_adicity().
    u64 root_of_unity(int log_len) const {
        if (log_len > two_adicity_) throw ContractViolation("PrimeField: transform length exceeds 2-adicity");
        u64 w = max_root_;
        for (int i = log_len; i < two_adicity_; ++i) w = mul(w, w);
        return w;
    }

    friend bool operator==(const PrimeField& a, const PrimeField& b) noexcept { return a.p_ == b.p_; }

private:
    void init_roots() {
        if (p_ == 2) {
            two_adicity_ = 0;
            max_root_ = 1;
            return;
        }
        u64 odd = p_ - 1;
        two_adicity_ = 0;
        while ((odd & 1) == 0) {
            odd >>= 1;
            ++two_adicity_;
        }
        // g^odd has order exactly 2^k iff g is a quadratic non-residue.
        for (u64 g = 2;; ++g) {
            if (pow(g, (p_ - 1) / 2) == p_ - 1) {
                max_root_ = pow(g, odd);
                return;
            }
        }
    }

    u64 p_;
    bool goldilocks_ = false;
    int two_adicity_ = 0;
    u64 max_root_ = 1;
    u64 two_pow_128_ = 0;
};

}  // namespace failsafe
