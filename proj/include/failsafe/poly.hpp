#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"

namespace failsafe {

// deg_star of the zero polynomial.
inline constexpr std::size_t kInfiniteDegree = std::numeric_limits<std::size_t>::max();

// Products whose shorter operand has at most this many coefficients use the
// schoolbook kernel; longer ones go through the NTT when the field allows it.
inline constexpr std::size_t kNttThreshold = 32;

// Sum of products of field elements, reduced once at the end.
class WideAccumulator {
public:
    void add_product(u64 a, u64 b) noexcept {
        const u128 t = static_cast<u128>(a) * b;
        low_ += t;
        carry_ += (low_ < t);
    }

    u64 reduce(const PrimeField& field) const noexcept {
        // value = carry * 2^128 + low
        const u64 low = field.reduce_u128(low_);
        if (carry_ == 0) return low;
        return field.add(low, field.mul(field.reduce(carry_), field.two_pow_128()));
    }

private:
    u128 low_ = 0;
    u64 carry_ = 0;
};

// An element of Z_p[x]/<x^order>, stored densely: coefficient i is x^i.
class TruncatedPoly {
public:
    explicit TruncatedPoly(std::size_t order) : coeffs_(order, 0) {
        if (order == 0) throw ContractViolation("TruncatedPoly: order must be at least 1");
    }

    // Coefficients beyond the order are discarded (reduction mod x^order);
    // missing ones are zero. Values must already lie in [0, p).
    TruncatedPoly(std::vector<u64> coeffs, std::size_t order) : coeffs_(std::move(coeffs)) {
        if (order == 0) throw ContractViolation("TruncatedPoly: order must be at least 1");
        coeffs_.resize(order, 0);
    }

    TruncatedPoly(std::initializer_list<u64> coeffs, std::size_t order)
        : TruncatedPoly(std::vector<u64>(coeffs), order) {}

    static TruncatedPoly constant(u64 c, std::size_t order) {
        TruncatedPoly p(order);
        p.coeffs_[0] = c;
        return p;
    }

    // c * x^k, which is zero when k >= order.
    static TruncatedPoly monomial(u64 c, std::size_t k, std::size_t order) {
        TruncatedPoly p(order);
        if (k < order) p.coeffs_[k] = c;
        return p;
    }

    std::size_t order() const noexcept { return coeffs_.size(); }
    std::span<const u64> coeffs() const noexcept { return coeffs_; }
    std::span<u64> coeffs() noexcept { return coeffs_; }

    u64 operator[](std::size_t i) const noexcept { return coeffs_[i]; }
    u64& operator[](std::size_t i) noexcept { return coeffs_[i]; }

    bool is_zero() const noexcept {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](u64 c) { return c == 0; });
    }

    // Highest nonzero exponent, or -1 for the zero polynomial.
    long degree() const noexcept {
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            if (coeffs_[i] != 0) return static_cast<long>(i);
        }
        return -1;
    }

    friend bool operator==(const TruncatedPoly&, const TruncatedPoly&) = default;

private:
    std::vector<u64> coeffs_;
};

inline std::ostream& operator<<(std::ostream& os, const TruncatedPoly& p) {
    os << "[";
    for (std::size_t i = 0; i < p.order(); ++i) os << (i ? " " : "") << p[i];
    return os << "] mod x^" << p.order();
}

// Smallest i with a[i] != 0, or kInfiniteDegree when a == 0 mod x^order.
inline std::size_t deg_star(std::span<const u64> coeffs) noexcept {
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] != 0) return i;
    }
    return kInfiniteDegree;
}

inline std::size_t deg_star(const TruncatedPoly& a) noexcept { return deg_star(a.coeffs()); }

namespace ntt {

// Twiddle tables for one power-of-two length.
class Plan {
public:
    Plan(const PrimeField& field, int log_len) : field_(&field), log_len_(log_len), len_(std::size_t{1} << log_len) {
        const u64 w = field.root_of_unity(log_len);
        const u64 w_inv = field.inv(w);
        roots_.resize(len_ / 2 + 1);
        inv_roots_.resize(len_ / 2 + 1);
        u64 a = 1, b = 1;
        for (std::size_t i = 0; i <= len_ / 2; ++i) {
            roots_[i] = a;
            inv_roots_[i] = b;
            a = field.mul(a, w);
            b = field.mul(b, w_inv);
        }
        len_inv_ = field.inv(field.reduce(len_));
    }

    std::size_t size() const noexcept { return len_; }

    void forward(std::span<u64> data) const { transform(data, roots_); }

    void inverse(std::span<u64> data) const {
        transform(data, inv_roots_);
        for (u64& x : data) x = field_->mul(x, len_inv_);
    }

private:
    void transform(std::span<u64> a, const std::vector<u64>& roots) const {
        const PrimeField& f = *field_;
        for (std::size_t i = 1, j = 0; i < len_; ++i) {
            std::size_t bit = len_ >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t half = 1; half < len_; half <<= 1) {
            const std::size_t step = len_ / (2 * half);
            for (std::size_t start = 0; start < len_; start += 2 * half) {
                for (std::size_t k = 0; k < half; ++k) {
                    const u64 u = a[start + k];
                    const u64 v = f.mul(a[start + k + half], roots[k * step]);
                    a[start + k] = f.add(u, v);
                    a[start + k + half] = f.sub(u, v);
                }
            }
        }
    }

    const PrimeField* field_;
    int log_len_;
    std::size_t len_;
    u64 len_inv_ = 1;
    std::vector<u64> roots_;
    std::vector<u64> inv_roots_;
};

inline int log2_ceil(std::size_t n) noexcept {
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

// True when a cyclic transform long enough for a product truncated to
// `order` exists in this field.
inline bool supports(const PrimeField& field, std::size_t order) noexcept {
    return log2_ceil(2 * order) <= field.two_adicity();
}

}  // namespace ntt

namespace detail {

// out[i] = sum_{j<=i} a[j] * b[i-j] for i < out.size(); a and b may be
// shorter than out (implicitly zero-padded).
inline void mul_schoolbook_into(const PrimeField& f, std::span<const u64> a, std::span<const u64> b,
                                std::span<u64> out) {
    const std::size_t k = out.size();
    const std::size_t na = std::min(a.size(), k);
    const std::size_t nb = std::min(b.size(), k);
    for (std::size_t i = 0; i < k; ++i) {
        WideAccumulator acc;
        const std::size_t lo = i + 1 > nb ? i + 1 - nb : 0;
        const std::size_t hi = std::min(i + 1, na);
        for (std::size_t j = lo; j < hi; ++j) acc.add_product(a[j], b[i - j]);
        out[i] = acc.reduce(f);
    }
}

inline void mul_ntt_into(const PrimeField& f, std::span<const u64> a, std::span<const u64> b, std::span<u64> out) {
    const std::size_t k = out.size();
    const std::size_t na = std::min(a.size(), k);
    const std::size_t nb = std::min(b.size(), k);
    const ntt::Plan plan(f, ntt::log2_ceil(na + nb - 1));
    std::vector<u64> fa(plan.size(), 0), fb(plan.size(), 0);
    std::copy_n(a.begin(), na, fa.begin());
    std::copy_n(b.begin(), nb, fb.begin());
    plan.forward(fa);
    plan.forward(fb);
    for (std::size_t i = 0; i < plan.size(); ++i) fa[i] = f.mul(fa[i], fb[i]);
    plan.inverse(fa);
    const std::size_t n = std::min(k, plan.size());
    std::copy_n(fa.begin(), n, out.begin());
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), 0);
}

// Truncated product with automatic kernel choice.
inline void mul_into(const PrimeField& f, std::span<const u64> a, std::span<const u64> b, std::span<u64> out) {
    const std::size_t k = out.size();
    const std::size_t na = std::min(a.size(), k);
    const std::size_t nb = std::min(b.size(), k);
    if (na == 0 || nb == 0) {
        std::fill(out.begin(), out.end(), 0);
        return;
    }
    if (std::min(na, nb) <= kNttThreshold || !ntt::supports(f, std::max(na, nb))) {
        mul_schoolbook_into(f, a, b, out);
    } else {
        mul_ntt_into(f, a, b, out);
    }
}

inline void require_same_order(const TruncatedPoly& a, const TruncatedPoly& b, const char* op) {
    if (a.order() != b.order()) {
        throw ContractViolation(std::string(op) + ": truncation orders differ (" + std::to_string(a.order()) +
                                " vs " + std::to_string(b.order()) + ")");
    }
}

}  // namespace detail

inline TruncatedPoly poly_add(const PrimeField& f, const TruncatedPoly& a, const TruncatedPoly& b) {
    detail::require_same_order(a, b, "poly_add");
    TruncatedPoly c(a.order());
    for (std::size_t i = 0; i < a.order(); ++i) c[i] = f.add(a[i], b[i]);
    return c;
}

inline TruncatedPoly poly_sub(const PrimeField& f, const TruncatedPoly& a, const TruncatedPoly& b) {
    detail::require_same_order(a, b, "poly_sub");
    TruncatedPoly c(a.order());
    for (std::size_t i = 0; i < a.order(); ++i) c[i] = f.sub(a[i], b[i]);
    return c;
}

inline TruncatedPoly poly_neg(const PrimeField& f, const TruncatedPoly& a) {
    TruncatedPoly c(a.order());
    for (std::size_t i = 0; i < a.order(); ++i) c[i] = f.neg(a[i]);
    return c;
}

inline TruncatedPoly poly_scale(const PrimeField& f, const TruncatedPoly& a, u64 s) {
    TruncatedPoly c(a.order());
    for (std::size_t i = 0; i < a.order(); ++i) c[i] = f.mul(a[i], s);
    return c;
}

// a * x^k mod x^order.
inline TruncatedPoly poly_shift(const TruncatedPoly& a, std::size_t k) {
    TruncatedPoly c(a.order());
    for (std::size_t i = k; i < a.order(); ++i) c[i] = a[i - k];
    return c;
}

// Reinterpret a modulo x^order (dropping terms or padding with zeros).
inline TruncatedPoly with_order(const TruncatedPoly& a, std::size_t order) {
    const auto c = a.coeffs();
    return TruncatedPoly(std::vector<u64>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(std::min(order, c.size()))),
                         order);
}

inline TruncatedPoly poly_mul_schoolbook(const PrimeField& f, const TruncatedPoly& a, const TruncatedPoly& b) {
    detail::require_same_order(a, b, "poly_mul");
    TruncatedPoly c(a.order());
    detail::mul_schoolbook_into(f, a.coeffs(), b.coeffs(), c.coeffs());
    return c;
}

inline TruncatedPoly poly_mul_ntt(const PrimeField& f, const TruncatedPoly& a, const TruncatedPoly& b) {
    detail::require_same_order(a, b, "poly_mul");
    if (!ntt::supports(f, a.order())) throw ContractViolation("poly_mul_ntt: field has no suitable roots of unity");
    TruncatedPoly c(a.order());
    detail::mul_ntt_into(f, a.coeffs(), b.coeffs(), c.coeffs());
    return c;
}

inline TruncatedPoly poly_mul(const PrimeField& f, const TruncatedPoly& a, const TruncatedPoly& b) {
    detail::require_same_order(a, b, "poly_mul");
    TruncatedPoly c(a.order());
    detail::mul_into(f, a.coeffs(), b.coeffs(), c.coeffs());
    return c;
}

// Inverse modulo x^order by Newton iteration b <- b (2 - a b), doubling the
// precision each round.
inline TruncatedPoly poly_inv(const PrimeField& f, const TruncatedPoly& a) {
    if (a[0] == 0) throw NotAUnit("poly_inv: constant term is zero");
    const std::size_t order = a.order();
    std::vector<u64> b{f.inv(a[0])};
    std::vector<u64> ab, corr;
    for (std::size_t k = 1; k < order;) {
        const std::size_t next = std::min(2 * k, order);
        ab.assign(next, 0);
        detail::mul_into(f, a.coeffs().first(next), b, ab);
        for (u64& x : ab) x = f.neg(x);
        ab[0] = f.add(ab[0], f.reduce(2));
        corr.assign(next, 0);
        detail::mul_into(f, b, ab, corr);
        b = corr;
        k = next;
    }
    return TruncatedPoly(std::move(b), order);
}

}  // namespace failsafe
