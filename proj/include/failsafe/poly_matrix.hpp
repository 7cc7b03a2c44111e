#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"
#include "failsafe/poly.hpp"

namespace failsafe {

// Column degree of an all-zero column. Never selected by a max.
inline constexpr std::int64_t kNegInfDegree = std::numeric_limits<std::int64_t>::min();

// One integer per row (when used as a shift) or per column (when produced by
// column_degree).
using ShiftVector = std::vector<std::int64_t>;

// Dense rows x cols matrix over Z_p[x]/<x^order>, row-major.
class PolyMatrix {
public:
    PolyMatrix(std::size_t rows, std::size_t cols, std::size_t order)
        : rows_(rows), cols_(cols), order_(order), entries_(rows * cols, TruncatedPoly(order)) {
        if (rows == 0 || cols == 0) throw ContractViolation("PolyMatrix: dimensions must be at least 1");
    }

    static PolyMatrix identity(std::size_t n, std::size_t order) {
        PolyMatrix m(n, n, order);
        for (std::size_t i = 0; i < n; ++i) m(i, i)[0] = 1;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t order() const noexcept { return order_; }
    bool square() const noexcept { return rows_ == cols_; }

    TruncatedPoly& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }
    const TruncatedPoly& operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }

    void set(std::size_t i, std::size_t j, TruncatedPoly p) {
        if (p.order() != order_) throw ContractViolation("PolyMatrix::set: entry order differs from matrix order");
        entries_[i * cols_ + j] = std::move(p);
    }

    // F(0): the matrix of constant terms, row-major.
    std::vector<u64> constant_terms() const {
        std::vector<u64> out(rows_ * cols_);
        for (std::size_t k = 0; k < entries_.size(); ++k) out[k] = entries_[k][0];
        return out;
    }

    friend bool operator==(const PolyMatrix&, const PolyMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::size_t order_;
    std::vector<TruncatedPoly> entries_;
};

// Every entry reduced modulo x^order (or zero-padded up to it).
inline PolyMatrix with_order(const PolyMatrix& a, std::size_t order) {
    PolyMatrix out(a.rows(), a.cols(), order);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = with_order(a(i, j), order);
    return out;
}

inline PolyMatrix matrix_sub(const PrimeField& f, const PolyMatrix& a, const PolyMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.order() != b.order())
        throw ContractViolation("matrix_sub: shape or order mismatch");
    PolyMatrix out(a.rows(), a.cols(), a.order());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = poly_sub(f, a(i, j), b(i, j));
    return out;
}

// Per column j: max_i (shift[i] + deg A[i][j]); kNegInfDegree for zero columns.
inline ShiftVector column_degree(const PolyMatrix& a, const std::optional<ShiftVector>& shift = std::nullopt) {
    if (shift && shift->size() != a.rows()) {
        throw ContractViolation("column_degree: shift length " + std::to_string(shift->size()) +
                                " does not match row count " + std::to_string(a.rows()));
    }
    ShiftVector out(a.cols(), kNegInfDegree);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const long d = a(i, j).degree();
            if (d < 0) continue;
            const std::int64_t v = (shift ? (*shift)[i] : 0) + d;
            out[j] = std::max(out[j], v);
        }
    }
    return out;
}

namespace detail {

inline void require_product_shape(const PolyMatrix& a, const PolyMatrix& b, const char* op) {
    if (a.cols() != b.rows()) {
        throw ContractViolation(std::string(op) + ": inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
    }
    if (a.order() != b.order()) throw ContractViolation(std::string(op) + ": truncation orders differ");
}

}  // namespace detail

// Reference product: the classical triple loop over poly_mul / poly_add.
inline PolyMatrix matmul_naive(const PrimeField& f, const PolyMatrix& a, const PolyMatrix& b) {
    detail::require_product_shape(a, b, "matmul_naive");
    PolyMatrix c(a.rows(), b.cols(), a.order());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            TruncatedPoly acc(a.order());
            for (std::size_t k = 0; k < a.cols(); ++k) acc = poly_add(f, acc, poly_mul(f, a(i, k), b(k, j)));
            c(i, j) = std::move(acc);
        }
    return c;
}

// Production product. Transforms every entry once and accumulates in the
// evaluation domain when the order is large; otherwise a degree-bounded
// schoolbook convolution with one reduction per output coefficient.
inline PolyMatrix matmul(const PrimeField& f, const PolyMatrix& a, const PolyMatrix& b) {
    detail::require_product_shape(a, b, "matmul");
    const std::size_t order = a.order();
    const std::size_t m = a.rows(), inner = a.cols(), n = b.cols();
    PolyMatrix c(m, n, order);

    std::vector<long> deg_a(m * inner), deg_b(inner * n);
    long max_a = -1, max_b = -1;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < inner; ++k) max_a = std::max(max_a, deg_a[i * inner + k] = a(i, k).degree());
    for (std::size_t k = 0; k < inner; ++k)
        for (std::size_t j = 0; j < n; ++j) max_b = std::max(max_b, deg_b[k * n + j] = b(k, j).degree());
    if (max_a < 0 || max_b < 0) return c;

    const std::size_t len_a = static_cast<std::size_t>(max_a) + 1;
    const std::size_t len_b = static_cast<std::size_t>(max_b) + 1;
    const std::size_t out_len = std::min(order, len_a + len_b - 1);

    if (std::min(len_a, len_b) > kNttThreshold && ntt::supports(f, std::max(len_a, len_b))) {
        const ntt::Plan plan(f, ntt::log2_ceil(len_a + len_b - 1));
        const std::size_t len = plan.size();
        std::vector<u64> ta(m * inner * len, 0), tb(inner * n * len, 0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < inner; ++k) {
                std::span<u64> dst(ta.data() + (i * inner + k) * len, len);
                std::copy_n(a(i, k).coeffs().begin(), len_a, dst.begin());
                plan.forward(dst);
            }
        for (std::size_t k = 0; k < inner; ++k)
            for (std::size_t j = 0; j < n; ++j) {
                std::span<u64> dst(tb.data() + (k * n + j) * len, len);
                std::copy_n(b(k, j).coeffs().begin(), len_b, dst.begin());
                plan.forward(dst);
            }
        std::vector<WideAccumulator> acc(len);
        std::vector<u64> sum(len);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                std::fill(acc.begin(), acc.end(), WideAccumulator{});
                bool any = false;
                for (std::size_t k = 0; k < inner; ++k) {
                    if (deg_a[i * inner + k] < 0 || deg_b[k * n + j] < 0) continue;
                    any = true;
                    const u64* pa = ta.data() + (i * inner + k) * len;
                    const u64* pb = tb.data() + (k * n + j) * len;
                    for (std::size_t t = 0; t < len; ++t) acc[t].add_product(pa[t], pb[t]);
                }
                if (!any) continue;
                for (std::size_t t = 0; t < len; ++t) sum[t] = acc[t].reduce(f);
                plan.inverse(sum);
                auto dst = c(i, j).coeffs();
                std::copy_n(sum.begin(), std::min(out_len, len), dst.begin());
            }
        return c;
    }

    std::vector<WideAccumulator> acc(out_len);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::fill(acc.begin(), acc.end(), WideAccumulator{});
            bool any = false;
            for (std::size_t k = 0; k < inner; ++k) {
                const long da = deg_a[i * inner + k], db = deg_b[k * n + j];
                if (da < 0 || db < 0) continue;
                any = true;
                const auto pa = a(i, k).coeffs();
                const auto pb = b(k, j).coeffs();
                for (long s = 0; s <= da && static_cast<std::size_t>(s) < out_len; ++s) {
                    if (pa[s] == 0) continue;
                    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(db), out_len - 1 - s);
                    for (std::size_t t = 0; t <= top; ++t) acc[s + t].add_product(pa[s], pb[t]);
                }
            }
            if (!any) continue;
            auto dst = c(i, j).coeffs();
            for (std::size_t t = 0; t < out_len; ++t) dst[t] = acc[t].reduce(f);
        }
    return c;
}

// Product A * B organised by shifted column degrees: columns of B are
// bucketed by their s-column degree into ranges (2^c xi, 2^{c+1} xi], columns
// of A by their column degree, and each block B^{c,c'} is cut into slabs of
// degree below Delta = 2^{c'+1} xi that are multiplied side by side in one
// low-degree product and recombined with x^{i Delta} offsets.
// Requires shift[j] >= cdeg A[:, j] for every column j of A.
inline PolyMatrix matmul_degree_aware(const PrimeField& f, const PolyMatrix& a, const PolyMatrix& b,
                                      const ShiftVector& shift) {
    detail::require_product_shape(a, b, "matmul_degree_aware");
    if (shift.size() != a.cols()) throw ContractViolation("matmul_degree_aware: shift length must equal A.cols");
    const ShiftVector cdeg_a = column_degree(a);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        if (cdeg_a[j] != kNegInfDegree && shift[j] < cdeg_a[j]) {
            throw ContractViolation("matmul_degree_aware: shift[" + std::to_string(j) + "] = " +
                                    std::to_string(shift[j]) + " is below the column degree " +
                                    std::to_string(cdeg_a[j]));
        }
    }
    const std::size_t order = a.order();
    const ShiftVector cdeg_b = column_degree(b, shift);

    // xi = max(mean shift, mean s-column degree of B) + 1, as an integer >= 1.
    auto ceil_mean = [](const ShiftVector& v) -> std::int64_t {
        std::int64_t sum = 0;
        for (std::int64_t x : v) sum += (x == kNegInfDegree ? 0 : std::max<std::int64_t>(x, 0));
        const auto n = static_cast<std::int64_t>(v.size());
        return (sum + n - 1) / n;
    };
    const std::int64_t xi = std::max(ceil_mean(shift), ceil_mean(cdeg_b)) + 1;

    auto bucket_of = [xi](std::int64_t value) -> int {
        int c = 0;
        while (value > (xi << (c + 1))) ++c;
        return c;
    };

    std::vector<std::vector<std::size_t>> b_buckets, a_buckets;
    auto put = [](std::vector<std::vector<std::size_t>>& buckets, int c, std::size_t idx) {
        if (buckets.size() <= static_cast<std::size_t>(c)) buckets.resize(c + 1);
        buckets[c].push_back(idx);
    };
    for (std::size_t k = 0; k < b.cols(); ++k)
        if (cdeg_b[k] != kNegInfDegree) put(b_buckets, bucket_of(cdeg_b[k]), k);
    for (std::size_t j = 0; j < a.cols(); ++j) put(a_buckets, cdeg_a[j] == kNegInfDegree ? 0 : bucket_of(cdeg_a[j]), j);

    PolyMatrix c(a.rows(), b.cols(), order);
    for (std::size_t cb = 0; cb < b_buckets.size(); ++cb) {
        const auto& cols = b_buckets[cb];
        if (cols.empty()) continue;
        for (std::size_t ca = 0; ca <= cb && ca < a_buckets.size(); ++ca) {
            const auto& inner = a_buckets[ca];
            if (inner.empty()) continue;

            long max_deg = -1;
            for (std::size_t r : inner)
                for (std::size_t k : cols) max_deg = std::max(max_deg, b(r, k).degree());
            if (max_deg < 0) continue;

            const auto delta = static_cast<std::size_t>(xi << (ca + 1));
            const std::size_t slabs = static_cast<std::size_t>(max_deg) / delta + 1;
            const std::size_t work_order = std::min(order, 2 * delta);

            PolyMatrix a_sub(a.rows(), inner.size(), work_order);
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t t = 0; t < inner.size(); ++t) a_sub(i, t) = with_order(a(i, inner[t]), work_order);

            PolyMatrix b_hat(inner.size(), slabs * cols.size(), work_order);
            for (std::size_t t = 0; t < inner.size(); ++t)
                for (std::size_t s = 0; s < slabs; ++s)
                    for (std::size_t q = 0; q < cols.size(); ++q) {
                        const auto src = b(inner[t], cols[q]).coeffs();
                        auto dst = b_hat(t, s * cols.size() + q).coeffs();
                        for (std::size_t e = 0; e < delta && s * delta + e < order && e < work_order; ++e)
                            dst[e] = src[s * delta + e];
                    }

            const PolyMatrix c_hat = matmul(f, a_sub, b_hat);
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t s = 0; s < slabs; ++s) {
                    const std::size_t offset = s * delta;
                    if (offset >= order) break;
                    for (std::size_t q = 0; q < cols.size(); ++q) {
                        const auto src = c_hat(i, s * cols.size() + q).coeffs();
                        auto dst = c(i, cols[q]).coeffs();
                        for (std::size_t e = 0; e < work_order && offset + e < order; ++e)
                            dst[offset + e] = f.add(dst[offset + e], src[e]);
                    }
                }
        }
    }
    return c;
}

namespace detail {

// Inverse of a square scalar matrix over Z_p by Gauss-Jordan elimination
// with partial pivoting; nullopt when singular.
inline std::optional<std::vector<u64>> invert_scalar(const PrimeField& f, std::vector<u64> m, std::size_t n) {
    std::vector<u64> inv(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && m[piv * n + col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m[piv * n + j], m[col * n + j]);
                std::swap(inv[piv * n + j], inv[col * n + j]);
            }
        }
        const u64 s = f.inv(m[col * n + col]);
        for (std::size_t j = 0; j < n; ++j) {
            m[col * n + j] = f.mul(m[col * n + j], s);
            inv[col * n + j] = f.mul(inv[col * n + j], s);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || m[i * n + col] == 0) continue;
            const u64 factor = m[i * n + col];
            for (std::size_t j = 0; j < n; ++j) {
                m[i * n + j] = f.sub(m[i * n + j], f.mul(factor, m[col * n + j]));
                inv[i * n + j] = f.sub(inv[i * n + j], f.mul(factor, inv[col * n + j]));
            }
        }
    }
    return inv;
}

}  // namespace detail

// F^{-1} mod x^order. F(0) is inverted over Z_p, then Newton iteration
// X <- X (2I - F X) doubles the precision until it reaches the order.
inline PolyMatrix invert_mod_xr(const PrimeField& f, const PolyMatrix& m) {
    if (!m.square()) throw ContractViolation("invert_mod_xr: matrix is not square");
    const std::size_t n = m.rows();
    const std::size_t order = m.order();
    auto base = detail::invert_scalar(f, m.constant_terms(), n);
    if (!base) throw NotInvertible("invert_mod_xr: constant-term matrix is singular");

    PolyMatrix x(n, n, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) x(i, j)[0] = (*base)[i * n + j];

    for (std::size_t k = 1; k < order;) {
        const std::size_t next = std::min(2 * k, order);
        const PolyMatrix x_next = with_order(x, next);
        PolyMatrix residual = matmul(f, with_order(m, next), x_next);  // I - E, E = 0 mod x^k
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                auto e = residual(i, j).coeffs();
                for (u64& v : e) v = f.neg(v);
                if (i == j) e[0] = f.add(e[0], f.reduce(2));
            }
        x = matmul(f, x_next, residual);
        k = next;
    }
    return x.order() == order ? x : with_order(x, order);
}

// Independent route to F^{-1} mod x^order: Gauss-Jordan elimination directly
// over the truncated ring, pivoting on entries with a unit constant term.
inline PolyMatrix invert_gauss(const PrimeField& f, const PolyMatrix& m) {
    if (!m.square()) throw ContractViolation("invert_gauss: matrix is not square");
    const std::size_t n = m.rows();
    const std::size_t order = m.order();
    PolyMatrix a = m;
    PolyMatrix inv = PolyMatrix::identity(n, order);
    auto swap_rows = [n](PolyMatrix& x, std::size_t r1, std::size_t r2) {
        for (std::size_t j = 0; j < n; ++j) std::swap(x(r1, j), x(r2, j));
    };
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col)[0] == 0) ++piv;
        if (piv == n) throw NotInvertible("invert_gauss: no unit pivot in column " + std::to_string(col));
        if (piv != col) {
            swap_rows(a, piv, col);
            swap_rows(inv, piv, col);
        }
        const TruncatedPoly s = poly_inv(f, a(col, col));
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) = poly_mul(f, a(col, j), s);
            inv(col, j) = poly_mul(f, inv(col, j), s);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col).is_zero()) continue;
            const TruncatedPoly factor = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = poly_sub(f, a(i, j), poly_mul(f, factor, a(col, j)));
                inv(i, j) = poly_sub(f, inv(i, j), poly_mul(f, factor, inv(col, j)));
            }
        }
    }
    return inv;
}

// det(F) mod x^order as the signed product of the pivots of Gaussian
// elimination over the truncated ring. Each pivot must be a unit.
inline TruncatedPoly det_mod_xr(const PrimeField& f, const PolyMatrix& m) {
    if (!m.square()) throw ContractViolation("det_mod_xr: matrix is not square");
    const std::size_t n = m.rows();
    const std::size_t order = m.order();
    PolyMatrix a = m;
    TruncatedPoly det = TruncatedPoly::constant(1, order);
    bool negate = false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col)[0] == 0) ++piv;
        if (piv == n) throw DetNotUnit("det_mod_xr: no unit pivot in column " + std::to_string(col));
        if (piv != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(a(piv, j), a(col, j));
            negate = !negate;
        }
        det = poly_mul(f, det, a(col, col));
        if (col + 1 == n) break;
        const TruncatedPoly pivot_inv = poly_inv(f, a(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            if (a(i, col).is_zero()) continue;
            const TruncatedPoly factor = poly_mul(f, a(i, col), pivot_inv);
            for (std::size_t j = col + 1; j < n; ++j) a(i, j) = poly_sub(f, a(i, j), poly_mul(f, factor, a(col, j)));
        }
    }
    return negate ? poly_neg(f, det) : det;
}

}  // namespace failsafe
