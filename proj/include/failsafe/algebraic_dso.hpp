#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"
#include "failsafe/graph.hpp"
#include "failsafe/poly.hpp"
#include "failsafe/poly_matrix.hpp"

namespace failsafe {

// SA_Z(G): 1 on the diagonal, z_{u,v} x^w for an edge u->v of weight w, 0
// elsewhere. The matrix is stored exactly, at order M + 1.
struct SymbolicAdjacency {
    PolyMatrix matrix;
    // Row-major n x n samples; only entries of existing edges are used.
    std::vector<u64> z;
    PrimeField field;
    u64 seed;

    u64 z_at(Vertex u, Vertex v) const noexcept { return z[u * matrix.rows() + v]; }
};

// Every z_{i,j} is drawn uniformly from Z_p in row-major order from an
// mt19937_64 seeded with `seed`.
inline SymbolicAdjacency build_symbolic_adjacency(const WeightedDigraph& g, u64 seed,
                                                  const PrimeField& field = PrimeField()) {
    const std::size_t n = g.vertex_count();
    std::mt19937_64 rng(seed);
    std::vector<u64> z(n * n);
    for (u64& x : z) x = field.random_element(rng);

    PolyMatrix m = PolyMatrix::identity(n, static_cast<std::size_t>(g.max_weight()) + 1);
    for (const Edge& e : g.edges()) m(e.from, e.to)[static_cast<std::size_t>(e.weight)] = z[e.from * n + e.to];
    return SymbolicAdjacency{std::move(m), std::move(z), field, seed};
}

// Ring operations performed while answering one query.
struct QueryTrace {
    // Ring multiplications and additions in one evaluation of the update formula.
    std::size_t ring_ops = 0;
    // Evaluations at increasing precision before the answer was settled.
    std::size_t passes = 0;
    std::size_t final_precision = 0;
};

// r-truncated distance sensitivity oracle. Stores SA_Z(G)^{-1} mod x^r and
// det SA_Z(G) mod x^r; a failure is a rank-1 change of SA, so the adjoint entry
// of the damaged matrix follows from a constant number of ring operations.
//
// Queries evaluate the update formula modulo x^k for k = 8, 16, ... up to r and
// stop at the first k where the result is nonzero; reduction mod x^k commutes
// with every ring operation, so the answer is the one the full-precision
// formula would give.
class TruncatedDso {
public:
    static TruncatedDso preprocess(const WeightedDigraph& g, std::size_t radius, u64 seed,
                                   const PrimeField& field = PrimeField()) {
        if (radius < 1) throw ContractViolation("preprocess: radius must be at least 1");
        SymbolicAdjacency sa = build_symbolic_adjacency(g, seed, field);
        const PolyMatrix truncated = with_order(sa.matrix, radius);
        PolyMatrix inv = invert_mod_xr(sa.field, truncated);
        TruncatedPoly det = det_mod_xr(sa.field, truncated);
        assert(det[0] == 1);
        return TruncatedDso(g, radius, std::move(sa), std::move(inv), std::move(det));
    }

    std::size_t radius() const noexcept { return radius_; }
    std::size_t vertex_count() const noexcept { return graph_.vertex_count(); }
    const WeightedDigraph& graph() const noexcept { return graph_; }
    const SymbolicAdjacency& adjacency() const noexcept { return sa_; }
    const PolyMatrix& inverse() const noexcept { return inv_; }
    const TruncatedPoly& determinant() const noexcept { return det_; }
    const PrimeField& field() const noexcept { return sa_.field; }

    // adj(SA)_{u,v} mod x^r = det * inv_{u,v}.
    TruncatedPoly adjoint_entry(Vertex u, Vertex v) const { return poly_mul(field(), det_, inv_(u, v)); }

    // min(dist(u, v), r) from the lowest degree of adj(SA)_{u,v}.
    std::size_t truncated_distance(Vertex u, Vertex v) const {
        check_vertex(u);
        check_vertex(v);
        return settle([&](std::size_t k, std::vector<u64>& out, std::size_t& ops) {
            ops = 1;
            detail::mul_into(field(), det_.coeffs().first(k), inv_(u, v).coeffs().first(k), out);
        });
    }

    // adj(SA(G - e))_{u,v} mod x^k for e = a->b.
    std::vector<u64> edge_failure_adjoint(Vertex u, Vertex v, Vertex a, Vertex b, std::size_t k,
                                          std::size_t* ring_ops = nullptr) const {
        const PrimeField& f = field();
        const auto l = static_cast<std::size_t>(graph_.weight(a, b));
        const u64 neg_z = f.neg(sa_.z_at(a, b));
        std::size_t ops = 0;

        // gamma = 1 - z x^l inv_{b,a}
        std::vector<u64> gamma(k, 0);
        shifted_scale_into(inv_(b, a).coeffs(), neg_z, l, gamma);
        ++ops;
        gamma[0] = f.add(gamma[0], 1);
        ++ops;
        assert(gamma[0] == 1);

        // beta = -inv_{u,a} z x^l inv_{b,v}
        std::vector<u64> prod(k, 0), beta(k, 0);
        detail::mul_into(f, inv_(u, a).coeffs().first(k), inv_(b, v).coeffs().first(k), prod);
        ++ops;
        shifted_scale_into(prod, neg_z, l, beta);
        ++ops;

        // alpha = det (gamma inv_{u,v} - beta)
        std::vector<u64> inner(k, 0), alpha(k, 0);
        detail::mul_into(f, gamma, inv_(u, v).coeffs().first(k), inner);
        ++ops;
        for (std::size_t i = 0; i < k; ++i) inner[i] = f.sub(inner[i], beta[i]);
        ++ops;
        detail::mul_into(f, det_.coeffs().first(k), inner, alpha);
        ++ops;
        if (ring_ops) *ring_ops = ops;
        return alpha;
    }

    // adj(SA(G'))_{u,v} mod x^k where G' drops the outgoing edges of x.
    std::vector<u64> vertex_failure_adjoint(Vertex u, Vertex v, Vertex x, std::size_t k,
                                            std::size_t* ring_ops = nullptr) const {
        const PrimeField& f = field();
        std::size_t ops = 0;
        // gamma = inv_{x,x}, whose constant term is 1.
        const auto gamma = inv_(x, x).coeffs().first(k);
        assert(gamma[0] == 1);

        std::vector<u64> beta(k, 0);
        detail::mul_into(f, inv_(u, x).coeffs().first(k), inv_(x, v).coeffs().first(k), beta);
        ++ops;

        std::vector<u64> inner(k, 0), alpha(k, 0);
        detail::mul_into(f, gamma, inv_(u, v).coeffs().first(k), inner);
        ++ops;
        for (std::size_t i = 0; i < k; ++i) inner[i] = f.sub(inner[i], beta[i]);
        ++ops;
        detail::mul_into(f, det_.coeffs().first(k), inner, alpha);
        ++ops;
        if (ring_ops) *ring_ops = ops;
        return alpha;
    }

    // min(||uv <> e||, r) for the failed edge e = a->b.
    std::size_t query_edge_failure(Vertex u, Vertex v, Vertex a, Vertex b, QueryTrace* trace = nullptr) const {
        validate_query(graph_, u, v, EdgeFailure{a, b});
        return settle(
            [&](std::size_t k, std::vector<u64>& out, std::size_t& ops) {
                out = edge_failure_adjoint(u, v, a, b, k, &ops);
            },
            trace);
    }

    // min(||uv <> x||, r) for the failed vertex x (x not in {u, v}).
    std::size_t query_vertex_failure(Vertex u, Vertex v, Vertex x, QueryTrace* trace = nullptr) const {
        validate_query(graph_, u, v, VertexFailure{x});
        return settle(
            [&](std::size_t k, std::vector<u64>& out, std::size_t& ops) {
                out = vertex_failure_adjoint(u, v, x, k, &ops);
            },
            trace);
    }

    std::size_t query(Vertex u, Vertex v, const Failure& failure, QueryTrace* trace = nullptr) const {
        if (const auto* e = std::get_if<EdgeFailure>(&failure)) return query_edge_failure(u, v, e->from, e->to, trace);
        return query_vertex_failure(u, v, std::get<VertexFailure>(failure).vertex, trace);
    }

private:
    TruncatedDso(WeightedDigraph g, std::size_t radius, SymbolicAdjacency sa, PolyMatrix inv, TruncatedPoly det)
        : graph_(std::move(g)), radius_(radius), sa_(std::move(sa)), inv_(std::move(inv)), det_(std::move(det)) {}

    void check_vertex(Vertex u) const {
        if (u >= graph_.vertex_count()) throw InvalidQuery("vertex out of range");
    }

    // out[i] = s * src[i - shift] for i < out.size().
    void shifted_scale_into(std::span<const u64> src, u64 s, std::size_t shift, std::span<u64> out) const {
        for (std::size_t i = shift; i < out.size(); ++i) out[i] = field().mul(src[i - shift], s);
    }

    template <class Eval>
    std::size_t settle(Eval&& eval, QueryTrace* trace = nullptr) const {
        std::vector<u64> value;
        std::size_t passes = 0, ops = 0;
        for (std::size_t k = std::min<std::size_t>(8, radius_);; k = std::min(2 * k, radius_)) {
            value.assign(k, 0);
            eval(k, value, ops);
            ++passes;
            const std::size_t d = deg_star(value);
            if (d != kInfiniteDegree || k == radius_) {
                if (trace) *trace = QueryTrace{ops, passes, k};
                return d == kInfiniteDegree ? radius_ : d;
            }
        }
    }

    WeightedDigraph graph_;
    std::size_t radius_;
    SymbolicAdjacency sa_;
    PolyMatrix inv_;
    TruncatedPoly det_;
};

}  // namespace failsafe
