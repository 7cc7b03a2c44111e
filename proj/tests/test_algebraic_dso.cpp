#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace failsafe;

namespace {

WeightedDigraph parse(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

WeightedDigraph p3() { return parse("3 2 1\n1 2 1\n2 3 1\n"); }
WeightedDigraph diamond() { return parse("4 4 1\n1 2 1\n1 3 1\n2 4 1\n3 4 1\n"); }

std::size_t clip(Distance d, std::size_t r) { return d >= static_cast<Distance>(r) ? r : static_cast<std::size_t>(d); }

}  // namespace

TEST(SymbolicAdjacency, PathGraphLayout) {
    const WeightedDigraph g = p3();
    const SymbolicAdjacency sa = build_symbolic_adjacency(g, 42);
    EXPECT_EQ(sa.matrix.order(), 2u);
    for (Vertex u = 0; u < 3; ++u)
        for (Vertex v = 0; v < 3; ++v) {
            TruncatedPoly want(2);
            if (u == v) want[0] = 1;
            if (g.has_edge(u, v)) want[1] = sa.z_at(u, v);
            EXPECT_EQ(sa.matrix(u, v), want);
        }
    EXPECT_NE(sa.z_at(0, 1), 0u);
}

TEST(SymbolicAdjacency, EdgelessIsIdentityAndSeedIsDeterministic) {
    EXPECT_EQ(build_symbolic_adjacency(WeightedDigraph(4, 3), 1).matrix, PolyMatrix::identity(4, 4));
    std::mt19937_64 rng(1);
    const WeightedDigraph g = fixtures::random_graph(10, 3, rng);
    EXPECT_EQ(build_symbolic_adjacency(g, 9).z, build_symbolic_adjacency(g, 9).z);
    EXPECT_NE(build_symbolic_adjacency(g, 9).z, build_symbolic_adjacency(g, 10).z);
}

TEST(Preprocess, EdgelessGraph) {
    const TruncatedDso dso = TruncatedDso::preprocess(WeightedDigraph(3, 2), 5, 1);
    EXPECT_EQ(dso.inverse(), PolyMatrix::identity(3, 5));
    EXPECT_EQ(dso.determinant(), TruncatedPoly::constant(1, 5));
    EXPECT_THROW(TruncatedDso::preprocess(WeightedDigraph(3, 2), 0, 1), ContractViolation);
}

TEST(Preprocess, PathGraphInverseEntry) {
    const TruncatedDso dso = TruncatedDso::preprocess(p3(), 4, 7);
    const PrimeField& f = dso.field();
    const auto& sa = dso.adjacency();
    TruncatedPoly want(4);
    want[2] = f.mul(sa.z_at(0, 1), sa.z_at(1, 2));
    EXPECT_EQ(dso.inverse()(0, 2), want);
    EXPECT_EQ(dso.truncated_distance(0, 2), 2u);
    EXPECT_EQ(dso.truncated_distance(2, 0), 4u);
    EXPECT_EQ(dso.truncated_distance(1, 1), 0u);
}

TEST(Preprocess, InverseAndAdjointAgainstOracles) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 8; ++t) {
        const std::size_t n = 2 + uniform_below(rng, 4);
        const WeightedDigraph g = fixtures::random_graph(n, 3, rng, 0.5);
        const std::size_t r = n * 3;
        const TruncatedDso dso = TruncatedDso::preprocess(g, r, 100 + t);
        const PrimeField& f = dso.field();
        const PolyMatrix sa = with_order(dso.adjacency().matrix, r);
        EXPECT_EQ(matmul_naive(f, sa, dso.inverse()), PolyMatrix::identity(n, r));
        EXPECT_EQ(dso.determinant()[0], 1u);
        const auto grid = oracle::to_grid(sa);
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
                const TruncatedPoly adj = dso.adjoint_entry(u, v);
                EXPECT_EQ(oracle::Poly(adj.coeffs().begin(), adj.coeffs().end()), oracle::cofactor(grid, u, v, f.modulus(), r));
            }
    }
}

TEST(Preprocess, AdjointDegreeIsDistance) {
    std::mt19937_64 rng(3);
    const WeightedDigraph g = fixtures::random_graph(20, 3, rng);
    const TruncatedDso dso = TruncatedDso::preprocess(g, 16, 5);
    const DistanceMatrix d = apsp_brute(g);
    for (Vertex u = 0; u < 20; ++u)
        for (Vertex v = 0; v < 20; ++v) {
            EXPECT_EQ(std::min(deg_star(dso.adjoint_entry(u, v)), std::size_t{16}), clip(d(u, v), 16));
            EXPECT_EQ(dso.truncated_distance(u, v), clip(d(u, v), 16));
        }
}

// The rank-1 update must reproduce the cofactor adjoint of the damaged
// matrix exactly, not just its lowest degree.
TEST(Query, UpdateFormulasEqualDamagedAdjoint) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 6; ++t) {
        const std::size_t n = 3 + uniform_below(rng, 3);
        const WeightedDigraph g = fixtures::random_graph(n, 2, rng, 0.6);
        const std::size_t r = 2 * n;
        const u64 seed = 500 + t;
        const TruncatedDso dso = TruncatedDso::preprocess(g, r, seed);
        const u64 p = dso.field().modulus();
        std::vector<Failure> failures;
        for (const Edge& e : g.edges()) failures.push_back(EdgeFailure{e.from, e.to});
        for (Vertex x = 0; x < n; ++x) failures.push_back(VertexFailure{x});
        for (const Failure& fail : failures) {
            const auto damaged = oracle::to_grid(with_order(build_symbolic_adjacency(remove_failure(g, fail), seed).matrix, r));
            for (Vertex u = 0; u < n; ++u)
                for (Vertex v = 0; v < n; ++v) {
                    std::vector<u64> got;
                    if (const auto* e = std::get_if<EdgeFailure>(&fail)) {
                        got = dso.edge_failure_adjoint(u, v, e->from, e->to, r);
                    } else {
                        const Vertex x = std::get<VertexFailure>(fail).vertex;
                        if (x == u || x == v) continue;
                        got = dso.vertex_failure_adjoint(u, v, x, r);
                    }
                    EXPECT_EQ(got, oracle::cofactor(damaged, u, v, p, r));
                }
        }
    }
}

TEST(Query, Examples) {
    EXPECT_EQ(TruncatedDso::preprocess(p3(), 5, 1).query_edge_failure(0, 2, 0, 1), 5u);
    const WeightedDigraph detour = parse("3 3 3\n1 2 1\n2 3 1\n1 3 3\n");  // 1->2->4 and 1->4, vertex 4 renamed 3
    EXPECT_EQ(TruncatedDso::preprocess(detour, 8, 1).query_edge_failure(0, 2, 1, 2), 3u);
    EXPECT_EQ(TruncatedDso::preprocess(diamond(), 8, 1).query_vertex_failure(0, 3, 1), 2u);
    EXPECT_EQ(TruncatedDso::preprocess(p3(), 4, 1).query_vertex_failure(0, 2, 1), 4u);
}

TEST(Query, InvalidQueries) {
    const TruncatedDso dso = TruncatedDso::preprocess(p3(), 4, 1);
    EXPECT_THROW(dso.query_edge_failure(0, 2, 1, 0), InvalidQuery);
    EXPECT_THROW(dso.query_vertex_failure(0, 2, 0), InvalidQuery);
    EXPECT_THROW(dso.query_vertex_failure(0, 2, 2), InvalidQuery);
    EXPECT_THROW(dso.query(0, 7, VertexFailure{1}), InvalidQuery);
    EXPECT_THROW(dso.truncated_distance(0, 3), InvalidQuery);
}

TEST(Query, AllQueriesMatchReplacementDistance) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 6; ++t) {
        const std::size_t n = 8 + uniform_below(rng, 8);
        const int m = 1 + static_cast<int>(uniform_below(rng, 4));
        const WeightedDigraph g = fixtures::random_graph(n, m, rng);
        const std::size_t r = 1 + uniform_below(rng, n * m);
        const TruncatedDso dso = TruncatedDso::preprocess(g, r, 70 + t);
        std::vector<Failure> failures;
        for (const Edge& e : g.edges()) failures.push_back(EdgeFailure{e.from, e.to});
        for (Vertex x = 0; x < n; ++x) failures.push_back(VertexFailure{x});
        for (const Failure& fail : failures) {
            const DistanceMatrix d = apsp_brute(remove_failure(g, fail));
            for (Vertex u = 0; u < n; ++u)
                for (Vertex v = 0; v < n; ++v) {
                    if (const auto* x = std::get_if<VertexFailure>(&fail); x && (x->vertex == u || x->vertex == v)) continue;
                    QueryTrace trace;
                    ASSERT_EQ(dso.query(u, v, fail, &trace), clip(d(u, v), r));
                    EXPECT_LE(trace.ring_ops, 8u);
                    EXPECT_GE(trace.passes, 1u);
                    EXPECT_LE(trace.final_precision, r);
                }
        }
    }
}

TEST(Query, SmallFieldStillExactOnTree) {
    // A tree has a single path per pair, so no cancellation can happen even mod 101.
    const WeightedDigraph g = parse("5 4 2\n1 2 1\n1 3 2\n3 4 1\n3 5 2\n");
    const TruncatedDso dso = TruncatedDso::preprocess(g, 10, 3, PrimeField(101));
    EXPECT_EQ(dso.query_vertex_failure(0, 4, 1), 4u);
    EXPECT_EQ(dso.query_edge_failure(0, 4, 2, 4), 10u);
    EXPECT_EQ(dso.query_vertex_failure(0, 3, 2), 10u);
}

TEST(Query, DeterministicForFixedSeed) {
    std::mt19937_64 rng(6);
    const WeightedDigraph g = fixtures::random_graph(15, 3, rng);
    const TruncatedDso a = TruncatedDso::preprocess(g, 20, 11), b = TruncatedDso::preprocess(g, 20, 11);
    EXPECT_EQ(a.inverse(), b.inverse());
    EXPECT_EQ(a.determinant(), b.determinant());
    for (const Edge& e : g.edges()) EXPECT_EQ(a.query_edge_failure(0, 14, e.from, e.to), b.query_edge_failure(0, 14, e.from, e.to));
}
