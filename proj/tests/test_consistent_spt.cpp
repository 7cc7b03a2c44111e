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

// Labels chosen so that vertex 2 (index 1) beats vertex 3 (index 2) when `two_first`.
Permutation diamond_pi(bool two_first) {
    return Permutation(two_first ? std::vector<std::size_t>{3, 1, 2, 4} : std::vector<std::size_t>{3, 2, 1, 4});
}

// w x h grid with right and down edges of weight 1: many tied shortest paths.
WeightedDigraph grid(std::size_t w, std::size_t h) {
    WeightedDigraph g(w * h, 1);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (x + 1 < w) g.add_edge(y * w + x, y * w + x + 1, 1);
            if (y + 1 < h) g.add_edge(y * w + x, (y + 1) * w + x, 1);
        }
    return g;
}

IntMatrix random_int_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    IntMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (uniform_below(rng, 4)) m(i, j) = static_cast<Distance>(uniform_below(rng, 20));
    return m;
}

}  // namespace

TEST(Permutation, RandomIsBijectiveAndSeeded) {
    const Permutation a = Permutation::random(50, 3), b = Permutation::random(50, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, Permutation::random(50, 4));
    std::vector<bool> seen(51, false);
    for (Vertex v = 0; v < 50; ++v) {
        EXPECT_FALSE(seen[a.label(v)]);
        seen[a.label(v)] = true;
        EXPECT_EQ(a.vertex_with_label(a.label(v)), v);
    }
    EXPECT_THROW(Permutation({1, 1, 2}), ContractViolation);
    EXPECT_THROW(Permutation({0, 1, 2}), ContractViolation);
}

TEST(MinPlus, IdentityAndInfinity) {
    std::mt19937_64 rng(1);
    const IntMatrix a = random_int_matrix(6, 6, rng);
    IntMatrix id(6, 6);
    for (std::size_t i = 0; i < 6; ++i) id(i, i) = 0;
    EXPECT_EQ(min_plus(a, id), a);
    EXPECT_EQ(min_plus(a, IntMatrix(6, 4)), IntMatrix(6, 4));
    EXPECT_THROW(min_plus(a, IntMatrix(5, 5)), ContractViolation);
}

TEST(MinPlus, MatchesReorderedLoop) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const IntMatrix a = random_int_matrix(10, 10, rng), b = random_int_matrix(10, 10, rng);
        const IntMatrix c = min_plus(a, b);
        for (std::size_t v = 0; v < 10; ++v)
            for (std::size_t u = 0; u < 10; ++u) {
                Distance best = kUnreachable;
                for (std::size_t z = 10; z-- > 0;)
                    if (a(u, z) < kUnreachable && b(z, v) < kUnreachable) best = std::min(best, a(u, z) + b(z, v));
                EXPECT_EQ(c(u, v), best);
            }
    }
}

TEST(BlockedProduct, SingleBlockEqualsMinPlus) {
    std::mt19937_64 rng(3);
    const IntMatrix a = random_int_matrix(7, 5, rng), b = random_int_matrix(5, 6, rng);
    const std::vector<std::size_t> labels{1, 2, 3, 4, 5};
    const auto blocks = blocked_witness_product(a, b, labels, 5);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0], min_plus(a, b));
}

TEST(BlockedProduct, EmptyBlockIsInfinite) {
    std::mt19937_64 rng(4);
    const IntMatrix a = random_int_matrix(4, 3, rng), b = random_int_matrix(3, 4, rng);
    const std::vector<std::size_t> labels{1, 2, 5};
    const auto blocks = blocked_witness_product(a, b, labels, 2);
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_EQ(blocks[1], IntMatrix(4, 4));
    EXPECT_THROW(blocked_witness_product(a, b, labels, 0), ContractViolation);
}

TEST(BlockedProduct, DiamondPerWitnessRows) {
    const WeightedDigraph g = diamond();
    const DistanceMatrix d = apsp_brute(g);
    const IntMatrix full = IntMatrix::from_distances(d);
    const std::vector<std::size_t> labels{1, 2, 3, 4};
    const auto blocks = blocked_witness_product(full, full, labels, 1);
    ASSERT_EQ(blocks.size(), 4u);
    for (std::size_t z = 0; z < 4; ++z)
        for (Vertex u = 0; u < 4; ++u)
            for (Vertex v = 0; v < 4; ++v) EXPECT_EQ(blocks[z](u, v), add_saturating(d(u, z), d(z, v)));
}

TEST(Witness, SmallExamples) {
    const WeightedDigraph g = p3();
    const WitnessResult w = compute_witnesses(g, apsp_brute(g), Permutation::identity(3));
    EXPECT_EQ(w.witnesses.at(0, 2), 1u);
    EXPECT_EQ(w.witnesses.at(0, 1), kNoVertex);
    EXPECT_EQ(w.witnesses.hop_class(0, 1), HopClass::kOne);
    EXPECT_EQ(w.witnesses.hop_class(0, 2), HopClass::kMany);
    EXPECT_EQ(w.witnesses.hop_class(2, 0), HopClass::kUnreachable);
    EXPECT_EQ(w.witnesses.hop_class(1, 1), HopClass::kZero);

    const WeightedDigraph dm = diamond();
    const DistanceMatrix d = apsp_brute(dm);
    EXPECT_EQ(compute_witnesses(dm, d, diamond_pi(true)).witnesses.at(0, 3), 1u);
    EXPECT_EQ(compute_witnesses(dm, d, diamond_pi(false)).witnesses.at(0, 3), 2u);
}

TEST(Witness, EdgeWithTiedDetourIsNotOneHop) {
    // 1->3 weight 2 ties with 1->2->3, so |13| = 2 and the witness is 2.
    const WeightedDigraph g = parse("3 3 2\n1 2 1\n2 3 1\n1 3 2\n");
    const WitnessResult w = compute_witnesses(g, apsp_brute(g), Permutation::identity(3));
    EXPECT_EQ(w.witnesses.hop_class(0, 2), HopClass::kMany);
    EXPECT_EQ(w.witnesses.at(0, 2), 1u);
}

TEST(Witness, MatchesShortestPathEnumeration) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 4 + uniform_below(rng, 12);
        const WeightedDigraph g = fixtures::random_graph(n, 1 + static_cast<int>(uniform_below(rng, 3)), rng);
        const Permutation pi = Permutation::random(n, t);
        const WitnessResult w = compute_witnesses(g, apsp_brute(g), pi);
        const auto s = oracle::from_graph(g);
        const auto fw = oracle::floyd_warshall(s);
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
                const auto truth = oracle::witness_truth(s, fw, pi, u, v);
                const HopClass want = u == v            ? HopClass::kZero
                                      : !truth.reachable ? HopClass::kUnreachable
                                      : truth.max_hops == 1 ? HopClass::kOne
                                                            : HopClass::kMany;
                EXPECT_EQ(w.witnesses.hop_class(u, v), want);
                EXPECT_EQ(w.witnesses.at(u, v), truth.witness.value_or(kNoVertex));
            }
    }
}

TEST(Witness, BlockSizeAndEscalationDoNotChangeResult) {
    std::mt19937_64 rng(6);
    const WeightedDigraph g = fixtures::random_graph(25, 3, rng);
    const DistanceMatrix d = apsp_brute(g);
    const Permutation pi = Permutation::random(25, 1);
    const WitnessResult base = compute_witnesses(g, d, pi);
    for (std::size_t s : {1u, 2u, 7u, 25u, 100u}) {
        SptOptions o;
        o.block_size = s;
        EXPECT_EQ(compute_witnesses(g, d, pi, o).witnesses, base.witnesses);
    }
    SptOptions tiny;
    tiny.hitting_c = 0.01;
    const WitnessResult escalated = compute_witnesses(g, d, pi, tiny);
    EXPECT_GT(escalated.escalations, 0u);
    EXPECT_EQ(escalated.witnesses, base.witnesses);
}

TEST(Forests, Examples) {
    const ConsistentPaths a = build_consistent_paths(p3(), Permutation::identity(3));
    EXPECT_EQ(a.forests.in_parent(2, 0), 1u);
    EXPECT_EQ(a.forests.in_parent(1, 0), 1u);  // one hop: parent is the root
    EXPECT_EQ(extract_path(a.forests, 0, 2), (std::vector<Vertex>{0, 1, 2}));
    EXPECT_EQ(extract_path(a.forests, 1, 1), (std::vector<Vertex>{1}));
    EXPECT_THROW(extract_path(a.forests, 2, 0), InvalidQuery);

    const ConsistentPaths b = build_consistent_paths(diamond(), diamond_pi(true));
    EXPECT_EQ(b.forests.in_parent(3, 0), 1u);
    EXPECT_EQ(b.forests.in_parent(3, 2), 3u);
    EXPECT_EQ(extract_path(b.forests, 0, 3), (std::vector<Vertex>{0, 1, 3}));
    EXPECT_EQ(extract_path_out(b.forests, 0, 3), (std::vector<Vertex>{0, 1, 3}));
    const ConsistentPaths c = build_consistent_paths(diamond(), diamond_pi(false));
    EXPECT_EQ(extract_path(c.forests, 0, 3), (std::vector<Vertex>{0, 2, 3}));
}

TEST(Forests, PathsMatchRecursiveDefinition) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 15; ++t) {
        const std::size_t n = 4 + uniform_below(rng, 11);
        const WeightedDigraph g = fixtures::random_graph(n, 1 + static_cast<int>(uniform_below(rng, 3)), rng);
        const Permutation pi = Permutation::random(n, 40 + t);
        const ConsistentPaths paths = build_consistent_paths(g, pi);
        const auto s = oracle::from_graph(g);
        const auto fw = oracle::floyd_warshall(s);
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
                if (fw[u][v] >= kUnreachable) continue;
                const auto want = oracle::rho(s, fw, pi, u, v);
                EXPECT_EQ(extract_path(paths.forests, u, v), want);
                EXPECT_EQ(extract_path_out(paths.forests, u, v), want);
            }
    }
}

// The outgoing forest is built from the same witnesses; running the whole
// pipeline on the reversed graph must give the same trees.
TEST(Forests, OutgoingForestEqualsReversedGraphIncomingForest) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 5 + uniform_below(rng, 20);
        const WeightedDigraph g = fixtures::random_graph(n, 3, rng);
        const Permutation pi = Permutation::random(n, t);
        const ConsistentPaths fwd = build_consistent_paths(g, pi);
        const ConsistentPaths rev = build_consistent_paths(g.reversed(), pi);
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
                EXPECT_EQ(rev.witnesses.at(v, u), fwd.witnesses.at(u, v));
                EXPECT_EQ(rev.forests.in_parent(u, v), fwd.forests.out_parent(u, v));
                EXPECT_EQ(rev.forests.out_parent(v, u), fwd.forests.in_parent(v, u));
            }
    }
}

TEST(Consistency, TreeHasNoViolations) {
    const WeightedDigraph g = parse("6 5 2\n1 2 1\n1 3 2\n3 4 1\n3 5 2\n5 6 1\n");
    const ConsistentPaths paths = build_consistent_paths(g, Permutation::random(6, 1));
    const ConsistencyReport rep = verify_consistency(g, paths);
    EXPECT_TRUE(rep.consistent());
    EXPECT_GT(rep.subpaths_checked, 0u);
}

TEST(Consistency, RandomGraphsSubpathConsistency) {
    for (u64 seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const WeightedDigraph g = fixtures::random_graph(25, 3, rng);
        const ConsistentPaths paths = build_consistent_paths(g, Permutation::random(25, seed));
        ConsistencyOptions o;
        o.subgraph_samples = 3;
        const ConsistencyReport rep = verify_consistency(g, paths, o);
        EXPECT_EQ(rep.path_violations, 0u);
        EXPECT_EQ(rep.in_out_mismatches, 0u);
        EXPECT_EQ(rep.subpath_violations, 0u);
        EXPECT_EQ(rep.subgraph_violations, 0u);
    }
}

TEST(Consistency, GridWithTiesSubgraphConsistency) {
    const WeightedDigraph g = grid(5, 4);
    const ConsistentPaths paths = build_consistent_paths(g, Permutation::random(20, 9));
    ConsistencyOptions o;
    o.subgraph_samples = 50;
    const ConsistencyReport rep = verify_consistency(g, paths, o);
    EXPECT_TRUE(rep.consistent());
    EXPECT_EQ(rep.subgraphs_checked, 50u);
    EXPECT_GT(rep.subgraph_pairs_checked, 50u);
}

TEST(Consistency, DetectsCorruptedForest) {
    const WeightedDigraph g = diamond();
    ConsistentPaths paths = build_consistent_paths(g, diamond_pi(true));
    paths.forests.parent_in[3 * 4 + 0] = 2;  // 1 -> 3 -> 4 in the in-tree of 4 only
    const ConsistencyReport rep = verify_consistency(g, paths);
    EXPECT_FALSE(rep.consistent());
    EXPECT_GT(rep.in_out_mismatches, 0u);
}
