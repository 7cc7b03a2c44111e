#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"
#include "failsafe/graph.hpp"

namespace failsafe {

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

// Bijection V -> {1..n}. Smaller labels win ties between shortest paths.
class Permutation {
public:
    static Permutation identity(std::size_t n) {
        std::vector<std::size_t> labels(n);
        std::iota(labels.begin(), labels.end(), 1);
        return Permutation(std::move(labels));
    }

    // Fisher-Yates over labels, driven by mt19937_64(seed).
    static Permutation random(std::size_t n, u64 seed) {
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> labels(n);
        std::iota(labels.begin(), labels.end(), 1);
        for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[uniform_below(rng, i)]);
        return Permutation(std::move(labels));
    }

    // labels[v] is the label of vertex v; must be a permutation of 1..n.
    explicit Permutation(std::vector<std::size_t> labels) : label_(std::move(labels)), by_label_(label_.size()) {
        std::vector<bool> used(label_.size(), false);
        for (Vertex v = 0; v < label_.size(); ++v) {
            const std::size_t l = label_[v];
            if (l < 1 || l > label_.size() || used[l - 1]) throw ContractViolation("Permutation: labels are not a bijection onto 1..n");
            used[l - 1] = true;
            by_label_[l - 1] = v;
        }
    }

    std::size_t size() const noexcept { return label_.size(); }
    std::size_t label(Vertex v) const noexcept { return label_[v]; }
    Vertex vertex_with_label(std::size_t l) const noexcept { return by_label_[l - 1]; }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> label_;
    std::vector<Vertex> by_label_;
};

// Rectangular integer matrix; kUnreachable plays +infinity.
class IntMatrix {
public:
    IntMatrix(std::size_t rows, std::size_t cols, Distance fill = kUnreachable)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static IntMatrix from_distances(const DistanceMatrix& d) {
        IntMatrix m(d.size(), d.size());
        for (Vertex u = 0; u < d.size(); ++u)
            for (Vertex v = 0; v < d.size(); ++v) m(u, v) = d(u, v);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Distance operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    Distance& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Distance> data_;
};

inline Distance add_saturating(Distance a, Distance b) noexcept {
    return (a >= kUnreachable || b >= kUnreachable) ? kUnreachable : a + b;
}

// Distance product: C[u][v] = min_z A[u][z] + B[z][v].
inline IntMatrix min_plus(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows()) throw ContractViolation("min_plus: inner dimensions differ");
    IntMatrix c(a.rows(), b.cols());
    for (std::size_t u = 0; u < a.rows(); ++u)
        for (std::size_t z = 0; z < a.cols(); ++z) {
            const Distance left = a(u, z);
            if (left >= kUnreachable) continue;
            for (std::size_t v = 0; v < b.cols(); ++v) {
                const Distance right = b(z, v);
                if (right < kUnreachable && left + right < c(u, v)) c(u, v) = left + right;
            }
        }
    return c;
}

// D^i[u][v] = min over witness columns z whose label lies in block i, i.e. in
// (i*s, (i+1)*s], of A[u][z] + B[z][v]. witness_labels[z] is the label of
// column z of A (row z of B). There are ceil(max label / s) blocks.
inline std::vector<IntMatrix> blocked_witness_product(const IntMatrix& a, const IntMatrix& b,
                                                      std::span<const std::size_t> witness_labels,
                                                      std::size_t block_size) {
    if (a.cols() != b.rows() || witness_labels.size() != a.cols()) {
        throw ContractViolation("blocked_witness_product: witness dimensions differ");
    }
    if (block_size == 0) throw ContractViolation("blocked_witness_product: block size must be positive");
    std::size_t max_label = 0;
    for (std::size_t l : witness_labels) max_label = std::max(max_label, l);
    const std::size_t blocks = (max_label + block_size - 1) / block_size;
    std::vector<IntMatrix> out(blocks, IntMatrix(a.rows(), b.cols()));
    for (std::size_t z = 0; z < a.cols(); ++z) {
        if (witness_labels[z] == 0) throw ContractViolation("blocked_witness_product: labels start at 1");
        IntMatrix& d = out[(witness_labels[z] - 1) / block_size];
        for (std::size_t u = 0; u < a.rows(); ++u) {
            const Distance left = a(u, z);
            if (left >= kUnreachable) continue;
            for (std::size_t v = 0; v < b.cols(); ++v) {
                const Distance right = b(z, v);
                if (right < kUnreachable && left + right < d(u, v)) d(u, v) = left + right;
            }
        }
    }
    return out;
}

// |uv| at the granularity the tie-breaking needs.
enum class HopClass : std::uint8_t { kZero, kOne, kMany, kUnreachable };

struct WitnessMatrix {
    std::size_t n = 0;
    // w(u, v) for pairs with 2 <= |uv| < inf, kNoVertex otherwise.
    std::vector<Vertex> w;
    std::vector<HopClass> hops;

    Vertex at(Vertex u, Vertex v) const noexcept { return w[u * n + v]; }
    HopClass hop_class(Vertex u, Vertex v) const noexcept { return hops[u * n + v]; }

    friend bool operator==(const WitnessMatrix&, const WitnessMatrix&) = default;
};

struct SptOptions {
    // Hitting-set constant: H_r = { z : label(z) <= C M n ln n / r }.
    double hitting_c = 3.0;
    // Witness block size; 0 selects ceil(n^0.5286).
    std::size_t block_size = 0;
};

inline std::size_t default_block_size(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.5286))));
}

// C M n ln n / distance.
inline double hitting_bound(double c, int max_weight, std::size_t n, double distance) {
    return c * max_weight * static_cast<double>(n) * std::log(static_cast<double>(n)) / distance;
}

struct WitnessResult {
    WitnessMatrix witnesses;
    // Radius classes whose hitting set had to be enlarged.
    std::size_t escalations = 0;
};

inline std::vector<HopClass> classify_hops(const WeightedDigraph& g, const DistanceMatrix& dist) {
    const std::size_t n = g.vertex_count();
    std::vector<HopClass> hops(n * n);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v) {
            HopClass& h = hops[u * n + v];
            const Distance d = dist(u, v);
            if (u == v) {
                h = HopClass::kZero;
            } else if (d >= kUnreachable) {
                h = HopClass::kUnreachable;
            } else {
                bool via = false;
                for (Vertex z = 0; z < n && !via; ++z) {
                    if (z != u && z != v && add_saturating(dist(u, z), dist(z, v)) == d) via = true;
                }
                h = via ? HopClass::kMany : HopClass::kOne;
            }
        }
    return hops;
}

// w(u, v) = the internal vertex of least label over all shortest u -> v paths,
// computed per distance class [r, 2r), r = 2^k, as a minimum witness of a
// blocked distance product restricted to the hitting set H_r. A pair left
// without a witness doubles the H_r threshold and the class is recomputed.
inline WitnessResult compute_witnesses(const WeightedDigraph& g, const DistanceMatrix& dist, const Permutation& pi,
                                       const SptOptions& options = {}) {
    const std::size_t n = g.vertex_count();
    if (dist.size() != n || pi.size() != n) throw ContractViolation("compute_witnesses: size mismatch");
    const std::size_t s = options.block_size ? options.block_size : default_block_size(n);

    WitnessResult result;
    WitnessMatrix& wm = result.witnesses;
    wm.n = n;
    wm.w.assign(n * n, kNoVertex);
    wm.hops = classify_hops(g, dist);

    Distance max_dist = 0;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v)
            if (dist(u, v) < kUnreachable) max_dist = std::max(max_dist, dist(u, v));

    for (Distance r = 1; r <= max_dist; r *= 2) {
        std::vector<std::pair<Vertex, Vertex>> pairs;
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v)
                if (wm.hop_class(u, v) == HopClass::kMany && dist(u, v) >= r && dist(u, v) < 2 * r)
                    pairs.emplace_back(u, v);
        if (pairs.empty()) continue;

        double threshold = hitting_bound(options.hitting_c, g.max_weight(), n, static_cast<double>(r));
        for (bool first = true;; first = false) {
            const std::size_t h = std::min<std::size_t>(n, threshold >= static_cast<double>(n)
                                                               ? n
                                                               : static_cast<std::size_t>(std::floor(threshold)));
            // Witness columns in label order: column t is the vertex labelled t + 1.
            std::vector<std::size_t> labels(h);
            std::iota(labels.begin(), labels.end(), 1);
            IntMatrix a(n, h), b(h, n);
            for (std::size_t t = 0; t < h; ++t) {
                const Vertex z = pi.vertex_with_label(t + 1);
                for (Vertex u = 0; u < n; ++u) {
                    if (u != z && dist(u, z) <= 2 * r) a(u, t) = dist(u, z);
                    if (u != z && dist(z, u) <= 2 * r) b(t, u) = dist(z, u);
                }
            }
            const std::vector<IntMatrix> blocks =
                h ? blocked_witness_product(a, b, labels, s) : std::vector<IntMatrix>{};

            bool missed = false;
            for (const auto& [u, v] : pairs) {
                const Distance d = dist(u, v);
                Vertex found = kNoVertex;
                for (std::size_t i = 0; i < blocks.size() && found == kNoVertex; ++i) {
                    if (blocks[i](u, v) != d) continue;
                    const std::size_t end = std::min(h, (i + 1) * s);
                    for (std::size_t t = i * s; t < end; ++t) {
                        if (add_saturating(a(u, t), b(t, v)) == d) {
                            found = pi.vertex_with_label(t + 1);
                            break;
                        }
                    }
                }
                wm.w[u * n + v] = found;
                if (found == kNoVertex) missed = true;
            }
            if (!missed) break;
            if (h == n) throw Error("compute_witnesses: no witness found with the full vertex set");
            if (first) ++result.escalations;
            threshold *= 2;
        }
    }
    return result;
}

// parent_in[v * n + u]: successor of u on rho(u, v), i.e. u's parent in the
// incoming tree of v. parent_out[u * n + v]: predecessor of v on rho(u, v),
// i.e. v's parent in the outgoing tree of u. kNoVertex at roots and for
// unreachable pairs.
struct ShortestPathForests {
    std::size_t n = 0;
    std::vector<Vertex> parent_in;
    std::vector<Vertex> parent_out;

    Vertex in_parent(Vertex root, Vertex u) const noexcept { return parent_in[root * n + u]; }
    Vertex out_parent(Vertex root, Vertex v) const noexcept { return parent_out[root * n + v]; }

    friend bool operator==(const ShortestPathForests&, const ShortestPathForests&) = default;
};

// Pairs in nondecreasing distance: parent_v(u) = v when there is no witness,
// parent_v(u) = parent_w(u) for w = w(u, v) otherwise, and symmetrically for
// the outgoing side. Both recursions only read pairs at strictly smaller
// distance since weights are positive.
inline ShortestPathForests build_forests(const WitnessMatrix& w, const DistanceMatrix& dist) {
    const std::size_t n = w.n;
    if (dist.size() != n) throw ContractViolation("build_forests: size mismatch");
    ShortestPathForests forests{n, std::vector<Vertex>(n * n, kNoVertex), std::vector<Vertex>(n * n, kNoVertex)};

    std::vector<std::pair<Vertex, Vertex>> order;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v)
            if (u != v && dist(u, v) < kUnreachable) order.emplace_back(u, v);
    std::stable_sort(order.begin(), order.end(),
                     [&](const auto& x, const auto& y) { return dist(x.first, x.second) < dist(y.first, y.second); });

    for (const auto& [u, v] : order) {
        const Vertex mid = w.at(u, v);
        if (mid == kNoVertex) {
            if (w.hop_class(u, v) != HopClass::kOne) throw ContractViolation("build_forests: pair needs a witness");
            forests.parent_in[v * n + u] = v;
            forests.parent_out[u * n + v] = u;
        } else {
            forests.parent_in[v * n + u] = forests.parent_in[mid * n + u];
            forests.parent_out[u * n + v] = forests.parent_out[mid * n + v];
        }
    }
    return forests;
}

// rho(u, v) by walking the incoming tree of v from u.
inline std::vector<Vertex> extract_path(const ShortestPathForests& forests, Vertex u, Vertex v) {
    const std::size_t n = forests.n;
    if (u >= n || v >= n) throw ContractViolation("extract_path: vertex out of range");
    std::vector<Vertex> path{u};
    for (Vertex x = u; x != v;) {
        x = forests.in_parent(v, x);
        if (x == kNoVertex) throw InvalidQuery("extract_path: target unreachable");
        if (path.size() > n) throw Error("extract_path: cycle in incoming tree");
        path.push_back(x);
    }
    return path;
}

// rho(u, v) by walking the outgoing tree of u backwards from v.
inline std::vector<Vertex> extract_path_out(const ShortestPathForests& forests, Vertex u, Vertex v) {
    const std::size_t n = forests.n;
    if (u >= n || v >= n) throw ContractViolation("extract_path_out: vertex out of range");
    std::vector<Vertex> path{v};
    for (Vertex x = v; x != u;) {
        x = forests.out_parent(u, x);
        if (x == kNoVertex) throw InvalidQuery("extract_path_out: target unreachable");
        if (path.size() > n) throw Error("extract_path_out: cycle in outgoing tree");
        path.push_back(x);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Everything the tie-breaking pipeline produces for one graph and permutation.
struct ConsistentPaths {
    DistanceMatrix dist;
    Permutation pi;
    WitnessMatrix witnesses;
    ShortestPathForests forests;
    std::size_t escalations = 0;
};

inline ConsistentPaths build_consistent_paths(const WeightedDigraph& g, const Permutation& pi,
                                              const SptOptions& options = {}) {
    DistanceMatrix dist = apsp_brute(g);
    WitnessResult wr = compute_witnesses(g, dist, pi, options);
    ShortestPathForests forests = build_forests(wr.witnesses, dist);
    return ConsistentPaths{std::move(dist), pi, std::move(wr.witnesses), std::move(forests), wr.escalations};
}

struct ConsistencyReport {
    std::size_t pairs_checked = 0;
    // Path missing an edge of G or longer than the distance.
    std::size_t path_violations = 0;
    // Incoming-tree and outgoing-tree walks disagree.
    std::size_t in_out_mismatches = 0;
    std::size_t subpaths_checked = 0;
    std::size_t subpath_violations = 0;
    std::size_t subgraphs_checked = 0;
    std::size_t subgraph_pairs_checked = 0;
    std::size_t subgraph_violations = 0;
    std::size_t hitting_pairs_checked = 0;
    // Pairs with label(w(u, v)) > C M n ln n / ||uv||. Statistical, not a bug.
    std::size_t hitting_set_violations = 0;

    bool consistent() const noexcept {
        return path_violations == 0 && in_out_mismatches == 0 && subpath_violations == 0 &&
               subgraph_violations == 0;
    }
};

struct ConsistencyOptions {
    SptOptions spt;
    std::size_t subgraph_samples = 50;
    u64 seed = 1;
};

namespace detail {

inline bool path_in_graph(const WeightedDigraph& g, const std::vector<Vertex>& path, Distance* length = nullptr) {
    Distance total = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!g.has_edge(path[i], path[i + 1])) return false;
        total += g.weight(path[i], path[i + 1]);
    }
    if (length) *length = total;
    return true;
}

}  // namespace detail

// Checks every path against G and the distances, subpath consistency for
// every pair of positions on every path, and subgraph consistency by
// rerunning the pipeline with the same permutation on random subgraphs that
// keep a chosen path.
inline ConsistencyReport verify_consistency(const WeightedDigraph& g, const ConsistentPaths& paths,
                                            const ConsistencyOptions& options = {}) {
    const std::size_t n = g.vertex_count();
    ConsistencyReport report;
    std::vector<std::vector<Vertex>> rho(n * n);
    std::vector<std::pair<Vertex, Vertex>> reachable;

    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v) {
            if (paths.dist(u, v) >= kUnreachable) continue;
            ++report.pairs_checked;
            reachable.emplace_back(u, v);
            std::vector<Vertex> p;
            try {
                p = extract_path(paths.forests, u, v);
            } catch (const Error&) {
                ++report.path_violations;
                continue;
            }
            Distance len = 0;
            if (!detail::path_in_graph(g, p, &len) || len != paths.dist(u, v)) ++report.path_violations;
            try {
                if (extract_path_out(paths.forests, u, v) != p) ++report.in_out_mismatches;
            } catch (const Error&) {
                ++report.in_out_mismatches;
            }
            rho[u * n + v] = std::move(p);

            if (u != v && paths.witnesses.hop_class(u, v) == HopClass::kMany) {
                ++report.hitting_pairs_checked;
                const Vertex w = paths.witnesses.at(u, v);
                const double bound =
                    hitting_bound(options.spt.hitting_c, g.max_weight(), n, static_cast<double>(paths.dist(u, v)));
                if (w == kNoVertex || static_cast<double>(paths.pi.label(w)) > bound) ++report.hitting_set_violations;
            }
        }

    // Every subpath of rho(u, v) is rho of its endpoints.
    for (const auto& [u, v] : reachable) {
        const auto& p = rho[u * n + v];
        if (p.empty()) continue;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i; j < p.size(); ++j) {
                if (i == 0 && j + 1 == p.size()) continue;
                ++report.subpaths_checked;
                const auto& q = rho[p[i] * n + p[j]];
                if (q.size() != j - i + 1 || !std::equal(q.begin(), q.end(), p.begin() + static_cast<std::ptrdiff_t>(i)))
                    ++report.subpath_violations;
            }
    }

    // A subgraph containing rho_G(x, y) has rho_G'(x, y) = rho_G(x, y).
    std::vector<std::pair<Vertex, Vertex>> candidates;
    for (const auto& [u, v] : reachable)
        if (u != v && !rho[u * n + v].empty()) candidates.emplace_back(u, v);
    if (candidates.empty()) return report;

    std::mt19937_64 rng(options.seed);
    for (std::size_t sample = 0; sample < options.subgraph_samples; ++sample) {
        const auto [u, v] = candidates[uniform_below(rng, candidates.size())];
        const auto& keep = rho[u * n + v];
        std::vector<bool> on_path(n * n, false);
        for (std::size_t i = 0; i + 1 < keep.size(); ++i) on_path[keep[i] * n + keep[i + 1]] = true;

        WeightedDigraph sub(n, g.max_weight());
        for (const Edge& e : g.edges())
            if (on_path[e.from * n + e.to] || uniform_below(rng, 2) == 0) sub.add_edge(e.from, e.to, e.weight);

        const ConsistentPaths sub_paths = build_consistent_paths(sub, paths.pi, options.spt);
        ++report.subgraphs_checked;
        for (const auto& [x, y] : reachable) {
            const auto& p = rho[x * n + y];
            if (p.empty() || !detail::path_in_graph(sub, p)) continue;
            ++report.subgraph_pairs_checked;
            std::vector<Vertex> q;
            try {
                q = extract_path(sub_paths.forests, x, y);
            } catch (const Error&) {
                ++report.subgraph_violations;
                continue;
            }
            if (q != p) ++report.subgraph_violations;
        }
    }
    return report;
}

}  // namespace failsafe
