#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"

namespace failsafe {

// Vertices are 0-indexed in memory; files use 1-indexed ids.
using Vertex = std::size_t;
using Distance = std::int64_t;

// Distance of an unreachable pair. Strictly greater than n * M for any graph
// this library accepts.
inline constexpr Distance kUnreachable = std::numeric_limits<Distance>::max() / 4;

struct Edge {
    Vertex from;
    Vertex to;
    int weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeFailure {
    Vertex from;
    Vertex to;

    friend bool operator==(const EdgeFailure&, const EdgeFailure&) = default;
};

struct VertexFailure {
    Vertex vertex;

    friend bool operator==(const VertexFailure&, const VertexFailure&) = default;
};

using Failure = std::variant<EdgeFailure, VertexFailure>;

// Directed graph on n vertices with integer weights in [1, M], at most one
// edge per ordered pair and no self-loops.
class WeightedDigraph {
public:
    WeightedDigraph(std::size_t n, int max_weight) : n_(n), max_weight_(max_weight), weights_(n * n, 0), out_(n) {
        if (n == 0) throw ValidationError("graph must have at least one vertex");
        if (max_weight < 1) throw ValidationError("max weight M must be at least 1");
    }

    std::size_t vertex_count() const noexcept { return n_; }
    int max_weight() const noexcept { return max_weight_; }
    std::size_t edge_count() const noexcept { return edge_count_; }

    void add_edge(Vertex u, Vertex v, int w) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u + 1));
        if (w < 1 || w > max_weight_) {
            throw ValidationError("weight " + std::to_string(w) + " of edge " + std::to_string(u + 1) + "->" +
                                  std::to_string(v + 1) + " is outside [1, " + std::to_string(max_weight_) + "]");
        }
        if (weights_[u * n_ + v] != 0) {
            throw ValidationError("duplicate edge " + std::to_string(u + 1) + "->" + std::to_string(v + 1));
        }
        weights_[u * n_ + v] = w;
        out_[u].insert(std::lower_bound(out_[u].begin(), out_[u].end(), v), v);
        ++edge_count_;
    }

    void remove_edge(Vertex u, Vertex v) {
        if (!has_edge(u, v)) {
            throw ValidationError("no edge " + std::to_string(u + 1) + "->" + std::to_string(v + 1));
        }
        weights_[u * n_ + v] = 0;
        out_[u].erase(std::lower_bound(out_[u].begin(), out_[u].end(), v));
        --edge_count_;
    }

    bool has_edge(Vertex u, Vertex v) const noexcept { return u < n_ && v < n_ && weights_[u * n_ + v] != 0; }

    // 0 when there is no edge.
    int weight(Vertex u, Vertex v) const noexcept { return weights_[u * n_ + v]; }

    // Out-neighbours in increasing order.
    const std::vector<Vertex>& successors(Vertex u) const noexcept { return out_[u]; }

    // All edges ordered by (from, to).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (Vertex u = 0; u < n_; ++u)
            for (Vertex v : out_[u]) out.push_back({u, v, weight(u, v)});
        return out;
    }

    WeightedDigraph reversed() const {
        WeightedDigraph r(n_, max_weight_);
        for (const Edge& e : edges()) r.add_edge(e.to, e.from, e.weight);
        return r;
    }

    friend bool operator==(const WeightedDigraph& a, const WeightedDigraph& b) {
        return a.n_ == b.n_ && a.max_weight_ == b.max_weight_ && a.weights_ == b.weights_;
    }

private:
    void check_vertex(Vertex u) const {
        if (u >= n_) throw ValidationError("vertex " + std::to_string(u + 1) + " out of range 1.." + std::to_string(n_));
    }

    std::size_t n_;
    int max_weight_;
    std::vector<int> weights_;
    std::vector<std::vector<Vertex>> out_;
    std::size_t edge_count_ = 0;
};

// n x n table of shortest distances; kUnreachable for unreachable pairs.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, kUnreachable) {
        for (std::size_t i = 0; i < n; ++i) d_[i * n + i] = 0;
    }

    std::size_t size() const noexcept { return n_; }
    Distance operator()(Vertex u, Vertex v) const noexcept { return d_[u * n_ + v]; }
    Distance& operator()(Vertex u, Vertex v) noexcept { return d_[u * n_ + v]; }

    std::span<const Distance> row(Vertex u) const noexcept { return {d_.data() + u * n_, n_}; }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_;
    std::vector<Distance> d_;
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

inline bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Reads exactly `count` integers from a line; nullopt on anything else.
inline std::optional<std::vector<long long>> read_ints(const std::string& line, std::size_t count) {
    std::istringstream in(line);
    std::vector<long long> out;
    long long x;
    while (out.size() < count && in >> x) out.push_back(x);
    if (out.size() != count) return std::nullopt;
    std::string rest;
    if (in >> rest) return std::nullopt;
    if (in.fail() && !in.eof()) return std::nullopt;
    return out;
}

}  // namespace detail

// Text format: first non-comment line "n m M", then m lines "u v w" with
// 1-indexed vertices. Lines starting with '#' are ignored.
inline WeightedDigraph parse_graph(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    std::optional<WeightedDigraph> g;
    std::size_t expected = 0, seen = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::strip_comment(raw);
        if (detail::is_blank(line)) continue;
        if (!g) {
            auto hdr = detail::read_ints(line, 3);
            if (!hdr) throw ParseError(line_no, "expected header 'n m M'");
            const auto [n, m, big_m] = std::tuple((*hdr)[0], (*hdr)[1], (*hdr)[2]);
            if (n < 1 || m < 0 || big_m < 1 || big_m > std::numeric_limits<int>::max()) {
                throw ParseError(line_no, "header values out of range");
            }
            g.emplace(static_cast<std::size_t>(n), static_cast<int>(big_m));
            expected = static_cast<std::size_t>(m);
            continue;
        }
        auto e = detail::read_ints(line, 3);
        if (!e) throw ParseError(line_no, "expected edge 'u v w'");
        if (seen == expected) throw ParseError(line_no, "more edge lines than the header's m");
        const auto [u, v, w] = std::tuple((*e)[0], (*e)[1], (*e)[2]);
        const auto n = static_cast<long long>(g->vertex_count());
        if (u < 1 || u > n || v < 1 || v > n) {
            throw ValidationError("line " + std::to_string(line_no) + ": vertex out of range 1.." + std::to_string(n));
        }
        if (w < std::numeric_limits<int>::min() || w > std::numeric_limits<int>::max()) {
            throw ValidationError("line " + std::to_string(line_no) + ": weight out of range");
        }
        try {
            g->add_edge(static_cast<Vertex>(u - 1), static_cast<Vertex>(v - 1), static_cast<int>(w));
        } catch (const ValidationError& err) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + err.what());
        }
        ++seen;
    }
    if (!g) throw ParseError(line_no, "missing header 'n m M'");
    if (seen != expected) {
        throw ParseError(line_no, "expected " + std::to_string(expected) + " edges, found " + std::to_string(seen));
    }
    return std::move(*g);
}

inline void write_graph(std::ostream& out, const WeightedDigraph& g) {
    out << g.vertex_count() << ' ' << g.edge_count() << ' ' << g.max_weight() << '\n';
    for (const Edge& e : g.edges()) out << e.from + 1 << ' ' << e.to + 1 << ' ' << e.weight << '\n';
}

inline std::vector<Distance> dijkstra(const WeightedDigraph& g, Vertex source) {
    const std::size_t n = g.vertex_count();
    if (source >= n) throw ValidationError("dijkstra: source out of range");
    std::vector<Distance> dist(n, kUnreachable);
    using Item = std::pair<Distance, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0;
    heap.emplace(0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[u]) continue;
        for (Vertex v : g.successors(u)) {
            const Distance nd = d + g.weight(u, v);
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

// All-pairs distances by one Dijkstra per source.
inline DistanceMatrix apsp_brute(const WeightedDigraph& g) {
    const std::size_t n = g.vertex_count();
    DistanceMatrix d(n);
    for (Vertex u = 0; u < n; ++u) {
        const auto row = dijkstra(g, u);
        for (Vertex v = 0; v < n; ++v) d(u, v) = row[v];
    }
    return d;
}

// Edge failure deletes the edge. Vertex failure deletes the outgoing edges of
// the vertex only: a path that enters it can no longer continue.
inline WeightedDigraph remove_failure(const WeightedDigraph& g, const Failure& f) {
    WeightedDigraph out = g;
    if (const auto* e = std::get_if<EdgeFailure>(&f)) {
        out.remove_edge(e->from, e->to);
    } else {
        const Vertex x = std::get<VertexFailure>(f).vertex;
        if (x >= g.vertex_count()) throw ValidationError("failed vertex out of range");
        const std::vector<Vertex> succ = g.successors(x);
        for (Vertex v : succ) out.remove_edge(x, v);
    }
    return out;
}

inline void validate_query(const WeightedDigraph& g, Vertex u, Vertex v, const Failure& f) {
    const std::size_t n = g.vertex_count();
    if (u >= n || v >= n) throw InvalidQuery("query endpoint out of range");
    if (const auto* e = std::get_if<EdgeFailure>(&f)) {
        if (!g.has_edge(e->from, e->to)) {
            throw InvalidQuery("failed edge " + std::to_string(e->from + 1) + "->" + std::to_string(e->to + 1) +
                               " does not exist");
        }
    } else {
        const Vertex x = std::get<VertexFailure>(f).vertex;
        if (x >= n) throw InvalidQuery("failed vertex out of range");
        if (x == u || x == v) throw InvalidQuery("failed vertex coincides with a query endpoint");
    }
}

// Length of the shortest u -> v path avoiding f, by Dijkstra on G - f.
inline Distance replacement_distance(const WeightedDigraph& g, Vertex u, Vertex v, const Failure& f) {
    validate_query(g, u, v, f);
    return dijkstra(remove_failure(g, f), u)[v];
}

// Each ordered pair (u, v), u != v, carries an edge independently with
// probability `density`; weights are uniform in [1, M].
inline WeightedDigraph random_digraph(std::size_t n, int max_weight, double density, std::mt19937_64& rng) {
    WeightedDigraph g(n, max_weight);
    const auto threshold = static_cast<u64>(density * 1'000'000.0);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v) {
            if (u == v) continue;
            if (uniform_below(rng, 1'000'000) < threshold) {
                g.add_edge(u, v, 1 + static_cast<int>(uniform_below(rng, static_cast<u64>(max_weight))));
            }
        }
    return g;
}

}  // namespace failsafe
