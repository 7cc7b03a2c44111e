#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <variant>

#include "failsafe/algebraic_dso.hpp"
#include "failsafe/consistent_spt.hpp"
#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"
#include "failsafe/graph.hpp"

namespace failsafe {

inline constexpr double kDefaultAlpha = 0.420645;

struct FullDsoOptions {
    double alpha = kDefaultAlpha;
    // Overrides the radius derived from alpha.
    std::optional<std::size_t> radius;
    u64 seed = 1;
    u64 prime = kGoldilocksPrime;
    SptOptions spt;
    // Memoized fallback answers; 0 disables the cache.
    std::size_t cache_capacity = 4096;
};

// ceil(M n^alpha), at least 1.
inline std::size_t radius_for(std::size_t n, int max_weight, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("radius_for: alpha must lie in [0, 1]");
    const double r = std::ceil(max_weight * std::pow(static_cast<double>(n), alpha) - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

// Exact replacement distances: the truncated core answers everything below
// r, anything else goes to Dijkstra on G - f.
class FullDso {
public:
    static FullDso build(const WeightedDigraph& g, const FullDsoOptions& options = {}) {
        const std::size_t r = options.radius ? *options.radius : radius_for(g.vertex_count(), g.max_weight(), options.alpha);
        TruncatedDso core = TruncatedDso::preprocess(g, r, options.seed, PrimeField(options.prime));
        ConsistentPaths paths = build_consistent_paths(g, Permutation::random(g.vertex_count(), options.seed), options.spt);
        return FullDso(std::move(core), std::move(paths), options);
    }

    std::size_t radius() const noexcept { return core_.radius(); }
    double alpha() const noexcept { return alpha_; }
    const TruncatedDso& core() const noexcept { return core_; }
    const WeightedDigraph& graph() const noexcept { return core_.graph(); }
    const DistanceMatrix& distances() const noexcept { return paths_.dist; }
    const ConsistentPaths& paths() const noexcept { return paths_; }

    // ||uv <> f||, kUnreachable when v cannot be reached.
    Distance query(Vertex u, Vertex v, const Failure& f) const {
        const std::size_t d = core_.query(u, v, f);
        if (d < radius()) {
            ++state_->core_count;
            return static_cast<Distance>(d);
        }
        // Every finite distance is at most (n - 1) M, so a clipped answer
        // beyond that means unreachable.
        const auto longest = static_cast<std::size_t>(graph().vertex_count() - 1) * graph().max_weight();
        if (radius() > longest) {
            ++state_->core_count;
            return kUnreachable;
        }
        return cached_fallback(u, v, f);
    }

    // Dijkstra on G - f; no counters, no cache.
    Distance fallback(Vertex u, Vertex v, const Failure& f) const {
        validate_query(graph(), u, v, f);
        return replacement_distance(graph(), u, v, f);
    }

    std::size_t core_count() const noexcept { return state_->core_count.load(); }
    std::size_t fallback_count() const noexcept { return state_->fallback_count.load(); }
    void reset_counters() const noexcept {
        state_->core_count = 0;
        state_->fallback_count = 0;
    }

private:
    using CacheKey = std::tuple<Vertex, Vertex, int, Vertex, Vertex>;

    struct State {
        std::atomic<std::size_t> core_count{0};
        std::atomic<std::size_t> fallback_count{0};
        std::mutex mutex;
        std::map<CacheKey, Distance> cache;
    };

    FullDso(TruncatedDso core, ConsistentPaths paths, const FullDsoOptions& options)
        : core_(std::move(core)),
          paths_(std::move(paths)),
          alpha_(options.alpha),
          cache_capacity_(options.cache_capacity),
          state_(std::make_unique<State>()) {}

    static CacheKey key(Vertex u, Vertex v, const Failure& f) {
        if (const auto* e = std::get_if<EdgeFailure>(&f)) return {u, v, 0, e->from, e->to};
        return {u, v, 1, std::get<VertexFailure>(f).vertex, 0};
    }

    Distance cached_fallback(Vertex u, Vertex v, const Failure& f) const {
        ++state_->fallback_count;
        if (cache_capacity_ == 0) return fallback(u, v, f);
        const CacheKey k = key(u, v, f);
        {
            std::lock_guard lock(state_->mutex);
            if (auto it = state_->cache.find(k); it != state_->cache.end()) return it->second;
        }
        const Distance d = fallback(u, v, f);
        std::lock_guard lock(state_->mutex);
        if (state_->cache.size() < cache_capacity_) state_->cache.emplace(k, d);
        return d;
    }

    TruncatedDso core_;
    ConsistentPaths paths_;
    double alpha_;
    std::size_t cache_capacity_;
    std::unique_ptr<State> state_;
};

}  // namespace failsafe
