#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cellsna/cell_graph.hpp"
#include "cellsna/kd_tree.hpp"
#include "cellsna/parallel.hpp"
#include "cellsna/point_set.hpp"

// Radius-bounded kNN graph construction. A directed candidate edge i->j
// exists iff D(i,j) < r and j is one of the k nearest neighbors of i, with
// ties at the k-th distance broken by lower node id. The undirected graph is
// the union or mutual-intersection symmetrization of the candidates.
// Distances are compared squared (D^2 < r^2), never through sqrt.

namespace cellsna {

struct BuildConfig {
    double radius = 100.0;
    std::uint32_t k = 5;
    Symmetrization symmetrization = Symmetrization::kUnion;

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius)) fail("config", "radius must be > 0");
        if (k < 1) fail("config", "k must be >= 1");
    }
};

namespace detail {

inline void require_buildable(const PointSet& points) {
    if (points.points.empty()) fail("empty graph", "cannot build a graph from an empty point set");
    for (std::size_t i = 0; i < points.points.size(); ++i) {
        if (!std::isfinite(points.points[i].x) || !std::isfinite(points.points[i].y)) {
            fail("invalid coordinate", "non-finite coordinate at node " + format_u64(i));
        }
    }
}

}  // namespace detail

// Radius-bounded kNN query against a prebuilt index.
inline std::vector<Neighbor> knn_within_radius(const KdTree2D& index, const PointSet& points,
                                               std::uint32_t query, double radius, std::uint32_t k) {
    if (query >= points.size()) fail("range", "query node out of range");
    return index.knn_within(points.points[query], query, radius * radius, k);
}

// One-off query; builds a temporary index. Returns (node id, Euclidean
// distance) pairs sorted by (distance, id).
inline std::vector<std::pair<std::uint32_t, double>> knn_within_radius(const PointSet& points,
                                                                       std::uint32_t query,
                                                                       double radius,
                                                                       std::uint32_t k) {
    detail::require_buildable(points);
    KdTree2D index(points.points);
    std::vector<std::pair<std::uint32_t, double>> out;
    for (const Neighbor& nb : knn_within_radius(index, points, query, radius, k)) {
        out.emplace_back(nb.id, std::sqrt(nb.d2));
    }
    return out;
}

inline CellGraph build_graph(const PointSet& points, const BuildConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    detail::require_buildable(points);

    const std::uint32_t n = static_cast<std::uint32_t>(points.size());
    const double r2 = cfg.radius * cfg.radius;
    KdTree2D index(points.points);

    // Directed candidate lists, re-sorted by id for the symmetrization merge.
    std::vector<std::vector<std::uint32_t>> candidates(n);
    parallel_blocks(n, 256, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto found =
                index.knn_within(points.points[i], static_cast<std::uint32_t>(i), r2, cfg.k);
            auto& row = candidates[i];
            row.reserve(found.size());
            for (const Neighbor& nb : found) row.push_back(nb.id);
            std::sort(row.begin(), row.end());
        }
    });

    auto directed = [&](std::uint32_t from, std::uint32_t to) {
        const auto& row = candidates[from];
        return std::binary_search(row.begin(), row.end(), to);
    };

    std::vector<std::vector<std::uint32_t>> adjacency(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (const std::uint32_t j : candidates[i]) {
            const bool keep = cfg.symmetrization == Symmetrization::kUnion
                                  ? true
                                  : directed(j, i);
            if (keep) {
                adjacency[i].push_back(j);
                if (!directed(j, i)) adjacency[j].push_back(i);
            }
        }
    }

    std::vector<std::uint32_t> offsets(n + 1, 0);
    std::vector<std::uint32_t> ids;
    std::uint64_t total = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        auto& row = adjacency[v];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        total += row.size();
        offsets[v + 1] = static_cast<std::uint32_t>(total);
    }
    ids.reserve(total);
    for (std::uint32_t v = 0; v < n; ++v) {
        ids.insert(ids.end(), adjacency[v].begin(), adjacency[v].end());
    }
    return CellGraph(std::move(offsets), std::move(ids),
                     BuildParams{cfg.radius, cfg.k, cfg.symmetrization});
}

}  // namespace cellsna
