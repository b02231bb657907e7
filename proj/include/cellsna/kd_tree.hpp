#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "cellsna/core.hpp"

namespace cellsna {

struct Neighbor {
    double d2 = 0.0;  // squared Euclidean distance
    std::uint32_t id = 0;

    // Candidate ordering: nearer first, ties by lower id. Used everywhere a
    // k-th neighbor tie needs breaking.
    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        return a.id < b.id;
    }
};

// Static 2-d tree over a point set. Queries are exact: results match a
// brute-force scan of all squared distances, including the (d2, id) tie rule.
class KdTree2D {
public:
    explicit KdTree2D(std::span<const Point2> points) : points_(points.begin(), points.end()) {
        ids_.resize(points_.size());
        for (std::uint32_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
        nodes_.reserve(points_.size());
        root_ = build(0, static_cast<std::uint32_t>(ids_.size()), 0);
    }

    // k nearest neighbors of q with squared distance strictly below r2,
    // excluding exclude_id. Output sorted ascending by (d2, id).
    std::vector<Neighbor> knn_within(const Point2& q, std::uint32_t exclude_id, double r2,
                                     std::uint32_t k) const {
        std::vector<Neighbor> heap;  // max-heap on (d2, id): worst candidate at front
        heap.reserve(k + 1);
        if (k > 0 && root_ != kNull) search(root_, q, exclude_id, r2, k, heap);
        std::sort_heap(heap.begin(), heap.end());
        return heap;
    }

private:
    static constexpr std::uint32_t kNull = 0xffffffffu;

    struct Node {
        std::uint32_t point_id;
        std::uint32_t left = kNull;
        std::uint32_t right = kNull;
        std::uint8_t axis = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::uint8_t axis) {
        if (begin >= end) return kNull;
        const std::uint32_t mid = begin + (end - begin) / 2;
        auto coord_less = [&](std::uint32_t a, std::uint32_t b) {
            const double ca = axis == 0 ? points_[a].x : points_[a].y;
            const double cb = axis == 0 ? points_[b].x : points_[b].y;
            if (ca != cb) return ca < cb;
            return a < b;
        };
        std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end, coord_less);
        const std::uint32_t node_index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(Node{ids_[mid], kNull, kNull, axis});
        const std::uint8_t next = axis ^ 1;
        const std::uint32_t left = build(begin, mid, next);
        const std::uint32_t right = build(mid + 1, end, next);
        nodes_[node_index].left = left;
        nodes_[node_index].right = right;
        return node_index;
    }

    void search(std::uint32_t node_index, const Point2& q, std::uint32_t exclude_id, double r2,
                std::uint32_t k, std::vector<Neighbor>& heap) const {
        const Node& node = nodes_[node_index];
        const Point2& p = points_[node.point_id];
        if (node.point_id != exclude_id) {
            const double d2 = squared_distance(q, p);
            if (d2 < r2) offer(heap, k, Neighbor{d2, node.point_id});
        }
        const double delta = node.axis == 0 ? q.x - p.x : q.y - p.y;
        const std::uint32_t near_child = delta < 0.0 ? node.left : node.right;
        const std::uint32_t far_child = delta < 0.0 ? node.right : node.left;
        if (near_child != kNull) search(near_child, q, exclude_id, r2, k, heap);
        if (far_child != kNull) {
            const double plane_d2 = delta * delta;
            // The far side can only matter while plane_d2 beats the radius and
            // the current k-th distance; on an exact tie a lower id may still
            // win, so prune on strictly-greater only.
            if (plane_d2 < r2 && (heap.size() < k || plane_d2 <= heap.front().d2)) {
                search(far_child, q, exclude_id, r2, k, heap);
            }
        }
    }

    static void offer(std::vector<Neighbor>& heap, std::uint32_t k, Neighbor cand) {
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
    }

    std::vector<Point2> points_;
    std::vector<std::uint32_t> ids_;
    std::vector<Node> nodes_;
    std::uint32_t root_ = kNull;
};

}  // namespace cellsna
