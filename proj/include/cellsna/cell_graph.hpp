#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"

namespace cellsna {

enum class Symmetrization { kUnion, kMutual };

inline std::string to_string(Symmetrization s) {
    return s == Symmetrization::kUnion ? "union" : "mutual";
}

inline Symmetrization symmetrization_from_string(const std::string& s) {
    if (s == "union") return Symmetrization::kUnion;
    if (s == "mutual") return Symmetrization::kMutual;
    fail("parse", "unknown symmetrization '" + s + "'");
}

struct BuildParams {
    double radius = 100.0;
    std::uint32_t k = 5;
    Symmetrization symmetrization = Symmetrization::kUnion;
};

// Undirected cell graph in compressed sparse adjacency form. Immutable after
// construction; neighbor lists are ascending, self-loop and duplicate free,
// and symmetric. Sharing a const instance across threads is safe.
class CellGraph {
public:
    CellGraph(std::vector<std::uint32_t> neighbor_offsets, std::vector<std::uint32_t> neighbor_ids,
              BuildParams params)
        : offsets_(std::move(neighbor_offsets)), ids_(std::move(neighbor_ids)), params_(params) {
        check_structure();
        edge_count_ = ids_.size() / 2;
    }

    // Convenience constructor from an unordered undirected edge list.
    static CellGraph from_edges(std::uint32_t n_nodes,
                                const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                                BuildParams params = {}) {
        std::vector<std::vector<std::uint32_t>> adj(n_nodes);
        for (const auto& [a, b] : edges) {
            if (a >= n_nodes || b >= n_nodes) fail("graph", "edge endpoint out of range");
            if (a == b) fail("graph", "self-loop rejected");
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        std::vector<std::uint32_t> offsets(n_nodes + 1, 0);
        std::vector<std::uint32_t> ids;
        for (std::uint32_t v = 0; v < n_nodes; ++v) {
            auto& row = adj[v];
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            offsets[v + 1] = offsets[v] + static_cast<std::uint32_t>(row.size());
            ids.insert(ids.end(), row.begin(), row.end());
        }
        return CellGraph(std::move(offsets), std::move(ids), params);
    }

    std::uint32_t n_nodes() const { return static_cast<std::uint32_t>(offsets_.size() - 1); }
    std::uint64_t edge_count() const { return edge_count_; }
    const BuildParams& build_params() const { return params_; }

    std::uint32_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {ids_.data() + offsets_[v], ids_.data() + offsets_[v + 1]};
    }

    bool has_edge(std::uint32_t a, std::uint32_t b) const {
        const auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    const std::vector<std::uint32_t>& neighbor_offsets() const { return offsets_; }
    const std::vector<std::uint32_t>& neighbor_ids() const { return ids_; }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"format", "cellsna.graph.v1"},
            {"n_nodes", n_nodes()},
            {"edge_count", edge_count_},
            {"build_params",
             {{"radius", params_.radius}, {"k", params_.k}, {"symmetrization", to_string(params_.symmetrization)}}},
            {"neighbor_offsets", offsets_},
            {"neighbor_ids", ids_},
        };
    }

    static CellGraph from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "cellsna.graph.v1") fail("parse", "not a cellsna graph file");
        BuildParams params;
        params.radius = j.at("build_params").at("radius").get<double>();
        params.k = j.at("build_params").at("k").get<std::uint32_t>();
        params.symmetrization =
            symmetrization_from_string(j.at("build_params").at("symmetrization").get<std::string>());
        CellGraph g(j.at("neighbor_offsets").get<std::vector<std::uint32_t>>(),
                    j.at("neighbor_ids").get<std::vector<std::uint32_t>>(), params);
        if (g.n_nodes() != j.at("n_nodes").get<std::uint32_t>() ||
            g.edge_count() != j.at("edge_count").get<std::uint64_t>()) {
            fail("parse", "graph file counts do not match adjacency");
        }
        return g;
    }

    void save(const std::string& path) const { write_text_file(path, to_json().dump(1) + "\n"); }

    static CellGraph load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    }

private:
    void check_structure() const {
        if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != ids_.size()) {
            fail("graph", "malformed adjacency offsets");
        }
        if (ids_.size() % 2 != 0) fail("graph", "undirected adjacency needs an even arc count");
        const std::uint32_t n = n_nodes();
        for (std::uint32_t v = 0; v < n; ++v) {
            if (offsets_[v + 1] < offsets_[v]) fail("graph", "offsets not monotone");
            const auto nb = neighbors(v);
            for (std::size_t i = 0; i < nb.size(); ++i) {
                if (nb[i] >= n) fail("graph", "neighbor id out of range");
                if (nb[i] == v) fail("graph", "self-loop rejected");
                if (i > 0 && nb[i] <= nb[i - 1]) fail("graph", "neighbor list not strictly ascending");
            }
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            for (const std::uint32_t u : neighbors(v)) {
                if (!has_edge(u, v)) fail("graph", "adjacency not symmetric");
            }
        }
    }

    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> ids_;
    BuildParams params_;
    std::uint64_t edge_count_ = 0;
};

}  // namespace cellsna
