#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/cell_graph.hpp"
#include "cellsna/measure_table.hpp"
#include "cellsna/parallel.hpp"
#include "cellsna/random.hpp"

// The seven per-node social-network measures. Shortest-path measures
// (closeness, betweenness) run exact on small graphs and switch to seeded
// pivot sampling above a node-count threshold; both modes are deterministic
// for a fixed rng_seed and independent of the worker count (fixed source
// blocks, block-ordered reduction).

namespace cellsna {

enum class PathMode { kAuto, kExact, kPivots };

inline std::string to_string(PathMode m) {
    switch (m) {
        case PathMode::kAuto: return "auto";
        case PathMode::kExact: return "exact";
        default: return "pivots";
    }
}

inline PathMode path_mode_from_string(const std::string& s) {
    if (s == "auto") return PathMode::kAuto;
    if (s == "exact") return PathMode::kExact;
    if (s == "pivots") return PathMode::kPivots;
    fail("parse", "unknown path mode '" + s + "'");
}

enum class AlphaRule { kFixed, kSpectralFraction };

struct MeasureConfig {
    double evc_tolerance = 1e-6;
    std::uint32_t evc_max_iterations = 1000;

    AlphaRule katz_alpha_rule = AlphaRule::kSpectralFraction;
    double katz_alpha = 0.1;             // used by the fixed rule
    double katz_spectral_fraction = 0.9; // alpha = fraction / lambda_max
    double katz_alpha_cap = 0.1;
    double katz_beta = 1.0;

    PathMode betweenness_mode = PathMode::kAuto;
    std::uint32_t betweenness_pivots = 256;
    PathMode closeness_mode = PathMode::kAuto;
    std::uint32_t closeness_pivots = 256;
    std::uint32_t auto_exact_threshold = 20000;

    bool bc_normalized = true;
    std::uint64_t rng_seed = 0;
    unsigned workers = 1;

    void validate() const {
        if (!(evc_tolerance > 0.0)) fail("config", "evc_tolerance must be > 0");
        if (evc_max_iterations < 1) fail("config", "evc_max_iterations must be >= 1");
        if (betweenness_pivots < 1 || closeness_pivots < 1) fail("config", "pivot count must be >= 1");
        if (!(katz_beta > 0.0)) fail("config", "katz_beta must be > 0");
        if (katz_alpha_rule == AlphaRule::kFixed && !(katz_alpha > 0.0)) {
            fail("config", "fixed katz_alpha must be > 0");
        }
        if (katz_alpha_rule == AlphaRule::kSpectralFraction &&
            (!(katz_spectral_fraction > 0.0) || katz_spectral_fraction >= 1.0)) {
            fail("config", "katz_spectral_fraction must lie in (0, 1)");
        }
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"evc_tolerance", evc_tolerance},
            {"evc_max_iterations", evc_max_iterations},
            {"katz_alpha_rule", katz_alpha_rule == AlphaRule::kFixed ? "fixed" : "spectral_fraction"},
            {"katz_alpha", katz_alpha},
            {"katz_spectral_fraction", katz_spectral_fraction},
            {"katz_alpha_cap", katz_alpha_cap},
            {"katz_beta", katz_beta},
            {"betweenness_mode", to_string(betweenness_mode)},
            {"betweenness_pivots", betweenness_pivots},
            {"closeness_mode", to_string(closeness_mode)},
            {"closeness_pivots", closeness_pivots},
            {"auto_exact_threshold", auto_exact_threshold},
            {"bc_normalized", bc_normalized},
            {"rng_seed", rng_seed},
        };
    }

    static MeasureConfig from_json(const nlohmann::json& j) {
        MeasureConfig cfg;
        cfg.evc_tolerance = j.value("evc_tolerance", cfg.evc_tolerance);
        cfg.evc_max_iterations = j.value("evc_max_iterations", cfg.evc_max_iterations);
        if (j.contains("katz_alpha_rule")) {
            const std::string rule = j.at("katz_alpha_rule").get<std::string>();
            if (rule == "fixed") cfg.katz_alpha_rule = AlphaRule::kFixed;
            else if (rule == "spectral_fraction") cfg.katz_alpha_rule = AlphaRule::kSpectralFraction;
            else fail("parse", "unknown katz_alpha_rule '" + rule + "'");
        }
        cfg.katz_alpha = j.value("katz_alpha", cfg.katz_alpha);
        cfg.katz_spectral_fraction = j.value("katz_spectral_fraction", cfg.katz_spectral_fraction);
        cfg.katz_alpha_cap = j.value("katz_alpha_cap", cfg.katz_alpha_cap);
        cfg.katz_beta = j.value("katz_beta", cfg.katz_beta);
        if (j.contains("betweenness_mode")) cfg.betweenness_mode = path_mode_from_string(j.at("betweenness_mode"));
        cfg.betweenness_pivots = j.value("betweenness_pivots", cfg.betweenness_pivots);
        if (j.contains("closeness_mode")) cfg.closeness_mode = path_mode_from_string(j.at("closeness_mode"));
        cfg.closeness_pivots = j.value("closeness_pivots", cfg.closeness_pivots);
        cfg.auto_exact_threshold = j.value("auto_exact_threshold", cfg.auto_exact_threshold);
        cfg.bc_normalized = j.value("bc_normalized", cfg.bc_normalized);
        cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
        cfg.validate();
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Traversal helpers

struct ComponentInfo {
    std::vector<std::uint32_t> comp_id;    // per node
    std::vector<std::uint32_t> comp_size;  // per component
};

inline ComponentInfo connected_components(const CellGraph& g) {
    const std::uint32_t n = g.n_nodes();
    ComponentInfo info;
    info.comp_id.assign(n, 0xffffffffu);
    std::vector<std::uint32_t> queue;
    queue.reserve(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        if (info.comp_id[s] != 0xffffffffu) continue;
        const std::uint32_t c = static_cast<std::uint32_t>(info.comp_size.size());
        info.comp_id[s] = c;
        queue.clear();
        queue.push_back(s);
        std::uint32_t members = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::uint32_t v = queue[head];
            ++members;
            for (const std::uint32_t u : g.neighbors(v)) {
                if (info.comp_id[u] == 0xffffffffu) {
                    info.comp_id[u] = c;
                    queue.push_back(u);
                }
            }
        }
        info.comp_size.push_back(members);
    }
    return info;
}

namespace detail {

// BFS from source into preallocated buffers. dist must be n entries of -1 on
// entry and is restored to -1 before returning. order receives visited nodes
// in non-decreasing distance.
inline void bfs_order(const CellGraph& g, std::uint32_t source, std::vector<std::int32_t>& dist,
                      std::vector<std::uint32_t>& order) {
    order.clear();
    dist[source] = 0;
    order.push_back(source);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::uint32_t v = order[head];
        const std::int32_t dv = dist[v];
        for (const std::uint32_t u : g.neighbors(v)) {
            if (dist[u] < 0) {
                dist[u] = dv + 1;
                order.push_back(u);
            }
        }
    }
}

inline void bfs_reset(std::vector<std::int32_t>& dist, const std::vector<std::uint32_t>& order) {
    for (const std::uint32_t v : order) dist[v] = -1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Degree measures

inline std::vector<std::uint32_t> node_degree(const CellGraph& g) {
    std::vector<std::uint32_t> deg(g.n_nodes());
    for (std::uint32_t v = 0; v < g.n_nodes(); ++v) deg[v] = g.degree(v);
    return deg;
}

// DC(v) = deg(v) / (N - 1).
inline std::vector<double> degree_centrality(const CellGraph& g) {
    const std::uint32_t n = g.n_nodes();
    if (n < 2) fail("degenerate graph", "degree centrality needs at least 2 nodes");
    std::vector<double> dc(n);
    const double denom = static_cast<double>(n - 1);
    for (std::uint32_t v = 0; v < n; ++v) dc[v] = static_cast<double>(g.degree(v)) / denom;
    return dc;
}

// CCo(v) = 2 Tri(v) / (deg(v)(deg(v)-1)); nodes of degree < 2 get 0.
inline std::vector<double> clustering_coefficient(const CellGraph& g, unsigned workers = 1) {
    const std::uint32_t n = g.n_nodes();
    std::vector<double> cco(n, 0.0);
    parallel_blocks(n, 512, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> mark(n, 0xffffffffu);
        for (std::size_t vi = begin; vi < end; ++vi) {
            const std::uint32_t v = static_cast<std::uint32_t>(vi);
            const std::uint32_t deg = g.degree(v);
            if (deg < 2) continue;
            for (const std::uint32_t u : g.neighbors(v)) mark[u] = v;
            std::uint64_t links = 0;  // counts each triangle through v twice
            for (const std::uint32_t u : g.neighbors(v)) {
                for (const std::uint32_t w : g.neighbors(u)) {
                    if (mark[w] == v && w != v) ++links;
                }
            }
            cco[vi] = static_cast<double>(links) /
                      (static_cast<double>(deg) * static_cast<double>(deg - 1));
        }
    });
    return cco;
}

// ---------------------------------------------------------------------------
// Closeness centrality
//
// Exact: CC(v) = (R / sum_d) * (R / (N-1)) with R the number of other nodes
// reachable from v — the connectivity-corrected form of (N-1)/sum_d, which
// stays finite on disconnected graphs. Pivot mode estimates sum_d from the
// sampled sources that land in v's component, rescaled by R/count.

inline std::vector<double> closeness_centrality(const CellGraph& g, const MeasureConfig& cfg) {
    cfg.validate();
    const std::uint32_t n = g.n_nodes();
    std::vector<double> cc(n, 0.0);
    if (n == 0) return cc;
    const ComponentInfo comps = connected_components(g);
    const double n_minus_1 = static_cast<double>(n > 1 ? n - 1 : 1);

    auto finish = [&](std::uint32_t v, double sum_d) {
        const std::uint32_t reach = comps.comp_size[comps.comp_id[v]] - 1;
        if (reach == 0 || sum_d <= 0.0) {
            cc[v] = 0.0;
            return;
        }
        const double r = static_cast<double>(reach);
        cc[v] = (r / sum_d) * (r / n_minus_1);
    };

    const bool exact = cfg.closeness_mode == PathMode::kExact ||
                       (cfg.closeness_mode == PathMode::kAuto && n <= cfg.auto_exact_threshold) ||
                       cfg.closeness_pivots >= n;

    if (exact) {
        parallel_blocks(n, 64, cfg.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<std::int32_t> dist(n, -1);
            std::vector<std::uint32_t> order;
            order.reserve(n);
            for (std::size_t v = begin; v < end; ++v) {
                detail::bfs_order(g, static_cast<std::uint32_t>(v), dist, order);
                std::int64_t sum_d = 0;
                for (const std::uint32_t u : order) sum_d += dist[u];
                detail::bfs_reset(dist, order);
                finish(static_cast<std::uint32_t>(v), static_cast<double>(sum_d));
            }
        });
        return cc;
    }

    // Pivot mode: distance sums against sampled sources, block-accumulated.
    const std::uint32_t m = std::min(cfg.closeness_pivots, n);
    Rng rng(derive_seed(cfg.rng_seed, 0x27c));
    const std::vector<std::uint32_t> pivots = rng.sample_without_replacement(n, m);

    constexpr std::size_t kBlock = 16;
    const std::size_t n_blocks = (pivots.size() + kBlock - 1) / kBlock;
    std::vector<std::vector<std::int64_t>> block_sum(n_blocks);
    std::vector<std::vector<std::uint32_t>> block_cnt(n_blocks);
    parallel_blocks(pivots.size(), kBlock, cfg.workers,
                    [&](std::size_t b, std::size_t begin, std::size_t end) {
                        auto& sums = block_sum[b];
                        auto& cnts = block_cnt[b];
                        sums.assign(n, 0);
                        cnts.assign(n, 0);
                        std::vector<std::int32_t> dist(n, -1);
                        std::vector<std::uint32_t> order;
                        order.reserve(n);
                        for (std::size_t pi = begin; pi < end; ++pi) {
                            const std::uint32_t p = pivots[pi];
                            detail::bfs_order(g, p, dist, order);
                            for (const std::uint32_t u : order) {
                                if (u == p) continue;
                                sums[u] += dist[u];
                                cnts[u] += 1;
                            }
                            detail::bfs_reset(dist, order);
                        }
                    });

    std::vector<std::int64_t> sum(n, 0);
    std::vector<std::uint32_t> cnt(n, 0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::uint32_t v = 0; v < n; ++v) {
            sum[v] += block_sum[b][v];
            cnt[v] += block_cnt[b][v];
        }
    }

    // Nodes no pivot reached fall back to an exact traversal.
    std::vector<std::uint32_t> fallback;
    for (std::uint32_t v = 0; v < n; ++v) {
        const std::uint32_t reach = comps.comp_size[comps.comp_id[v]] - 1;
        if (reach == 0) {
            cc[v] = 0.0;
        } else if (cnt[v] == 0) {
            fallback.push_back(v);
        } else {
            const double est = static_cast<double>(sum[v]) * static_cast<double>(reach) /
                               static_cast<double>(cnt[v]);
            finish(v, est);
        }
    }
    if (!fallback.empty()) {
        parallel_blocks(fallback.size(), 64, cfg.workers,
                        [&](std::size_t, std::size_t begin, std::size_t end) {
                            std::vector<std::int32_t> dist(n, -1);
                            std::vector<std::uint32_t> order;
                            for (std::size_t i = begin; i < end; ++i) {
                                const std::uint32_t v = fallback[i];
                                detail::bfs_order(g, v, dist, order);
                                std::int64_t sum_d = 0;
                                for (const std::uint32_t u : order) sum_d += dist[u];
                                detail::bfs_reset(dist, order);
                                finish(v, static_cast<double>(sum_d));
                            }
                        });
    }
    return cc;
}

// ---------------------------------------------------------------------------
// Betweenness centrality (Brandes). The exact mode is the pivot machinery run
// over every source with scale 1, so pivots(m = N) is bit-identical to exact.
// Each unordered pair is counted once (the raw two-directional accumulation
// is halved); normalization divides by (N-1)(N-2)/2.

namespace detail {

inline void brandes_accumulate(const CellGraph& g, std::uint32_t source, std::vector<double>& acc,
                               std::vector<std::int32_t>& dist, std::vector<double>& sigma,
                               std::vector<double>& delta, std::vector<std::uint32_t>& order) {
    order.clear();
    dist[source] = 0;
    sigma[source] = 1.0;
    order.push_back(source);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::uint32_t v = order[head];
        const std::int32_t dv = dist[v];
        for (const std::uint32_t u : g.neighbors(v)) {
            if (dist[u] < 0) {
                dist[u] = dv + 1;
                order.push_back(u);
            }
            if (dist[u] == dv + 1) sigma[u] += sigma[v];
        }
    }
    for (std::size_t i = order.size(); i-- > 0;) {
        const std::uint32_t w = order[i];
        const double coeff = (1.0 + delta[w]) / sigma[w];
        for (const std::uint32_t v : g.neighbors(w)) {
            if (dist[v] == dist[w] - 1) delta[v] += sigma[v] * coeff;
        }
        if (w != source) acc[w] += delta[w];
    }
    for (const std::uint32_t v : order) {
        dist[v] = -1;
        sigma[v] = 0.0;
        delta[v] = 0.0;
    }
}

}  // namespace detail

inline std::vector<double> betweenness_centrality(const CellGraph& g, const MeasureConfig& cfg) {
    cfg.validate();
    const std::uint32_t n = g.n_nodes();
    std::vector<double> bc(n, 0.0);
    if (n < 3) return bc;

    const bool exact = cfg.betweenness_mode == PathMode::kExact ||
                       (cfg.betweenness_mode == PathMode::kAuto && n <= cfg.auto_exact_threshold) ||
                       cfg.betweenness_pivots >= n;

    std::vector<std::uint32_t> sources;
    double scale = 1.0;
    if (exact) {
        sources.resize(n);
        for (std::uint32_t v = 0; v < n; ++v) sources[v] = v;
    } else {
        const std::uint32_t m = std::min(cfg.betweenness_pivots, n);
        Rng rng(derive_seed(cfg.rng_seed, 0xbce));
        sources = rng.sample_without_replacement(n, m);
        scale = static_cast<double>(n) / static_cast<double>(m);
    }

    constexpr std::size_t kBlock = 64;
    const std::size_t n_blocks = (sources.size() + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> block_acc(n_blocks);
    parallel_blocks(sources.size(), kBlock, cfg.workers,
                    [&](std::size_t b, std::size_t begin, std::size_t end) {
                        auto& acc = block_acc[b];
                        acc.assign(n, 0.0);
                        std::vector<std::int32_t> dist(n, -1);
                        std::vector<double> sigma(n, 0.0);
                        std::vector<double> delta(n, 0.0);
                        std::vector<std::uint32_t> order;
                        order.reserve(n);
                        for (std::size_t s = begin; s < end; ++s) {
                            detail::brandes_accumulate(g, sources[s], acc, dist, sigma, delta, order);
                        }
                    });
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::uint32_t v = 0; v < n; ++v) bc[v] += block_acc[b][v];
    }

    double factor = scale * 0.5;  // halve: unordered pairs counted once
    if (cfg.bc_normalized) {
        factor /= static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
    }
    for (double& v : bc) v *= factor;
    return bc;
}

// ---------------------------------------------------------------------------
// Eigenvector centrality. Shifted power iteration (I + A keeps bipartite
// components from oscillating) runs per connected component from the uniform
// positive vector; the returned vector is supported on the component(s)
// whose eigenvalue estimate reaches the global maximum, which is where the
// dominant eigenvector of a disconnected adjacency lives. Output is
// L2-normalized and satisfies ||Ax - lambda x||_inf <= 10 tol lambda.

struct EigenvectorResult {
    std::vector<double> scores;
    double eigenvalue = 0.0;
};

inline EigenvectorResult eigenvector_centrality(const CellGraph& g, const MeasureConfig& cfg) {
    cfg.validate();
    if (g.edge_count() == 0) fail("eigenvector undefined", "eigenvector centrality needs at least one edge");
    const std::uint32_t n = g.n_nodes();
    const ComponentInfo comps = connected_components(g);
    const std::uint32_t n_comps = static_cast<std::uint32_t>(comps.comp_size.size());

    std::vector<std::vector<std::uint32_t>> members(n_comps);
    for (std::uint32_t c = 0; c < n_comps; ++c) members[c].reserve(comps.comp_size[c]);
    for (std::uint32_t v = 0; v < n; ++v) members[comps.comp_id[v]].push_back(v);

    // node id -> position inside its component's member list
    std::vector<std::uint32_t> local_pos(n);
    for (std::uint32_t c = 0; c < n_comps; ++c) {
        for (std::uint32_t i = 0; i < members[c].size(); ++i) local_pos[members[c][i]] = i;
    }

    const double tol = cfg.evc_tolerance;
    std::vector<double> comp_lambda(n_comps, 0.0);
    std::vector<std::vector<double>> comp_vec(n_comps);

    parallel_for(n_comps, cfg.workers, [&](std::size_t c) {
        const auto& nodes = members[c];
        const std::uint32_t nc = static_cast<std::uint32_t>(nodes.size());
        if (nc < 2) return;  // isolated node: lambda 0, zero sub-vector

        std::vector<double> x(nc, 1.0 / std::sqrt(static_cast<double>(nc)));
        std::vector<double> y(nc);
        double lambda = 0.0;
        double residual = 0.0;
        bool converged = false;
        for (std::uint32_t iter = 0; iter < cfg.evc_max_iterations; ++iter) {
            for (std::uint32_t i = 0; i < nc; ++i) {
                double acc = x[i];
                for (const std::uint32_t u : g.neighbors(nodes[i])) acc += x[local_pos[u]];
                y[i] = acc;
            }
            // A x = y - x elementwise, so the Rayleigh estimate and the
            // residual of the current iterate cost no extra matvec.
            lambda = 0.0;
            for (std::uint32_t i = 0; i < nc; ++i) lambda += x[i] * (y[i] - x[i]);
            residual = 0.0;
            for (std::uint32_t i = 0; i < nc; ++i) {
                residual = std::max(residual, std::abs((y[i] - x[i]) - lambda * x[i]));
            }
            double norm2 = 0.0;
            for (const double v : y) norm2 += v * v;
            const double inv = 1.0 / std::sqrt(norm2);
            double change = 0.0;
            for (std::uint32_t i = 0; i < nc; ++i) change = std::max(change, std::abs(y[i] * inv - x[i]));
            if (change < tol && lambda > 0.0 && residual <= 4.0 * tol * lambda) {
                converged = true;
                break;  // x is the validated iterate
            }
            for (std::uint32_t i = 0; i < nc; ++i) x[i] = y[i] * inv;
        }
        if (!converged) {
            fail("eigenvector non-convergence",
                 "power iteration did not converge after " + format_u64(cfg.evc_max_iterations) +
                     " iterations (residual " + format_double(residual) + ")");
        }
        comp_lambda[c] = lambda;
        comp_vec[c] = std::move(x);
    });

    double lambda_max = 0.0;
    for (const double l : comp_lambda) lambda_max = std::max(lambda_max, l);
    // Components whose estimate ties the maximum within the tolerance band
    // share the output; ties between isomorphic components stay symmetric.
    std::vector<std::uint32_t> dominant;
    for (std::uint32_t c = 0; c < n_comps; ++c) {
        if (comp_lambda[c] >= lambda_max * (1.0 - 2.0 * tol) && !comp_vec[c].empty()) {
            dominant.push_back(c);
        }
    }
    EigenvectorResult result;
    result.eigenvalue = lambda_max;
    result.scores.assign(n, 0.0);
    const double weight = 1.0 / std::sqrt(static_cast<double>(dominant.size()));
    for (const std::uint32_t c : dominant) {
        const auto& nodes = members[c];
        for (std::uint32_t i = 0; i < nodes.size(); ++i) {
            result.scores[nodes[i]] = comp_vec[c][i] * weight;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Katz centrality: fixed-point iteration of x = alpha A x + beta, valid for
// alpha < 1 / lambda_max. Scores are L2-normalized. Small graphs iterate to
// near machine precision so they agree with a direct linear solve.

struct KatzResult {
    std::vector<double> scores;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda_max = 0.0;
};

inline double resolve_katz_alpha(const MeasureConfig& cfg, double lambda_max) {
    if (cfg.katz_alpha_rule == AlphaRule::kFixed) {
        if (lambda_max > 0.0 && cfg.katz_alpha >= 1.0 / lambda_max) {
            fail("katz divergent alpha", "alpha " + format_double(cfg.katz_alpha) +
                                             " is not below 1/lambda_max = " +
                                             format_double(1.0 / lambda_max));
        }
        return cfg.katz_alpha;
    }
    if (lambda_max <= 0.0) return cfg.katz_alpha_cap;
    return std::min(cfg.katz_alpha_cap, cfg.katz_spectral_fraction / lambda_max);
}

// lambda_max: pass the eigenvector result when already computed; negative
// means "compute internally" (required by the spectral alpha rule and the
// fixed-alpha convergence check).
inline KatzResult katz_centrality(const CellGraph& g, const MeasureConfig& cfg,
                                  double lambda_max = -1.0) {
    cfg.validate();
    const std::uint32_t n = g.n_nodes();
    if (n == 0) fail("empty graph", "katz centrality needs at least one node");
    if (lambda_max < 0.0) {
        lambda_max = g.edge_count() == 0 ? 0.0 : eigenvector_centrality(g, cfg).eigenvalue;
    }
    KatzResult result;
    result.lambda_max = lambda_max;
    result.alpha = resolve_katz_alpha(cfg, lambda_max);
    result.beta = cfg.katz_beta;

    const double tol = n <= 500 ? std::min(cfg.evc_tolerance, 1e-13) : cfg.evc_tolerance;
    std::vector<double> x(n, result.beta);
    std::vector<double> y(n);
    bool converged = false;
    const std::uint32_t max_iters = std::max<std::uint32_t>(cfg.evc_max_iterations, 2000);
    for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
        double change = 0.0;
        for (std::uint32_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (const std::uint32_t u : g.neighbors(v)) acc += x[u];
            y[v] = result.alpha * acc + result.beta;
            change = std::max(change, std::abs(y[v] - x[v]));
        }
        x.swap(y);
        if (change < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) fail("katz non-convergence", "katz fixed point did not converge");

    double norm2 = 0.0;
    for (const double v : x) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : x) v *= inv;
    result.scores = std::move(x);
    return result;
}

// ---------------------------------------------------------------------------

// Computes every measure of one graph. Edgeless graphs keep the pipeline
// alive: eigenvector and katz columns are zeroed and a warning is recorded
// instead of failing.
inline MeasureTable compute_all_measures(const CellGraph& g, const MeasureConfig& cfg,
                                         const std::string& source_id = "") {
    cfg.validate();
    const std::uint32_t n = g.n_nodes();
    if (n < 2) fail("degenerate graph", "measure computation needs at least 2 nodes");

    MeasureTable table;
    const auto deg = node_degree(g);
    table.degree.assign(deg.begin(), deg.end());
    table.clustering = clustering_coefficient(g, cfg.workers);
    table.closeness = closeness_centrality(g, cfg);
    table.degree_centrality = degree_centrality(g);
    table.betweenness = betweenness_centrality(g, cfg);

    MeasureMeta meta;
    meta.source_id = source_id;
    meta.n_nodes = n;
    meta.katz_beta = cfg.katz_beta;
    if (g.edge_count() == 0) {
        table.eigenvector.assign(n, 0.0);
        table.katz.assign(n, 0.0);
        meta.katz_alpha = resolve_katz_alpha(cfg, 0.0);
        meta.evc_eigenvalue = 0.0;
        meta.warnings.push_back("edgeless graph: eigenvector and katz columns zeroed");
    } else {
        EigenvectorResult evc = eigenvector_centrality(g, cfg);
        KatzResult katz = katz_centrality(g, cfg, evc.eigenvalue);
        table.eigenvector = std::move(evc.scores);
        table.katz = std::move(katz.scores);
        meta.evc_eigenvalue = evc.eigenvalue;
        meta.katz_alpha = katz.alpha;
    }
    table.meta.push_back(std::move(meta));
    table.validate();
    return table;
}

}  // namespace cellsna
