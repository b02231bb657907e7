#pragma once

// Brute-force reference implementations used only by tests. Each oracle takes
// a deliberately different route from the library code it checks: betweenness
// counts per-pair shortest paths from all-pairs sigma products, closeness
// uses Floyd-Warshall distances, clustering scans a dense adjacency matrix,
// Katz solves the linear system densely, and the t CDF is integrated
// numerically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cellsna/cell_graph.hpp"
#include "cellsna/core.hpp"
#include "cellsna/random.hpp"

namespace oracles {

constexpr std::int32_t kUnreachable = -1;

// All-pairs hop distances via Floyd-Warshall.
inline std::vector<std::vector<std::int32_t>> floyd_warshall(const cellsna::CellGraph& g) {
    const std::size_t n = g.n_nodes();
    constexpr std::int32_t kInf = std::numeric_limits<std::int32_t>::max() / 4;
    std::vector<std::vector<std::int32_t>> d(n, std::vector<std::int32_t>(n, kInf));
    for (std::size_t v = 0; v < n; ++v) {
        d[v][v] = 0;
        for (const std::uint32_t u : g.neighbors(static_cast<std::uint32_t>(v))) d[v][u] = 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
            }
        }
    }
    for (auto& row : d) {
        for (auto& v : row) {
            if (v >= kInf) v = kUnreachable;
        }
    }
    return d;
}

// Shortest-path counts from one source by BFS layer counting.
inline std::vector<double> path_counts(const cellsna::CellGraph& g, std::uint32_t source) {
    const std::size_t n = g.n_nodes();
    std::vector<std::int32_t> dist(n, -1);
    std::vector<double> sigma(n, 0.0);
    std::vector<std::uint32_t> queue;
    dist[source] = 0;
    sigma[source] = 1.0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint32_t v = queue[head];
        for (const std::uint32_t u : g.neighbors(v)) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
            if (dist[u] == dist[v] + 1) sigma[u] += sigma[v];
        }
    }
    return sigma;
}

// Betweenness from the definition: for every unordered pair {s, t}, the share
// sigma(s,v) * sigma(v,t) / sigma(s,t) for each v on a shortest s-t path.
inline std::vector<double> betweenness(const cellsna::CellGraph& g, bool normalized) {
    const std::size_t n = g.n_nodes();
    std::vector<double> bc(n, 0.0);
    if (n < 3) return bc;
    const auto dist = floyd_warshall(g);
    std::vector<std::vector<double>> sigma(n);
    for (std::size_t s = 0; s < n; ++s) sigma[s] = path_counts(g, static_cast<std::uint32_t>(s));

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            if (dist[s][t] == kUnreachable) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (v == s || v == t) continue;
                if (dist[s][v] == kUnreachable || dist[v][t] == kUnreachable) continue;
                if (dist[s][v] + dist[v][t] != dist[s][t]) continue;
                bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
            }
        }
    }
    if (normalized) {
        const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
        for (double& v : bc) v /= denom;
    }
    return bc;
}

// Reachability-scaled closeness from the Floyd-Warshall matrix.
inline std::vector<double> closeness(const cellsna::CellGraph& g) {
    const std::size_t n = g.n_nodes();
    const auto dist = floyd_warshall(g);
    std::vector<double> cc(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        double sum = 0.0;
        double reach = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v || dist[v][u] == kUnreachable) continue;
            sum += dist[v][u];
            reach += 1.0;
        }
        if (reach > 0.0 && sum > 0.0 && n > 1) {
            cc[v] = (reach / sum) * (reach / static_cast<double>(n - 1));
        }
    }
    return cc;
}

// Clustering coefficient by scanning neighbor pairs against a dense matrix.
inline std::vector<double> clustering(const cellsna::CellGraph& g) {
    const std::size_t n = g.n_nodes();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) {
        for (const std::uint32_t u : g.neighbors(static_cast<std::uint32_t>(v))) adj[v][u] = true;
    }
    std::vector<double> cco(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto nb = g.neighbors(static_cast<std::uint32_t>(v));
        if (nb.size() < 2) continue;
        std::uint64_t triangles = 0;
        for (std::size_t i = 0; i < nb.size(); ++i) {
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                if (adj[nb[i]][nb[j]]) ++triangles;
            }
        }
        const double deg = static_cast<double>(nb.size());
        cco[v] = 2.0 * static_cast<double>(triangles) / (deg * (deg - 1.0));
    }
    return cco;
}

// Dense Gaussian elimination with partial pivoting: solves (I - alpha A) x = beta,
// L2-normalized. Reference for the iterative Katz solver.
inline std::vector<double> katz_direct(const cellsna::CellGraph& g, double alpha, double beta) {
    const std::size_t n = g.n_nodes();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    std::vector<double> x(n, beta);
    for (std::size_t v = 0; v < n; ++v) {
        m[v][v] = 1.0;
        for (const std::uint32_t u : g.neighbors(static_cast<std::uint32_t>(v))) m[v][u] -= alpha;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        std::swap(m[col], m[pivot]);
        std::swap(x[col], x[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            x[r] -= f * x[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t c = col + 1; c < n; ++c) x[col] -= m[col][c] * x[c];
        x[col] /= m[col][col];
    }
    double norm2 = 0.0;
    for (const double v : x) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : x) v *= inv;
    return x;
}

// ---------------------------------------------------------------------------
// Student t distribution by quadrature.

inline double t_pdf(double x, double df) {
    const double ln =
        std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI) -
        (df + 1.0) / 2.0 * std::log1p(x * x / df);
    return std::exp(ln);
}

namespace detail {

inline double simpson(double (*f)(double, double), double df, double a, double b) {
    const double c = (a + b) / 2.0;
    return (b - a) / 6.0 * (f(a, df) + 4.0 * f(c, df) + f(b, df));
}

inline double adaptive_simpson(double (*f)(double, double), double df, double a, double b,
                               double whole, double eps, int depth) {
    const double c = (a + b) / 2.0;
    const double left = simpson(f, df, a, c);
    const double right = simpson(f, df, c, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, df, a, c, left, eps / 2.0, depth - 1) +
           adaptive_simpson(f, df, c, b, right, eps / 2.0, depth - 1);
}

}  // namespace detail

// Two-sided p-value: 2 * integral of the t pdf over [|t|, T] with T chosen so
// the analytic tail beyond it is below 1e-12.
inline double t_two_sided_p_quadrature(double t, double df) {
    const double at = std::abs(t);
    if (at == 0.0) return 1.0;
    double upper = std::max(at * 2.0, std::sqrt(df) * 4.0) + 10.0;
    // tail bound: integrand decays at least like (x/T)^-(df+1) past T
    while (t_pdf(upper, df) * upper / df > 1e-13 && upper < 1e9) upper *= 2.0;
    const double whole = detail::simpson(t_pdf, df, at, upper);
    const double integral = detail::adaptive_simpson(t_pdf, df, at, upper, whole, 1e-12, 60);
    return std::min(1.0, 2.0 * integral);
}

// ---------------------------------------------------------------------------
// Random instances

inline cellsna::CellGraph random_gnp(std::uint32_t n, double p, std::uint64_t seed) {
    cellsna::Rng rng(seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    return cellsna::CellGraph::from_edges(n, edges);
}

inline std::vector<cellsna::Point2> random_points(std::size_t n, double width, double height,
                                                  std::uint64_t seed) {
    cellsna::Rng rng(seed);
    std::vector<cellsna::Point2> pts(n);
    for (auto& p : pts) {
        p.x = rng.uniform(0.0, width);
        p.y = rng.uniform(0.0, height);
    }
    return pts;
}

}  // namespace oracles
