#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"

namespace cellsna {

// Nuclei centroids of one patch. Point order is load-bearing: index i is the
// node id of point i in every structure derived downstream.
struct PointSet {
    std::string patch_id;
    std::vector<Point2> points;
    double width = 0.0;
    double height = 0.0;

    std::size_t size() const { return points.size(); }

    // Enforces finite coordinates and 0 <= x < width, 0 <= y < height.
    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Point2& p = points[i];
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                fail("invalid coordinate", "non-finite coordinate at node " + format_u64(i) +
                                               " of patch " + patch_id);
            }
            if (p.x < 0.0 || p.x >= width || p.y < 0.0 || p.y >= height) {
                fail("invalid coordinate", "coordinate outside patch extent at node " +
                                               format_u64(i) + " of patch " + patch_id);
            }
        }
    }
};

// Point file: CSV with header node_id,x,y. Node ids must be dense 0-based in
// file order. When no extent is supplied it is inferred as floor(max)+1.
inline PointSet load_point_set(const std::string& path, const std::string& patch_id,
                               std::optional<Point2> extent = std::nullopt) {
    const auto rows = read_csv(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"node_id", "x", "y"}) {
        fail("parse", "point file " + path + " must start with header node_id,x,y");
    }
    PointSet ps;
    ps.patch_id = patch_id;
    ps.points.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) fail("parse", "row " + format_u64(r) + " of " + path + " needs 3 fields");
        const std::uint64_t id = parse_u64(rows[r][0], path);
        if (id != r - 1) {
            fail("parse", "node ids in " + path + " must be dense 0-based in file order");
        }
        ps.points.push_back({parse_double(rows[r][1], path), parse_double(rows[r][2], path)});
    }
    if (extent) {
        ps.width = extent->x;
        ps.height = extent->y;
    } else {
        double mx = 0.0, my = 0.0;
        for (const Point2& p : ps.points) {
            mx = std::max(mx, p.x);
            my = std::max(my, p.y);
        }
        ps.width = std::floor(mx) + 1.0;
        ps.height = std::floor(my) + 1.0;
    }
    ps.validate();
    return ps;
}

inline void save_point_set(const PointSet& ps, const std::string& path) {
    CsvWriter out(path);
    out.write_row({"node_id", "x", "y"});
    for (std::size_t i = 0; i < ps.points.size(); ++i) {
        out.write_row({format_u64(i), format_double(ps.points[i].x), format_double(ps.points[i].y)});
    }
    out.close();
}

}  // namespace cellsna
