#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/csv.hpp"
#include "cellsna/measure_table.hpp"

// Histogram-statistical featurization: per measure, B histogram counts, B+1
// bin edges, maximum, mean and population standard deviation, concatenated in
// the fixed measure order. With the default B=10 for all seven measures the
// vector has 7 * (10 + 11 + 3) = 168 entries.

namespace cellsna {

enum class FeatureLevel { kPatch, kImage };

inline std::string to_string(FeatureLevel level) {
    return level == FeatureLevel::kPatch ? "patch" : "image";
}

struct FeatureConfig {
    // measure name -> bin count; missing measures use default_bins.
    std::uint32_t default_bins = 10;
    std::map<std::string, std::uint32_t> bins_per_measure;
    // adaptive: edges span each sample's [min, max]. fixed: measures listed in
    // fixed_edges use those edges (values outside are clamped into the first/
    // last bin); unlisted measures stay adaptive.
    bool adaptive = true;
    std::map<std::string, std::vector<double>> fixed_edges;

    std::uint32_t bins_for(const std::string& measure) const {
        if (!adaptive) {
            const auto it = fixed_edges.find(measure);
            if (it != fixed_edges.end()) return static_cast<std::uint32_t>(it->second.size() - 1);
        }
        const auto it = bins_per_measure.find(measure);
        return it == bins_per_measure.end() ? default_bins : it->second;
    }

    const std::vector<double>* fixed_edges_for(const std::string& measure) const {
        if (adaptive) return nullptr;
        const auto it = fixed_edges.find(measure);
        return it == fixed_edges.end() ? nullptr : &it->second;
    }

    void validate() const {
        if (default_bins < 1) fail("config", "bin count must be >= 1");
        for (const auto& [name, bins] : bins_per_measure) {
            if (bins < 1) fail("config", "bin count must be >= 1 for " + name);
        }
        for (const auto& [name, edges] : fixed_edges) {
            if (edges.size() < 2) fail("config", "fixed edges for " + name + " need >= 2 entries");
            for (std::size_t i = 1; i < edges.size(); ++i) {
                if (!(edges[i] > edges[i - 1])) {
                    fail("config", "fixed edges for " + name + " must be strictly increasing");
                }
            }
        }
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"default_bins", default_bins},
                              {"bins_per_measure", bins_per_measure},
                              {"edge_mode", adaptive ? "adaptive" : "fixed"},
                              {"fixed_edges", fixed_edges}};
    }

    static FeatureConfig from_json(const nlohmann::json& j) {
        FeatureConfig cfg;
        cfg.default_bins = j.value("default_bins", cfg.default_bins);
        if (j.contains("bins_per_measure")) {
            cfg.bins_per_measure = j.at("bins_per_measure").get<std::map<std::string, std::uint32_t>>();
        }
        if (j.contains("edge_mode")) {
            const std::string mode = j.at("edge_mode").get<std::string>();
            if (mode == "adaptive") cfg.adaptive = true;
            else if (mode == "fixed") cfg.adaptive = false;
            else fail("parse", "unknown edge_mode '" + mode + "'");
        }
        if (j.contains("fixed_edges")) {
            cfg.fixed_edges = j.at("fixed_edges").get<std::map<std::string, std::vector<double>>>();
        }
        cfg.validate();
        return cfg;
    }
};

struct FeatureName {
    std::string measure;
    std::string feature;

    std::string column_name() const { return measure + "__" + feature; }

    friend bool operator==(const FeatureName&, const FeatureName&) = default;
};

using FeatureLayout = std::vector<FeatureName>;

// Deterministic layout for a config: per measure, hist_count_0..B-1,
// hist_edge_0..B, max, mean, std.
inline FeatureLayout feature_layout(const FeatureConfig& cfg) {
    cfg.validate();
    FeatureLayout layout;
    for (const char* measure : kMeasureNames) {
        const std::uint32_t bins = cfg.bins_for(measure);
        for (std::uint32_t b = 0; b < bins; ++b) layout.push_back({measure, "hist_count_" + format_u64(b)});
        for (std::uint32_t b = 0; b <= bins; ++b) layout.push_back({measure, "hist_edge_" + format_u64(b)});
        layout.push_back({measure, "max"});
        layout.push_back({measure, "mean"});
        layout.push_back({measure, "std"});
    }
    return layout;
}

struct FeatureVector {
    std::vector<double> values;
    FeatureLayout layout;
    FeatureLevel level = FeatureLevel::kPatch;
};

namespace detail {

// Histogram on materialized edges. A value equal to an interior edge counts
// into the bin on its right; the maximum lands in the last bin; out-of-range
// values (possible with fixed edges) clamp into the boundary bins, so counts
// always sum to the node count.
inline std::vector<double> histogram_counts(const std::vector<double>& values,
                                            const std::vector<double>& edges) {
    const std::size_t bins = edges.size() - 1;
    std::vector<double> counts(bins, 0.0);
    const double lo = edges.front();
    const double hi = edges.back();
    const double width = hi - lo;
    for (const double v : values) {
        std::size_t idx;
        if (v <= lo) {
            idx = 0;
        } else if (v >= hi) {
            idx = bins - 1;
        } else {
            idx = static_cast<std::size_t>((v - lo) / width * static_cast<double>(bins));
            if (idx >= bins) idx = bins - 1;
            // align the float estimate with the materialized edges
            while (idx + 1 < bins && v >= edges[idx + 1]) ++idx;
            while (idx > 0 && v < edges[idx]) --idx;
        }
        counts[idx] += 1.0;
    }
    return counts;
}

}  // namespace detail

inline FeatureVector featurize(const MeasureTable& table, const FeatureConfig& cfg,
                               FeatureLevel level = FeatureLevel::kPatch) {
    cfg.validate();
    const std::size_t n = table.n_nodes();
    if (n == 0) fail("empty table", "cannot featurize an empty measure table");

    FeatureVector fv;
    fv.layout = feature_layout(cfg);
    fv.level = level;
    fv.values.reserve(fv.layout.size());

    for (std::size_t m = 0; m < kMeasureCount; ++m) {
        const std::string measure = kMeasureNames[m];
        const std::vector<double>& values = table.column(m);
        const std::uint32_t bins = cfg.bins_for(measure);

        std::vector<double> edges;
        if (const std::vector<double>* fixed = cfg.fixed_edges_for(measure)) {
            edges = *fixed;
        } else {
            const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
            double lo = *mn_it;
            double hi = *mx_it;
            if (lo == hi) hi = lo + 1.0;  // degenerate range: all mass in bin 0
            edges.resize(bins + 1);
            for (std::uint32_t b = 0; b <= bins; ++b) {
                edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
            }
            edges[0] = lo;
            edges[bins] = hi;
        }

        const std::vector<double> counts = detail::histogram_counts(values, edges);

        double mx = values[0];
        double mean = 0.0;
        for (const double v : values) {
            mx = std::max(mx, v);
            mean += v;
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);  // population variance

        fv.values.insert(fv.values.end(), counts.begin(), counts.end());
        fv.values.insert(fv.values.end(), edges.begin(), edges.end());
        fv.values.push_back(mx);
        fv.values.push_back(mean);
        fv.values.push_back(std::sqrt(var));
    }
    return fv;
}

// ---------------------------------------------------------------------------
// Feature matrix: one row per sample, CSV with a sample id column followed by
// one column per layout entry, named <measure>__<feature>.

struct FeatureMatrix {
    FeatureLayout layout;
    FeatureLevel level = FeatureLevel::kPatch;
    std::vector<std::string> sample_ids;
    std::vector<std::vector<double>> rows;

    void append(const std::string& sample_id, const FeatureVector& fv) {
        if (!layout.empty() && fv.layout != layout) fail("layout mismatch", "feature layouts differ");
        if (layout.empty()) layout = fv.layout;
        sample_ids.push_back(sample_id);
        rows.push_back(fv.values);
    }
};

inline void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path) {
    CsvWriter out(path);
    std::vector<std::string> header = {"sample_id"};
    for (const FeatureName& f : matrix.layout) header.push_back(f.column_name());
    out.write_row(header);
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        std::vector<std::string> row = {matrix.sample_ids[r]};
        for (const double v : matrix.rows[r]) row.push_back(format_double(v));
        out.write_row(row);
    }
    out.close();
}

inline FeatureMatrix load_feature_matrix(const std::string& path,
                                         FeatureLevel level = FeatureLevel::kPatch) {
    const auto csv = read_csv(path);
    if (csv.empty() || csv[0].empty() || csv[0][0] != "sample_id") {
        fail("parse", "feature matrix " + path + " must start with sample_id column");
    }
    FeatureMatrix matrix;
    matrix.level = level;
    for (std::size_t c = 1; c < csv[0].size(); ++c) {
        const std::string& name = csv[0][c];
        const std::size_t sep = name.find("__");
        if (sep == std::string::npos) fail("parse", "bad feature column '" + name + "' in " + path);
        matrix.layout.push_back({name.substr(0, sep), name.substr(sep + 2)});
    }
    for (std::size_t r = 1; r < csv.size(); ++r) {
        if (csv[r].size() != csv[0].size()) fail("parse", "ragged row in " + path);
        matrix.sample_ids.push_back(csv[r][0]);
        std::vector<double> row(csv[r].size() - 1);
        for (std::size_t c = 1; c < csv[r].size(); ++c) row[c - 1] = parse_double(csv[r][c], path);
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

}  // namespace cellsna
