#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cellsna/core.hpp"
#include "cellsna/features.hpp"
#include "cellsna/measure_table.hpp"

// Patch-to-image aggregation: vote on patch predictions, concatenate raw
// measure arrays, or average statistical feature vectors.

namespace cellsna {

enum class Scenario { kPredictions, kMeasures, kFeatures };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::kPredictions: return "predictions";
        case Scenario::kMeasures: return "measures";
        default: return "features";
    }
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "predictions") return Scenario::kPredictions;
    if (s == "measures") return Scenario::kMeasures;
    if (s == "features") return Scenario::kFeatures;
    fail("parse", "unknown scenario '" + s + "'");
}

// Most frequent label. Vote ties break by the larger summed per-class
// decision score (when provided), then by the lower grade index.
inline int majority_vote(const std::vector<int>& patch_labels,
                         const std::map<int, double>* summed_scores = nullptr) {
    if (patch_labels.empty()) fail("empty vote", "majority vote needs at least one label");
    std::map<int, std::size_t> counts;
    for (const int label : patch_labels) counts[label] += 1;
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) best_count = std::max(best_count, count);

    int winner = 0;
    double winner_score = -std::numeric_limits<double>::infinity();
    bool have_winner = false;
    for (const auto& [label, count] : counts) {  // ascending label order
        if (count != best_count) continue;
        double score = 0.0;
        if (summed_scores) {
            const auto it = summed_scores->find(label);
            if (it != summed_scores->end()) score = it->second;
        }
        if (!have_winner || score > winner_score) {
            winner = label;
            winner_score = score;
            have_winner = true;
        }
    }
    return winner;
}

// Concatenates per-node value arrays in patch order; metadata entries carry
// over per source patch.
inline MeasureTable aggregate_measures(const std::vector<MeasureTable>& tables) {
    if (tables.empty()) fail("empty aggregation", "no measure tables to aggregate");
    MeasureTable out;
    for (const MeasureTable& t : tables) {
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            auto& dst = out.column(m);
            const auto& src = t.column(m);
            dst.insert(dst.end(), src.begin(), src.end());
        }
        for (const MeasureMeta& meta : t.meta) out.meta.push_back(meta);
    }
    out.validate();
    return out;
}

// Element-wise mean of identically laid out vectors; result is image-level.
inline FeatureVector aggregate_features(const std::vector<FeatureVector>& vectors) {
    if (vectors.empty()) fail("empty aggregation", "no feature vectors to aggregate");
    const FeatureLayout& layout = vectors.front().layout;
    for (const FeatureVector& v : vectors) {
        if (v.layout != layout) fail("layout mismatch", "feature layouts differ across patches");
    }
    FeatureVector out;
    out.layout = layout;
    out.level = FeatureLevel::kImage;
    out.values.assign(layout.size(), 0.0);
    for (const FeatureVector& v : vectors) {
        for (std::size_t i = 0; i < layout.size(); ++i) out.values[i] += v.values[i];
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (double& v : out.values) v *= inv;
    return out;
}

// ---------------------------------------------------------------------------
// Saliency grid: per-class scores of overlapping patches averaged over the
// stride-sized cells each patch fully covers. Cells no patch covers hold NaN.

struct PatchScore {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;
    std::vector<double> class_scores;  // one entry per class
};

struct SaliencyGrid {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::size_t n_classes = 0;
    std::vector<double> scores;  // [row * n_cols * n_classes + col * n_classes + c]

    double& at(std::size_t row, std::size_t col, std::size_t cls) {
        return scores[(row * n_cols + col) * n_classes + cls];
    }
    double at(std::size_t row, std::size_t col, std::size_t cls) const {
        return scores[(row * n_cols + col) * n_classes + cls];
    }
    bool missing(std::size_t row, std::size_t col) const {
        return std::isnan(at(row, col, 0));
    }
};

inline SaliencyGrid saliency_grid(const std::vector<PatchScore>& patches, double stride) {
    if (!(stride > 0.0)) fail("config", "stride must be > 0");
    if (patches.empty()) fail("empty aggregation", "saliency grid needs at least one patch");
    const std::size_t n_classes = patches.front().class_scores.size();
    double max_x = 0.0, max_y = 0.0;
    for (const PatchScore& p : patches) {
        if (p.class_scores.size() != n_classes) fail("layout mismatch", "class score counts differ");
        max_x = std::max(max_x, p.x0 + p.width);
        max_y = std::max(max_y, p.y0 + p.height);
    }
    SaliencyGrid grid;
    grid.n_classes = n_classes;
    grid.n_cols = static_cast<std::size_t>(std::ceil(max_x / stride));
    grid.n_rows = static_cast<std::size_t>(std::ceil(max_y / stride));
    grid.scores.assign(grid.n_rows * grid.n_cols * n_classes,
                       std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint32_t> cover(grid.n_rows * grid.n_cols, 0);
    std::vector<double> acc(grid.n_rows * grid.n_cols * n_classes, 0.0);

    for (const PatchScore& p : patches) {
        // cells whose stride-square lies fully inside the patch rectangle
        const std::size_t col_begin = static_cast<std::size_t>(std::ceil(p.x0 / stride - 1e-9));
        const std::size_t row_begin = static_cast<std::size_t>(std::ceil(p.y0 / stride - 1e-9));
        for (std::size_t row = row_begin; row < grid.n_rows; ++row) {
            if ((static_cast<double>(row) + 1.0) * stride > p.y0 + p.height + 1e-9) break;
            for (std::size_t col = col_begin; col < grid.n_cols; ++col) {
                if ((static_cast<double>(col) + 1.0) * stride > p.x0 + p.width + 1e-9) break;
                const std::size_t cell = row * grid.n_cols + col;
                cover[cell] += 1;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    acc[cell * n_classes + c] += p.class_scores[c];
                }
            }
        }
    }
    for (std::size_t cell = 0; cell < cover.size(); ++cell) {
        if (cover[cell] == 0) continue;
        for (std::size_t c = 0; c < n_classes; ++c) {
            grid.scores[cell * n_classes + c] = acc[cell * n_classes + c] / cover[cell];
        }
    }
    return grid;
}

}  // namespace cellsna
