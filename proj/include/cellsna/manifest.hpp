#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"

namespace cellsna {

// One tile of a source image. x0/y0 are pixel origins inside the image, so
// arbitrary (overlapping or sparse) tilings can be described.
struct PatchRef {
    std::string patch_id;
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;
};

struct ImageEntry {
    std::string image_id;
    int grade = 0;  // in {1, 2, 3}
    std::vector<PatchRef> patches;
};

struct DatasetManifest {
    std::vector<ImageEntry> images;
    std::map<std::string, int> folds;  // image_id -> fold in {0, 1, 2}
    std::string provenance;

    const ImageEntry* find_image(const std::string& image_id) const {
        for (const ImageEntry& img : images) {
            if (img.image_id == image_id) return &img;
        }
        return nullptr;
    }

    std::size_t patch_count() const {
        std::size_t n = 0;
        for (const ImageEntry& img : images) n += img.patches.size();
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json jimages = nlohmann::json::array();
        for (const ImageEntry& img : images) {
            nlohmann::json jpatches = nlohmann::json::array();
            for (const PatchRef& p : img.patches) {
                jpatches.push_back({{"patch_id", p.patch_id},
                                    {"x0", p.x0},
                                    {"y0", p.y0},
                                    {"width", p.width},
                                    {"height", p.height}});
            }
            jimages.push_back(
                {{"image_id", img.image_id}, {"grade", img.grade}, {"patches", jpatches}});
        }
        return nlohmann::json{{"images", jimages}, {"folds", folds}, {"provenance", provenance}};
    }

    static DatasetManifest from_json(const nlohmann::json& j) {
        DatasetManifest m;
        for (const auto& jimg : j.at("images")) {
            ImageEntry img;
            img.image_id = jimg.at("image_id").get<std::string>();
            img.grade = jimg.at("grade").get<int>();
            for (const auto& jp : jimg.at("patches")) {
                PatchRef p;
                p.patch_id = jp.at("patch_id").get<std::string>();
                p.x0 = jp.at("x0").get<double>();
                p.y0 = jp.at("y0").get<double>();
                p.width = jp.at("width").get<double>();
                p.height = jp.at("height").get<double>();
                img.patches.push_back(std::move(p));
            }
            m.images.push_back(std::move(img));
        }
        if (j.contains("folds")) m.folds = j.at("folds").get<std::map<std::string, int>>();
        m.provenance = j.value("provenance", "");
        return m;
    }

    void save(const std::string& path) const { write_text_file(path, to_json().dump(1) + "\n"); }

    static DatasetManifest load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    }
};

// Structural checks. Violations are data, not failures: an empty report means
// the manifest is usable.
inline std::vector<std::string> validate_manifest(const DatasetManifest& m) {
    std::vector<std::string> violations;

    std::set<std::string> image_ids;
    std::set<std::string> patch_ids;
    for (const ImageEntry& img : m.images) {
        if (!image_ids.insert(img.image_id).second) {
            violations.push_back("duplicate image " + img.image_id);
        }
        if (img.grade < 1 || img.grade > 3) {
            violations.push_back("grade out of domain for image " + img.image_id + " (grade " +
                                 std::to_string(img.grade) + ")");
        }
        for (const PatchRef& p : img.patches) {
            if (!patch_ids.insert(p.patch_id).second) {
                violations.push_back("duplicate patch " + p.patch_id);
            }
        }
    }

    for (const ImageEntry& img : m.images) {
        const auto it = m.folds.find(img.image_id);
        if (it == m.folds.end()) {
            violations.push_back("image " + img.image_id + " has no fold assignment");
        } else if (it->second < 0 || it->second > 2) {
            violations.push_back("fold index out of domain for image " + img.image_id);
        }
    }
    for (const auto& [image_id, fold] : m.folds) {
        (void)fold;
        if (image_ids.count(image_id) == 0) {
            violations.push_back("fold entry for unknown image " + image_id);
        }
    }

    // Stratification: per grade, fold sizes may differ by at most one.
    std::map<int, std::map<int, int>> per_grade_fold_counts;
    for (const ImageEntry& img : m.images) {
        const auto it = m.folds.find(img.image_id);
        if (it != m.folds.end() && it->second >= 0 && it->second <= 2) {
            per_grade_fold_counts[img.grade][it->second] += 1;
        }
    }
    for (const auto& [grade, counts] : per_grade_fold_counts) {
        int lo = 1 << 30, hi = 0;
        for (int f = 0; f < 3; ++f) {
            const auto it = counts.find(f);
            const int c = it == counts.end() ? 0 : it->second;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi - lo > 1) {
            violations.push_back("fold stratification imbalance for grade " + std::to_string(grade));
        }
    }
    return violations;
}

}  // namespace cellsna
