#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/manifest.hpp"
#include "cellsna/point_set.hpp"
#include "cellsna/random.hpp"

// Synthetic stand-in dataset. Grade 1 mimics evenly spread tissue with a
// homogeneous Poisson process; grades 2 and 3 mimic increasing nuclear
// clustering with Thomas cluster processes (grade 3 denser and tighter).
// Everything is a pure function of the seed, including the output bytes.

namespace cellsna {

enum class ProcessKind { kPoisson, kThomas };

struct ClassRecipe {
    ProcessKind kind = ProcessKind::kPoisson;
    double intensity = 2.5e-4;  // Poisson: points per px^2
    // Thomas parameters
    double parent_intensity = 6.25e-6;  // parents per px^2
    double mean_points_per_cluster = 40.0;
    double cluster_sigma = 60.0;

    double expected_points(double area) const {
        return kind == ProcessKind::kPoisson ? intensity * area
                                             : parent_intensity * area * mean_points_per_cluster;
    }

    nlohmann::json to_json() const {
        if (kind == ProcessKind::kPoisson) {
            return nlohmann::json{{"process", "poisson"}, {"intensity", intensity}};
        }
        return nlohmann::json{{"process", "thomas"},
                              {"parent_intensity", parent_intensity},
                              {"mean_points_per_cluster", mean_points_per_cluster},
                              {"cluster_sigma", cluster_sigma}};
    }

    static ClassRecipe from_json(const nlohmann::json& j) {
        ClassRecipe r;
        const std::string kind = j.at("process").get<std::string>();
        if (kind == "poisson") {
            r.kind = ProcessKind::kPoisson;
            r.intensity = j.at("intensity").get<double>();
        } else if (kind == "thomas") {
            r.kind = ProcessKind::kThomas;
            r.parent_intensity = j.at("parent_intensity").get<double>();
            r.mean_points_per_cluster = j.at("mean_points_per_cluster").get<double>();
            r.cluster_sigma = j.at("cluster_sigma").get<double>();
        } else {
            fail("parse", "unknown point process '" + kind + "'");
        }
        return r;
    }
};

struct SynthConfig {
    std::uint32_t n_images_per_class = 20;
    double patch_width = 1792.0;
    double patch_height = 1792.0;
    std::uint32_t patches_per_side = 2;  // each image is a side x side patch grid
    // index 0 -> grade 1 (poisson), 1 -> grade 2, 2 -> grade 3
    std::array<ClassRecipe, 3> recipes = {
        ClassRecipe{ProcessKind::kPoisson, 2.5e-4, 0.0, 0.0, 0.0},
        ClassRecipe{ProcessKind::kThomas, 0.0, 6.25e-6, 40.0, 60.0},
        ClassRecipe{ProcessKind::kThomas, 0.0, 3.125e-6, 80.0, 25.0},
    };
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (n_images_per_class < 1) fail("config", "n_images_per_class must be >= 1");
        if (!(patch_width > 0.0) || !(patch_height > 0.0)) fail("config", "patch extent must be > 0");
        if (patches_per_side < 1) fail("config", "patches_per_side must be >= 1");
        const double area = patch_width * patch_height;
        for (const ClassRecipe& r : recipes) {
            if (r.kind == ProcessKind::kPoisson) {
                if (!(r.intensity > 0.0)) fail("config", "poisson intensity must be > 0");
            } else {
                if (!(r.parent_intensity > 0.0) || !(r.mean_points_per_cluster > 0.0) ||
                    !(r.cluster_sigma > 0.0)) {
                    fail("config", "thomas parameters must be > 0");
                }
            }
            const double expected = r.expected_points(area);
            if (expected < 50.0 || expected > 50000.0) {
                fail("config", "expected points per patch (" + format_double(expected) +
                                   ") outside the [50, 50000] guard");
            }
        }
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"n_images_per_class", n_images_per_class},
                              {"patch_width", patch_width},
                              {"patch_height", patch_height},
                              {"patches_per_side", patches_per_side},
                              {"grade1", recipes[0].to_json()},
                              {"grade2", recipes[1].to_json()},
                              {"grade3", recipes[2].to_json()},
                              {"rng_seed", rng_seed}};
    }

    static SynthConfig from_json(const nlohmann::json& j) {
        SynthConfig cfg;
        cfg.n_images_per_class = j.value("n_images_per_class", cfg.n_images_per_class);
        cfg.patch_width = j.value("patch_width", cfg.patch_width);
        cfg.patch_height = j.value("patch_height", cfg.patch_height);
        cfg.patches_per_side = j.value("patches_per_side", cfg.patches_per_side);
        if (j.contains("grade1")) cfg.recipes[0] = ClassRecipe::from_json(j.at("grade1"));
        if (j.contains("grade2")) cfg.recipes[1] = ClassRecipe::from_json(j.at("grade2"));
        if (j.contains("grade3")) cfg.recipes[2] = ClassRecipe::from_json(j.at("grade3"));
        cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
        cfg.validate();
        return cfg;
    }
};

// Samples one patch realization of the recipe on [0, width) x [0, height).
inline std::vector<Point2> sample_point_process(const ClassRecipe& recipe, double width,
                                                double height, Rng& rng) {
    std::vector<Point2> points;
    if (recipe.kind == ProcessKind::kPoisson) {
        const std::uint64_t n = rng.poisson(recipe.intensity * width * height);
        points.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            points.push_back({rng.uniform(0.0, width), rng.uniform(0.0, height)});
        }
        return points;
    }
    // Thomas: parents on a 4-sigma buffered window so clusters straddling the
    // patch border contribute their inside offspring.
    const double buffer = 4.0 * recipe.cluster_sigma;
    const double bw = width + 2.0 * buffer;
    const double bh = height + 2.0 * buffer;
    const std::uint64_t n_parents = rng.poisson(recipe.parent_intensity * bw * bh);
    for (std::uint64_t p = 0; p < n_parents; ++p) {
        const double px = rng.uniform(-buffer, width + buffer);
        const double py = rng.uniform(-buffer, height + buffer);
        const std::uint64_t n_children = rng.poisson(recipe.mean_points_per_cluster);
        for (std::uint64_t c = 0; c < n_children; ++c) {
            const double x = px + rng.normal() * recipe.cluster_sigma;
            const double y = py + rng.normal() * recipe.cluster_sigma;
            if (x >= 0.0 && x < width && y >= 0.0 && y < height) points.push_back({x, y});
        }
    }
    return points;
}

// Stratified fold assignment: per grade, images shuffle by seed and deal
// round-robin, so per-class fold sizes differ by at most one.
inline void split_folds(DatasetManifest& manifest, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) fail("config", "n_folds must be >= 2");
    std::map<int, std::vector<std::string>> by_grade;
    for (const ImageEntry& img : manifest.images) by_grade[img.grade].push_back(img.image_id);
    for (auto& [grade, ids] : by_grade) {
        if (ids.size() < static_cast<std::size_t>(n_folds)) {
            fail("too few images", "grade " + std::to_string(grade) + " has " +
                                       format_u64(ids.size()) + " images, needs >= " +
                                       std::to_string(n_folds));
        }
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(grade)));
        rng.shuffle(ids);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            manifest.folds[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
        }
    }
}

// Writes per-patch centroid CSVs under <out_dir>/points and returns the
// stratified 3-fold manifest (also saved as <out_dir>/manifest.json).
inline DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg,
                                                  const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    const fs::path points_dir = fs::path(out_dir) / "points";
    fs::create_directories(points_dir);

    DatasetManifest manifest;
    manifest.provenance = "synthetic point-process dataset (grade1 poisson, grades 2-3 thomas)";

    std::uint64_t patch_counter = 0;
    for (int grade = 1; grade <= 3; ++grade) {
        const ClassRecipe& recipe = cfg.recipes[grade - 1];
        for (std::uint32_t i = 0; i < cfg.n_images_per_class; ++i) {
            char image_id[32];
            std::snprintf(image_id, sizeof(image_id), "img_g%d_%03u", grade, i);
            ImageEntry image;
            image.image_id = image_id;
            image.grade = grade;
            for (std::uint32_t row = 0; row < cfg.patches_per_side; ++row) {
                for (std::uint32_t col = 0; col < cfg.patches_per_side; ++col) {
                    PatchRef patch;
                    patch.patch_id = std::string(image_id) + "_p" + format_u64(row) + "_" + format_u64(col);
                    patch.x0 = static_cast<double>(col) * cfg.patch_width;
                    patch.y0 = static_cast<double>(row) * cfg.patch_height;
                    patch.width = cfg.patch_width;
                    patch.height = cfg.patch_height;

                    Rng rng(derive_seed(cfg.rng_seed, patch_counter));
                    ++patch_counter;
                    PointSet ps;
                    ps.patch_id = patch.patch_id;
                    ps.width = cfg.patch_width;
                    ps.height = cfg.patch_height;
                    ps.points = sample_point_process(recipe, cfg.patch_width, cfg.patch_height, rng);
                    ps.validate();
                    save_point_set(ps, (points_dir / (patch.patch_id + ".csv")).string());

                    image.patches.push_back(std::move(patch));
                }
            }
            manifest.images.push_back(std::move(image));
        }
    }
    split_folds(manifest, 3, derive_seed(cfg.rng_seed, 0xf01d));
    manifest.save((fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

}  // namespace cellsna
