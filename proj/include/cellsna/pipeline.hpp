#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/aggregation.hpp"
#include "cellsna/features.hpp"
#include "cellsna/graph_builder.hpp"
#include "cellsna/manifest.hpp"
#include "cellsna/measures.hpp"
#include "cellsna/model_selection.hpp"
#include "cellsna/parallel.hpp"
#include "cellsna/point_set.hpp"
#include "cellsna/svm.hpp"

// End-to-end run: build graphs -> measures -> featurize -> aggregate ->
// select/evaluate, with every stage artifact persisted under the run
// directory. Runs are resumable: with resume enabled a stage unit whose
// artifact already exists is loaded instead of recomputed, and because every
// stage is deterministic the resumed run reproduces the fresh one.

namespace cellsna {

struct SfsOptions {
    bool enabled = true;
    std::size_t max_features = 30;
    std::size_t patience = 5;
    double C = 10.0;
    double gamma = 0.1;
};

struct MlOptions {
    ParamGrid grid;
    SfsOptions sfs;

    nlohmann::json to_json() const {
        return nlohmann::json{{"grid", grid.to_json()},
                              {"sfs",
                               {{"enabled", sfs.enabled},
                                {"max_features", sfs.max_features},
                                {"patience", sfs.patience},
                                {"C", sfs.C},
                                {"gamma", sfs.gamma}}}};
    }

    static MlOptions from_json(const nlohmann::json& j) {
        MlOptions opt;
        if (j.contains("grid")) opt.grid = ParamGrid::from_json(j.at("grid"));
        if (j.contains("sfs")) {
            const auto& s = j.at("sfs");
            opt.sfs.enabled = s.value("enabled", opt.sfs.enabled);
            opt.sfs.max_features = s.value("max_features", opt.sfs.max_features);
            opt.sfs.patience = s.value("patience", opt.sfs.patience);
            opt.sfs.C = s.value("C", opt.sfs.C);
            opt.sfs.gamma = s.value("gamma", opt.sfs.gamma);
        }
        return opt;
    }
};

struct PipelineOptions {
    BuildConfig build;
    MeasureConfig measures;
    FeatureConfig features;
    Scenario scenario = Scenario::kFeatures;
    MlOptions ml;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool resume = false;
};

struct PipelineResult {
    CvReport report;
    DatasetManifest manifest;
    std::string run_dir;
    std::string patch_features_path;
    std::string dataset_features_path;  // the matrix the classifier consumed
    std::string report_path;
    std::string model_path;
};

namespace detail {

class StageLog {
public:
    explicit StageLog(const std::string& path) : path_(path) {}

    void record(const std::string& stage, const std::string& unit, const std::string& status) {
        std::lock_guard<std::mutex> lock(mutex_);
        entries_.push_back({stage, unit, status});
    }

    void flush() const {
        CsvWriter out(path_);
        out.write_row({"stage", "unit_id", "status"});
        for (const auto& e : entries_) out.write_row({e.stage, e.unit, e.status});
        out.close();
    }

private:
    struct Entry {
        std::string stage;
        std::string unit;
        std::string status;
    };
    std::string path_;
    std::mutex mutex_;
    std::vector<Entry> entries_;
};

[[noreturn]] inline void stage_fail(const std::string& stage, const std::string& unit,
                                    const Error& err) {
    throw Error(err.code(), "stage " + stage + ", " + unit + ": " + err.what());
}

}  // namespace detail

// Grid-search (C, gamma) on the whole dataset with a seeded stratified 2-fold
// split, then fit the final model on every row. Used for the exported model
// artifact and the standalone `train` command.
inline SvmModel fit_final_model(const MlDataset& ds, const ParamGrid& grid, std::uint64_t seed,
                                const std::vector<std::size_t>& selected_columns = {}) {
    std::set<std::string> all_images;
    for (const auto& [id, g] : ds.image_grade) {
        (void)g;
        all_images.insert(id);
    }
    const auto halves = detail::inner_split(ds, all_images, derive_seed(seed, 0x517));
    double best_score = -1.0;
    double best_C = grid.C_values.front();
    double best_gamma = grid.gamma_values.front();
    for (const double C : grid.C_values) {
        for (const double gamma : grid.gamma_values) {
            double score_sum = 0.0;
            int usable = 0;
            for (int half = 0; half < 2; ++half) {
                const std::set<std::string>& test = halves[half];
                const std::set<std::string>& train = halves[1 - half];
                if (test.empty() || detail::grades_of(ds, train).size() < 2) continue;
                std::vector<std::string> test_ids(test.begin(), test.end());
                const SvmParams params{C, gamma, 1e-3, seed};
                score_sum += detail::evaluate_split(ds, train, test_ids, params, selected_columns).accuracy;
                ++usable;
            }
            if (usable == 0) continue;
            const double score = score_sum / usable;
            if (score > best_score) {
                best_score = score;
                best_C = C;
                best_gamma = gamma;
            }
        }
    }
    const SvmParams params{best_C, best_gamma, 1e-3, seed};
    std::vector<int> labels;
    labels.reserve(ds.rows.size());
    for (const std::string& image : ds.row_image) labels.push_back(ds.image_grade.at(image));
    return train_svm(ds.rows, labels, params, selected_columns, ds.column_names());
}

inline PipelineResult run_pipeline(const DatasetManifest& manifest, const std::string& points_dir,
                                   const PipelineOptions& opt, const std::string& run_dir) {
    namespace fs = std::filesystem;
    if (manifest.images.empty()) fail("empty manifest", "manifest lists no images");
    {
        const auto violations = validate_manifest(manifest);
        if (!violations.empty()) fail("invalid manifest", violations.front());
    }
    opt.build.validate();
    opt.measures.validate();
    opt.features.validate();

    fs::create_directories(fs::path(run_dir) / "graphs");
    fs::create_directories(fs::path(run_dir) / "measures");
    fs::create_directories(fs::path(run_dir) / "features");
    detail::StageLog log((fs::path(run_dir) / "stage_log.csv").string());

    manifest.save((fs::path(run_dir) / "manifest.json").string());

    // patch order: manifest image order, then patch order within the image
    std::vector<const PatchRef*> patches;
    std::vector<const ImageEntry*> patch_image;
    for (const ImageEntry& img : manifest.images) {
        for (const PatchRef& p : img.patches) {
            patches.push_back(&p);
            patch_image.push_back(&img);
        }
    }
    if (patches.empty()) fail("empty manifest", "manifest lists no patches");

    // ---- stage: build ----
    std::vector<std::string> graph_paths(patches.size());
    parallel_for(patches.size(), opt.workers, [&](std::size_t i) {
        const PatchRef& patch = *patches[i];
        const std::string path = (fs::path(run_dir) / "graphs" / (patch.patch_id + ".graph.json")).string();
        graph_paths[i] = path;
        if (opt.resume && fs::exists(path)) {
            log.record("build", patch.patch_id, "cached");
            return;
        }
        try {
            const PointSet points = load_point_set(
                (fs::path(points_dir) / (patch.patch_id + ".csv")).string(), patch.patch_id,
                Point2{patch.width, patch.height});
            const CellGraph graph = build_graph(points, opt.build);
            graph.save(path);
            log.record("build", patch.patch_id, "computed");
        } catch (const Error& e) {
            detail::stage_fail("build", "patch " + patch.patch_id, e);
        }
    });

    // ---- stage: measures ----
    std::vector<std::string> table_paths(patches.size());
    parallel_for(patches.size(), opt.workers, [&](std::size_t i) {
        const PatchRef& patch = *patches[i];
        const std::string path = (fs::path(run_dir) / "measures" / (patch.patch_id + ".measures.csv")).string();
        table_paths[i] = path;
        if (opt.resume && fs::exists(path) && fs::exists(path + ".meta.json")) {
            log.record("measures", patch.patch_id, "cached");
            return;
        }
        try {
            const CellGraph graph = CellGraph::load(graph_paths[i]);
            MeasureConfig cfg = opt.measures;
            cfg.rng_seed = derive_seed(opt.seed, i);
            cfg.workers = 1;  // patches already run in parallel
            const MeasureTable table = compute_all_measures(graph, cfg, patch.patch_id);
            save_measure_table(table, path, cfg.to_json());
            log.record("measures", patch.patch_id, "computed");
        } catch (const Error& e) {
            detail::stage_fail("measures", "patch " + patch.patch_id, e);
        }
    });

    // ---- stage: featurize (patch level) ----
    const std::string patch_matrix_path = (fs::path(run_dir) / "features" / "patch_features.csv").string();
    FeatureMatrix patch_matrix;
    if (opt.resume && fs::exists(patch_matrix_path)) {
        patch_matrix = load_feature_matrix(patch_matrix_path, FeatureLevel::kPatch);
        log.record("featurize", "patch_features", "cached");
    } else {
        std::vector<FeatureVector> vectors(patches.size());
        parallel_for(patches.size(), opt.workers, [&](std::size_t i) {
            try {
                const MeasureTable table = load_measure_table(table_paths[i]);
                vectors[i] = featurize(table, opt.features, FeatureLevel::kPatch);
            } catch (const Error& e) {
                detail::stage_fail("featurize", "patch " + patches[i]->patch_id, e);
            }
        });
        for (std::size_t i = 0; i < patches.size(); ++i) {
            patch_matrix.append(patches[i]->patch_id, vectors[i]);
            log.record("featurize", patches[i]->patch_id, "computed");
        }
        patch_matrix.level = FeatureLevel::kPatch;
        save_feature_matrix(patch_matrix, patch_matrix_path);
    }

    // ---- stage: aggregate (image level, scenario dependent) ----
    const std::string image_matrix_path = (fs::path(run_dir) / "features" / "image_features.csv").string();
    FeatureMatrix dataset_matrix;
    std::string dataset_matrix_path = patch_matrix_path;
    if (opt.scenario == Scenario::kPredictions) {
        dataset_matrix = patch_matrix;
    } else {
        dataset_matrix_path = image_matrix_path;
        if (opt.resume && fs::exists(image_matrix_path)) {
            dataset_matrix = load_feature_matrix(image_matrix_path, FeatureLevel::kImage);
            log.record("aggregate", "image_features", "cached");
        } else {
            std::map<std::string, std::vector<std::size_t>> rows_of_image;
            for (std::size_t i = 0; i < patches.size(); ++i) {
                rows_of_image[patch_image[i]->image_id].push_back(i);
            }
            for (const ImageEntry& img : manifest.images) {
                const auto& row_ids = rows_of_image.at(img.image_id);
                try {
                    FeatureVector fv;
                    if (opt.scenario == Scenario::kMeasures) {
                        std::vector<MeasureTable> tables;
                        tables.reserve(row_ids.size());
                        for (const std::size_t i : row_ids) tables.push_back(load_measure_table(table_paths[i]));
                        const MeasureTable image_table = aggregate_measures(tables);
                        fv = featurize(image_table, opt.features, FeatureLevel::kImage);
                    } else {
                        std::vector<FeatureVector> vecs;
                        vecs.reserve(row_ids.size());
                        for (const std::size_t i : row_ids) {
                            vecs.push_back(FeatureVector{patch_matrix.rows[i], patch_matrix.layout,
                                                         FeatureLevel::kPatch});
                        }
                        fv = aggregate_features(vecs);
                    }
                    dataset_matrix.append(img.image_id, fv);
                    log.record("aggregate", img.image_id, "computed");
                } catch (const Error& e) {
                    detail::stage_fail("aggregate", "image " + img.image_id, e);
                }
            }
            dataset_matrix.level = FeatureLevel::kImage;
            save_feature_matrix(dataset_matrix, image_matrix_path);
        }
    }

    // ---- stage: select / evaluate ----
    const MlDataset ds = build_ml_dataset(manifest, dataset_matrix);
    std::vector<std::size_t> selected_columns;
    SfsResult sfs;
    if (opt.ml.sfs.enabled) {
        const SvmParams sfs_params{opt.ml.sfs.C, opt.ml.sfs.gamma, 1e-3, opt.seed};
        sfs = sequential_forward_selection(ds, sfs_params, opt.ml.sfs.max_features, opt.ml.sfs.patience);
        selected_columns = sfs.selected;
        save_sfs_curve(sfs, (fs::path(run_dir) / "sfs_curve.csv").string());
        log.record("select", "sfs", "computed");
    }

    CvReport report = cross_validate(ds, opt.ml.grid, opt.seed, selected_columns,
                                     to_string(opt.scenario));
    report.selected_features = sfs.selected_names;
    log.record("evaluate", "cross_validation", "computed");

    const std::string report_path = (fs::path(run_dir) / "report.json").string();
    write_text_file(report_path, report.to_json().dump(1) + "\n");

    // ---- stage: final model ----
    const SvmModel model = fit_final_model(ds, opt.ml.grid, opt.seed, selected_columns);
    const std::string model_path = (fs::path(run_dir) / "model.json").string();
    model.save(model_path);
    log.record("train", "final_model", "computed");

    log.flush();

    PipelineResult result;
    result.report = std::move(report);
    result.manifest = manifest;
    result.run_dir = run_dir;
    result.patch_features_path = patch_matrix_path;
    result.dataset_features_path = dataset_matrix_path;
    result.report_path = report_path;
    result.model_path = model_path;
    return result;
}

// ---------------------------------------------------------------------------
// Saliency heatmaps: per-patch class scores from the model laid out on the
// patch grid of each image.

struct ImageHeatmap {
    std::string image_id;
    SaliencyGrid grid;
};

inline std::vector<ImageHeatmap> compute_heatmaps(const DatasetManifest& manifest,
                                                  const FeatureMatrix& patch_matrix,
                                                  const SvmModel& model, double stride) {
    std::map<std::string, std::size_t> row_of_patch;
    for (std::size_t r = 0; r < patch_matrix.sample_ids.size(); ++r) {
        row_of_patch[patch_matrix.sample_ids[r]] = r;
    }
    std::vector<ImageHeatmap> heatmaps;
    for (const ImageEntry& img : manifest.images) {
        std::vector<PatchScore> scores;
        for (const PatchRef& patch : img.patches) {
            const auto it = row_of_patch.find(patch.patch_id);
            if (it == row_of_patch.end()) {
                fail("ml", "patch " + patch.patch_id + " missing from the feature matrix");
            }
            const Prediction pred = predict(model, patch_matrix.rows[it->second]);
            PatchScore ps;
            ps.x0 = patch.x0;
            ps.y0 = patch.y0;
            ps.width = patch.width;
            ps.height = patch.height;
            for (const int cls : model.classes) ps.class_scores.push_back(pred.class_scores.at(cls));
            scores.push_back(std::move(ps));
        }
        heatmaps.push_back({img.image_id, saliency_grid(scores, stride)});
    }
    return heatmaps;
}

inline void save_heatmaps(const std::vector<ImageHeatmap>& heatmaps,
                          const std::vector<int>& classes, const std::string& path) {
    CsvWriter out(path);
    std::vector<std::string> header = {"image_id", "row", "col"};
    for (const int c : classes) header.push_back("score_grade" + std::to_string(c));
    out.write_row(header);
    for (const ImageHeatmap& hm : heatmaps) {
        for (std::size_t row = 0; row < hm.grid.n_rows; ++row) {
            for (std::size_t col = 0; col < hm.grid.n_cols; ++col) {
                std::vector<std::string> fields = {hm.image_id, format_u64(row), format_u64(col)};
                if (hm.grid.missing(row, col)) {
                    for (std::size_t c = 0; c < hm.grid.n_classes; ++c) fields.emplace_back("");
                } else {
                    for (std::size_t c = 0; c < hm.grid.n_classes; ++c) {
                        fields.push_back(format_double(hm.grid.at(row, col, c)));
                    }
                }
                out.write_row(fields);
            }
        }
    }
    out.close();
}

}  // namespace cellsna
