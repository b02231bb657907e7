#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/aggregation.hpp"
#include "cellsna/features.hpp"
#include "cellsna/manifest.hpp"
#include "cellsna/random.hpp"
#include "cellsna/stats.hpp"
#include "cellsna/svm.hpp"

// Image-level model selection: 3-fold cross-validation with a nested 2-fold
// grid search over (C, gamma), and greedy sequential forward feature
// selection. Folds live at image level; all patches of an image stay on one
// side of every split.

namespace cellsna {

// Rows plus the image bookkeeping evaluation needs. patch_level marks
// datasets whose rows are patches: image predictions then go through
// majority voting over the image's rows.
struct MlDataset {
    FeatureLayout layout;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_image;  // owning image per row
    std::map<std::string, int> image_grade;
    std::map<std::string, int> image_fold;
    bool patch_level = false;

    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        names.reserve(layout.size());
        for (const FeatureName& f : layout) names.push_back(f.column_name());
        return names;
    }

    std::vector<std::string> images_in_fold(int fold) const {
        std::vector<std::string> out;
        for (const auto& [image_id, f] : image_fold) {
            if (f == fold) out.push_back(image_id);
        }
        return out;
    }

    // One synthetic image per row: the plain (X, y, folds) view used by unit
    // fixtures and feature-selection tests.
    static MlDataset image_per_row(const std::vector<std::vector<double>>& X,
                                   const std::vector<int>& y, const std::vector<int>& folds,
                                   FeatureLayout layout = {}) {
        if (X.size() != y.size() || X.size() != folds.size()) fail("ml", "dataset sizes disagree");
        MlDataset ds;
        ds.layout = std::move(layout);
        ds.rows = X;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const std::string id = "row_" + format_u64(i);
            ds.row_image.push_back(id);
            ds.image_grade[id] = y[i];
            ds.image_fold[id] = folds[i];
        }
        return ds;
    }
};

// Binds a feature matrix to the manifest's grades and folds. Patch-level
// matrices map sample ids through the manifest's patch table; image-level
// matrices use image ids directly.
inline MlDataset build_ml_dataset(const DatasetManifest& manifest, const FeatureMatrix& matrix) {
    MlDataset ds;
    ds.layout = matrix.layout;
    ds.patch_level = matrix.level == FeatureLevel::kPatch;

    std::map<std::string, std::string> patch_to_image;
    for (const ImageEntry& img : manifest.images) {
        for (const PatchRef& p : img.patches) patch_to_image[p.patch_id] = img.image_id;
        ds.image_grade[img.image_id] = img.grade;
        const auto it = manifest.folds.find(img.image_id);
        if (it == manifest.folds.end()) fail("ml", "image " + img.image_id + " has no fold");
        ds.image_fold[img.image_id] = it->second;
    }
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        const std::string& sid = matrix.sample_ids[r];
        std::string image_id;
        if (ds.patch_level) {
            const auto it = patch_to_image.find(sid);
            if (it == patch_to_image.end()) fail("ml", "sample " + sid + " is not a manifest patch");
            image_id = it->second;
        } else {
            if (ds.image_grade.count(sid) == 0) fail("ml", "sample " + sid + " is not a manifest image");
            image_id = sid;
        }
        ds.rows.push_back(matrix.rows[r]);
        ds.row_image.push_back(image_id);
    }
    return ds;
}

struct ParamGrid {
    std::vector<double> C_values = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_values = {0.001, 0.01, 0.1, 1.0};

    nlohmann::json to_json() const {
        return nlohmann::json{{"C", C_values}, {"gamma", gamma_values}};
    }
    static ParamGrid from_json(const nlohmann::json& j) {
        ParamGrid g;
        if (j.contains("C")) g.C_values = j.at("C").get<std::vector<double>>();
        if (j.contains("gamma")) g.gamma_values = j.at("gamma").get<std::vector<double>>();
        if (g.C_values.empty() || g.gamma_values.empty()) fail("config", "empty parameter grid");
        return g;
    }
};

struct FoldOutcome {
    int fold = 0;
    double accuracy = 0.0;
    double chosen_C = 0.0;
    double chosen_gamma = 0.0;
};

struct CvReport {
    std::string scenario;
    std::vector<FoldOutcome> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::array<std::array<std::uint32_t, 3>, 3> confusion{};  // [true-1][pred-1]
    std::vector<std::string> selected_features;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        nlohmann::json jfolds = nlohmann::json::array();
        for (const FoldOutcome& f : folds) {
            jfolds.push_back({{"fold", f.fold},
                              {"accuracy", f.accuracy},
                              {"C", f.chosen_C},
                              {"gamma", f.chosen_gamma}});
        }
        nlohmann::json jconf = nlohmann::json::array();
        for (const auto& row : confusion) jconf.push_back(row);
        return nlohmann::json{{"format", "cellsna.cvreport.v1"},
                              {"scenario", scenario},
                              {"folds", jfolds},
                              {"mean_accuracy", mean_accuracy},
                              {"std_accuracy", std_accuracy},
                              {"confusion", jconf},
                              {"selected_features", selected_features},
                              {"warnings", warnings},
                              {"seed", seed}};
    }
};

namespace detail {

struct ImagePrediction {
    int grade = 0;
    std::map<int, double> class_scores;
};

// Predicts one image: direct for image-level rows, majority vote over the
// image's patch rows otherwise.
inline ImagePrediction predict_image(const SvmModel& model, const MlDataset& ds,
                                     const std::vector<std::size_t>& image_rows) {
    ImagePrediction out;
    if (image_rows.empty()) fail("ml", "image has no feature rows");
    std::vector<int> labels;
    for (const std::size_t r : image_rows) {
        const Prediction p = predict(model, ds.rows[r]);
        labels.push_back(p.grade);
        for (const auto& [cls, score] : p.class_scores) out.class_scores[cls] += score;
    }
    out.grade = labels.size() == 1 ? labels[0] : majority_vote(labels, &out.class_scores);
    return out;
}

struct SplitEval {
    double accuracy = 0.0;
    std::map<std::string, ImagePrediction> predictions;
};

// Trains on train_images and scores image-level accuracy on test_images.
inline SplitEval evaluate_split(const MlDataset& ds, const std::set<std::string>& train_images,
                                const std::vector<std::string>& test_images, const SvmParams& params,
                                const std::vector<std::size_t>& selected_columns) {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        if (train_images.count(ds.row_image[r])) {
            X.push_back(ds.rows[r]);
            y.push_back(ds.image_grade.at(ds.row_image[r]));
        }
    }
    const SvmModel model = train_svm(X, y, params, selected_columns, {});

    std::map<std::string, std::vector<std::size_t>> rows_of;
    for (std::size_t r = 0; r < ds.rows.size(); ++r) rows_of[ds.row_image[r]].push_back(r);

    SplitEval eval;
    std::size_t correct = 0;
    for (const std::string& image_id : test_images) {
        const auto it = rows_of.find(image_id);
        if (it == rows_of.end()) fail("ml", "image " + image_id + " has no feature rows");
        ImagePrediction pred = predict_image(model, ds, it->second);
        if (pred.grade == ds.image_grade.at(image_id)) ++correct;
        eval.predictions.emplace(image_id, std::move(pred));
    }
    eval.accuracy = test_images.empty()
                        ? 0.0
                        : static_cast<double>(correct) / static_cast<double>(test_images.size());
    return eval;
}

inline std::set<int> grades_of(const MlDataset& ds, const std::set<std::string>& images) {
    std::set<int> grades;
    for (const std::string& id : images) grades.insert(ds.image_grade.at(id));
    return grades;
}

// Stratified two-way split of the given images, seeded.
inline std::array<std::set<std::string>, 2> inner_split(const MlDataset& ds,
                                                        const std::set<std::string>& images,
                                                        std::uint64_t seed) {
    std::map<int, std::vector<std::string>> by_grade;
    for (const std::string& id : images) by_grade[ds.image_grade.at(id)].push_back(id);
    std::array<std::set<std::string>, 2> halves;
    for (auto& [grade, ids] : by_grade) {
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(grade)));
        rng.shuffle(ids);
        for (std::size_t i = 0; i < ids.size(); ++i) halves[i % 2].insert(ids[i]);
    }
    return halves;
}

}  // namespace detail

// 3-fold cross-validation: per outer fold, a nested stratified 2-fold grid
// search on the training images picks (C, gamma), the refit model is scored
// on the held-out fold. Folds whose held-out images miss a dataset grade (or
// whose training side collapses to one class) are skipped with a warning.
inline CvReport cross_validate(const MlDataset& ds, const ParamGrid& grid, std::uint64_t seed,
                               std::vector<std::size_t> selected_columns = {},
                               const std::string& scenario_name = "") {
    CvReport report;
    report.scenario = scenario_name;
    report.seed = seed;

    std::set<int> all_grades;
    for (const auto& [id, g] : ds.image_grade) {
        (void)id;
        all_grades.insert(g);
    }

    std::vector<double> accuracies;
    for (int fold = 0; fold < 3; ++fold) {
        std::vector<std::string> test_images = ds.images_in_fold(fold);
        std::sort(test_images.begin(), test_images.end());
        std::set<std::string> train_images;
        for (const auto& [id, f] : ds.image_fold) {
            if (f != fold) train_images.insert(id);
        }
        if (test_images.empty()) {
            report.warnings.push_back("fold " + std::to_string(fold) + " skipped: no held-out images");
            continue;
        }
        const std::set<int> test_grades = detail::grades_of(
            ds, std::set<std::string>(test_images.begin(), test_images.end()));
        if (test_grades != all_grades) {
            report.warnings.push_back("fold " + std::to_string(fold) +
                                      " skipped: missing class in held-out images");
            continue;
        }
        if (detail::grades_of(ds, train_images).size() < 2) {
            report.warnings.push_back("fold " + std::to_string(fold) +
                                      " skipped: training side has fewer than two classes");
            continue;
        }

        // nested grid search
        const auto halves = detail::inner_split(ds, train_images, derive_seed(seed, 100 + fold));
        double best_score = -1.0;
        double best_C = grid.C_values.front();
        double best_gamma = grid.gamma_values.front();
        for (const double C : grid.C_values) {
            for (const double gamma : grid.gamma_values) {
                double score_sum = 0.0;
                int usable = 0;
                for (int half = 0; half < 2; ++half) {
                    const std::set<std::string>& inner_test = halves[half];
                    const std::set<std::string>& inner_train = halves[1 - half];
                    if (inner_test.empty() || detail::grades_of(ds, inner_train).size() < 2) continue;
                    std::vector<std::string> inner_test_ids(inner_test.begin(), inner_test.end());
                    const SvmParams params{C, gamma, 1e-3, seed};
                    score_sum +=
                        detail::evaluate_split(ds, inner_train, inner_test_ids, params, selected_columns)
                            .accuracy;
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
        if (best_score < 0.0) {
            report.warnings.push_back("fold " + std::to_string(fold) +
                                      ": degenerate inner split, grid defaults used");
        }

        const SvmParams params{best_C, best_gamma, 1e-3, seed};
        const detail::SplitEval eval =
            detail::evaluate_split(ds, train_images, test_images, params, selected_columns);
        for (const std::string& image_id : test_images) {
            const int truth = ds.image_grade.at(image_id);
            const int pred = eval.predictions.at(image_id).grade;
            if (truth >= 1 && truth <= 3 && pred >= 1 && pred <= 3) {
                report.confusion[truth - 1][pred - 1] += 1;
            }
        }
        report.folds.push_back({fold, eval.accuracy, best_C, best_gamma});
        accuracies.push_back(eval.accuracy);
    }

    if (!accuracies.empty()) {
        report.mean_accuracy = mean_of(accuracies);
        report.std_accuracy = population_std(accuracies);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Sequential forward selection: greedily adds the feature that maximizes the
// 3-fold image-level accuracy (ties -> lower feature index) until
// max_features is reached or `patience` consecutive steps bring no
// improvement. The returned prefix is the shortest one achieving the best
// accuracy seen; the full curve is kept for plotting.

struct SfsStep {
    std::size_t feature_index = 0;
    std::string feature_name;
    double accuracy = 0.0;
};

struct SfsResult {
    std::vector<std::size_t> selected;  // best prefix, in selection order
    std::vector<std::string> selected_names;
    std::vector<SfsStep> curve;  // one entry per greedy step
};

namespace detail {

// Mean image-level accuracy over the usable folds for one column subset.
inline double sfs_criterion(const MlDataset& ds, const std::vector<std::size_t>& columns,
                            const SvmParams& params) {
    std::set<int> all_grades;
    for (const auto& [id, g] : ds.image_grade) {
        (void)id;
        all_grades.insert(g);
    }
    double acc_sum = 0.0;
    int usable = 0;
    for (int fold = 0; fold < 3; ++fold) {
        std::vector<std::string> test_images = ds.images_in_fold(fold);
        std::sort(test_images.begin(), test_images.end());
        if (test_images.empty()) continue;
        std::set<std::string> train_images;
        for (const auto& [id, f] : ds.image_fold) {
            if (f != fold) train_images.insert(id);
        }
        if (grades_of(ds, train_images).size() < 2) continue;
        acc_sum += evaluate_split(ds, train_images, test_images, params, columns).accuracy;
        ++usable;
    }
    if (usable == 0) fail("ml", "no usable folds for feature selection");
    return acc_sum / usable;
}

// A column is viable if it is not constant across the dataset.
inline bool column_varies(const MlDataset& ds, std::size_t column) {
    for (std::size_t r = 1; r < ds.rows.size(); ++r) {
        if (ds.rows[r][column] != ds.rows[0][column]) return true;
    }
    return false;
}

}  // namespace detail

inline SfsResult sequential_forward_selection(const MlDataset& ds, const SvmParams& params,
                                              std::size_t max_features = 30,
                                              std::size_t patience = 5) {
    if (max_features < 1) fail("config", "max_features must be >= 1");
    if (ds.rows.empty()) fail("ml", "empty dataset");
    const std::size_t width = ds.rows.front().size();
    const auto names = ds.column_names();

    SfsResult result;
    std::vector<std::size_t> current;
    std::vector<bool> used(width, false);
    double best_so_far = -1.0;
    std::size_t best_prefix = 0;
    std::size_t stale_steps = 0;

    while (current.size() < std::min(max_features, width) && stale_steps < patience) {
        std::size_t best_feature = width;
        double best_acc = -1.0;
        for (std::size_t c = 0; c < width; ++c) {
            if (used[c] || !detail::column_varies(ds, c)) continue;
            std::vector<std::size_t> candidate = current;
            candidate.push_back(c);
            const double acc = detail::sfs_criterion(ds, candidate, params);
            if (acc > best_acc) {  // ties keep the earlier (lower) index
                best_acc = acc;
                best_feature = c;
            }
        }
        if (best_feature == width) break;  // no viable candidate left

        current.push_back(best_feature);
        used[best_feature] = true;
        result.curve.push_back({best_feature, best_feature < names.size() ? names[best_feature] : "",
                                best_acc});
        if (best_acc > best_so_far) {
            best_so_far = best_acc;
            best_prefix = current.size();
            stale_steps = 0;
        } else {
            ++stale_steps;
        }
    }

    result.selected.assign(current.begin(), current.begin() + best_prefix);
    for (const std::size_t c : result.selected) {
        result.selected_names.push_back(c < names.size() ? names[c] : "");
    }
    return result;
}

inline void save_sfs_curve(const SfsResult& sfs, const std::string& path) {
    CsvWriter out(path);
    out.write_row({"n_features", "feature_index", "feature_name", "mean_accuracy"});
    for (std::size_t i = 0; i < sfs.curve.size(); ++i) {
        out.write_row({format_u64(i + 1), format_u64(sfs.curve[i].feature_index),
                       sfs.curve[i].feature_name, format_double(sfs.curve[i].accuracy)});
    }
    out.close();
}

}  // namespace cellsna
