#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"

// RBF-kernel soft-margin SVM. Binary subproblems are solved in the dual by an
// SMO solver with maximal-violating-pair working-set selection (second-order
// partner choice), multiclass by one-vs-one with pairwise voting. Features
// are z-scored with statistics fitted on the training rows; constant columns
// are dropped before training. Training is deterministic: selection ties
// break by lower index and no randomized steps are involved.

namespace cellsna {

struct SvmParams {
    double C = 10.0;
    double gamma = 0.1;
    double kkt_tolerance = 1e-3;
    std::uint64_t seed = 0;
};

struct BinaryClassifier {
    int class_pos = 0;  // decision value > 0 votes for class_pos
    int class_neg = 0;
    std::vector<std::vector<double>> support_vectors;  // standardized rows
    std::vector<double> dual_coef;                     // alpha_i * y_i, |coef| <= C
    double bias = 0.0;
};

struct SvmModel {
    std::vector<int> classes;  // ascending
    double C = 0.0;
    double gamma = 0.0;
    double kkt_tolerance = 1e-3;
    std::uint64_t seed = 0;
    std::vector<std::size_t> feature_indices;  // columns of the full layout in use
    std::vector<std::string> feature_names;
    std::vector<double> feature_mean;  // per feature_indices entry
    std::vector<double> feature_std;   // all > 0
    std::vector<BinaryClassifier> pairs;

    nlohmann::json to_json() const {
        nlohmann::json jpairs = nlohmann::json::array();
        for (const BinaryClassifier& p : pairs) {
            jpairs.push_back({{"class_pos", p.class_pos},
                              {"class_neg", p.class_neg},
                              {"bias", p.bias},
                              {"dual_coef", p.dual_coef},
                              {"support_vectors", p.support_vectors}});
        }
        return nlohmann::json{{"format", "cellsna.svm.v1"},
                              {"classes", classes},
                              {"C", C},
                              {"gamma", gamma},
                              {"kkt_tolerance", kkt_tolerance},
                              {"seed", seed},
                              {"feature_indices", feature_indices},
                              {"feature_names", feature_names},
                              {"feature_mean", feature_mean},
                              {"feature_std", feature_std},
                              {"pairs", jpairs}};
    }

    static SvmModel from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "cellsna.svm.v1") fail("parse", "not a cellsna model file");
        SvmModel m;
        m.classes = j.at("classes").get<std::vector<int>>();
        m.C = j.at("C").get<double>();
        m.gamma = j.at("gamma").get<double>();
        m.kkt_tolerance = j.at("kkt_tolerance").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.feature_indices = j.at("feature_indices").get<std::vector<std::size_t>>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
        m.feature_std = j.at("feature_std").get<std::vector<double>>();
        for (const auto& jp : j.at("pairs")) {
            BinaryClassifier p;
            p.class_pos = jp.at("class_pos").get<int>();
            p.class_neg = jp.at("class_neg").get<int>();
            p.bias = jp.at("bias").get<double>();
            p.dual_coef = jp.at("dual_coef").get<std::vector<double>>();
            p.support_vectors = jp.at("support_vectors").get<std::vector<std::vector<double>>>();
            m.pairs.push_back(std::move(p));
        }
        return m;
    }

    void save(const std::string& path) const { write_text_file(path, to_json().dump(1) + "\n"); }
    static SvmModel load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    }
};

namespace detail {

inline double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

struct SmoSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    bool converged = false;
};

// Dual SMO on a precomputed kernel. gram is row-major n*n, y in {-1,+1}.
inline SmoSolution smo_solve(const std::vector<double>& gram, const std::vector<int>& y, double C,
                             double tol) {
    const std::size_t n = y.size();
    SmoSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of the dual at alpha = 0
    constexpr double kTau = 1e-12;
    const std::size_t max_iter = std::max<std::size_t>(10'000'000 / std::max<std::size_t>(n, 1), 10'000);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // i: maximal -y g over I_up; M: minimum over I_low
        std::size_t i = n;
        double m_val = -std::numeric_limits<double>::infinity();
        double M_val = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (y[t] > 0 && sol.alpha[t] < C) || (y[t] < 0 && sol.alpha[t] > 0);
            const bool in_low = (y[t] > 0 && sol.alpha[t] > 0) || (y[t] < 0 && sol.alpha[t] < C);
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up && v > m_val) {
                m_val = v;
                i = t;
            }
            if (in_low && v < M_val) M_val = v;
        }
        if (i == n || m_val - M_val < tol) {
            sol.bias = (m_val + M_val) / 2.0;
            sol.converged = true;
            return sol;
        }

        // j: second-order partner, largest violation gain per unit curvature
        std::size_t j = n;
        double best_gain = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_low = (y[t] > 0 && sol.alpha[t] > 0) || (y[t] < 0 && sol.alpha[t] < C);
            if (!in_low) continue;
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (v >= m_val) continue;
            double quad = gram[i * n + i] + gram[t * n + t] - 2.0 * gram[i * n + t];
            if (quad <= kTau) quad = kTau;
            const double diff = m_val - v;
            const double gain = diff * diff / quad;
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
            }
        }
        if (j == n) {
            sol.bias = (m_val + M_val) / 2.0;
            sol.converged = true;
            return sol;
        }

        // step t >= 0 along (alpha_i += y_i t, alpha_j -= y_j t)
        double quad = gram[i * n + i] + gram[j * n + j] - 2.0 * gram[i * n + j];
        if (quad <= kTau) quad = kTau;
        const double e_i = static_cast<double>(y[i]) * grad[i];
        const double e_j = static_cast<double>(y[j]) * grad[j];
        double step = (e_j - e_i) / quad;
        const double room_i = y[i] > 0 ? C - sol.alpha[i] : sol.alpha[i];
        const double room_j = y[j] > 0 ? sol.alpha[j] : C - sol.alpha[j];
        step = std::min(step, std::min(room_i, room_j));
        if (step <= 0.0) {
            sol.bias = (m_val + M_val) / 2.0;
            return sol;  // numerically stuck; KKT audit will flag if material
        }
        sol.alpha[i] += static_cast<double>(y[i]) * step;
        sol.alpha[j] -= static_cast<double>(y[j]) * step;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += static_cast<double>(y[t]) * step * (gram[i * n + t] - gram[j * n + t]);
        }
    }
    return sol;  // not converged
}

}  // namespace detail

// Trains one-vs-one RBF classifiers on the selected columns of X. Labels must
// span at least two classes; constant selected columns are dropped.
inline SvmModel train_svm(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                          const SvmParams& params,
                          std::vector<std::size_t> selected_columns = {},
                          const std::vector<std::string>& column_names = {}) {
    if (X.empty() || X.size() != y.size()) fail("ml", "feature matrix and labels disagree");
    if (!(params.C > 0.0) || !(params.gamma > 0.0)) fail("config", "C and gamma must be > 0");
    const std::size_t width = X.front().size();
    for (const auto& row : X) {
        if (row.size() != width) fail("layout mismatch", "ragged feature matrix");
        for (const double v : row) {
            if (!std::isfinite(v)) fail("invalid feature", "non-finite feature value");
        }
    }
    if (selected_columns.empty()) {
        selected_columns.resize(width);
        for (std::size_t c = 0; c < width; ++c) selected_columns[c] = c;
    }
    for (const std::size_t c : selected_columns) {
        if (c >= width) fail("ml", "selected column out of range");
    }

    std::set<int> class_set(y.begin(), y.end());
    if (class_set.size() < 2) fail("single class", "training needs at least two classes");

    SvmModel model;
    model.classes.assign(class_set.begin(), class_set.end());
    model.C = params.C;
    model.gamma = params.gamma;
    model.kkt_tolerance = params.kkt_tolerance;
    model.seed = params.seed;

    // standardization on the training rows; constant columns dropped
    const std::size_t n = X.size();
    for (const std::size_t c : selected_columns) {
        double mean = 0.0;
        for (const auto& row : X) mean += row[c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : X) var += (row[c] - mean) * (row[c] - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd > 0.0) {
            model.feature_indices.push_back(c);
            model.feature_mean.push_back(mean);
            model.feature_std.push_back(sd);
            if (c < column_names.size()) model.feature_names.push_back(column_names[c]);
        }
    }
    if (model.feature_indices.empty()) fail("ml", "all selected features are constant");

    auto standardize = [&](const std::vector<double>& row) {
        std::vector<double> out(model.feature_indices.size());
        for (std::size_t k = 0; k < model.feature_indices.size(); ++k) {
            out[k] = (row[model.feature_indices[k]] - model.feature_mean[k]) / model.feature_std[k];
        }
        return out;
    };

    std::vector<std::vector<double>> Z(n);
    for (std::size_t r = 0; r < n; ++r) Z[r] = standardize(X[r]);

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            const int ca = model.classes[a];
            const int cb = model.classes[b];
            std::vector<std::size_t> rows;
            std::vector<int> yy;
            for (std::size_t r = 0; r < n; ++r) {
                if (y[r] == ca || y[r] == cb) {
                    rows.push_back(r);
                    yy.push_back(y[r] == ca ? +1 : -1);
                }
            }
            const std::size_t np = rows.size();
            std::vector<double> gram(np * np);
            for (std::size_t p = 0; p < np; ++p) {
                for (std::size_t q = p; q < np; ++q) {
                    const double k = detail::rbf_kernel(Z[rows[p]], Z[rows[q]], params.gamma);
                    gram[p * np + q] = k;
                    gram[q * np + p] = k;
                }
            }
            const detail::SmoSolution sol = detail::smo_solve(gram, yy, params.C, params.kkt_tolerance);

            BinaryClassifier clf;
            clf.class_pos = ca;
            clf.class_neg = cb;
            clf.bias = sol.bias;
            for (std::size_t p = 0; p < np; ++p) {
                if (sol.alpha[p] > 0.0) {
                    clf.support_vectors.push_back(Z[rows[p]]);
                    clf.dual_coef.push_back(sol.alpha[p] * static_cast<double>(yy[p]));
                }
            }
            model.pairs.push_back(std::move(clf));
        }
    }
    return model;
}

struct Prediction {
    int grade = 0;
    std::map<int, double> class_scores;  // summed signed decision values
    std::map<int, int> votes;
};

inline double decision_value(const SvmModel& model, const BinaryClassifier& clf,
                             const std::vector<double>& z) {
    double f = clf.bias;
    for (std::size_t s = 0; s < clf.support_vectors.size(); ++s) {
        f += clf.dual_coef[s] * detail::rbf_kernel(clf.support_vectors[s], z, model.gamma);
    }
    return f;
}

// Applies the stored standardization and one-vs-one vote. row must cover the
// full layout the model was trained against.
inline Prediction predict(const SvmModel& model, const std::vector<double>& row) {
    for (const std::size_t c : model.feature_indices) {
        if (c >= row.size()) fail("layout mismatch", "feature row shorter than the model layout");
    }
    std::vector<double> z(model.feature_indices.size());
    for (std::size_t k = 0; k < model.feature_indices.size(); ++k) {
        z[k] = (row[model.feature_indices[k]] - model.feature_mean[k]) / model.feature_std[k];
    }

    Prediction pred;
    for (const int c : model.classes) {
        pred.class_scores[c] = 0.0;
        pred.votes[c] = 0;
    }
    for (const BinaryClassifier& clf : model.pairs) {
        const double f = decision_value(model, clf, z);
        pred.class_scores[clf.class_pos] += f;
        pred.class_scores[clf.class_neg] -= f;
        pred.votes[f > 0.0 ? clf.class_pos : clf.class_neg] += 1;
    }

    int best = model.classes.front();
    for (const int c : model.classes) {  // ascending: ties keep the lower grade
        if (pred.votes[c] > pred.votes[best] ||
            (pred.votes[c] == pred.votes[best] && pred.class_scores[c] > pred.class_scores[best])) {
            best = c;
        }
    }
    pred.grade = best;
    return pred;
}

}  // namespace cellsna
