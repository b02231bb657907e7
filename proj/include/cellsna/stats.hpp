#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cellsna/core.hpp"
#include "cellsna/measure_table.hpp"

namespace cellsna {

inline double mean_of(const std::vector<double>& values) {
    if (values.empty()) fail("stats", "mean of empty vector");
    double acc = 0.0;
    for (const double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

inline double population_std(const std::vector<double>& values) {
    const double mu = mean_of(values);
    double acc = 0.0;
    for (const double v : values) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

inline double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) fail("stats", "sample variance needs >= 2 values");
    const double mu = mean_of(values);
    double acc = 0.0;
    for (const double v : values) acc += (v - mu) * (v - mu);
    return acc / static_cast<double>(values.size() - 1);
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction;
// full double accuracy for the t CDF use below.

namespace detail {

inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3.0e-16;
    constexpr double kFpMin = 1.0e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) fail("stats", "incomplete beta argument outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::betacf(a, b, x) / a;
    }
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t statistic with df degrees of freedom:
// p = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) fail("stats", "degrees of freedom must be > 0");
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

// ---------------------------------------------------------------------------
// Pooled-variance two-sample Student's t-test.

struct TtestResult {
    bool defined = false;          // both groups had >= 2 samples
    bool exact_separation = false; // zero pooled variance with unequal means
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

inline TtestResult students_ttest(const std::vector<double>& group_a,
                                  const std::vector<double>& group_b) {
    TtestResult res;
    const std::size_t na = group_a.size();
    const std::size_t nb = group_b.size();
    if (na < 2 || nb < 2) return res;
    res.defined = true;
    res.df = static_cast<double>(na + nb - 2);

    const double ma = mean_of(group_a);
    const double mb = mean_of(group_b);
    const double va = sample_variance(group_a);
    const double vb = sample_variance(group_b);
    const double pooled =
        ((static_cast<double>(na) - 1.0) * va + (static_cast<double>(nb) - 1.0) * vb) / res.df;

    if (pooled <= 0.0) {
        if (ma == mb) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.exact_separation = true;
            res.t = ma > mb ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
            res.p = 0.0;
        }
        return res;
    }
    const double se = std::sqrt(pooled * (1.0 / static_cast<double>(na) + 1.0 / static_cast<double>(nb)));
    res.t = (ma - mb) / se;
    res.p = student_t_two_sided_p(res.t, res.df);
    return res;
}

// ---------------------------------------------------------------------------
// Grade-pair comparison table (one t-test per measure and grade pair).

inline constexpr std::array<std::pair<int, int>, 3> kGradePairs = {{{1, 2}, {1, 3}, {2, 3}}};

struct GradeTtestTable {
    // [pair][measure]
    std::array<std::array<TtestResult, kMeasureCount>, 3> cells;
};

// groups: grade -> per-image statistic vectors, one value per image, aligned
// across measures (groups.at(g)[m][i] is measure m of image i).
inline GradeTtestTable grade_ttest(
    const std::map<int, std::array<std::vector<double>, kMeasureCount>>& groups) {
    GradeTtestTable table;
    for (std::size_t pi = 0; pi < kGradePairs.size(); ++pi) {
        const auto [ga, gb] = kGradePairs[pi];
        const auto ia = groups.find(ga);
        const auto ib = groups.find(gb);
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            if (ia == groups.end() || ib == groups.end()) continue;  // stays undefined
            table.cells[pi][m] = students_ttest(ia->second[m], ib->second[m]);
        }
    }
    return table;
}

}  // namespace cellsna
