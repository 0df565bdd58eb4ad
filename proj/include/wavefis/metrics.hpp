#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wavefis/datagen.hpp"
#include "wavefis/errors.hpp"

namespace wavefis {

inline double rmse(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.empty()) fail(Errc::empty_input, "rmse over empty input");
    if (predictions.size() != targets.size())
        fail(Errc::length_mismatch, "predictions and targets differ in length");
    double ss = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(predictions.size()));
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // threshold descending, (0,0) .. (1,1)
    double auc = 0.0;
};

inline void check_binary_labels(const std::vector<double>& scores,
                                const std::vector<double>& labels) {
    if (scores.empty()) fail(Errc::empty_input, "no scores");
    if (scores.size() != labels.size())
        fail(Errc::length_mismatch, "scores and labels differ in length");
    size_t positives = 0;
    for (double l : labels) {
        if (l != 0.0 && l != 1.0) fail(Errc::invalid_config, "labels must be exactly 0 or 1");
        if (l == 1.0) ++positives;
    }
    if (positives == 0 || positives == labels.size())
        fail(Errc::one_class_only, "need at least one positive and one negative label");
}

/// Threshold sweep over the unique scores, ties grouped into one step, AUC by
/// trapezoidal integration (equivalent to the pairwise estimator with ties
/// counting one half).
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    check_binary_labels(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double total_pos = 0.0;
    for (double l : labels) total_pos += l;
    const double total_neg = static_cast<double>(n) - total_pos;

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    double tp = 0.0, fp = 0.0, auc = 0.0;
    size_t i = 0;
    while (i < n) {
        const double threshold = scores[order[i]];
        double group_tp = 0.0, group_fp = 0.0;
        while (i < n && scores[order[i]] == threshold) {
            if (labels[order[i]] == 1.0)
                group_tp += 1.0;
            else
                group_fp += 1.0;
            ++i;
        }
        const double prev_tpr = tp / total_pos, prev_fpr = fp / total_neg;
        tp += group_tp;
        fp += group_fp;
        const double tpr = tp / total_pos, fpr = fp / total_neg;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        curve.points.push_back({fpr, tpr, threshold});
    }
    curve.auc = auc;
    return curve;
}

/// Harmonic mean of precision and recall at a fixed decision threshold
/// (score >= threshold predicts positive). Degenerate cases return 0.
inline double f1(const std::vector<double>& scores, const std::vector<double>& labels,
                 double threshold) {
    check_binary_labels(scores, labels);
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (pred && labels[i] == 1.0) tp += 1.0;
        if (pred && labels[i] == 0.0) fp += 1.0;
        if (!pred && labels[i] == 1.0) fn += 1.0;
    }
    if (tp == 0.0) return 0.0;
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

/// Per-window model score attached to the day the decision applies to (the
/// last day of the input window).
struct WindowScore {
    int household = 0;  // index into the panels list
    long flag_day = 0;
    double score = 0.0;
};

struct DaiSweep {
    std::vector<double> thresholds;
    std::vector<double> dai_values;  // NaN where nothing was flagged/measurable
    std::vector<int> n_flagged;
    std::vector<int> n_skipped;  // flagged but without enough history either side
};

namespace detail {

inline double ols_slope(const Matrix& values, int col, int day_begin, int day_end_excl) {
    const int n = day_end_excl - day_begin;
    double mean_x = 0.0, mean_y = 0.0;
    for (int t = day_begin; t < day_end_excl; ++t) {
        mean_x += t;
        mean_y += values(t, col);
    }
    mean_x /= n;
    mean_y /= n;
    double num = 0.0, den = 0.0;
    for (int t = day_begin; t < day_end_excl; ++t) {
        const double dx = t - mean_x;
        num += dx * (values(t, col) - mean_y);
        den += dx * dx;
    }
    return num / den;
}

}  // namespace detail

/// Debt Acceleration Index sweep. At each threshold a household is flagged at
/// its first window with score >= threshold; its DAI compares the revolving
/// balance slope over the slope_window days after the flag day against the
/// slope before it, damped by +1 in the denominator:
///     DAI_h = (S_post - S_pre) / (|S_pre| + 1)
/// DAI(threshold) is the mean over flagged households with enough history on
/// both sides; the others are counted in n_skipped.
inline DaiSweep dai_sweep(const std::vector<HouseholdPanel>& panels,
                          const std::vector<WindowScore>& scores,
                          const std::vector<double>& thresholds, int slope_window = 14) {
    if (slope_window < 2) fail(Errc::invalid_config, "slope window must be >= 2");
    for (size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0.1 - 1e-9 || thresholds[i] > 0.9 + 1e-9)
            fail(Errc::invalid_config, "thresholds must lie in [0.1, 0.9]");
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            fail(Errc::invalid_config, "thresholds must be strictly increasing");
    }

    // per-household scores in day order
    std::vector<std::vector<const WindowScore*>> by_household(panels.size());
    for (const WindowScore& s : scores) {
        if (s.household < 0 || s.household >= static_cast<int>(panels.size()))
            fail(Errc::dimension_mismatch, "score refers to a household outside the panel list");
        by_household[s.household].push_back(&s);
    }
    for (auto& list : by_household)
        std::sort(list.begin(), list.end(), [](const WindowScore* a, const WindowScore* b) {
            return a->flag_day < b->flag_day;
        });

    DaiSweep sweep;
    sweep.thresholds = thresholds;
    for (double tau : thresholds) {
        int flagged = 0, skipped = 0, measured = 0;
        double dai_sum = 0.0;
        for (size_t h = 0; h < panels.size(); ++h) {
            const WindowScore* first = nullptr;
            for (const WindowScore* s : by_household[h]) {
                if (s->score >= tau) {
                    first = s;
                    break;
                }
            }
            if (!first) continue;
            ++flagged;
            const long f = first->flag_day;
            const int n_days = panels[h].values.rows();
            if (f - slope_window < 0 || f + slope_window > n_days - 1) {
                ++skipped;
                continue;
            }
            const double pre = detail::ols_slope(panels[h].values, kBalance,
                                                 static_cast<int>(f) - slope_window,
                                                 static_cast<int>(f));
            const double post = detail::ols_slope(panels[h].values, kBalance,
                                                  static_cast<int>(f) + 1,
                                                  static_cast<int>(f) + 1 + slope_window);
            dai_sum += (post - pre) / (std::abs(pre) + 1.0);
            ++measured;
        }
        sweep.n_flagged.push_back(flagged);
        sweep.n_skipped.push_back(skipped);
        sweep.dai_values.push_back(measured > 0 ? dai_sum / measured
                                                : std::numeric_limits<double>::quiet_NaN());
    }
    return sweep;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(Errc::length_mismatch, "spearman inputs differ in length");
    if (x.size() < 2) fail(Errc::empty_input, "spearman needs at least 2 points");
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= rx.size();
    my /= ry.size();
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

}  // namespace wavefis
