#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/matrix.hpp"

namespace wavefis {

enum class Task { regression, classification };

inline const char* task_name(Task t) {
    return t == Task::regression ? "regression" : "classification";
}

inline Task parse_task(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "classification") return Task::classification;
    fail(Errc::invalid_config, "unknown task '" + s + "'");
}

/// Multivariate economic time series: T steps by d channels.
/// Immutable after construction through validate_series.
struct EconomicSeries {
    Matrix values;                           // T x d
    std::vector<std::string> channel_names;  // d unique names
    long start_index = 0;
    std::string step = "1d";

    int length() const { return values.rows(); }
    int channels() const { return values.cols(); }

    int channel_index(const std::string& name) const {
        for (size_t i = 0; i < channel_names.size(); ++i)
            if (channel_names[i] == name) return static_cast<int>(i);
        fail(Errc::invalid_config, "unknown channel '" + name + "'");
    }
};

/// One training example: a fixed-length input window plus its target.
struct SupervisedWindow {
    EconomicSeries input;
    double target = 0.0;
};

/// Rejects malformed data instead of repairing it.
inline EconomicSeries validate_series(const Matrix& raw, std::vector<std::string> names,
                                      long start_index = 0, std::string step = "1d") {
    if (raw.rows() < 2) fail(Errc::too_short, "need T >= 2, got T=" + std::to_string(raw.rows()));
    if (raw.cols() < 1) fail(Errc::dimension_mismatch, "need d >= 1");
    if (static_cast<int>(names.size()) != raw.cols())
        fail(Errc::dimension_mismatch, std::to_string(names.size()) + " names for " +
                                           std::to_string(raw.cols()) + " channels");
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second) fail(Errc::dimension_mismatch, "duplicate channel '" + n + "'");
    for (int r = 0; r < raw.rows(); ++r)
        for (int c = 0; c < raw.cols(); ++c)
            if (!std::isfinite(raw(r, c)))
                fail(Errc::non_finite, "non-finite value at row " + std::to_string(r) + ", col " +
                                           std::to_string(c));
    return EconomicSeries{raw, std::move(names), start_index, std::move(step)};
}

/// Per-channel affine record sufficient to invert standardization.
struct ChannelScaling {
    double mean = 0.0;
    double scale = 1.0;  // sample standard deviation, or 1 for constant channels
    bool constant = false;
};

struct StandardizeResult {
    EconomicSeries series;
    std::vector<ChannelScaling> record;
};

/// Maps each channel to mean 0 / sd 1 (sample sd, T-1 denominator).
/// Constant channels become all-zeros with scale 1 rather than erroring.
inline StandardizeResult standardize(const EconomicSeries& in) {
    const int t_len = in.length(), d = in.channels();
    StandardizeResult out{in, std::vector<ChannelScaling>(d)};
    for (int c = 0; c < d; ++c) {
        double mean = 0.0;
        for (int r = 0; r < t_len; ++r) mean += in.values(r, c);
        mean /= t_len;
        double ss = 0.0;
        for (int r = 0; r < t_len; ++r) {
            const double dev = in.values(r, c) - mean;
            ss += dev * dev;
        }
        const double sd = std::sqrt(ss / (t_len - 1));
        ChannelScaling& rec = out.record[c];
        if (sd < 1e-12) {
            rec = {mean, 1.0, true};
            for (int r = 0; r < t_len; ++r) out.series.values(r, c) = 0.0;
        } else {
            rec = {mean, sd, false};
            for (int r = 0; r < t_len; ++r)
                out.series.values(r, c) = (in.values(r, c) - mean) / sd;
        }
    }
    return out;
}

inline EconomicSeries invert_standardize(const EconomicSeries& z,
                                         const std::vector<ChannelScaling>& record) {
    if (static_cast<int>(record.size()) != z.channels())
        fail(Errc::dimension_mismatch, "scaling record does not match channel count");
    EconomicSeries out = z;
    for (int c = 0; c < z.channels(); ++c)
        for (int r = 0; r < z.length(); ++r)
            out.values(r, c) = z.values(r, c) * record[c].scale + record[c].mean;
    return out;
}

inline void check_window_shape(int series_len, int window, int horizon, int dyadic_depth) {
    if (window < 2) fail(Errc::invalid_config, "window must be >= 2");
    if (horizon < 1) fail(Errc::invalid_config, "horizon must be >= 1");
    const int block = 1 << dyadic_depth;
    if (window % block != 0)
        fail(Errc::window_not_dyadic, "window " + std::to_string(window) +
                                          " is not a multiple of 2^" +
                                          std::to_string(dyadic_depth));
    if (window + horizon > series_len)
        fail(Errc::window_too_long, "window+horizon " + std::to_string(window + horizon) +
                                        " exceeds series length " + std::to_string(series_len));
}

/// Provenance of one supervised window within a panel dataset.
struct WindowMeta {
    std::string household_id;
    long start = 0;  // day index of the first input row
};

/// A flat list of supervised windows plus the shared shape/provenance data
/// the training and evaluation pipelines need.
struct WindowDataset {
    std::vector<SupervisedWindow> windows;
    std::vector<WindowMeta> meta;  // parallel to windows
    std::vector<std::string> channel_names;
    int window = 0;
    int horizon = 0;
    std::string target_channel;
    Task task = Task::classification;
};

/// Sliding windows with stride 1. Regression targets take the target channel
/// at offset window+horizon-1; classification targets take the max label over
/// the horizon steps after the window.
inline std::vector<SupervisedWindow> make_windows(const EconomicSeries& series, int window,
                                                  int horizon, const std::string& target_channel,
                                                  Task task, int dyadic_depth) {
    check_window_shape(series.length(), window, horizon, dyadic_depth);
    const int target_col = series.channel_index(target_channel);
    const int count = series.length() - window - horizon + 1;
    std::vector<SupervisedWindow> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Matrix vals(window, series.channels());
        for (int r = 0; r < window; ++r)
            for (int c = 0; c < series.channels(); ++c) vals(r, c) = series.values(i + r, c);
        double target;
        if (task == Task::regression) {
            target = series.values(i + window + horizon - 1, target_col);
        } else {
            target = 0.0;
            for (int h = 0; h < horizon; ++h) {
                const double v = series.values(i + window + h, target_col);
                if (v != 0.0 && v != 1.0)
                    fail(Errc::invalid_config, "classification labels must be exactly 0 or 1");
                target = std::max(target, v);
            }
        }
        out.push_back(SupervisedWindow{
            EconomicSeries{std::move(vals), series.channel_names, series.start_index + i,
                           series.step},
            target});
    }
    return out;
}

}  // namespace wavefis
