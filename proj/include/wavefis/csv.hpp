#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wavefis/datagen.hpp"
#include "wavefis/errors.hpp"
#include "wavefis/metrics.hpp"
#include "wavefis/training.hpp"

namespace wavefis {

/// Shortest decimal that parses back to the same double; deterministic, so
/// repeated runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        fail(Errc::csv_format, "bad number '" + s + "' in " + context);
    return v;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::invalid_config, "cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::csv_format, "cannot open '" + path + "'");
    return in;
}

}  // namespace detail

/// Dataset interchange format: one row per (household, day);
/// header `household_id,t,<channel_1>,...,<channel_d>,fraud_label`.
inline void write_panels_csv(const std::string& path, const std::vector<HouseholdPanel>& panels) {
    std::ofstream out = detail::open_out(path);
    out << "household_id,t";
    for (const auto& name : panel_channel_names()) out << ',' << name;
    out << ",fraud_label\n";
    for (const HouseholdPanel& panel : panels) {
        for (int t = 0; t < panel.values.rows(); ++t) {
            out << panel.household_id << ',' << t;
            for (int c = 0; c < panel.values.cols(); ++c)
                out << ',' << format_double(panel.values(t, c));
            out << ',' << panel.labels[t] << '\n';
        }
    }
}

/// Reads the interchange format back into panels. Channel names come from the
/// header; per-household day indices must run contiguously from 0. Fraud
/// events are reconstructed from runs of positive labels; income is unknown.
inline std::vector<HouseholdPanel> read_panels_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(Errc::csv_format, "empty file '" + path + "'");
    const std::vector<std::string> header = detail::split_line(line);
    if (header.size() < 4 || header.front() != "household_id" || header[1] != "t" ||
        header.back() != "fraud_label")
        fail(Errc::csv_format, "expected header household_id,t,<channels...>,fraud_label");
    const int d = static_cast<int>(header.size()) - 3;

    struct Row {
        std::vector<double> channels;
        int label;
    };
    std::vector<HouseholdPanel> panels;
    std::vector<std::vector<Row>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_line(line);
        const std::string where = "line " + std::to_string(line_no);
        if (cells.size() != header.size())
            fail(Errc::csv_format, "wrong cell count at " + where);
        const std::string& id = cells[0];
        if (panels.empty() || panels.back().household_id != id) {
            for (const HouseholdPanel& p : panels)
                if (p.household_id == id)
                    fail(Errc::csv_format, "household '" + id + "' rows are not contiguous");
            panels.push_back(HouseholdPanel{id, Matrix(), {}, {}, 0.0});
            rows.emplace_back();
        }
        const long t = static_cast<long>(parse_double(cells[1], where));
        if (t != static_cast<long>(rows.back().size()))
            fail(Errc::csv_format, "day index " + std::to_string(t) + " out of order at " + where);
        Row row;
        row.channels.resize(d);
        for (int c = 0; c < d; ++c) row.channels[c] = parse_double(cells[2 + c], where);
        const double label = parse_double(cells.back(), where);
        if (label != 0.0 && label != 1.0)
            fail(Errc::csv_format, "fraud_label must be 0 or 1 at " + where);
        row.label = static_cast<int>(label);
        rows.back().push_back(std::move(row));
    }
    if (panels.empty()) fail(Errc::csv_format, "no data rows in '" + path + "'");

    for (size_t p = 0; p < panels.size(); ++p) {
        const auto& src = rows[p];
        HouseholdPanel& panel = panels[p];
        panel.values = Matrix(static_cast<int>(src.size()), d);
        panel.labels.resize(src.size());
        for (size_t t = 0; t < src.size(); ++t) {
            for (int c = 0; c < d; ++c) panel.values(static_cast<int>(t), c) = src[t].channels[c];
            panel.labels[t] = src[t].label;
        }
        for (size_t t = 0; t < src.size(); ++t) {
            if (src[t].label == 1 && (t == 0 || src[t - 1].label == 0)) {
                size_t end = t;
                while (end < src.size() && src[end].label == 1) ++end;
                panel.fraud_events.push_back(
                    {static_cast<int>(t), static_cast<int>(end - t)});
            }
        }
    }
    return panels;
}

inline std::vector<std::string> csv_channel_names(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(Errc::csv_format, "empty file '" + path + "'");
    std::vector<std::string> header = detail::split_line(line);
    if (header.size() < 4) fail(Errc::csv_format, "header too short");
    return {header.begin() + 2, header.end() - 1};
}

inline void write_report_csv(const std::string& path, const TrainReport& report) {
    std::ofstream out = detail::open_out(path);
    out << "epoch,train_loss,val_loss\n";
    for (size_t e = 0; e < report.train_loss.size(); ++e)
        out << (e + 1) << ',' << format_double(report.train_loss[e]) << ','
            << format_double(report.val_loss[e]) << '\n';
}

inline void write_roc_csv(const std::string& path, const RocCurve& curve) {
    std::ofstream out = detail::open_out(path);
    out << "fpr,tpr,threshold\n";
    for (const RocPoint& pt : curve.points)
        out << format_double(pt.fpr) << ',' << format_double(pt.tpr) << ','
            << format_double(pt.threshold) << '\n';
}

inline void write_dai_csv(const std::string& path, const DaiSweep& sweep) {
    std::ofstream out = detail::open_out(path);
    out << "threshold,dai,n_flagged\n";
    for (size_t i = 0; i < sweep.thresholds.size(); ++i)
        out << format_double(sweep.thresholds[i]) << ',' << format_double(sweep.dai_values[i])
            << ',' << sweep.n_flagged[i] << '\n';
}

/// Per-window scores as written by `wavefis predict` and consumed by eval
/// consumers; `window_end` is the day the score applies to.
inline void write_scores_csv(const std::string& path, const std::vector<WindowMeta>& meta,
                             const std::vector<double>& targets,
                             const std::vector<double>& scores, int window) {
    if (meta.size() != targets.size() || meta.size() != scores.size())
        fail(Errc::length_mismatch, "scores, targets and meta differ in length");
    std::ofstream out = detail::open_out(path);
    out << "household_id,window_start,window_end,target,score\n";
    for (size_t i = 0; i < meta.size(); ++i)
        out << meta[i].household_id << ',' << meta[i].start << ','
            << (meta[i].start + window - 1) << ',' << format_double(targets[i]) << ','
            << format_double(scores[i]) << '\n';
}

}  // namespace wavefis
