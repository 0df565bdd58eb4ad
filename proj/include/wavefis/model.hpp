#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wavefis/attention.hpp"
#include "wavefis/errors.hpp"
#include "wavefis/fuzzy.hpp"
#include "wavefis/series.hpp"
#include "wavefis/wavelet.hpp"

namespace wavefis {

inline constexpr int kModelSchemaVersion = 1;

/// Everything needed to rebuild the exact preprocessing and shapes at
/// prediction time. Channel statistics are not stored: windows are
/// standardized per household from the data itself (see datagen).
struct ModelConfig {
    Task task = Task::classification;
    int window = 32;
    int horizon = 1;
    int depth = 2;
    std::string basis = "haar";
    int key_dim = 8;
    int value_dim = 8;
    int rule_count = 16;
    std::string target_channel;
    std::vector<std::string> channel_names;
    std::string normalization = "per_household";

    int input_dim() const { return 2 * depth * static_cast<int>(channel_names.size()); }
};

struct ModelState {
    int schema_version = kModelSchemaVersion;
    ModelConfig config;
    AttentionParams attention;
    FuzzyRuleBase rules;
    uint64_t seed = 0;
    uint64_t config_hash = 0;

    void check_consistent() const {
        if (attention.input_dim() != config.input_dim())
            fail(Errc::dimension_mismatch, "attention input dim does not equal 2*k*d");
        if (rules.input_dim() != config.value_dim)
            fail(Errc::dimension_mismatch, "rule base dimension does not equal d_v");
        if (rules.rule_count() != config.rule_count)
            fail(Errc::dimension_mismatch, "rule count mismatch");
    }
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct ForwardTrace {
    MultiScaleTensor z;
    AttendedRepresentation attended;
    InferenceTrace fuzzy;
    double raw_output = 0.0;  // Takagi-Sugeno output before any link
    double prediction = 0.0;  // probability for classification, value otherwise
};

/// Composes wavelet encoding, temporal attention and fuzzy inference over one
/// already-standardized input window.
inline ForwardTrace forward(const Matrix& window_values, const ModelState& model) {
    const ModelConfig& cfg = model.config;
    if (window_values.rows() != cfg.window)
        fail(Errc::shape_mismatch, "window has " + std::to_string(window_values.rows()) +
                                       " rows, model expects " + std::to_string(cfg.window));
    if (window_values.cols() != static_cast<int>(cfg.channel_names.size()))
        fail(Errc::shape_mismatch, "window channel count does not match model");

    ForwardTrace trace;
    const WaveletBasis& basis = wavelet_basis(cfg.basis);
    trace.z = assemble(decompose_values(window_values, basis, cfg.depth), cfg.window);
    trace.attended = encode(trace.z, model.attention);
    trace.fuzzy = infer(trace.attended.h_pooled, model.rules);
    trace.raw_output = trace.fuzzy.output;
    trace.prediction =
        cfg.task == Task::classification ? sigmoid(trace.raw_output) : trace.raw_output;
    return trace;
}

inline ForwardTrace forward(const SupervisedWindow& window, const ModelState& model) {
    return forward(window.input.values, model);
}

}  // namespace wavefis
