#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/matrix.hpp"

namespace wavefis {

/// Spread floor, in post-standardization units. Keeps memberships from
/// collapsing into delta spikes during training.
inline constexpr double kSigmaMin = 1e-3;

/// Takagi-Sugeno rule base: Gaussian premises, affine consequents.
struct FuzzyRuleBase {
    Matrix centers;              // R x m
    Matrix spreads;              // R x m, all >= kSigmaMin
    Matrix coeffs;               // R x m consequent weights
    std::vector<double> biases;  // length R

    int rule_count() const { return centers.rows(); }
    int input_dim() const { return centers.cols(); }
};

struct InferenceTrace {
    Matrix memberships;              // R x m
    std::vector<double> firing;      // length R
    std::vector<double> normalized;  // length R, sums to 1
    std::vector<double> rule_outputs;
    double output = 0.0;
};

inline void check_fuzzy_input(const std::vector<double>& x, const FuzzyRuleBase& rules) {
    if (static_cast<int>(x.size()) != rules.input_dim())
        fail(Errc::dimension_mismatch, "input has " + std::to_string(x.size()) +
                                           " dims, rule base expects " +
                                           std::to_string(rules.input_dim()));
}

/// mu[i][j] = exp(-(x_j - c_ij)^2 / (2 sigma_ij^2))
inline Matrix membership(const std::vector<double>& x, const FuzzyRuleBase& rules) {
    check_fuzzy_input(x, rules);
    Matrix mu(rules.rule_count(), rules.input_dim());
    for (int i = 0; i < rules.rule_count(); ++i) {
        for (int j = 0; j < rules.input_dim(); ++j) {
            const double dev = x[j] - rules.centers(i, j);
            const double sigma = rules.spreads(i, j);
            mu(i, j) = std::exp(-dev * dev / (2.0 * sigma * sigma));
        }
    }
    return mu;
}

/// Product over dimensions, accumulated in log space so large m cannot
/// underflow the joint response to zero.
inline std::vector<double> firing(const Matrix& memberships) {
    std::vector<double> alpha(memberships.rows());
    for (int i = 0; i < memberships.rows(); ++i) {
        double log_sum = 0.0;
        for (int j = 0; j < memberships.cols(); ++j) log_sum += std::log(memberships(i, j));
        alpha[i] = std::exp(log_sum);
    }
    return alpha;
}

/// alpha_i / sum(alpha); falls back to the uniform vector when the sum
/// underflows, so inputs far from every rule center still infer.
inline std::vector<double> normalize(const std::vector<double>& alpha) {
    double sum = 0.0;
    for (double a : alpha) sum += a;
    std::vector<double> out(alpha.size());
    if (sum < 1e-300) {
        std::fill(out.begin(), out.end(), 1.0 / alpha.size());
        return out;
    }
    for (size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] / sum;
    return out;
}

/// y_i = p_i . x + r_i
inline std::vector<double> consequents(const std::vector<double>& x, const FuzzyRuleBase& rules) {
    check_fuzzy_input(x, rules);
    std::vector<double> y(rules.rule_count());
    for (int i = 0; i < rules.rule_count(); ++i) {
        double acc = rules.biases[i];
        for (int j = 0; j < rules.input_dim(); ++j) acc += rules.coeffs(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

/// Full Takagi-Sugeno pass; the trace is kept for training and explanation.
inline InferenceTrace infer(const std::vector<double>& x, const FuzzyRuleBase& rules) {
    InferenceTrace trace;
    trace.memberships = membership(x, rules);
    trace.firing = firing(trace.memberships);
    trace.normalized = normalize(trace.firing);
    trace.rule_outputs = consequents(x, rules);
    trace.output = 0.0;
    for (int i = 0; i < rules.rule_count(); ++i)
        trace.output += trace.normalized[i] * trace.rule_outputs[i];
    return trace;
}

/// Linear-interpolation sample quantile (the numpy default estimator).
inline double sample_quantile(std::vector<double> sorted_values, double p) {
    const size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    const double pos = p * static_cast<double>(n - 1);
    const size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= n) return sorted_values[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

/// Quantile-diagonal initialization: rule i takes the ((i+0.5)/R)-quantile in
/// every dimension; spreads cover range*sqrt(m)/(R*sqrt(2)) so the m-way
/// product of memberships keeps typical inputs inside the soft support of
/// several rules (a per-dimension spread of range/(R*sqrt(2)) drives the
/// joint firing to underflow once m grows, which freezes training into a
/// winner-take-all rule switch); consequents start at the per-rule mean
/// target of the nearest training points.
///
/// The seed is recorded for determinism bookkeeping; this initializer is
/// already a pure function of its inputs.
inline FuzzyRuleBase init_rules(const Matrix& training_inputs, const std::vector<double>& targets,
                                int rule_count, uint64_t seed) {
    (void)seed;
    const int n = training_inputs.rows(), m = training_inputs.cols();
    if (rule_count < 1) fail(Errc::invalid_config, "rule count must be >= 1");
    if (n < rule_count)
        fail(Errc::too_few_samples, std::to_string(n) + " samples for " +
                                        std::to_string(rule_count) + " rules");
    if (static_cast<int>(targets.size()) != n)
        fail(Errc::dimension_mismatch, "targets do not match training inputs");

    FuzzyRuleBase rules{Matrix(rule_count, m), Matrix(rule_count, m), Matrix(rule_count, m),
                        std::vector<double>(rule_count, 0.0)};
    const double width_scale = std::sqrt(static_cast<double>(m));
    for (int j = 0; j < m; ++j) {
        std::vector<double> col(n);
        for (int r = 0; r < n; ++r) col[r] = training_inputs(r, j);
        std::sort(col.begin(), col.end());
        const double spread = std::max(kSigmaMin, width_scale * (col.back() - col.front()) /
                                                      (rule_count * std::sqrt(2.0)));
        for (int i = 0; i < rule_count; ++i) {
            rules.centers(i, j) = sample_quantile(col, (i + 0.5) / rule_count);
            rules.spreads(i, j) = spread;
        }
    }

    // per-rule target means over nearest training points
    std::vector<double> sums(rule_count, 0.0);
    std::vector<int> counts(rule_count, 0);
    double global_sum = 0.0;
    for (int r = 0; r < n; ++r) {
        int best = 0;
        double best_dist = 0.0;
        for (int i = 0; i < rule_count; ++i) {
            double dist = 0.0;
            for (int j = 0; j < m; ++j) {
                const double dev = training_inputs(r, j) - rules.centers(i, j);
                dist += dev * dev;
            }
            if (i == 0 || dist < best_dist) {
                best = i;
                best_dist = dist;
            }
        }
        sums[best] += targets[r];
        ++counts[best];
        global_sum += targets[r];
    }
    for (int i = 0; i < rule_count; ++i)
        rules.biases[i] = counts[i] > 0 ? sums[i] / counts[i] : global_sum / n;
    return rules;
}

}  // namespace wavefis
