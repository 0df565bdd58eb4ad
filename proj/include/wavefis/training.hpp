#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/model.hpp"
#include "wavefis/rng.hpp"

namespace wavefis {

struct TrainConfig {
    Task task = Task::classification;
    int epochs = 50;
    double learning_rate = 1e-3;
    int batch_size = 128;
    double ridge_lambda = 1e-6;
    uint64_t seed = 0;
    std::vector<std::string> basis_candidates = {"haar"};
    double validation_fraction = 0.2;
    int early_stop_patience = 10;

    void validate() const {
        if (epochs < 1) fail(Errc::invalid_config, "epochs must be >= 1");
        if (!(learning_rate > 0.0)) fail(Errc::invalid_config, "learning_rate must be > 0");
        if (batch_size < 1) fail(Errc::invalid_config, "batch_size must be >= 1");
        if (ridge_lambda < 0.0) fail(Errc::invalid_config, "ridge_lambda must be >= 0");
        if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
            fail(Errc::invalid_config, "validation_fraction must be in (0,1)");
        if (early_stop_patience < 1) fail(Errc::invalid_config, "patience must be >= 1");
        if (basis_candidates.empty()) fail(Errc::invalid_config, "no basis candidates");
    }
};

/// Architecture dimensions that, together with the dataset shape, pin every
/// parameter tensor.
struct ArchConfig {
    int depth = 2;
    int key_dim = 8;
    int value_dim = 8;
    int rule_count = 16;
};

struct TrainReport {
    std::string chosen_basis;
    std::vector<double> train_loss;  // per epoch, mean minibatch loss
    std::vector<double> val_loss;    // per epoch
    int best_epoch = 0;              // 1-based, on the chosen basis run
    int epochs_run = 0;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    std::vector<std::pair<std::string, double>> per_basis_val;  // basis -> best val loss
    double wall_seconds = 0.0;
};

/// Mean squared error (regression) or mean binary cross-entropy with clamped
/// probabilities (classification).
inline double loss(const std::vector<double>& predictions, const std::vector<double>& targets,
                   Task task) {
    if (predictions.size() != targets.size())
        fail(Errc::length_mismatch, "predictions and targets differ in length");
    if (predictions.empty()) fail(Errc::empty_batch, "loss over an empty batch");
    double total = 0.0;
    if (task == Task::regression) {
        for (size_t i = 0; i < predictions.size(); ++i) {
            const double d = predictions[i] - targets[i];
            total += d * d;
        }
    } else {
        for (size_t i = 0; i < predictions.size(); ++i) {
            const double p = std::clamp(predictions[i], 1e-12, 1.0 - 1e-12);
            total -= targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
        }
    }
    return total / static_cast<double>(predictions.size());
}

// ============================================================================
// Gradients
// ============================================================================

struct Gradients {
    Matrix wq, wk, wv;
    Matrix centers, spreads, coeffs;
    std::vector<double> biases;

    static Gradients zeros(const ModelState& model) {
        Gradients g;
        g.wq = Matrix(model.attention.wq.rows(), model.attention.wq.cols());
        g.wk = Matrix(model.attention.wk.rows(), model.attention.wk.cols());
        g.wv = Matrix(model.attention.wv.rows(), model.attention.wv.cols());
        g.centers = Matrix(model.rules.centers.rows(), model.rules.centers.cols());
        g.spreads = Matrix(model.rules.spreads.rows(), model.rules.spreads.cols());
        g.coeffs = Matrix(model.rules.coeffs.rows(), model.rules.coeffs.cols());
        g.biases.assign(model.rules.biases.size(), 0.0);
        return g;
    }

    bool all_finite() const {
        auto ok = [](const Matrix& m) { return m.all_finite(); };
        for (double b : biases)
            if (!std::isfinite(b)) return false;
        return ok(wq) && ok(wk) && ok(wv) && ok(centers) && ok(spreads) && ok(coeffs);
    }
};

namespace detail {

/// Backpropagates d(loss)/d(raw output) for one already-traced window into
/// the accumulator. The wavelet path is fixed, so nothing flows past Z.
inline void backward_window(const ModelState& model, const ForwardTrace& trace, double d_raw,
                            Gradients& acc) {
    const FuzzyRuleBase& rules = model.rules;
    const std::vector<double>& x = trace.attended.h_pooled;
    const std::vector<double>& norm = trace.fuzzy.normalized;
    const std::vector<double>& rule_out = trace.fuzzy.rule_outputs;
    const int n_rules = rules.rule_count();
    const int m = rules.input_dim();
    const double y_hat = trace.raw_output;

    // --- fuzzy layer ---
    std::vector<double> d_pooled(m, 0.0);
    for (int i = 0; i < n_rules; ++i) {
        const double resid = rule_out[i] - y_hat;
        const double d_bias = d_raw * norm[i];
        acc.biases[i] += d_bias;
        for (int j = 0; j < m; ++j) {
            const double sigma = rules.spreads(i, j);
            const double dev = x[j] - rules.centers(i, j);
            const double beta = -dev / (sigma * sigma);  // d(log alpha_i)/d x_j
            acc.coeffs(i, j) += d_bias * x[j];
            acc.centers(i, j) += d_raw * resid * norm[i] * dev / (sigma * sigma);
            acc.spreads(i, j) += d_raw * resid * norm[i] * dev * dev / (sigma * sigma * sigma);
            d_pooled[j] += d_raw * norm[i] * (rules.coeffs(i, j) + beta * resid);
        }
    }

    // --- attention layer ---
    const Matrix& z = trace.z.values;
    const Matrix& weights = trace.attended.weights;
    const int t_len = z.rows();
    const Matrix v = matmul(z, model.attention.wv);

    // pooled mean: every h_seq row receives d_pooled / T
    Matrix d_hseq(t_len, m);
    for (int r = 0; r < t_len; ++r)
        for (int c = 0; c < m; ++c) d_hseq(r, c) = d_pooled[c] / t_len;

    // h_seq = weights * v
    Matrix d_weights = matmul_transb(d_hseq, v);   // T x T
    Matrix d_v = matmul_transa(weights, d_hseq);   // T x d_v

    // softmax backward per row
    Matrix d_scores(t_len, t_len);
    for (int r = 0; r < t_len; ++r) {
        double inner = 0.0;
        for (int s = 0; s < t_len; ++s) inner += d_weights(r, s) * weights(r, s);
        for (int s = 0; s < t_len; ++s)
            d_scores(r, s) = weights(r, s) * (d_weights(r, s) - inner);
    }

    // scores = q k^T / sqrt(d_k)
    const Matrix q = matmul(z, model.attention.wq);
    const Matrix k = matmul(z, model.attention.wk);
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(model.attention.key_dim()));
    for (double& s : d_scores.data()) s *= inv_scale;
    const Matrix d_q = matmul(d_scores, k);
    const Matrix d_k = matmul_transa(d_scores, q);

    // projections from z
    const Matrix g_wq = matmul_transa(z, d_q);
    const Matrix g_wk = matmul_transa(z, d_k);
    const Matrix g_wv = matmul_transa(z, d_v);
    for (size_t i = 0; i < acc.wq.data().size(); ++i) acc.wq.data()[i] += g_wq.data()[i];
    for (size_t i = 0; i < acc.wk.data().size(); ++i) acc.wk.data()[i] += g_wk.data()[i];
    for (size_t i = 0; i < acc.wv.data().size(); ++i) acc.wv.data()[i] += g_wv.data()[i];
}

inline double d_loss_d_raw(const ForwardTrace& trace, double target, Task task, size_t batch) {
    const double n = static_cast<double>(batch);
    if (task == Task::regression) return 2.0 * (trace.prediction - target) / n;
    return (trace.prediction - target) / n;  // sigmoid + cross-entropy
}

/// Shared pass: mean-loss gradients plus the batch loss at the same
/// parameters, without a second forward sweep.
inline std::pair<Gradients, double> grad_and_loss(const std::vector<const SupervisedWindow*>& batch,
                                                  const ModelState& model) {
    if (batch.empty()) fail(Errc::empty_batch, "gradient over an empty batch");
    Gradients acc = Gradients::zeros(model);
    std::vector<double> preds, targets;
    preds.reserve(batch.size());
    targets.reserve(batch.size());
    for (const SupervisedWindow* w : batch) {
        const ForwardTrace trace = forward(*w, model);
        const double d_raw = d_loss_d_raw(trace, w->target, model.config.task, batch.size());
        backward_window(model, trace, d_raw, acc);
        preds.push_back(trace.prediction);
        targets.push_back(w->target);
    }
    if (!acc.all_finite()) fail(Errc::non_finite_gradient, "gradient has non-finite entries");
    return {std::move(acc), loss(preds, targets, model.config.task)};
}

}  // namespace detail

/// Exact analytic gradients of the mean batch loss with respect to every
/// trainable tensor. Wavelet filters stay fixed.
inline Gradients grad_premise_attention(const std::vector<const SupervisedWindow*>& batch,
                                        const ModelState& model) {
    return detail::grad_and_loss(batch, model).first;
}

// ============================================================================
// Consequent least squares
// ============================================================================

namespace detail {

/// In-place Householder QR least squares: min ||a theta - b||_2.
/// Returns theta; flags rank deficiency through the R diagonal.
inline std::vector<double> qr_solve(Matrix& a, std::vector<double>& b, bool allow_singular) {
    const int n = a.rows(), p = a.cols();
    std::vector<double> diag(p, 0.0);
    for (int j = 0; j < p; ++j) {
        double norm = 0.0;
        for (int i = j; i < n; ++i) norm += a(i, j) * a(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            diag[j] = 0.0;
            continue;
        }
        if (a(j, j) > 0) norm = -norm;
        for (int i = j; i < n; ++i) a(i, j) /= -norm;
        a(j, j) += 1.0;
        // apply reflector to remaining columns and rhs
        for (int c = j + 1; c < p; ++c) {
            double s = 0.0;
            for (int i = j; i < n; ++i) s += a(i, j) * a(i, c);
            s /= a(j, j);
            for (int i = j; i < n; ++i) a(i, c) -= s * a(i, j);
        }
        double s = 0.0;
        for (int i = j; i < n; ++i) s += a(i, j) * b[i];
        s /= a(j, j);
        for (int i = j; i < n; ++i) b[i] -= s * a(i, j);
        diag[j] = norm;  // R_jj (sign folded in)
    }
    double max_diag = 0.0;
    for (double d : diag) max_diag = std::max(max_diag, std::abs(d));
    for (double d : diag)
        if (std::abs(d) < 1e-10 * std::max(1.0, max_diag)) {
            if (!allow_singular)
                fail(Errc::singular_system, "consequent system is rank-deficient with lambda=0");
            // pinned to zero below
        }
    std::vector<double> theta(p, 0.0);
    for (int j = p - 1; j >= 0; --j) {
        if (std::abs(diag[j]) < 1e-10 * std::max(1.0, max_diag)) {
            theta[j] = 0.0;
            continue;
        }
        double s = b[j];
        for (int c = j + 1; c < p; ++c) s -= theta[c] * a(j, c);  // upper triangle holds R
        theta[j] = s / diag[j];
    }
    return theta;
}

}  // namespace detail

/// Ridge-regularized joint least squares for all consequent parameters with
/// the premises and attention held fixed. Design row per sample: the rule-wise
/// concatenation of [alpha_bar_i * x, alpha_bar_i].
inline std::pair<Matrix, std::vector<double>> solve_consequents(
    const std::vector<const SupervisedWindow*>& batch, const ModelState& model,
    double ridge_lambda) {
    if (model.config.task != Task::regression)
        fail(Errc::invalid_config, "consequent least squares applies to the regression task");
    if (batch.empty()) fail(Errc::empty_batch, "consequent solve over an empty batch");
    const int n_rules = model.rules.rule_count();
    const int m = model.rules.input_dim();
    const int p = n_rules * (m + 1);
    const int n = static_cast<int>(batch.size());
    if (n < p)
        std::fprintf(stderr,
                     "warning: consequent solve with %d samples for %d parameters; "
                     "batch size >= %d recommended\n",
                     n, p, p);

    const int rows = n + (ridge_lambda > 0.0 ? p : 0);
    Matrix design(rows, p);
    std::vector<double> rhs(rows, 0.0);
    for (int i = 0; i < n; ++i) {
        const ForwardTrace trace = forward(*batch[i], model);
        const std::vector<double>& x = trace.attended.h_pooled;
        for (int r = 0; r < n_rules; ++r) {
            const double w = trace.fuzzy.normalized[r];
            for (int j = 0; j < m; ++j) design(i, r * (m + 1) + j) = w * x[j];
            design(i, r * (m + 1) + m) = w;
        }
        rhs[i] = batch[i]->target;
    }
    if (ridge_lambda > 0.0) {
        const double root = std::sqrt(ridge_lambda);
        for (int j = 0; j < p; ++j) design(n + j, j) = root;
    }

    const std::vector<double> theta = detail::qr_solve(design, rhs, /*allow_singular=*/false);
    Matrix coeffs(n_rules, m);
    std::vector<double> biases(n_rules);
    for (int r = 0; r < n_rules; ++r) {
        for (int j = 0; j < m; ++j) coeffs(r, j) = theta[r * (m + 1) + j];
        biases[r] = theta[r * (m + 1) + m];
    }
    return {std::move(coeffs), std::move(biases)};
}

// ============================================================================
// Optimizer
// ============================================================================

namespace detail {

struct MomentPair {
    std::vector<double> m, v;
    void init(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
};

/// Adaptive-moment step with bias correction.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grad,
                      MomentPair& state, double lr, long t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + eps);
    }
}

struct Optimizer {
    MomentPair wq, wk, wv, centers, spreads, coeffs, biases;
    long t = 0;

    explicit Optimizer(const ModelState& model) {
        wq.init(model.attention.wq.data().size());
        wk.init(model.attention.wk.data().size());
        wv.init(model.attention.wv.data().size());
        centers.init(model.rules.centers.data().size());
        spreads.init(model.rules.spreads.data().size());
        coeffs.init(model.rules.coeffs.data().size());
        biases.init(model.rules.biases.size());
    }

    /// One update over premise + attention; consequents included only when
    /// asked for (classification has no closed-form solve).
    void step(ModelState& model, const Gradients& g, double lr, bool update_consequents) {
        ++t;
        adam_step(model.attention.wq.data(), g.wq.data(), wq, lr, t);
        adam_step(model.attention.wk.data(), g.wk.data(), wk, lr, t);
        adam_step(model.attention.wv.data(), g.wv.data(), wv, lr, t);
        adam_step(model.rules.centers.data(), g.centers.data(), centers, lr, t);
        adam_step(model.rules.spreads.data(), g.spreads.data(), spreads, lr, t);
        if (update_consequents) {
            adam_step(model.rules.coeffs.data(), g.coeffs.data(), coeffs, lr, t);
            adam_step(model.rules.biases, g.biases, biases, lr, t);
        }
        for (double& s : model.rules.spreads.data()) s = std::max(s, kSigmaMin);
    }
};

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

inline uint64_t config_fingerprint(const ArchConfig& arch, const TrainConfig& config) {
    std::string s = std::to_string(arch.depth) + "|" + std::to_string(arch.key_dim) + "|" +
                    std::to_string(arch.value_dim) + "|" + std::to_string(arch.rule_count) + "|" +
                    task_name(config.task) + "|" + std::to_string(config.epochs) + "|" +
                    std::to_string(config.learning_rate) + "|" +
                    std::to_string(config.batch_size) + "|" + std::to_string(config.ridge_lambda) +
                    "|" + std::to_string(config.validation_fraction) + "|" +
                    std::to_string(config.early_stop_patience);
    for (const auto& b : config.basis_candidates) s += "|" + b;
    return detail::fnv1a(s);
}

// ============================================================================
// Training loop
// ============================================================================

namespace detail {

struct Snapshot {
    AttentionParams attention;
    FuzzyRuleBase rules;
};

inline double eval_loss(const ModelState& model, const std::vector<SupervisedWindow>& windows,
                        const std::vector<size_t>& idx) {
    std::vector<double> preds, targets;
    preds.reserve(idx.size());
    targets.reserve(idx.size());
    for (size_t i : idx) {
        preds.push_back(forward(windows[i], model).prediction);
        targets.push_back(windows[i].target);
    }
    return loss(preds, targets, model.config.task);
}

}  // namespace detail

/// Hybrid training: adaptive-moment gradient steps on premise and attention
/// parameters each epoch, followed by a full consequent least-squares
/// re-solve (regression) or consequent gradient steps (classification); the
/// wavelet basis is chosen by a discrete validation-driven search over the
/// candidates. Deterministic for a fixed (dataset, config, seed).
inline std::pair<ModelState, TrainReport> train(const WindowDataset& dataset,
                                                const ArchConfig& arch,
                                                const TrainConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    config.validate();
    if (dataset.windows.empty()) fail(Errc::no_valid_windows, "dataset has no windows");
    if (dataset.task != config.task)
        fail(Errc::invalid_config, "dataset task does not match training task");
    const size_t n_total = dataset.windows.size();
    if (n_total < 2) fail(Errc::no_valid_windows, "need at least 2 windows to hold out validation");

    // validation split, seeded
    std::vector<size_t> order(n_total);
    for (size_t i = 0; i < n_total; ++i) order[i] = i;
    Rng split_rng(splitmix64(config.seed ^ 0x5eedf00dULL));
    split_rng.shuffle(order);
    size_t n_val = static_cast<size_t>(std::round(config.validation_fraction * n_total));
    n_val = std::clamp<size_t>(n_val, 1, n_total - 1);
    const std::vector<size_t> val_idx(order.begin(), order.begin() + n_val);
    const std::vector<size_t> train_idx(order.begin() + n_val, order.end());

    const int d = static_cast<int>(dataset.channel_names.size());
    const int input_dim = 2 * arch.depth * d;
    const size_t solve_cap = 16384;   // per-epoch consequent re-solve subsample bound
    const size_t init_cap = 2048;     // rule-base initialization subsample bound

    ModelState best_model;
    TrainReport best_report;
    double best_val = std::numeric_limits<double>::infinity();
    TrainReport report;

    for (const std::string& basis_name : config.basis_candidates) {
        wavelet_basis(basis_name);  // validate the name before doing any work
        Rng rng(config.seed);

        ModelState model;
        model.config.task = config.task;
        model.config.window = dataset.window;
        model.config.horizon = dataset.horizon;
        model.config.depth = arch.depth;
        model.config.basis = basis_name;
        model.config.key_dim = arch.key_dim;
        model.config.value_dim = arch.value_dim;
        model.config.rule_count = arch.rule_count;
        model.config.target_channel = dataset.target_channel;
        model.config.channel_names = dataset.channel_names;
        model.seed = config.seed;
        model.config_hash = config_fingerprint(arch, config);
        model.attention = init_attention(input_dim, arch.key_dim, arch.value_dim, rng);

        // rule-base initialization from pooled features of a seeded subsample
        std::vector<size_t> init_idx = train_idx;
        rng.shuffle(init_idx);
        if (init_idx.size() > init_cap) init_idx.resize(init_cap);
        if (init_idx.size() < static_cast<size_t>(arch.rule_count))
            fail(Errc::too_few_samples, "not enough training windows to place rules");
        {
            Matrix pooled(static_cast<int>(init_idx.size()), arch.value_dim);
            std::vector<double> targets(init_idx.size());
            // temporary rule base so forward() is usable: single pass-through rule
            for (size_t i = 0; i < init_idx.size(); ++i) {
                const SupervisedWindow& w = dataset.windows[init_idx[i]];
                const MultiScaleTensor z = assemble(
                    decompose_values(w.input.values, wavelet_basis(basis_name), arch.depth),
                    dataset.window);
                const AttendedRepresentation att = encode(z, model.attention);
                for (int c = 0; c < arch.value_dim; ++c) pooled(static_cast<int>(i), c) = att.h_pooled[c];
                targets[i] = w.target;
            }
            model.rules = init_rules(pooled, targets, arch.rule_count, config.seed);
        }

        detail::Optimizer opt(model);
        std::vector<double> train_curve, val_curve;
        detail::Snapshot snapshot{model.attention, model.rules};
        double run_best_val = std::numeric_limits<double>::infinity();
        int run_best_epoch = 0;
        int since_best = 0;

        std::vector<size_t> epoch_order = train_idx;
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            rng.shuffle(epoch_order);
            double loss_sum = 0.0;
            size_t batches = 0;
            for (size_t start = 0; start < epoch_order.size();
                 start += static_cast<size_t>(config.batch_size)) {
                const size_t stop =
                    std::min(epoch_order.size(), start + static_cast<size_t>(config.batch_size));
                std::vector<const SupervisedWindow*> batch;
                batch.reserve(stop - start);
                for (size_t i = start; i < stop; ++i)
                    batch.push_back(&dataset.windows[epoch_order[i]]);
                // gradients and batch loss at the pre-step parameters
                const auto [g, batch_loss] = detail::grad_and_loss(batch, model);
                loss_sum += batch_loss;
                ++batches;
                opt.step(model, g, config.learning_rate,
                         /*update_consequents=*/config.task == Task::classification);
            }

            if (config.task == Task::regression) {
                std::vector<size_t> solve_idx = train_idx;
                if (solve_idx.size() > solve_cap) {
                    rng.shuffle(solve_idx);
                    solve_idx.resize(solve_cap);
                }
                std::vector<const SupervisedWindow*> solve_batch;
                solve_batch.reserve(solve_idx.size());
                for (size_t i : solve_idx) solve_batch.push_back(&dataset.windows[i]);
                auto [coeffs, biases] = solve_consequents(solve_batch, model, config.ridge_lambda);
                model.rules.coeffs = std::move(coeffs);
                model.rules.biases = std::move(biases);
            }

            train_curve.push_back(loss_sum / static_cast<double>(batches));
            const double val = detail::eval_loss(model, dataset.windows, val_idx);
            val_curve.push_back(val);
            if (!std::isfinite(val)) fail(Errc::non_finite_gradient, "validation loss diverged");

            if (val < run_best_val) {
                run_best_val = val;
                run_best_epoch = epoch;
                snapshot = {model.attention, model.rules};
                since_best = 0;
            } else if (++since_best >= config.early_stop_patience) {
                break;
            }
        }

        model.attention = snapshot.attention;
        model.rules = snapshot.rules;
        report.per_basis_val.emplace_back(basis_name, run_best_val);

        if (run_best_val < best_val) {
            best_val = run_best_val;
            best_model = model;
            best_report.chosen_basis = basis_name;
            best_report.train_loss = train_curve;
            best_report.val_loss = val_curve;
            best_report.best_epoch = run_best_epoch;
            best_report.epochs_run = static_cast<int>(train_curve.size());
        }
    }

    best_report.per_basis_val = report.per_basis_val;
    best_report.final_train_loss = best_report.train_loss.empty() ? 0.0 : best_report.train_loss.back();
    best_report.final_val_loss = best_val;
    best_report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    best_model.check_consistent();
    return {std::move(best_model), std::move(best_report)};
}

}  // namespace wavefis
