#pragma once

#include <cmath>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/matrix.hpp"
#include "wavefis/rng.hpp"
#include "wavefis/wavelet.hpp"

namespace wavefis {

/// Learnable query/key/value projections (single head).
struct AttentionParams {
    Matrix wq;  // d' x d_k
    Matrix wk;  // d' x d_k
    Matrix wv;  // d' x d_v

    int input_dim() const { return wq.rows(); }
    int key_dim() const { return wq.cols(); }
    int value_dim() const { return wv.cols(); }
};

/// Entries drawn uniformly from [-1/sqrt(d'), 1/sqrt(d')].
inline AttentionParams init_attention(int input_dim, int key_dim, int value_dim, Rng& rng) {
    if (input_dim < 1 || key_dim < 1 || value_dim < 1)
        fail(Errc::invalid_config, "attention dimensions must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    auto fill = [&](int rows, int cols) {
        Matrix m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    return AttentionParams{fill(input_dim, key_dim), fill(input_dim, key_dim),
                           fill(input_dim, value_dim)};
}

struct AttendedRepresentation {
    Matrix h_seq;                  // T x d_v per-step context vectors
    std::vector<double> h_pooled;  // length d_v, mean over steps
    Matrix weights;                // T x T row-stochastic
};

inline void check_attention_shapes(const MultiScaleTensor& z, const AttentionParams& params) {
    if (z.values.cols() != params.input_dim())
        fail(Errc::shape_mismatch, "tensor has " + std::to_string(z.values.cols()) +
                                       " features, projections expect " +
                                       std::to_string(params.input_dim()));
    if (z.values.rows() < 1) fail(Errc::shape_mismatch, "empty tensor");
}

/// Raw similarity scores: e[t][s] = (wq^T z_t) . (wk^T z_s) / sqrt(d_k),
/// full bidirectional (no causal mask).
inline Matrix scores(const MultiScaleTensor& z, const AttentionParams& params) {
    check_attention_shapes(z, params);
    const Matrix q = matmul(z.values, params.wq);
    const Matrix k = matmul(z.values, params.wk);
    Matrix e = matmul_transb(q, k);
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(params.key_dim()));
    for (double& v : e.data()) v *= inv_scale;
    return e;
}

/// Row-wise numerically stable softmax (subtract row max).
inline Matrix softmax_rows(const Matrix& scores) {
    Matrix out(scores.rows(), scores.cols());
    for (int r = 0; r < scores.rows(); ++r) {
        double row_max = scores(r, 0);
        for (int c = 1; c < scores.cols(); ++c) row_max = std::max(row_max, scores(r, c));
        double sum = 0.0;
        for (int c = 0; c < scores.cols(); ++c) {
            const double e = std::exp(scores(r, c) - row_max);
            out(r, c) = e;
            sum += e;
        }
        for (int c = 0; c < scores.cols(); ++c) out(r, c) /= sum;
    }
    return out;
}

/// Full attention pass: softmax the scores, aggregate values per step, then
/// mean-pool across steps into the fixed-dimension bridge vector.
inline AttendedRepresentation encode(const MultiScaleTensor& z, const AttentionParams& params) {
    AttendedRepresentation out;
    out.weights = softmax_rows(scores(z, params));
    const Matrix v = matmul(z.values, params.wv);
    out.h_seq = matmul(out.weights, v);
    const int t_len = out.h_seq.rows(), d_v = out.h_seq.cols();
    out.h_pooled.assign(d_v, 0.0);
    for (int r = 0; r < t_len; ++r)
        for (int c = 0; c < d_v; ++c) out.h_pooled[c] += out.h_seq(r, c);
    for (double& x : out.h_pooled) x /= t_len;
    return out;
}

}  // namespace wavefis
