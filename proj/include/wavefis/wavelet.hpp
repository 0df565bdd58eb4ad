#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/series.hpp"

namespace wavefis {

/// Orthonormal two-channel filter bank. Analysis high-pass is the quadrature
/// mirror of the low-pass; synthesis reuses the same taps (orthogonal case).
struct WaveletBasis {
    std::string name;
    std::vector<double> lowpass;   // analysis scaling filter
    std::vector<double> highpass;  // analysis wavelet filter

    int filter_length() const { return static_cast<int>(lowpass.size()); }
};

namespace detail {

inline WaveletBasis make_basis(std::string name, std::vector<double> lowpass) {
    // g[m] = (-1)^m h[L-1-m]
    const size_t len = lowpass.size();
    std::vector<double> highpass(len);
    for (size_t m = 0; m < len; ++m) {
        const double h = lowpass[len - 1 - m];
        highpass[m] = (m % 2 == 0) ? h : -h;
    }
    WaveletBasis basis{std::move(name), std::move(lowpass), std::move(highpass)};

    // Startup validation of the compiled-in tables.
    double low_sum = 0.0, high_sum = 0.0, low_norm = 0.0, high_norm = 0.0;
    for (size_t m = 0; m < len; ++m) {
        low_sum += basis.lowpass[m];
        high_sum += basis.highpass[m];
        low_norm += basis.lowpass[m] * basis.lowpass[m];
        high_norm += basis.highpass[m] * basis.highpass[m];
    }
    const double sqrt2 = 1.4142135623730950488;
    if (std::abs(low_sum - sqrt2) > 1e-10 || std::abs(high_sum) > 1e-10 ||
        std::abs(low_norm - 1.0) > 1e-10 || std::abs(high_norm - 1.0) > 1e-10)
        fail(Errc::invalid_config, "filter table for '" + basis.name + "' is not orthonormal");
    return basis;
}

}  // namespace detail

/// Compiled-in orthonormal scaling filters (standard tables).
inline const WaveletBasis& wavelet_basis(const std::string& name) {
    static const WaveletBasis haar = detail::make_basis(
        "haar", {0.70710678118654752440, 0.70710678118654752440});
    static const WaveletBasis db2 = detail::make_basis(
        "db2", {0.48296291314469025, 0.83651630373746899, 0.22414386804185735,
                -0.12940952255092145});
    static const WaveletBasis db4 = detail::make_basis(
        "db4", {0.23037781330885523, 0.71484657055254153, 0.63088076792959036,
                -0.02798376941698385, -0.18703481171888114, 0.03084138183598697,
                0.03288301166698295, -0.01059740178499728});
    static const WaveletBasis coif1 = detail::make_basis(
        "coif1", {-0.01565572813546454, -0.07273261951285390, 0.38486484686420286,
                  0.85257202021225542, 0.33789766245780922, -0.07273261951285390});
    if (name == "haar") return haar;
    if (name == "db2") return db2;
    if (name == "db4") return db4;
    if (name == "coif1") return coif1;
    fail(Errc::invalid_config, "unknown wavelet basis '" + name + "'");
}

inline const std::vector<std::string>& wavelet_basis_names() {
    static const std::vector<std::string> names{"haar", "db2", "db4", "coif1"};
    return names;
}

enum class BandKind { approximation, detail };

/// One decomposition band across all channels: (T / 2^level) x d values.
struct WaveletBand {
    BandKind kind = BandKind::approximation;
    int level = 1;
    Matrix values;
};

struct BandRef {
    int channel = 0;
    BandKind kind = BandKind::approximation;
    int level = 1;

    bool operator==(const BandRef&) const = default;
};

/// Time-aligned multi-scale representation: T x (2*k*d) with per-column provenance.
struct MultiScaleTensor {
    Matrix values;                 // T x d'
    std::vector<BandRef> band_index;  // one entry per column
    int depth = 0;
};

struct DwtPair {
    std::vector<double> approx;
    std::vector<double> detail;
};

/// Single-level analysis: downsampled-by-2 convolutions with the low/high
/// filters under periodic extension.
inline DwtPair dwt_level(const std::vector<double>& signal, const WaveletBasis& basis) {
    const int n = static_cast<int>(signal.size());
    const int len = basis.filter_length();
    if (n % 2 != 0) fail(Errc::odd_length, "signal length " + std::to_string(n) + " is odd");
    if (n < len)
        fail(Errc::too_short_for_filter, "signal length " + std::to_string(n) +
                                             " < filter length " + std::to_string(len));
    DwtPair out{std::vector<double>(n / 2), std::vector<double>(n / 2)};
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.0, d = 0.0;
        for (int m = 0; m < len; ++m) {
            const double x = signal[(2 * i + m) % n];
            a += basis.lowpass[m] * x;
            d += basis.highpass[m] * x;
        }
        out.approx[i] = a;
        out.detail[i] = d;
    }
    return out;
}

/// Exact inverse of dwt_level under the same periodic convention.
inline std::vector<double> idwt_level(const std::vector<double>& approx,
                                      const std::vector<double>& detail,
                                      const WaveletBasis& basis) {
    if (approx.size() != detail.size())
        fail(Errc::length_mismatch, "approx length " + std::to_string(approx.size()) +
                                        " != detail length " + std::to_string(detail.size()));
    const int half = static_cast<int>(approx.size());
    const int n = 2 * half;
    const int len = basis.filter_length();
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < half; ++i) {
        for (int m = 0; m < len; ++m) {
            out[(2 * i + m) % n] += basis.lowpass[m] * approx[i] + basis.highpass[m] * detail[i];
        }
    }
    return out;
}

/// Multi-level analysis: for each level j = 1..depth emits both the
/// approximation and the detail band; level j+1 is computed from the level-j
/// approximation. Output order is A1, D1, A2, D2, ...
inline std::vector<WaveletBand> decompose_values(const Matrix& values, const WaveletBasis& basis,
                                                 int depth) {
    const int t_len = values.rows();
    const int d = values.cols();
    if (depth < 1) fail(Errc::invalid_config, "depth must be >= 1");
    if (t_len % (1 << depth) != 0)
        fail(Errc::odd_length, "series length " + std::to_string(t_len) +
                                   " not divisible by 2^" + std::to_string(depth));
    if (t_len / (1 << depth) < basis.filter_length())
        fail(Errc::depth_too_deep, "T/2^" + std::to_string(depth) + " = " +
                                       std::to_string(t_len / (1 << depth)) +
                                       " < filter length " +
                                       std::to_string(basis.filter_length()));

    std::vector<WaveletBand> bands;
    bands.reserve(2 * depth);
    // current approximation per channel, starting from the raw signal
    std::vector<std::vector<double>> carry(d);
    for (int c = 0; c < d; ++c) {
        carry[c].resize(t_len);
        for (int r = 0; r < t_len; ++r) carry[c][r] = values(r, c);
    }
    for (int level = 1; level <= depth; ++level) {
        const int out_len = t_len >> level;
        WaveletBand approx{BandKind::approximation, level, Matrix(out_len, d)};
        WaveletBand det{BandKind::detail, level, Matrix(out_len, d)};
        for (int c = 0; c < d; ++c) {
            DwtPair pair = dwt_level(carry[c], basis);
            for (int r = 0; r < out_len; ++r) {
                approx.values(r, c) = pair.approx[r];
                det.values(r, c) = pair.detail[r];
            }
            carry[c] = std::move(pair.approx);
        }
        bands.push_back(std::move(approx));
        bands.push_back(std::move(det));
    }
    return bands;
}

inline std::vector<WaveletBand> decompose(const EconomicSeries& series, const WaveletBasis& basis,
                                          int depth) {
    return decompose_values(series.values, basis, depth);
}

/// Hold-upsamples every band back to target_length (each coefficient repeated
/// 2^level times) and concatenates along the feature axis. Column order is
/// channel-major, then level ascending, approximation before detail.
inline MultiScaleTensor assemble(const std::vector<WaveletBand>& bands, int target_length) {
    if (bands.empty() || bands.size() % 2 != 0)
        fail(Errc::inconsistent_bands, "expected a non-empty A/D band list");
    const int depth = static_cast<int>(bands.size()) / 2;
    const int d = bands.front().values.cols();
    // one A and one D per level, with the exact dyadic length
    std::vector<const WaveletBand*> approx_at(depth + 1, nullptr), detail_at(depth + 1, nullptr);
    for (const auto& band : bands) {
        if (band.level < 1 || band.level > depth || band.values.cols() != d)
            fail(Errc::inconsistent_bands, "band set does not form one decomposition");
        auto& slot = band.kind == BandKind::approximation ? approx_at : detail_at;
        if (slot[band.level]) fail(Errc::inconsistent_bands, "duplicate band");
        if (band.values.rows() * (1 << band.level) != target_length)
            fail(Errc::inconsistent_bands, "band length does not match target length");
        slot[band.level] = &band;
    }
    for (int level = 1; level <= depth; ++level)
        if (!approx_at[level] || !detail_at[level])
            fail(Errc::inconsistent_bands, "missing band at level " + std::to_string(level));

    MultiScaleTensor out;
    out.depth = depth;
    out.values = Matrix(target_length, 2 * depth * d);
    out.band_index.reserve(2 * depth * d);
    int col = 0;
    for (int c = 0; c < d; ++c) {
        for (int level = 1; level <= depth; ++level) {
            for (const WaveletBand* band : {approx_at[level], detail_at[level]}) {
                const int hold = 1 << level;
                for (int r = 0; r < band->values.rows(); ++r) {
                    const double v = band->values(r, c);
                    for (int rep = 0; rep < hold; ++rep) out.values(r * hold + rep, col) = v;
                }
                out.band_index.push_back(BandRef{c, band->kind, level});
                ++col;
            }
        }
    }
    return out;
}

}  // namespace wavefis
