#pragma once

// Dense vector/matrix kernels used by the scorers and losses. Everything is
// templated on the scalar so the same code runs in float (training) and in
// double (gradient checks and oracles).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "twoview/errors.hpp"
#include "twoview/rng.hpp"

namespace twoview {

/// y = tanh(W x + b) with W stored row-major as out_dim x in_dim.
template <typename T>
struct AffineMap {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::vector<T> weight;
    std::vector<T> bias;

    AffineMap() = default;
    AffineMap(std::size_t out, std::size_t in) : out_dim(out), in_dim(in), weight(out * in, T(0)), bias(out, T(0)) {}

    T& w(std::size_t r, std::size_t c) { return weight[r * in_dim + c]; }
    T w(std::size_t r, std::size_t c) const { return weight[r * in_dim + c]; }

    template <typename U>
    AffineMap<U> cast() const {
        AffineMap<U> m(out_dim, in_dim);
        std::copy(weight.begin(), weight.end(), m.weight.begin());
        std::copy(bias.begin(), bias.end(), m.bias.begin());
        return m;
    }

    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Overflow/underflow-safe L2 norm (scales by the largest magnitude first).
template <typename T>
T l2_norm(std::span<const T> v) {
    T scale = 0;
    for (T x : v) scale = std::max(scale, std::abs(x));
    if (scale == T(0)) return T(0);
    T s = 0;
    for (T x : v) {
        const T y = x / scale;
        s += y * y;
    }
    return scale * std::sqrt(s);
}

/// ||a - b||_2
template <typename T>
T l2_distance(std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const T d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// In place v <- v / ||v||. Throws NumericError on the zero vector.
template <typename T>
void project_unit_norm_inplace(std::span<T> v) {
    const T n = l2_norm(std::span<const T>(v));
    if (!(n > T(0)) || !std::isfinite(n)) throw NumericError("cannot project a zero or non-finite vector to unit norm");
    for (T& x : v) x /= n;
}

template <typename T>
std::vector<T> project_unit_norm(std::span<const T> v) {
    std::vector<T> out(v.begin(), v.end());
    project_unit_norm_inplace(std::span<T>(out));
    return out;
}

/// [a * b]_k = sum_i a_i b_{(k+i) mod d}, the O(d^2) definition.
template <typename T>
void circ_correlation(std::span<const T> a, std::span<const T> b, std::span<T> out) {
    require_same_length(a.size(), b.size(), "circular correlation");
    require_same_length(a.size(), out.size(), "circular correlation output");
    const std::size_t d = a.size();
    for (std::size_t k = 0; k < d; ++k) {
        T s = 0;
        for (std::size_t i = 0; i < d; ++i) s += a[i] * b[(k + i) % d];
        out[k] = s;
    }
}

template <typename T>
std::vector<T> circ_correlation(std::span<const T> a, std::span<const T> b) {
    std::vector<T> out(a.size());
    circ_correlation(a, b, std::span<T>(out));
    return out;
}

/// [a (x) b]_k = sum_i a_i b_{(k-i) mod d}, the O(d^2) definition.
template <typename T>
void circ_convolution(std::span<const T> a, std::span<const T> b, std::span<T> out) {
    require_same_length(a.size(), b.size(), "circular convolution");
    require_same_length(a.size(), out.size(), "circular convolution output");
    const std::size_t d = a.size();
    for (std::size_t k = 0; k < d; ++k) {
        T s = 0;
        for (std::size_t i = 0; i < d; ++i) s += a[i] * b[(k + d - i) % d];
        out[k] = s;
    }
}

/// FFT route for the same two products, computed in double.
void circ_correlation_fft(std::span<const double> a, std::span<const double> b, std::span<double> out);
void circ_convolution_fft(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// out = tanh(W x + b)
template <typename T>
void affine_tanh(const AffineMap<T>& m, std::span<const T> x, std::span<T> out) {
    require_same_length(x.size(), m.in_dim, "affine map input");
    require_same_length(out.size(), m.out_dim, "affine map output");
    for (std::size_t r = 0; r < m.out_dim; ++r) {
        const T z = m.bias[r] + dot(std::span<const T>(m.weight.data() + r * m.in_dim, m.in_dim), x);
        out[r] = std::tanh(z);
    }
}

template <typename T>
std::vector<T> affine_tanh(const AffineMap<T>& m, std::span<const T> x) {
    std::vector<T> out(m.out_dim);
    affine_tanh(m, x, std::span<T>(out));
    return out;
}

/// Inverse of y = tanh(W x + b) as W^+ (artanh(clamp(y, -1+delta, 1-delta)) - b),
/// i.e. the minimum-norm preimage. The Moore-Penrose inverse is computed once
/// at construction so the map can be inverted repeatedly.
class TanhAffineInverse {
public:
    static constexpr double default_clamp = 1e-6;

    explicit TanhAffineInverse(const AffineMap<double>& map, double clamp = default_clamp);

    std::vector<double> apply(std::span<const double> y) const;

    /// sigma_max / sigma_min of W (infinity when rank deficient).
    double condition_number() const noexcept { return condition_; }
    std::size_t rank() const noexcept { return rank_; }
    /// Set when W has more rows than columns and is rank deficient, in which
    /// case the preimage is not unique in the output space.
    const std::optional<std::string>& warning() const noexcept { return warning_; }

private:
    std::size_t out_dim_;
    std::size_t in_dim_;
    double clamp_;
    std::vector<double> pinv_;  // in_dim x out_dim, row-major
    std::vector<double> bias_;
    double condition_ = 0;
    std::size_t rank_ = 0;
    std::optional<std::string> warning_;
};

struct PinvResult {
    std::vector<double> x;
    std::optional<std::string> warning;
};

PinvResult affine_tanh_pinv(const AffineMap<double>& map, std::span<const double> y,
                            double clamp = TanhAffineInverse::default_clamp);

/// `count` rows of length `dim`, each an independent standard normal vector
/// scaled to unit length (uniform on the sphere). Row-major.
template <typename T>
std::vector<T> init_unit_sphere(std::size_t count, std::size_t dim, SplitMix64& rng) {
    if (dim == 0) throw ConfigError("unit-sphere initialization needs dim >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<T> out(count * dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < count; ++i) {
        double n = 0;
        do {
            for (auto& x : row) x = normal(rng);
            n = l2_norm(std::span<const double>(row));
        } while (!(n > 1e-12));
        for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] = static_cast<T>(row[j] / n);
    }
    return out;
}

/// Random Gaussian matrix orthonormalized by modified Gram-Schmidt: rows are
/// orthonormal when rows <= cols, columns otherwise. Row-major, rows x cols.
std::vector<double> init_orthogonal(std::size_t rows, std::size_t cols, SplitMix64& rng);

/// Central-difference gradient check. Returns the max over coordinates of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double finite_diff_check(const std::function<double(std::span<const double>)>& loss, std::span<const double> grad,
                         std::span<const double> point, double eps = 1e-5);

}  // namespace twoview
