#include "twoview/tensor_ops.hpp"

#include <complex>
#include <limits>
#include <map>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

namespace twoview {

// ---------------------------------------------------------------- FFT path

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per length (FFTW_ESTIMATE never touches the arrays)
// and reused for every call.
struct FftPlans {
    fftw_plan forward;
    fftw_plan backward;
};

const FftPlans& plans_for(std::size_t d) {
    static std::mutex mu;
    static std::map<std::size_t, FftPlans> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const std::size_t nc = d / 2 + 1;
    auto* real = fftw_alloc_real(d);
    auto* spec = fftw_alloc_complex(nc);
    const int n = static_cast<int>(d);
    FftPlans p{fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE),
               fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE)};
    fftw_free(real);
    fftw_free(spec);
    return cache.emplace(d, p).first->second;
}

// Buffers aligned the way the cached plans expect.
struct FftBuffers {
    explicit FftBuffers(std::size_t d)
        : d(d), nc(d / 2 + 1), real(fftw_alloc_real(d)), fa(fftw_alloc_complex(nc)), fb(fftw_alloc_complex(nc)) {}
    ~FftBuffers() {
        fftw_free(real);
        fftw_free(fa);
        fftw_free(fb);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;

    std::size_t d, nc;
    double* real;
    fftw_complex* fa;
    fftw_complex* fb;
};

void spectral_product(std::span<const double> a, std::span<const double> b, std::span<double> out, bool conjugate_a) {
    require_same_length(a.size(), b.size(), "circular product");
    require_same_length(a.size(), out.size(), "circular product output");
    const std::size_t d = a.size();
    if (d == 0) return;
    const auto& plans = plans_for(d);
    FftBuffers buf(d);
    std::copy(a.begin(), a.end(), buf.real);
    fftw_execute_dft_r2c(plans.forward, buf.real, buf.fa);
    std::copy(b.begin(), b.end(), buf.real);
    fftw_execute_dft_r2c(plans.forward, buf.real, buf.fb);
    for (std::size_t k = 0; k < buf.nc; ++k) {
        std::complex<double> x(buf.fa[k][0], buf.fa[k][1]);
        const std::complex<double> y(buf.fb[k][0], buf.fb[k][1]);
        if (conjugate_a) x = std::conj(x);
        const auto z = x * y;
        buf.fa[k][0] = z.real();
        buf.fa[k][1] = z.imag();
    }
    fftw_execute_dft_c2r(plans.backward, buf.fa, buf.real);
    const double inv = 1.0 / static_cast<double>(d);
    for (std::size_t k = 0; k < d; ++k) out[k] = buf.real[k] * inv;
}

}  // namespace

void circ_correlation_fft(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    spectral_product(a, b, out, true);
}

void circ_convolution_fft(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    spectral_product(a, b, out, false);
}

// ---------------------------------------------------------------- inverse map

TanhAffineInverse::TanhAffineInverse(const AffineMap<double>& map, double clamp)
    : out_dim_(map.out_dim), in_dim_(map.in_dim), clamp_(clamp), bias_(map.bias) {
    if (!(clamp > 0 && clamp <= 0.1)) throw ConfigError("tanh clamp must lie in (0, 0.1]");
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const Mat> W(map.weight.data(), static_cast<Eigen::Index>(out_dim_),
                                  static_cast<Eigen::Index>(in_dim_));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(out_dim_, in_dim_)) * smax;

    Eigen::VectorXd inv_s = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol) {
            inv_s(i) = 1.0 / s(i);
            ++rank_;
        }
    }
    const double smin = s.size() ? s(s.size() - 1) : 0.0;
    condition_ = smin > tol ? smax / smin : std::numeric_limits<double>::infinity();

    const Mat P = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
    pinv_.assign(P.data(), P.data() + P.size());

    if (out_dim_ > in_dim_ && rank_ < in_dim_) {
        warning_ = "weight matrix is rank deficient (rank " + std::to_string(rank_) + " of " +
                   std::to_string(in_dim_) + "), condition number " + std::to_string(condition_);
    }
}

std::vector<double> TanhAffineInverse::apply(std::span<const double> y) const {
    require_same_length(y.size(), out_dim_, "inverse map input");
    std::vector<double> z(out_dim_);
    for (std::size_t i = 0; i < out_dim_; ++i) {
        const double c = std::clamp(y[i], -1.0 + clamp_, 1.0 - clamp_);
        z[i] = std::atanh(c) - bias_[i];
    }
    std::vector<double> x(in_dim_, 0.0);
    for (std::size_t r = 0; r < in_dim_; ++r) x[r] = dot(std::span<const double>(pinv_.data() + r * out_dim_, out_dim_), std::span<const double>(z));
    return x;
}

PinvResult affine_tanh_pinv(const AffineMap<double>& map, std::span<const double> y, double clamp) {
    TanhAffineInverse inv(map, clamp);
    return {inv.apply(y), inv.warning()};
}

// ---------------------------------------------------------------- initialization

std::vector<double> init_orthogonal(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    if (rows == 0 || cols == 0) throw ConfigError("orthogonal initialization needs positive dimensions");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> m(rows * cols);
    for (auto& x : m) x = normal(rng);

    // Orthonormalize the shorter family: rows when rows <= cols, columns otherwise.
    const bool by_rows = rows <= cols;
    const std::size_t count = by_rows ? rows : cols;
    const std::size_t len = by_rows ? cols : rows;
    auto at = [&](std::size_t v, std::size_t i) -> double& { return by_rows ? m[v * cols + i] : m[i * cols + v]; };

    for (std::size_t v = 0; v < count; ++v) {
        // Two passes of modified Gram-Schmidt keep orthogonality at machine precision.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t u = 0; u < v; ++u) {
                double proj = 0;
                for (std::size_t i = 0; i < len; ++i) proj += at(u, i) * at(v, i);
                for (std::size_t i = 0; i < len; ++i) at(v, i) -= proj * at(u, i);
            }
        }
        double n = 0;
        for (std::size_t i = 0; i < len; ++i) n += at(v, i) * at(v, i);
        n = std::sqrt(n);
        if (!(n > 1e-10)) {
            // Degenerate draw; resample this vector and redo it.
            for (std::size_t i = 0; i < len; ++i) at(v, i) = normal(rng);
            --v;
            continue;
        }
        for (std::size_t i = 0; i < len; ++i) at(v, i) /= n;
    }
    return m;
}

// ---------------------------------------------------------------- gradient check

double finite_diff_check(const std::function<double(std::span<const double>)>& loss, std::span<const double> grad,
                         std::span<const double> point, double eps) {
    require_same_length(grad.size(), point.size(), "gradient check");
    if (!(eps > 0)) throw ConfigError("finite-difference step must be positive");
    std::vector<double> x(point.begin(), point.end());
    const double f0 = loss(x);
    if (!std::isfinite(f0)) throw NumericError("loss is not finite at the probe point");
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + eps;
        const double fp = loss(x);
        x[i] = saved - eps;
        const double fm = loss(x);
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericError("loss is not finite near the probe point");
        const double numeric = (fp - fm) / (2 * eps);
        const double err = std::abs(grad[i] - numeric) / std::max(1e-8, std::abs(grad[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace twoview
