#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "twoview/model.hpp"

namespace twoview {

struct AmsgradConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First moment, second moment and running max of the second moment, one
/// slot per parameter coordinate.
template <typename T>
struct Moments {
    std::vector<T> m, v, v_max;

    Moments() = default;
    explicit Moments(std::size_t n) : m(n, T(0)), v(n, T(0)), v_max(n, T(0)) {}
};

template <typename T>
struct AmsgradState {
    std::array<Moments<T>, table_count> tables;
    std::optional<Moments<T>> ct_weight, ct_bias, ha_weight, ha_bias;
    std::size_t steps = 0;

    AmsgradState() = default;
    explicit AmsgradState(const BasicModelParams<T>& params);
};

/// Sparse AMSGrad: only coordinates present in `grads` move.
///   m <- b1 m + (1-b1) g ; v <- b2 v + (1-b2) g^2 ; v_max <- max(v_max, v)
///   theta <- theta - rate * m / (sqrt(v_max) + eps)
/// Touched entity and concept rows are then renormalized to unit length.
/// Throws NumericError (naming the block) before touching anything if a
/// gradient entry is not finite.
template <typename T>
void amsgrad_step(BasicModelParams<T>& params, AmsgradState<T>& state, const GradientMap<T>& grads, double rate,
                  const AmsgradConfig& config = {});

}  // namespace twoview
