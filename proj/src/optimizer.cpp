#include "twoview/optimizer.hpp"

#include <cmath>
#include <string>

#include "twoview/errors.hpp"

namespace twoview {

template <typename T>
AmsgradState<T>::AmsgradState(const BasicModelParams<T>& params) {
    for (std::size_t i = 0; i < table_count; ++i) tables[i] = Moments<T>(params.tables[i].data.size());
    if (params.ct_map) {
        ct_weight.emplace(params.ct_map->weight.size());
        ct_bias.emplace(params.ct_map->bias.size());
    }
    if (params.ha_map) {
        ha_weight.emplace(params.ha_map->weight.size());
        ha_bias.emplace(params.ha_map->bias.size());
    }
}

namespace {

template <typename T>
void require_finite(std::span<const T> g, const std::string& block) {
    for (T x : g)
        if (!std::isfinite(x)) throw NumericError("non-finite gradient in " + block);
}

// Returns whether any coordinate moved.
template <typename T>
bool update(std::span<T> theta, std::span<const T> g, Moments<T>& mom, std::size_t offset, double rate,
            const AmsgradConfig& c) {
    const T b1 = static_cast<T>(c.beta1);
    const T b2 = static_cast<T>(c.beta2);
    const T eps = static_cast<T>(c.epsilon);
    const T lr = static_cast<T>(rate);
    bool moved = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t k = offset + i;
        mom.m[k] = b1 * mom.m[k] + (T(1) - b1) * g[i];
        mom.v[k] = b2 * mom.v[k] + (T(1) - b2) * g[i] * g[i];
        mom.v_max[k] = std::max(mom.v_max[k], mom.v[k]);
        const T step = lr * mom.m[k] / (std::sqrt(mom.v_max[k]) + eps);
        theta[i] -= step;
        moved = moved || step != T(0);
    }
    return moved;
}

}  // namespace

template <typename T>
void amsgrad_step(BasicModelParams<T>& params, AmsgradState<T>& state, const GradientMap<T>& grads, double rate,
                  const AmsgradConfig& config) {
    for (std::size_t t = 0; t < table_count; ++t) {
        const auto name = std::string(table_name(static_cast<Table>(t)));
        const auto& table = params.tables[t];
        for (const auto& [id, g] : grads.rows[t]) {
            if (id >= table.rows) throw DimensionError("gradient row " + std::to_string(id) + " out of range in " + name);
            require_same_length(g.size(), table.dim, "gradient row");
            require_finite(std::span<const T>(g), name + " row " + std::to_string(id));
        }
    }
    auto check_map = [](const std::optional<AffineMap<T>>& g, const std::optional<AffineMap<T>>& p, const char* name) {
        if (!g) return;
        if (!p || g->weight.size() != p->weight.size() || g->bias.size() != p->bias.size())
            throw DimensionError(std::string("gradient for ") + name + " does not match the model");
        require_finite(std::span<const T>(g->weight), std::string(name) + " weight");
        require_finite(std::span<const T>(g->bias), std::string(name) + " bias");
    };
    check_map(grads.ct_map, params.ct_map, "ct_map");
    check_map(grads.ha_map, params.ha_map, "ha_map");

    for (std::size_t t = 0; t < table_count; ++t) {
        auto& table = params.tables[t];
        const bool constrained = t == static_cast<std::size_t>(Table::Entity) || t == static_cast<std::size_t>(Table::Concept);
        for (const auto& [id, g] : grads.rows[t]) {
            auto row = table.row(id);
            const bool moved = update(row, std::span<const T>(g), state.tables[t], id * table.dim, rate, config);
            if (constrained && moved) project_unit_norm_inplace(row);
        }
    }
    if (grads.ct_map) {
        update(std::span<T>(params.ct_map->weight), std::span<const T>(grads.ct_map->weight), *state.ct_weight, 0, rate, config);
        update(std::span<T>(params.ct_map->bias), std::span<const T>(grads.ct_map->bias), *state.ct_bias, 0, rate, config);
    }
    if (grads.ha_map) {
        update(std::span<T>(params.ha_map->weight), std::span<const T>(grads.ha_map->weight), *state.ha_weight, 0, rate, config);
        update(std::span<T>(params.ha_map->bias), std::span<const T>(grads.ha_map->bias), *state.ha_bias, 0, rate, config);
    }
    ++state.steps;
}

template struct AmsgradState<float>;
template struct AmsgradState<double>;
template void amsgrad_step<float>(BasicModelParams<float>&, AmsgradState<float>&, const GradientMap<float>&, double,
                                  const AmsgradConfig&);
template void amsgrad_step<double>(BasicModelParams<double>&, AmsgradState<double>&, const GradientMap<double>&, double,
                                   const AmsgradConfig&);

}  // namespace twoview
