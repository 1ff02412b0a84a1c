#include "twoview/model.hpp"

#include "twoview/errors.hpp"

namespace twoview {

std::string ModelConfig::variant() const {
    std::string s = hierarchy_aware ? "HA" : "";
    s += scorer_name(intra);
    s += cross == CrossKind::Grouping ? "-CG" : "-CT";
    return s;
}

ModelConfig ModelConfig::from_variant(std::string_view variant) {
    ModelConfig cfg;
    std::string_view rest = variant;
    if (rest.starts_with("HA")) {
        cfg.hierarchy_aware = true;
        rest.remove_prefix(2);
    }
    const auto dash = rest.rfind('-');
    if (dash == std::string_view::npos) throw ConfigError("malformed variant '" + std::string(variant) + "'");
    const auto scorer = parse_scorer(rest.substr(0, dash));
    if (!scorer) throw ConfigError("unknown intra-view scorer in variant '" + std::string(variant) + "'");
    cfg.intra = *scorer;
    const auto cross = rest.substr(dash + 1);
    if (cross == "CG")
        cfg.cross = CrossKind::Grouping;
    else if (cross == "CT")
        cfg.cross = CrossKind::Transformation;
    else
        throw ConfigError("unknown cross-view model '" + std::string(cross) + "' in variant '" + std::string(variant) + "'");
    return cfg;
}

void ModelConfig::validate() const {
    if (entity_dim == 0 || concept_dim == 0) throw ConfigError("embedding dimensions must be positive");
    if (cross == CrossKind::Grouping && entity_dim != concept_dim)
        throw ConfigError("CG variants embed both views in one space: entity_dim (" + std::to_string(entity_dim) +
                          ") must equal concept_dim (" + std::to_string(concept_dim) + ")");
}

std::string_view table_name(Table table) noexcept {
    switch (table) {
        case Table::Entity: return "entities";
        case Table::Relation: return "relations";
        case Table::Concept: return "concepts";
        case Table::MetaRelation: return "meta_relations";
    }
    return "?";
}

template <typename T>
BasicModelParams<T> init_params(const ModelConfig& config, std::size_t n_entities, std::size_t n_relations,
                                std::size_t n_concepts, std::size_t n_meta, SplitMix64& rng) {
    config.validate();
    BasicModelParams<T> p;
    const std::array<std::pair<std::size_t, std::size_t>, table_count> shapes{{
        {n_entities, config.entity_dim},
        {n_relations, config.entity_dim},
        {n_concepts, config.concept_dim},
        {n_meta, config.concept_dim},
    }};
    for (std::size_t i = 0; i < table_count; ++i) {
        auto& t = p.tables[i];
        t.rows = shapes[i].first;
        t.dim = shapes[i].second;
        t.data = init_unit_sphere<T>(t.rows, t.dim, rng);
    }
    auto make_map = [&](std::size_t out, std::size_t in) {
        AffineMap<T> m(out, in);
        const auto w = init_orthogonal(out, in, rng);
        std::copy(w.begin(), w.end(), m.weight.begin());
        return m;
    };
    if (config.cross == CrossKind::Transformation) p.ct_map = make_map(config.concept_dim, config.entity_dim);
    if (config.hierarchy_aware) p.ha_map = make_map(config.concept_dim, config.concept_dim);
    return p;
}

template <typename T>
void GradientMap<T>::scale(T factor) {
    for (auto& t : rows)
        for (auto& [id, v] : t)
            for (auto& x : v) x *= factor;
    for (auto* m : {&ct_map, &ha_map}) {
        if (!*m) continue;
        for (auto& x : (*m)->weight) x *= factor;
        for (auto& x : (*m)->bias) x *= factor;
    }
}

template <typename T>
void GradientMap<T>::add(const GradientMap& other) {
    for (std::size_t i = 0; i < table_count; ++i) {
        for (const auto& [id, v] : other.rows[i]) {
            auto dst = row(static_cast<Table>(i), id, v.size());
            for (std::size_t j = 0; j < v.size(); ++j) dst[j] += v[j];
        }
    }
    auto merge = [](std::optional<AffineMap<T>>& dst, const std::optional<AffineMap<T>>& src) {
        if (!src) return;
        if (!dst) {
            dst = src;
            return;
        }
        for (std::size_t j = 0; j < src->weight.size(); ++j) dst->weight[j] += src->weight[j];
        for (std::size_t j = 0; j < src->bias.size(); ++j) dst->bias[j] += src->bias[j];
    };
    merge(ct_map, other.ct_map);
    merge(ha_map, other.ha_map);
}

template BasicModelParams<float> init_params<float>(const ModelConfig&, std::size_t, std::size_t, std::size_t,
                                                    std::size_t, SplitMix64&);
template BasicModelParams<double> init_params<double>(const ModelConfig&, std::size_t, std::size_t, std::size_t,
                                                      std::size_t, SplitMix64&);
template struct GradientMap<float>;
template struct GradientMap<double>;

}  // namespace twoview
