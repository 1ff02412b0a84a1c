#pragma once

// Model variant selection and the parameter / sparse-gradient containers
// shared by the losses, the optimizer, evaluation and checkpoints.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twoview/kb.hpp"
#include "twoview/scoring.hpp"
#include "twoview/tensor_ops.hpp"

namespace twoview {

enum class CrossKind { Grouping, Transformation };

enum class View { Instance, Ontology };

/// Variant + dimensions. Variant strings: "[HA]{TransE|Mult|HolE}-{CG|CT}",
/// e.g. "TransE-CT", "HAHolE-CT".
struct ModelConfig {
    ScorerKind intra = ScorerKind::Translational;
    CrossKind cross = CrossKind::Transformation;
    bool hierarchy_aware = false;
    std::size_t entity_dim = 300;
    std::size_t concept_dim = 50;

    std::string variant() const;
    /// Parses the variant string only; dimensions keep their defaults.
    static ModelConfig from_variant(std::string_view variant);
    /// CG requires equal dimensions; dimensions must be positive.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Table : std::uint8_t { Entity = 0, Relation = 1, Concept = 2, MetaRelation = 3 };
inline constexpr std::size_t table_count = 4;
std::string_view table_name(Table table) noexcept;

template <typename T>
struct EmbeddingTable {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<T> data;

    EmbeddingTable() = default;
    EmbeddingTable(std::size_t rows, std::size_t dim) : rows(rows), dim(dim), data(rows * dim, T(0)) {}

    std::span<T> row(std::size_t i) { return {data.data() + i * dim, dim}; }
    std::span<const T> row(std::size_t i) const { return {data.data() + i * dim, dim}; }

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

template <typename T>
struct BasicModelParams {
    std::array<EmbeddingTable<T>, table_count> tables;
    std::optional<AffineMap<T>> ct_map;  // concept_dim x entity_dim
    std::optional<AffineMap<T>> ha_map;  // concept_dim x concept_dim

    EmbeddingTable<T>& table(Table t) { return tables[static_cast<std::size_t>(t)]; }
    const EmbeddingTable<T>& table(Table t) const { return tables[static_cast<std::size_t>(t)]; }

    template <typename U>
    BasicModelParams<U> cast() const {
        BasicModelParams<U> out;
        for (std::size_t i = 0; i < table_count; ++i) {
            out.tables[i] = EmbeddingTable<U>(tables[i].rows, tables[i].dim);
            std::copy(tables[i].data.begin(), tables[i].data.end(), out.tables[i].data.begin());
        }
        if (ct_map) out.ct_map = ct_map->template cast<U>();
        if (ha_map) out.ha_map = ha_map->template cast<U>();
        return out;
    }

    friend bool operator==(const BasicModelParams&, const BasicModelParams&) = default;
};

using ModelParams = BasicModelParams<float>;

/// Allocates tables sized for the vocabularies. Embedding rows are drawn
/// uniformly on the unit sphere, weight matrices are random orthogonal and
/// biases start at zero.
template <typename T>
BasicModelParams<T> init_params(const ModelConfig& config, std::size_t n_entities, std::size_t n_relations,
                                std::size_t n_concepts, std::size_t n_meta, SplitMix64& rng);

/// Gradients keyed by row id so only touched rows are stored. Rows are
/// created on first access (zero-filled) and accumulate.
template <typename T>
struct GradientMap {
    std::array<std::map<Id, std::vector<T>>, table_count> rows;
    std::optional<AffineMap<T>> ct_map;
    std::optional<AffineMap<T>> ha_map;

    std::span<T> row(Table table, Id id, std::size_t dim) {
        auto& v = rows[static_cast<std::size_t>(table)][id];
        if (v.empty()) v.assign(dim, T(0));
        return v;
    }
    const std::map<Id, std::vector<T>>& table(Table t) const { return rows[static_cast<std::size_t>(t)]; }

    AffineMap<T>& ct(std::size_t out, std::size_t in) {
        if (!ct_map) ct_map.emplace(out, in);
        return *ct_map;
    }
    AffineMap<T>& ha(std::size_t out, std::size_t in) {
        if (!ha_map) ha_map.emplace(out, in);
        return *ha_map;
    }

    bool empty() const {
        for (const auto& t : rows)
            if (!t.empty()) return false;
        return !ct_map && !ha_map;
    }

    void scale(T factor);
    void add(const GradientMap& other);
};

}  // namespace twoview
