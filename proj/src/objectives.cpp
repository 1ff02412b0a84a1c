#include "twoview/objectives.hpp"

#include <cmath>

#include "twoview/errors.hpp"

namespace twoview {

void Margins::validate() const {
    if (!(instance >= 0 && ontology >= 0 && cross >= 0 && hierarchy >= 0))
        throw ConfigError("margins must be nonnegative");
}

void LossWeights::validate() const {
    if (!(alpha1 > 0 && alpha2 > 0)) throw ConfigError("alpha1 and alpha2 must be positive");
    if (!(omega >= 0)) throw ConfigError("omega must be nonnegative (0 disables cross-view steps)");
}

// ---------------------------------------------------------------- samplers

Triple sample_negative_triple(const Triple& positive, const TripleStore& known, std::size_t node_count,
                              SplitMix64& rng, SamplerStats& stats) {
    if (node_count < 2) throw ConfigError("negative sampling needs at least two nodes");
    ++stats.drawn;
    const bool corrupt_head = rng.coin();
    if (corrupt_head) ++stats.head_corruptions;
    Triple candidate = positive;
    for (int attempt = 0; attempt < max_negative_attempts; ++attempt) {
        const auto node = static_cast<Id>(rng.below(node_count));
        (corrupt_head ? candidate.head : candidate.tail) = node;
        if (!known.contains(candidate)) return candidate;
    }
    ++stats.saturated;
    return candidate;
}

namespace {

template <typename Contains>
Id sample_excluding(std::size_t count, SplitMix64& rng, SamplerStats& stats, Contains&& contains) {
    if (count < 2) throw ConfigError("negative sampling needs at least two concepts");
    ++stats.drawn;
    Id candidate = 0;
    for (int attempt = 0; attempt < max_negative_attempts; ++attempt) {
        candidate = static_cast<Id>(rng.below(count));
        if (!contains(candidate)) return candidate;
    }
    ++stats.saturated;
    return candidate;
}

}  // namespace

Id sample_negative_concept(Id entity, const CrossLinkStore& links, std::size_t concept_count, SplitMix64& rng,
                           SamplerStats& stats) {
    return sample_excluding(concept_count, rng, stats, [&](Id c) { return links.contains(entity, c); });
}

Id sample_negative_coarse(Id fine, const HierarchyStore& hierarchy, std::size_t concept_count, SplitMix64& rng,
                          SamplerStats& stats) {
    return sample_excluding(concept_count, rng, stats, [&](Id c) { return hierarchy.contains(fine, c); });
}

// ---------------------------------------------------------------- losses

namespace {

template <typename T>
void axpy(T a, std::span<const T> x, std::span<T> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void require_nonempty(std::size_t n, const char* what) {
    if (n == 0) throw Error(std::string(what) + ": empty batch");
}

// Shared body of the CT and HA losses: a tanh-affine map from a source row to
// the target space, contrasted against a positive and a negative target row.
template <typename T>
struct MappedPair {
    Table source_table;
    Id source;
    Id positive;
    Id negative;
};

template <typename T>
LossResult<T> mapped_margin_loss(std::span<const MappedPair<T>> batch, T margin, const BasicModelParams<T>& params,
                                 const AffineMap<T>& map, bool is_ct) {
    const auto& targets = params.table(Table::Concept);
    const std::size_t d_out = map.out_dim;
    const std::size_t d_in = map.in_dim;
    const T inv_n = T(1) / static_cast<T>(batch.size());

    LossResult<T> out;
    std::vector<T> y(d_out), gy(d_out), gz(d_out);
    for (const auto& s : batch) {
        const auto& src_table = params.table(s.source_table);
        const auto x = src_table.row(s.source);
        affine_tanh(map, x, std::span<T>(y));
        const auto c = targets.row(s.positive);
        const auto cn = targets.row(s.negative);
        const T dp = l2_distance(c, std::span<const T>(y));
        const T dn = l2_distance(cn, std::span<const T>(y));
        const T bracket = margin + dp - dn;
        if (!(bracket > T(0))) continue;
        out.loss += bracket;

        // d/dc = (c - y)/dp ; d/dc' = -(c' - y)/dn ; d/dy = -(c - y)/dp + (c' - y)/dn
        auto gc = out.grads.row(Table::Concept, s.positive, d_out);
        for (std::size_t i = 0; i < d_out; ++i) {
            const T up = dp > T(0) ? (c[i] - y[i]) / dp : T(0);
            gc[i] += inv_n * up;
            gy[i] = -up;
        }
        auto gcn = out.grads.row(Table::Concept, s.negative, d_out);
        for (std::size_t i = 0; i < d_out; ++i) {
            const T un = dn > T(0) ? (cn[i] - y[i]) / dn : T(0);
            gcn[i] -= inv_n * un;
            gy[i] += un;
        }
        for (std::size_t i = 0; i < d_out; ++i) gz[i] = inv_n * gy[i] * (T(1) - y[i] * y[i]);

        auto& gmap = is_ct ? out.grads.ct(d_out, d_in) : out.grads.ha(d_out, d_in);
        for (std::size_t r = 0; r < d_out; ++r) {
            gmap.bias[r] += gz[r];
            axpy(gz[r], x, std::span<T>(gmap.weight.data() + r * d_in, d_in));
        }
        auto gx = out.grads.row(s.source_table, s.source, d_in);
        for (std::size_t r = 0; r < d_out; ++r) axpy(gz[r], std::span<const T>(map.weight.data() + r * d_in, d_in), gx);
    }
    out.loss *= inv_n;
    return out;
}

}  // namespace

template <typename T>
LossResult<T> intra_hinge_loss(ScorerKind kind, View view, std::span<const TripleSample> batch, T margin,
                               const BasicModelParams<T>& params) {
    require_nonempty(batch.size(), "intra-view hinge loss");
    const Table node_table = view == View::Instance ? Table::Entity : Table::Concept;
    const Table rel_table = view == View::Instance ? Table::Relation : Table::MetaRelation;
    const auto& nodes = params.table(node_table);
    const auto& rels = params.table(rel_table);
    const std::size_t d = nodes.dim;
    const T inv_n = T(1) / static_cast<T>(batch.size());

    LossResult<T> out;
    std::vector<T> gh(d), gr(d), gt(d);
    auto accumulate = [&](const Triple& t, T sign) {
        score_grads(kind, nodes.row(t.head), rels.row(t.relation), nodes.row(t.tail), std::span<T>(gh),
                    std::span<T>(gr), std::span<T>(gt));
        axpy(sign * inv_n, std::span<const T>(gh), out.grads.row(node_table, t.head, d));
        axpy(sign * inv_n, std::span<const T>(gr), out.grads.row(rel_table, t.relation, d));
        axpy(sign * inv_n, std::span<const T>(gt), out.grads.row(node_table, t.tail, d));
    };
    for (const auto& s : batch) {
        const auto& p = s.positive;
        const auto& n = s.negative;
        const T fp = score(kind, nodes.row(p.head), rels.row(p.relation), nodes.row(p.tail));
        const T fn = score(kind, nodes.row(n.head), rels.row(n.relation), nodes.row(n.tail));
        const T bracket = margin + fn - fp;
        if (!(bracket > T(0))) continue;
        out.loss += bracket;
        accumulate(n, T(1));
        accumulate(p, T(-1));
    }
    out.loss *= inv_n;
    return out;
}

template <typename T>
LossResult<T> cg_loss(std::span<const LinkSample> batch, T margin, bool use_negatives, const BasicModelParams<T>& params) {
    require_nonempty(batch.size(), "CG loss");
    const auto& ents = params.table(Table::Entity);
    const auto& cons = params.table(Table::Concept);
    if (ents.dim != cons.dim)
        throw ConfigError("CG loss needs entity and concept embeddings of equal dimension");
    const std::size_t d = ents.dim;
    const T inv_n = T(1) / static_cast<T>(batch.size());

    LossResult<T> out;
    for (const auto& s : batch) {
        const auto e = ents.row(s.entity);
        const auto c = cons.row(s.concept_id);
        const T dp = l2_distance(c, e);
        T bracket = dp - margin;
        T dn = 0;
        if (use_negatives) {
            dn = l2_distance(cons.row(s.negative_concept), e);
            bracket = margin + dp - dn;
        }
        if (!(bracket > T(0))) continue;
        out.loss += bracket;

        auto ge = out.grads.row(Table::Entity, s.entity, d);
        auto gc = out.grads.row(Table::Concept, s.concept_id, d);
        for (std::size_t i = 0; i < d; ++i) {
            const T u = dp > T(0) ? (c[i] - e[i]) / dp : T(0);
            gc[i] += inv_n * u;
            ge[i] -= inv_n * u;
        }
        if (use_negatives) {
            const auto cn = cons.row(s.negative_concept);
            auto gcn = out.grads.row(Table::Concept, s.negative_concept, d);
            for (std::size_t i = 0; i < d; ++i) {
                const T u = dn > T(0) ? (cn[i] - e[i]) / dn : T(0);
                gcn[i] -= inv_n * u;
                ge[i] += inv_n * u;
            }
        }
    }
    out.loss *= inv_n;
    return out;
}

template <typename T>
LossResult<T> ct_loss(std::span<const LinkSample> batch, T margin, const BasicModelParams<T>& params) {
    require_nonempty(batch.size(), "CT loss");
    if (!params.ct_map) throw ConfigError("CT loss needs a cross-view transformation map");
    const auto& map = *params.ct_map;
    if (map.in_dim != params.table(Table::Entity).dim || map.out_dim != params.table(Table::Concept).dim)
        throw DimensionError("CT map shape does not match the entity/concept dimensions");
    std::vector<MappedPair<T>> pairs;
    pairs.reserve(batch.size());
    for (const auto& s : batch) pairs.push_back({Table::Entity, s.entity, s.concept_id, s.negative_concept});
    return mapped_margin_loss<T>(pairs, margin, params, map, true);
}

template <typename T>
LossResult<T> ha_loss(std::span<const HierarchySample> batch, T margin, const BasicModelParams<T>& params) {
    require_nonempty(batch.size(), "hierarchy loss");
    if (!params.ha_map) throw ConfigError("hierarchy loss needs a hierarchy-aware map");
    const auto& map = *params.ha_map;
    const std::size_t dc = params.table(Table::Concept).dim;
    if (map.in_dim != dc || map.out_dim != dc) throw DimensionError("HA map shape does not match the concept dimension");
    std::vector<MappedPair<T>> pairs;
    pairs.reserve(batch.size());
    for (const auto& s : batch) pairs.push_back({Table::Concept, s.fine, s.coarse, s.negative_coarse});
    return mapped_margin_loss<T>(pairs, margin, params, map, false);
}

double combine_intra(double instance, double ontology, std::optional<double> hierarchy, const LossWeights& weights,
                     bool hierarchy_aware) {
    if (hierarchy_aware && !hierarchy)
        throw ConfigError("hierarchy-aware mode needs the hierarchy loss (was the hierarchy extracted?)");
    if (!hierarchy_aware && hierarchy)
        throw ConfigError("hierarchy loss supplied outside hierarchy-aware mode");
    double j = instance + weights.alpha1 * ontology;
    if (hierarchy_aware) j += weights.alpha2 * *hierarchy;
    return j;
}

double combine_total(double intra, double cross, double omega) {
    if (!(omega >= 0)) throw ConfigError("omega must be nonnegative");
    return intra + omega * cross;
}

#define TWOVIEW_INSTANTIATE(T)                                                                                       \
    template LossResult<T> intra_hinge_loss<T>(ScorerKind, View, std::span<const TripleSample>, T,                 \
                                               const BasicModelParams<T>&);                                        \
    template LossResult<T> cg_loss<T>(std::span<const LinkSample>, T, bool, const BasicModelParams<T>&);           \
    template LossResult<T> ct_loss<T>(std::span<const LinkSample>, T, const BasicModelParams<T>&);                 \
    template LossResult<T> ha_loss<T>(std::span<const HierarchySample>, T, const BasicModelParams<T>&);

TWOVIEW_INSTANTIATE(float)
TWOVIEW_INSTANTIATE(double)

#undef TWOVIEW_INSTANTIATE

}  // namespace twoview
