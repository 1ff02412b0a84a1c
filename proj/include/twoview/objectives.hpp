#pragma once

// Negative samplers and the loss terms of the joint objective. Every loss is
// the batch mean of a hinge and returns its gradient restricted to the rows
// (and affine maps) the batch touches; rows whose hinge is inactive get no
// entry at all.

#include <optional>
#include <span>

#include "twoview/kb.hpp"
#include "twoview/model.hpp"
#include "twoview/rng.hpp"

namespace twoview {

struct Margins {
    double instance = 0.5;
    double ontology = 0.5;
    double cross = 0.5;
    double hierarchy = 0.5;

    void validate() const;
};

struct LossWeights {
    double alpha1 = 2.5;  // ontology-view intra loss
    double alpha2 = 1.0;  // hierarchy loss
    double omega = 1.0;   // cross-view loss

    void validate() const;
};

struct TripleSample {
    Triple positive;
    Triple negative;
};

struct LinkSample {
    Id entity = 0;
    Id concept_id = 0;
    Id negative_concept = 0;
};

struct HierarchySample {
    Id fine = 0;
    Id coarse = 0;
    Id negative_coarse = 0;
};

/// Number of rejection attempts before a sampler gives up.
inline constexpr int max_negative_attempts = 100;

struct SamplerStats {
    std::size_t drawn = 0;
    std::size_t saturated = 0;
    std::size_t head_corruptions = 0;
};

/// Replaces the head (probability 1/2) or the tail with a uniform node,
/// resampling until the result is not in `known`.
Triple sample_negative_triple(const Triple& positive, const TripleStore& known, std::size_t node_count,
                              SplitMix64& rng, SamplerStats& stats);

/// Uniform concept c' with (entity, c') not in `links`.
Id sample_negative_concept(Id entity, const CrossLinkStore& links, std::size_t concept_count, SplitMix64& rng,
                           SamplerStats& stats);

/// Uniform coarse concept c' with (fine, c') not in `hierarchy`.
Id sample_negative_coarse(Id fine, const HierarchyStore& hierarchy, std::size_t concept_count, SplitMix64& rng,
                          SamplerStats& stats);

template <typename T>
struct LossResult {
    T loss = 0;
    GradientMap<T> grads;
};

/// mean over the batch of [margin + f(negative) - f(positive)]_+
template <typename T>
LossResult<T> intra_hinge_loss(ScorerKind kind, View view, std::span<const TripleSample> batch, T margin,
                               const BasicModelParams<T>& params);

/// Without negatives: mean [||c - e|| - margin]_+.
/// With negatives:    mean [margin + ||c - e|| - ||c' - e||]_+.
template <typename T>
LossResult<T> cg_loss(std::span<const LinkSample> batch, T margin, bool use_negatives, const BasicModelParams<T>& params);

/// mean [margin + ||c - f(e)|| - ||c' - f(e)||]_+ with f(e) = tanh(W_ct e + b_ct).
template <typename T>
LossResult<T> ct_loss(std::span<const LinkSample> batch, T margin, const BasicModelParams<T>& params);

/// mean [margin + ||c_h - g(c_l)|| - ||c_h' - g(c_l)||]_+ with g(c) = tanh(W_ha c + b_ha).
template <typename T>
LossResult<T> ha_loss(std::span<const HierarchySample> batch, T margin, const BasicModelParams<T>& params);

/// J_GI + alpha1 J_GO, or J_GI + alpha1 J_GO\T + alpha2 J_HA in hierarchy-aware mode.
double combine_intra(double instance, double ontology, std::optional<double> hierarchy, const LossWeights& weights,
                     bool hierarchy_aware);

/// J_intra + omega J_cross
double combine_total(double intra, double cross, double omega);

}  // namespace twoview
