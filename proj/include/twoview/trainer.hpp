#pragma once

// Alternating joint training. One epoch interleaves optimizer steps drawn
// from up to four sources: instance-view triples, ontology-view triples,
// hierarchy pairs (hierarchy-aware variants) and cross-view links. Intra-view
// steps run at the base learning rate, cross-view steps at omega times it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twoview/kb.hpp"
#include "twoview/model.hpp"
#include "twoview/objectives.hpp"
#include "twoview/optimizer.hpp"

namespace twoview {

struct BatchSizes {
    std::size_t instance = 128;
    std::size_t ontology = 32;
    std::size_t cross = 64;
    std::size_t hierarchy = 32;
};

struct TrainConfig {
    std::size_t epochs = 120;
    BatchSizes batch;
    double learning_rate = 0.001;
    Margins margins;
    LossWeights weights;
    std::size_t negative_ratio = 1;
    /// CG only: margin-ranking form with sampled negative concepts.
    bool cross_negatives = true;
    bool enable_intra = true;
    bool enable_cross = true;
    std::uint64_t seed = 0;
    /// Training is serial, so every run is deterministic; the flag is kept
    /// so configs can state the requirement explicitly.
    bool deterministic = true;
    /// Early stopping on the validation callback; 0 disables it.
    std::size_t patience = 0;
    AmsgradConfig optimizer;

    void validate() const;
};

/// Margins at the per-scorer defaults: 0.5 for translational, 1.0 for the
/// bilinear scorers (intra-view margins only).
Margins default_margins(ScorerKind kind);

/// Training stores in model-ready form. In hierarchy-aware mode `ontology`
/// holds only the non-hierarchical triples and `hierarchy` the extracted pairs.
struct TrainingSet {
    std::size_t n_entities = 0;
    std::size_t n_relations = 0;
    std::size_t n_concepts = 0;
    std::size_t n_meta = 0;
    TripleStore instance;
    TripleStore ontology;
    CrossLinkStore links;
    std::optional<HierarchyStore> hierarchy;
};

/// Builds the training set from already-split stores; in hierarchy-aware mode
/// extracts the hierarchy from `ontology_train` using `hierarchical` names.
TrainingSet make_training_set(const KnowledgeBase& vocabularies, const TripleStore& instance_train,
                              const TripleStore& ontology_train, const CrossLinkStore& links_train,
                              const ModelConfig& model, const std::vector<std::string>& hierarchical);

struct EpochReport {
    std::size_t epoch = 0;
    double instance = 0;   // mean batch loss per source
    double ontology = 0;
    double hierarchy = 0;
    double cross = 0;
    double intra = 0;      // combine_intra of the above
    double total = 0;      // combine_total(intra, cross, omega)
    std::size_t steps = 0;
    std::size_t saturated_negatives = 0;
};

/// Runs one epoch in place.
EpochReport train_epoch(ModelParams& params, AmsgradState<float>& state, const TrainingSet& data,
                        const ModelConfig& model, const TrainConfig& config, SplitMix64& rng);

struct TrainHooks {
    /// Higher is better (e.g. validation MRR); used only when patience > 0.
    std::function<double(const ModelParams&)> validation_metric;
    std::function<void(const EpochReport&, const ModelParams&)> on_epoch;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochReport> history;
    bool stopped_early = false;
};

/// Fresh initialization followed by `epochs` epochs.
TrainResult train(const TrainingSet& data, const ModelConfig& model, const TrainConfig& config,
                  const TrainHooks& hooks = {});

/// Throws ConfigError for combinations the model cannot train.
void validate_setup(const TrainingSet& data, const ModelConfig& model, const TrainConfig& config);

}  // namespace twoview
