#include "twoview/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twoview/errors.hpp"

namespace twoview {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
    if (batch.instance == 0 || batch.ontology == 0 || batch.cross == 0 || batch.hierarchy == 0)
        throw ConfigError("batch sizes must be positive");
    if (negative_ratio < 1) throw ConfigError("negative ratio must be at least 1");
    margins.validate();
    weights.validate();
}

Margins default_margins(ScorerKind kind) {
    Margins m;
    const double intra = kind == ScorerKind::Translational ? 0.5 : 1.0;
    m.instance = intra;
    m.ontology = intra;
    return m;
}

TrainingSet make_training_set(const KnowledgeBase& vocabularies, const TripleStore& instance_train,
                              const TripleStore& ontology_train, const CrossLinkStore& links_train,
                              const ModelConfig& model, const std::vector<std::string>& hierarchical) {
    TrainingSet set;
    set.n_entities = vocabularies.entities.size();
    set.n_relations = vocabularies.relations.size();
    set.n_concepts = vocabularies.concepts.size();
    set.n_meta = vocabularies.meta_relations.size();
    set.instance = instance_train;
    set.links = links_train;
    if (model.hierarchy_aware) {
        if (hierarchical.empty())
            throw ConfigError("hierarchy-aware variant " + model.variant() +
                              " needs the names of the hierarchical meta-relations");
        auto extracted = extract_hierarchy(ontology_train, vocabularies.meta_relations, hierarchical);
        set.ontology = std::move(extracted.residual);
        set.hierarchy = std::move(extracted.hierarchy);
    } else {
        set.ontology = ontology_train;
    }
    return set;
}

void validate_setup(const TrainingSet& data, const ModelConfig& model, const TrainConfig& config) {
    model.validate();
    config.validate();
    if (model.hierarchy_aware && (!data.hierarchy || data.hierarchy->empty()))
        throw ConfigError("hierarchy-aware variant " + model.variant() + " has no hierarchy pairs to train on");
    if (data.instance.empty()) throw ConfigError("no instance-view training triples");
    if (data.n_entities < 2 || data.n_concepts < 2) throw ConfigError("need at least two entities and two concepts");
}

namespace {

enum class Source { Instance, Ontology, Hierarchy, Cross };

struct ScheduledBatch {
    double key;
    Source source;
    std::size_t index;
};

std::vector<std::size_t> shuffled_indices(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(idx), rng);
    return idx;
}

std::size_t batch_count(std::size_t n, std::size_t size) { return n == 0 ? 0 : (n + size - 1) / size; }

// Batches of every source are placed at evenly spaced positions in [0, 1) and
// merged, so each store is swept once per epoch in proportion to its size.
std::vector<ScheduledBatch> interleave(const std::vector<std::pair<Source, std::size_t>>& counts) {
    std::vector<ScheduledBatch> plan;
    for (const auto& [source, n] : counts)
        for (std::size_t j = 0; j < n; ++j)
            plan.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(n), source, j});
    std::stable_sort(plan.begin(), plan.end(), [](const auto& a, const auto& b) {
        if (a.key != b.key) return a.key < b.key;
        return static_cast<int>(a.source) < static_cast<int>(b.source);
    });
    return plan;
}

template <typename Item>
std::span<const std::size_t> batch_slice(const std::vector<std::size_t>& order, std::size_t index, std::size_t size) {
    const std::size_t begin = index * size;
    const std::size_t end = std::min(order.size(), begin + size);
    return {order.data() + begin, end - begin};
}

}  // namespace

EpochReport train_epoch(ModelParams& params, AmsgradState<float>& state, const TrainingSet& data,
                        const ModelConfig& model, const TrainConfig& config, SplitMix64& rng) {
    const bool cross_on = config.enable_cross && config.weights.omega > 0 && !data.links.empty();
    const bool onto_on = config.enable_intra && !data.ontology.empty();
    const bool ha_on = config.enable_intra && model.hierarchy_aware && data.hierarchy && !data.hierarchy->empty();
    const bool inst_on = config.enable_intra && !data.instance.empty();

    const auto inst_order = shuffled_indices(inst_on ? data.instance.size() : 0, rng);
    const auto onto_order = shuffled_indices(onto_on ? data.ontology.size() : 0, rng);
    const auto ha_order = shuffled_indices(ha_on ? data.hierarchy->size() : 0, rng);
    const auto cross_order = shuffled_indices(cross_on ? data.links.size() : 0, rng);

    const auto plan = interleave({
        {Source::Instance, batch_count(inst_order.size(), config.batch.instance)},
        {Source::Ontology, batch_count(onto_order.size(), config.batch.ontology)},
        {Source::Hierarchy, batch_count(ha_order.size(), config.batch.hierarchy)},
        {Source::Cross, batch_count(cross_order.size(), config.batch.cross)},
    });

    SamplerStats sampler;
    double sums[4] = {0, 0, 0, 0};
    std::size_t counts[4] = {0, 0, 0, 0};
    const std::size_t k = config.negative_ratio;
    const double eta = config.learning_rate;

    std::vector<TripleSample> triples;
    std::vector<LinkSample> links;
    std::vector<HierarchySample> pairs;
    for (const auto& step : plan) {
        LossResult<float> result;
        double rate = eta;
        float scale = 1.0f;
        switch (step.source) {
            case Source::Instance:
            case Source::Ontology: {
                const bool inst = step.source == Source::Instance;
                const auto& store = inst ? data.instance : data.ontology;
                const auto& order = inst ? inst_order : onto_order;
                const auto slice = batch_slice<Triple>(order, step.index, inst ? config.batch.instance : config.batch.ontology);
                const std::size_t nodes = inst ? data.n_entities : data.n_concepts;
                triples.clear();
                for (std::size_t i : slice) {
                    const auto& pos = store.triples()[i];
                    for (std::size_t r = 0; r < k; ++r)
                        triples.push_back({pos, sample_negative_triple(pos, store, nodes, rng, sampler)});
                }
                const float margin = static_cast<float>(inst ? config.margins.instance : config.margins.ontology);
                result = intra_hinge_loss<float>(model.intra, inst ? View::Instance : View::Ontology, triples, margin, params);
                if (!inst) scale = static_cast<float>(config.weights.alpha1);
                break;
            }
            case Source::Hierarchy: {
                const auto slice = batch_slice<HierarchyPair>(ha_order, step.index, config.batch.hierarchy);
                pairs.clear();
                for (std::size_t i : slice) {
                    const auto& p = data.hierarchy->pairs()[i];
                    for (std::size_t r = 0; r < k; ++r)
                        pairs.push_back({p.fine, p.coarse, sample_negative_coarse(p.fine, *data.hierarchy, data.n_concepts, rng, sampler)});
                }
                result = ha_loss<float>(pairs, static_cast<float>(config.margins.hierarchy), params);
                scale = static_cast<float>(config.weights.alpha2);
                break;
            }
            case Source::Cross: {
                const auto slice = batch_slice<Link>(cross_order, step.index, config.batch.cross);
                links.clear();
                const bool need_negatives = model.cross == CrossKind::Transformation || config.cross_negatives;
                for (std::size_t i : slice) {
                    const auto& l = data.links.links()[i];
                    for (std::size_t r = 0; r < k; ++r) {
                        const Id neg = need_negatives
                                           ? sample_negative_concept(l.entity, data.links, data.n_concepts, rng, sampler)
                                           : l.concept_id;
                        links.push_back({l.entity, l.concept_id, neg});
                        if (!need_negatives) break;
                    }
                }
                const float margin = static_cast<float>(config.margins.cross);
                result = model.cross == CrossKind::Transformation
                             ? ct_loss<float>(links, margin, params)
                             : cg_loss<float>(links, margin, config.cross_negatives, params);
                rate = config.weights.omega * eta;
                break;
            }
        }
        const auto src = static_cast<std::size_t>(step.source);
        sums[src] += result.loss;
        ++counts[src];
        if (scale != 1.0f) result.grads.scale(scale);
        amsgrad_step(params, state, result.grads, rate, config.optimizer);
    }

    EpochReport report;
    auto mean = [&](Source s) {
        const auto i = static_cast<std::size_t>(s);
        return counts[i] ? sums[i] / static_cast<double>(counts[i]) : 0.0;
    };
    report.instance = mean(Source::Instance);
    report.ontology = mean(Source::Ontology);
    report.hierarchy = mean(Source::Hierarchy);
    report.cross = mean(Source::Cross);
    report.intra = combine_intra(report.instance, report.ontology,
                                 model.hierarchy_aware ? std::optional<double>(report.hierarchy) : std::nullopt,
                                 config.weights, model.hierarchy_aware);
    report.total = combine_total(report.intra, report.cross, config.weights.omega);
    report.steps = plan.size();
    report.saturated_negatives = sampler.saturated;
    return report;
}

TrainResult train(const TrainingSet& data, const ModelConfig& model, const TrainConfig& config,
                  const TrainHooks& hooks) {
    validate_setup(data, model, config);
    SplitMix64 init_rng(config.seed);
    SplitMix64 sample_rng(config.seed ^ 0xD1B54A32D192ED03ULL);

    TrainResult result;
    result.params = init_params<float>(model, data.n_entities, data.n_relations, data.n_concepts, data.n_meta, init_rng);
    AmsgradState<float> state(result.params);

    const bool early_stop = config.patience > 0 && hooks.validation_metric;
    double best = -std::numeric_limits<double>::infinity();
    ModelParams best_params;
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto report = train_epoch(result.params, state, data, model, config, sample_rng);
        report.epoch = epoch;
        result.history.push_back(report);
        if (hooks.on_epoch) hooks.on_epoch(report, result.params);
        if (early_stop) {
            const double metric = hooks.validation_metric(result.params);
            if (metric > best) {
                best = metric;
                best_params = result.params;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                result.params = std::move(best_params);
                result.stopped_early = true;
                break;
            }
        }
    }
    return result;
}

}  // namespace twoview
