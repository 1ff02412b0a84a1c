#include <cmath>
#include <cstring>

#include "doctest.h"
#include "twoview/diagnostics.hpp"
#include "twoview/errors.hpp"
#include "twoview/optimizer.hpp"
#include "twoview/synthetic.hpp"
#include "twoview/trainer.hpp"

using namespace twoview;

namespace {

BasicModelParams<double> scalar_model(double value) {
    BasicModelParams<double> p;
    p.table(Table::Relation) = EmbeddingTable<double>(1, 1);
    p.table(Table::Relation).data[0] = value;
    return p;
}

GradientMap<double> scalar_grad(double g) {
    GradientMap<double> out;
    out.row(Table::Relation, 0, 1)[0] = g;
    return out;
}

struct Fixture {
    SyntheticKb synth = make_synthetic_kb({});
    TripleSplit instance;
    TripleSplit ontology;
    LinkSplit links;

    Fixture() {
        SplitSpec spec;
        spec.seed = 3;
        instance = split_triples(synth.kb.instance, spec);
        ontology = split_triples(synth.kb.ontology, spec);
        links = split_links(synth.kb.links, 0.6, 3);
    }

    TrainingSet data(const ModelConfig& model) const {
        return make_training_set(synth.kb, instance.train, ontology.train, links.train, model, synth.hierarchical);
    }
};

ModelConfig small(const std::string& variant) {
    auto m = ModelConfig::from_variant(variant);
    m.entity_dim = 16;
    m.concept_dim = m.cross == CrossKind::Grouping ? 16 : 8;
    return m;
}

TrainConfig quick(std::size_t epochs, const ModelConfig& model) {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = 0.01;
    c.batch = {32, 8, 16, 8};
    c.margins = default_margins(model.intra);
    c.seed = 5;
    return c;
}

bool same_bytes(const ModelParams& a, const ModelParams& b) {
    for (std::size_t t = 0; t < table_count; ++t) {
        const auto& x = a.tables[t].data;
        const auto& y = b.tables[t].data;
        if (x.size() != y.size() || std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) != 0) return false;
    }
    auto maps = [](const std::optional<AffineMap<float>>& m, const std::optional<AffineMap<float>>& n) {
        if (m.has_value() != n.has_value()) return false;
        if (!m) return true;
        return std::memcmp(m->weight.data(), n->weight.data(), m->weight.size() * sizeof(float)) == 0 &&
               std::memcmp(m->bias.data(), n->bias.data(), m->bias.size() * sizeof(float)) == 0;
    };
    return maps(a.ct_map, b.ct_map) && maps(a.ha_map, b.ha_map);
}

}  // namespace

TEST_CASE("amsgrad single step") {
    auto p = scalar_model(0.5);
    AmsgradState<double> state(p);
    amsgrad_step(p, state, scalar_grad(1.0), 0.01);
    // m = 0.1, v = 0.001, step = lr m / (sqrt(v) + eps)
    const double expected = 0.01 * 0.1 / (std::sqrt(0.001) + 1e-8);
    CHECK(0.5 - p.table(Table::Relation).data[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.0316).epsilon(1e-3));
}

TEST_CASE("amsgrad keeps the running maximum of v") {
    auto p = scalar_model(0.0);
    AmsgradState<double> state(p);
    amsgrad_step(p, state, scalar_grad(1.0), 0.01);
    const double peak = state.tables[1].v_max[0];
    amsgrad_step(p, state, scalar_grad(0.01), 0.01);
    CHECK(state.tables[1].v[0] < peak);
    CHECK(state.tables[1].v_max[0] == peak);
    // a larger gradient raises it again
    amsgrad_step(p, state, scalar_grad(3.0), 0.01);
    CHECK(state.tables[1].v_max[0] > peak);
}

TEST_CASE("amsgrad leaves untouched coordinates alone") {
    auto p = scalar_model(0.25);
    AmsgradState<double> state(p);
    amsgrad_step(p, state, scalar_grad(0.0), 0.01);
    CHECK(p.table(Table::Relation).data[0] == 0.25);
    amsgrad_step(p, state, GradientMap<double>{}, 0.01);
    CHECK(p.table(Table::Relation).data[0] == 0.25);
    CHECK_THROWS_AS(amsgrad_step(p, state, scalar_grad(std::nan("")), 0.01), NumericError);
    CHECK(p.table(Table::Relation).data[0] == 0.25);
}

TEST_CASE("amsgrad projects moved entity rows") {
    BasicModelParams<double> p;
    p.table(Table::Entity) = EmbeddingTable<double>(2, 2);
    p.table(Table::Entity).data = {1, 0, 0, 1};
    AmsgradState<double> state(p);
    GradientMap<double> g;
    g.row(Table::Entity, 0, 2)[1] = -1.0;
    amsgrad_step(p, state, g, 0.1);
    const auto r = p.table(Table::Entity).row(0);
    CHECK(std::hypot(r[0], r[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[1] > 0);
    CHECK(p.table(Table::Entity).data[2] == 0.0);
    CHECK(p.table(Table::Entity).data[3] == 1.0);
}

TEST_CASE("variant strings") {
    const auto a = ModelConfig::from_variant("TransE-CT");
    CHECK(a.intra == ScorerKind::Translational);
    CHECK(a.cross == CrossKind::Transformation);
    CHECK_FALSE(a.hierarchy_aware);
    const auto b = ModelConfig::from_variant("HAHolE-CT");
    CHECK(b.hierarchy_aware);
    CHECK(b.intra == ScorerKind::Correlational);
    CHECK(b.variant() == "HAHolE-CT");
    CHECK(ModelConfig::from_variant("Mult-CG").cross == CrossKind::Grouping);
    CHECK_THROWS_AS(ModelConfig::from_variant("TransE"), ConfigError);
    CHECK_THROWS_AS(ModelConfig::from_variant("RotatE-CT"), ConfigError);
    CHECK_THROWS_AS(ModelConfig::from_variant("TransE-XX"), ConfigError);

    auto cg = ModelConfig::from_variant("TransE-CG");
    cg.entity_dim = 300;
    cg.concept_dim = 50;
    CHECK_THROWS_AS(cg.validate(), ConfigError);
}

TEST_CASE("setup validation") {
    Fixture fx;
    auto model = small("HATransE-CT");
    auto config = quick(1, model);
    SUBCASE("HA without hierarchy") {
        CHECK_THROWS_AS(make_training_set(fx.synth.kb, fx.instance.train, fx.ontology.train, fx.links.train, model, {}),
                        ConfigError);
    }
    SUBCASE("bad hyperparameters") {
        const auto data = fx.data(model);
        config.learning_rate = 0;
        CHECK_THROWS_AS(validate_setup(data, model, config), ConfigError);
        config = quick(1, model);
        config.weights.alpha1 = -1;
        CHECK_THROWS_AS(validate_setup(data, model, config), ConfigError);
        config = quick(1, model);
        config.epochs = 0;
        CHECK_THROWS_AS(train(data, model, config), ConfigError);
    }
}

TEST_CASE("epoch accounting and norms") {
    Fixture fx;
    for (const auto& variant : {"TransE-CT", "HAMult-CT", "HolE-CG"}) {
        const auto model = small(variant);
        const auto data = fx.data(model);
        const auto config = quick(3, model);
        const auto result = train(data, model, config);
        REQUIRE(result.history.size() == 3);
        for (const auto& r : result.history) {
            const std::optional<double> h = model.hierarchy_aware ? std::optional<double>(r.hierarchy) : std::nullopt;
            CHECK(r.intra == doctest::Approx(combine_intra(r.instance, r.ontology, h, config.weights, model.hierarchy_aware)).epsilon(1e-6));
            CHECK(r.total == doctest::Approx(combine_total(r.intra, r.cross, config.weights.omega)).epsilon(1e-6));
            CHECK(r.steps > 0);
        }
        CHECK(max_norm_deviation(result.params) < 1e-5);
    }
}

TEST_CASE("training is deterministic") {
    Fixture fx;
    const auto model = small("HATransE-CT");
    const auto data = fx.data(model);
    const auto config = quick(2, model);
    const auto a = train(data, model, config);
    const auto b = train(data, model, config);
    CHECK(same_bytes(a.params, b.params));
    auto other = config;
    other.seed = 6;
    CHECK_FALSE(same_bytes(a.params, train(data, model, other).params));
}

TEST_CASE("disabling a step family freezes its parameters") {
    Fixture fx;
    const auto model = small("TransE-CT");
    const auto data = fx.data(model);
    auto config = quick(1, model);

    SplitMix64 rng(config.seed);
    const auto init = init_params<float>(model, data.n_entities, data.n_relations, data.n_concepts, data.n_meta, rng);

    auto run = [&](const TrainConfig& c) {
        auto p = init;
        AmsgradState<float> state(p);
        SplitMix64 r(11);
        train_epoch(p, state, data, model, c, r);
        return p;
    };
    auto no_cross = config;
    no_cross.weights.omega = 0;
    const auto a = run(no_cross);
    CHECK(a.ct_map == init.ct_map);
    CHECK_FALSE(a.table(Table::Relation) == init.table(Table::Relation));

    auto no_intra = config;
    no_intra.enable_intra = false;
    const auto b = run(no_intra);
    CHECK(b.table(Table::Relation) == init.table(Table::Relation));
    CHECK(b.table(Table::MetaRelation) == init.table(Table::MetaRelation));
    CHECK_FALSE(b.ct_map == init.ct_map);
}

TEST_CASE("block-averaged loss decreases for every variant") {
    Fixture fx;
    for (const auto& variant : {"TransE-CG", "Mult-CG", "HolE-CG", "TransE-CT", "Mult-CT", "HolE-CT", "HATransE-CT",
                                "HAMult-CT", "HAHolE-CT"}) {
        CAPTURE(variant);
        const auto model = small(variant);
        TrainConfig config;
        config.epochs = 30;
        config.margins = default_margins(model.intra);
        config.seed = 5;
        const auto result = train(fx.data(model), model, config);
        REQUIRE(result.history.size() == 30);
        auto mean = [&](std::size_t from, std::size_t n) {
            double s = 0;
            for (std::size_t j = from; j < from + n; ++j) s += result.history[j].total;
            return s / static_cast<double>(n);
        };
        CHECK(mean(10, 10) <= mean(0, 10));
        CHECK(mean(20, 10) <= mean(10, 10));
        CHECK(mean(25, 5) <= 0.85 * mean(0, 5));
    }
}

TEST_CASE("norm audit") {
    auto cfg = small("HATransE-CT");
    const auto audit = audit_norms(cfg, 200, 4);
    CHECK(audit.steps == 200);
    CHECK(audit.max_deviation < 1e-5);
    CHECK(audit.untouched_changed == 0);
}
