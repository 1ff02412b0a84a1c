#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "twoview/errors.hpp"
#include "twoview/evaluation.hpp"
#include "twoview/trainer.hpp"

using namespace twoview;

namespace {

ModelParams random_model(const ModelConfig& config, std::size_t ne, std::size_t nr, std::size_t nc, std::size_t nm,
                         std::uint64_t seed) {
    SplitMix64 rng(seed);
    auto p = init_params<float>(config, ne, nr, nc, nm, rng);
    std::normal_distribution<double> normal(0.0, 0.3);
    if (p.ct_map)
        for (auto& b : p.ct_map->bias) b = static_cast<float>(normal(rng));
    // duplicate rows so exact ties occur
    for (Table t : {Table::Entity, Table::Concept}) {
        auto& table = p.table(t);
        for (std::size_t j = 0; j < table.dim; ++j) table.row(1)[j] = table.row(0)[j];
    }
    return p;
}

}  // namespace

TEST_CASE("rank_candidates basic cases") {
    const std::vector<double> s{0.9, 0.1, 0.5, 0.7};
    CHECK(rank_candidates(s, 0, {}) == 1);
    CHECK(rank_candidates(s, 2, {}) == 3);
    const std::vector<Id> f{3};
    CHECK(rank_candidates(s, 2, f) == 2);
    const std::vector<double> tie{0.5, 0.5, 0.1};
    CHECK(rank_candidates(tie, 1, {}) == 2);
    CHECK(rank_candidates(tie, 1, {}, TieMode::Optimistic) == 1);
    CHECK(rank_candidates(tie, 1, {}, TieMode::Pessimistic) == 2);
    const std::vector<Id> bad{1};
    CHECK_THROWS_AS(rank_candidates(tie, 1, bad), Error);
}

TEST_CASE("rank_candidates agrees with a sort-and-scan oracle") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        std::vector<double> scores(n);
        for (auto& x : scores) x = static_cast<double>(rng.below(6));  // coarse values force ties
        const Id gold = static_cast<Id>(rng.below(n));
        std::set<Id> filtered;
        for (Id c = 0; c < n; ++c)
            if (c != gold && rng.below(4) == 0) filtered.insert(c);
        const std::vector<Id> fv(filtered.begin(), filtered.end());
        for (auto tie : {TieMode::Mid, TieMode::Optimistic, TieMode::Pessimistic})
            REQUIRE(rank_candidates(scores, gold, fv, tie) == oracle::sorted_rank(scores, gold, filtered, tie));
    }
}

TEST_CASE("aggregation") {
    const std::vector<std::size_t> two{1, 4};
    const auto r = aggregate_ranks(two, {1, 3, 10});
    CHECK(r.mrr == 0.625);
    CHECK(r.hits.at(1) == 0.5);
    CHECK(r.hits.at(3) == 0.5);
    CHECK(r.hits.at(10) == 1.0);
    const std::vector<std::size_t> typing{1, 2};
    const auto t = aggregate_ranks(typing, {1, 3});
    CHECK(t.mrr == 0.75);
    CHECK(t.hits.at(3) == 1.0);
}

TEST_CASE("triple completion matches the oracle") {
    for (auto kind : {ScorerKind::Translational, ScorerKind::Multiplicative, ScorerKind::Correlational}) {
        ModelConfig cfg;
        cfg.intra = kind;
        cfg.entity_dim = 6;
        cfg.concept_dim = 4;
        const auto p = random_model(cfg, 20, 5, 8, 3, 7);
        SplitMix64 rng(3);
        TripleStore train, test;
        while (train.size() < 60) train.insert({Id(rng.below(20)), Id(rng.below(5)), Id(rng.below(20))});
        while (test.size() < 25) {
            const Triple t{Id(rng.below(20)), Id(rng.below(5)), Id(rng.below(20))};
            if (!train.contains(t)) test.insert(t);
        }
        const TripleStore* filters[] = {&train};
        EvalOptions opt;
        opt.keep_queries = true;
        const auto report = triple_completion_eval(p, kind, View::Instance, test, filters, opt);
        const auto want = oracle::completion_ranks(p, kind, View::Instance, test, train);
        REQUIRE(report.queries.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(report.queries[i].rank == want[i]);
        CHECK(std::abs(report.mrr - oracle::mrr(want)) < 1e-12);

        opt.threads = 3;
        CHECK(triple_completion_eval(p, kind, View::Instance, test, filters, opt).mrr == report.mrr);

        const auto unfiltered = triple_completion_eval(p, kind, View::Instance, test, {}, opt);
        CHECK(report.mrr >= unfiltered.mrr);
        CHECK(report.hits.at(1) <= report.hits.at(3));
        CHECK(report.hits.at(3) <= report.hits.at(10));
    }
}

TEST_CASE("perfect translational model") {
    ModelParams p;
    p.table(Table::Entity) = EmbeddingTable<float>(3, 1);
    p.table(Table::Relation) = EmbeddingTable<float>(1, 1);
    p.table(Table::Entity).data = {0, 1, 2};
    p.table(Table::Relation).data = {1};
    TripleStore test;
    test.insert({0, 0, 1});
    test.insert({1, 0, 2});
    const auto r = triple_completion_eval(p, ScorerKind::Translational, View::Instance, test, {});
    CHECK(r.mrr == 1.0);
    CHECK(r.hits.at(1) == 1.0);
    CHECK_THROWS_AS(triple_completion_eval(p, ScorerKind::Translational, View::Instance, TripleStore{}, {}), Error);
}

TEST_CASE("typing matches the oracle") {
    for (auto cross : {CrossKind::Grouping, CrossKind::Transformation}) {
        ModelConfig cfg;
        cfg.cross = cross;
        cfg.entity_dim = 6;
        cfg.concept_dim = cross == CrossKind::Grouping ? 6 : 4;
        const auto p = random_model(cfg, 20, 5, 8, 3, 11);
        SplitMix64 rng(5);
        CrossLinkStore train, test;
        while (train.size() < 20) train.insert({Id(rng.below(20)), Id(rng.below(8))});
        while (test.size() < 15) {
            const Link l{Id(rng.below(20)), Id(rng.below(8))};
            if (!train.contains(l.entity, l.concept_id)) test.insert(l);
        }
        EvalOptions opt;
        opt.keep_queries = true;
        const auto report = entity_typing_eval(p, cfg, test, train, opt);
        const auto want = oracle::typing_ranks(p, cfg, test, train);
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(report.queries[i].rank == want[i]);
        CHECK(std::abs(report.mrr - oracle::mrr(want)) < 1e-12);

        opt.filter = FilterMode::Strict;
        CHECK(entity_typing_eval(p, cfg, test, train, opt).mrr >= report.mrr);
    }
}

TEST_CASE("typing scores put the coinciding concept first") {
    ModelConfig cg;
    cg.cross = CrossKind::Grouping;
    cg.entity_dim = cg.concept_dim = 3;
    ModelParams p;
    p.table(Table::Entity) = EmbeddingTable<float>(1, 3);
    p.table(Table::Concept) = EmbeddingTable<float>(3, 3);
    p.table(Table::Entity).data = {0, 1, 0};
    p.table(Table::Concept).data = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const auto ranked = typing_scores(p, cg, 0);
    CHECK(ranked[0].first == 1);
    CHECK(ranked[0].second == 0.0);
    // exact tie between concepts 0 and 2 resolves by id
    CHECK(ranked[1].first == 0);
    CHECK(ranked[2].first == 2);

    // appending far-away concepts does not change the order of existing ones
    auto wider = p;
    wider.table(Table::Concept) = EmbeddingTable<float>(4, 3);
    std::copy(p.table(Table::Concept).data.begin(), p.table(Table::Concept).data.end(),
              wider.table(Table::Concept).data.begin());
    wider.table(Table::Concept).row(3)[0] = 50;
    const auto again = typing_scores(wider, cg, 0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again[i].first == ranked[i].first);

    ModelConfig ct;
    ct.entity_dim = 3;
    ct.concept_dim = 2;
    ModelParams q;
    q.table(Table::Entity) = EmbeddingTable<float>(1, 3);
    q.table(Table::Concept) = EmbeddingTable<float>(2, 2);
    q.table(Table::Entity).data = {0.2f, 0.4f, 0.6f};
    q.ct_map.emplace(2, 3);
    q.ct_map->w(0, 0) = 1;
    q.ct_map->w(1, 1) = 1;
    q.table(Table::Concept).data = {0.5f, 0.5f, std::tanh(0.2f), std::tanh(0.4f)};
    const auto ctr = typing_scores(q, ct, 0);
    CHECK(ctr[0].first == 1);
    CHECK(ctr[0].second == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("long tail slice") {
    ModelConfig cg;
    cg.cross = CrossKind::Grouping;
    cg.entity_dim = cg.concept_dim = 4;
    const auto p = random_model(cg, 6, 2, 4, 1, 2);
    CrossLinkStore test, train;
    for (Id e = 0; e < 6; ++e) test.insert({e, e % 4});
    const std::map<Id, std::size_t> freq{{0, 1}, {1, 5}, {2, 9}, {3, 2}};
    const auto full = entity_typing_eval(p, cg, test, train);
    const auto all = long_tail_eval(p, cg, test, train, freq, 100);
    CHECK(all.mrr == full.mrr);
    CHECK(all.n_queries == full.n_queries);
    const auto slice = long_tail_eval(p, cg, test, train, freq, 3);
    REQUIRE(slice.slice.has_value());
    CHECK(slice.slice->threshold == 3);
    CHECK(slice.slice->entities == 4);  // 0, 3 and the unseen 4, 5
    CHECK(slice.slice->all_entities == 6);
    CHECK_THROWS_AS(long_tail_eval(p, cg, test, train, {{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}}, 1), Error);
}

TEST_CASE("relation population") {
    ModelConfig ct;
    ct.entity_dim = 3;
    ct.concept_dim = 3;
    ModelParams p;
    p.table(Table::Relation) = EmbeddingTable<float>(3, 3);
    p.table(Table::Concept) = EmbeddingTable<float>(2, 3);
    p.ct_map.emplace(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p.ct_map->w(i, i) = 1;
    // concepts at tanh(x); the inverse recovers x
    const float a[3] = {0.1f, 0.2f, 0.0f}, b[3] = {0.4f, -0.1f, 0.3f};
    for (std::size_t i = 0; i < 3; ++i) {
        p.table(Table::Concept).row(0)[i] = std::tanh(a[i]);
        p.table(Table::Concept).row(1)[i] = std::tanh(b[i]);
    }
    p.table(Table::Relation).data = {1, 1, 1, 0.3f, -0.3f, 0.3f, 0, 0, 0};
    const auto top = populate_relation_query(p, ct, 0, 1, 10);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == 1);
    CHECK(top[0].second == doctest::Approx(0.0).epsilon(1e-5));

    // reordering the relation vocabulary only relabels the answers
    auto perm = p;
    perm.table(Table::Relation).data = {0, 0, 0, 1, 1, 1, 0.3f, -0.3f, 0.3f};
    const auto ptop = populate_relation_query(perm, ct, 0, 1, 3);
    const Id relabel[3] = {1, 2, 0};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ptop[i].first == relabel[top[i].first]);
        CHECK(ptop[i].second == top[i].second);
    }

    ModelParams single = p;
    single.table(Table::Relation) = EmbeddingTable<float>(1, 3);
    CHECK(populate_relation_query(single, ct, 1, 0, 5).front().first == 0);

    auto mult = ct;
    mult.intra = ScorerKind::Multiplicative;
    CHECK_THROWS_AS(populate_relation_query(p, mult, 0, 1, 3), UnsupportedVariantError);
    auto cg = ct;
    cg.cross = CrossKind::Grouping;
    CHECK_THROWS_AS(populate_relation_query(p, cg, 0, 1, 3), UnsupportedVariantError);
}

TEST_CASE("meta triple population") {
    ModelConfig cfg;
    cfg.entity_dim = 2;
    cfg.concept_dim = 2;
    ModelParams p;
    p.table(Table::Concept) = EmbeddingTable<float>(3, 2);
    p.table(Table::MetaRelation) = EmbeddingTable<float>(1, 2);
    p.table(Table::Concept).data = {0, 0, 1, 0, 0, 1};
    p.table(Table::MetaRelation).data = {0, 1};
    const auto top = populate_triple_query(p, cfg, 0, 0, 3);
    CHECK(top[0].first == 2);
    TripleStore known;
    known.insert({0, 0, 2});
    const auto skip = populate_triple_query(p, cfg, 0, 0, 3, &known);
    CHECK(skip.size() == 2);
    CHECK(skip[0].first != 2);
}
