#include <cmath>
#include <random>

#include "doctest.h"
#include "twoview/errors.hpp"
#include "twoview/scoring.hpp"

using namespace twoview;

namespace {

using Vec = std::vector<double>;

Vec random_vec(std::size_t d, SplitMix64& rng) {
    std::normal_distribution<double> normal;
    Vec v(d);
    for (auto& x : v) x = normal(rng);
    return v;
}

double f(ScorerKind k, const Vec& h, const Vec& r, const Vec& t) {
    return score<double>(k, h, r, t);
}

constexpr ScorerKind kinds[] = {ScorerKind::Translational, ScorerKind::Multiplicative, ScorerKind::Correlational};

}  // namespace

TEST_CASE("scorer names") {
    for (auto k : kinds) CHECK(parse_scorer(scorer_name(k)) == k);
    CHECK(scorer_name(ScorerKind::Correlational) == "HolE");
    CHECK_FALSE(parse_scorer("RotatE").has_value());
}

TEST_CASE("translational score") {
    const Vec h{0.1, 0.2}, r{0.3, -0.5};
    const Vec t{0.4, -0.3};
    CHECK(f(ScorerKind::Translational, h, r, t) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(f(ScorerKind::Translational, {0, 0}, {3, 0}, {0, 4}) == -5.0);

    SplitMix64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_vec(5, rng), b = random_vec(5, rng), c = random_vec(5, rng), v = random_vec(5, rng);
        const double base = f(ScorerKind::Translational, a, b, c);
        CHECK(base <= 0);
        Vec av = a, cv = c;
        for (std::size_t j = 0; j < 5; ++j) {
            av[j] += v[j];
            cv[j] += v[j];
        }
        CHECK(f(ScorerKind::Translational, av, b, cv) == doctest::Approx(base).epsilon(1e-5));
    }
}

TEST_CASE("multiplicative score") {
    SplitMix64 rng(2);
    const auto h = random_vec(6, rng), t = random_vec(6, rng), r = random_vec(6, rng);
    double dot = 0;
    for (std::size_t i = 0; i < 6; ++i) dot += h[i] * t[i];
    CHECK(f(ScorerKind::Multiplicative, h, Vec(6, 1.0), t) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(f(ScorerKind::Multiplicative, h, r, t) == f(ScorerKind::Multiplicative, t, r, h));
}

TEST_CASE("correlational score") {
    CHECK(f(ScorerKind::Correlational, {1, 2, 3}, {1, 0, 0}, {4, 5, 6}) == 32.0);
    CHECK(f(ScorerKind::Correlational, {1, 2, 3}, {0, 1, 1}, {4, 5, 6}) == 58.0);
    SplitMix64 rng(4);
    const auto h = random_vec(4, rng), r = random_vec(4, rng), t = random_vec(4, rng);
    CHECK(f(ScorerKind::Correlational, h, r, t) != doctest::Approx(f(ScorerKind::Correlational, t, r, h)));
}

TEST_CASE("score gradients at fixed points") {
    const auto zero = score_grads<double>(ScorerKind::Translational, Vec{1, 2}, Vec{1, 1}, Vec{2, 3});
    for (const auto* g : {&zero.head, &zero.relation, &zero.tail})
        for (double x : *g) CHECK(x == 0.0);

    const auto ones = score_grads<double>(ScorerKind::Multiplicative, Vec{1, 1}, Vec{1, 1}, Vec{1, 1});
    CHECK(ones.head == Vec{1, 1});
    CHECK(ones.relation == Vec{1, 1});
    CHECK(ones.tail == Vec{1, 1});
}

TEST_CASE("score gradients match central differences") {
    SplitMix64 rng(8);
    for (auto k : kinds) {
        for (std::size_t d : {1u, 6u, 8u}) {
            for (int probe = 0; probe < 100; ++probe) {
                Vec x = random_vec(3 * d, rng);
                auto part = [d](std::span<const double> v, int i) { return v.subspan(static_cast<std::size_t>(i) * d, d); };
                const auto g = score_grads<double>(k, part(x, 0), part(x, 1), part(x, 2));
                Vec flat;
                for (const auto* p : {&g.head, &g.relation, &g.tail}) flat.insert(flat.end(), p->begin(), p->end());
                auto loss = [&](std::span<const double> v) { return score<double>(k, part(v, 0), part(v, 1), part(v, 2)); };
                CHECK(finite_diff_check(loss, flat, x) < 1e-4);
            }
        }
    }
}

TEST_CASE("candidate scorer agrees with the full score") {
    SplitMix64 rng(12);
    for (auto k : kinds) {
        for (std::size_t d : {5u, 64u, 100u}) {
            const auto h = random_vec(d, rng), r = random_vec(d, rng), t = random_vec(d, rng);
            const CandidateScorer tail(k, CandidateScorer::Slot::Tail, h, r);
            const CandidateScorer head(k, CandidateScorer::Slot::Head, r, t);
            const double full = f(k, h, r, t);
            CHECK(tail(std::span<const double>(t)) == doctest::Approx(full).epsilon(1e-9));
            CHECK(head(std::span<const double>(h)) == doctest::Approx(full).epsilon(1e-9));
        }
    }
}

TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(f(ScorerKind::Multiplicative, {1, 2}, {1, 2}, {1}), DimensionError);
}
