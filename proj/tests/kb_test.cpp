#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "twoview/errors.hpp"
#include "twoview/kb.hpp"

using namespace twoview;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("twoview_kb_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
}

TripleStore numbered_store(std::size_t n) {
    TripleStore s;
    for (Id i = 0; i < n; ++i) s.insert({i, i % 3, i + 1});
    return s;
}

std::set<Triple> as_set(const TripleStore& s) { return {s.begin(), s.end()}; }

// Reference FNV-1a 64, written out byte by byte.
std::uint64_t fnv1a(const std::vector<std::string>& names) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& n : names) {
        for (unsigned char c : n) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h *= 1099511628211ULL;  // the 0x00 separator: xor with 0 is a no-op
    }
    return h;
}

}  // namespace

TEST_CASE("vocab assigns dense ids in insertion order") {
    Vocab v;
    CHECK(v.add("b") == 0);
    CHECK(v.add("a") == 1);
    CHECK(v.add("b") == 0);
    CHECK(v.size() == 2);
    for (Id id = 0; id < v.size(); ++id) CHECK(v.lookup(v.name(id)) == id);
    CHECK_FALSE(v.find("zzz").has_value());
    CHECK_THROWS_AS(v.lookup("zzz"), UnknownSymbolError);
}

TEST_CASE("vocab hash is FNV-1a over names in id order") {
    Vocab v(std::vector<std::string>{"alpha", "beta", "gamma delta"});
    CHECK(v.content_hash() == fnv1a({"alpha", "beta", "gamma delta"}));
    CHECK(Vocab().content_hash() == 14695981039346656037ULL);
    Vocab swapped(std::vector<std::string>{"beta", "alpha", "gamma delta"});
    CHECK(swapped.content_hash() != v.content_hash());
    // separator keeps "ab","c" apart from "a","bc"
    CHECK(Vocab(std::vector<std::string>{"ab", "c"}).content_hash() !=
          Vocab(std::vector<std::string>{"a", "bc"}).content_hash());
}

TEST_CASE("parse_triples builds stores and vocabularies") {
    const auto dir = scratch_dir("parse");
    Vocab e, r;
    auto s = parse_triples(write_file(dir, "a.tsv", "a\tr1\tb\nb\tr1\tc\n"), e, r, e, true);
    CHECK(s.size() == 2);
    CHECK(e.size() == 3);
    CHECK(r.size() == 1);

    Vocab e2, r2;
    auto dup = parse_triples(write_file(dir, "d.tsv", "a\tr\tb\r\n\na\tr\tb\n"), e2, r2, e2, true);
    CHECK(dup.size() == 1);
    CHECK(dup.duplicates() == 1);

    SUBCASE("names may contain spaces") {
        Vocab e3, r3;
        auto sp = parse_triples(write_file(dir, "s.tsv", "New York\tlocated in\tUnited States\n"), e3, r3, e3, true);
        CHECK(sp.size() == 1);
        CHECK(e3.name(0) == "New York");
    }
    SUBCASE("wrong field count reports the line") {
        Vocab e3, r3;
        try {
            parse_triples(write_file(dir, "bad.tsv", "a\tr\tb\na\tr\n"), e3, r3, e3, true);
            FAIL("expected a parse error");
        } catch (const ParseError& err) {
            CHECK(err.line() == 2);
        }
    }
    SUBCASE("unknown names without grow") {
        Vocab fixed(std::vector<std::string>{"a"}), rel(std::vector<std::string>{"r"});
        CHECK_THROWS_AS(parse_triples(write_file(dir, "u.tsv", "a\tr\tq\n"), fixed, rel, fixed, false),
                        UnknownSymbolError);
    }
}

TEST_CASE("parse_links skips unknown names") {
    const auto dir = scratch_dir("links");
    Vocab e(std::vector<std::string>{"x", "y", "z"}), c(std::vector<std::string>{"C", "D"});
    auto ok = parse_links(write_file(dir, "ok.tsv", "x\tC\ny\tC\nz\tD\n"), e, c);
    CHECK(ok.size() == 3);
    auto skip = parse_links(write_file(dir, "skip.tsv", "x\tC\nghost\tC\n"), e, c);
    CHECK(skip.size() == 1);
    CHECK(skip.skipped() == 1);
    CHECK_THROWS_AS(parse_links(write_file(dir, "bad.tsv", "x\tC\textra\n"), e, c), ParseError);
}

TEST_CASE("split_triples follows the floor rounding rule") {
    // reference: valid = floor(fv n), test = floor(ft n), train = rest
    auto reference = [](std::size_t n, double fv, double ft) {
        const auto v = static_cast<std::size_t>(fv * static_cast<double>(n));
        const auto t = static_cast<std::size_t>(ft * static_cast<double>(n));
        return std::array<std::size_t, 3>{n - v - t, v, t};
    };
    SplitSpec spec;
    spec.seed = 7;
    for (std::size_t n : {1u, 2u, 10u, 19u, 20u, 99u, 100u, 101u, 1000u}) {
        auto s = split_triples(numbered_store(n), spec);
        const auto want = reference(n, spec.valid, spec.test);
        CHECK(s.train.size() == want[0]);
        CHECK(s.valid.size() == want[1]);
        CHECK(s.test.size() == want[2]);
    }
    auto ten = split_triples(numbered_store(10), spec);
    CHECK(ten.train.size() == 9);
    CHECK(ten.valid.size() == 0);
    CHECK(ten.test.size() == 1);
    auto hundred = split_triples(numbered_store(100), spec);
    CHECK(hundred.train.size() == 85);
    CHECK(hundred.valid.size() == 5);
    CHECK(hundred.test.size() == 10);
}

TEST_CASE("split_triples partitions deterministically") {
    const auto store = numbered_store(257);
    for (std::uint64_t seed : {0u, 1u, 42u}) {
        SplitSpec spec;
        spec.seed = seed;
        auto a = split_triples(store, spec);
        auto b = split_triples(store, spec);
        CHECK(a.train.triples() == b.train.triples());
        CHECK(a.valid.triples() == b.valid.triples());
        CHECK(a.test.triples() == b.test.triples());

        std::set<Triple> all;
        for (const auto* part : {&a.train, &a.valid, &a.test}) {
            for (const auto& t : *part) CHECK(all.insert(t).second);
        }
        CHECK(all == as_set(store));
    }
    SplitSpec s1, s2;
    s1.seed = 1;
    s2.seed = 2;
    CHECK(split_triples(store, s1).test.triples() != split_triples(store, s2).test.triples());
    CHECK_THROWS_AS(split_triples(TripleStore{}, s1), Error);
}

TEST_CASE("split_links rounds the train share") {
    auto links = [](std::size_t n) {
        CrossLinkStore s;
        for (Id i = 0; i < n; ++i) s.insert({i, i % 7});
        return s;
    };
    auto ten = split_links(links(10), 0.6, 3);
    CHECK(ten.train.size() == 6);
    CHECK(ten.test.size() == 4);
    auto big = split_links(links(9962), 0.2, 3);
    CHECK(big.train.size() == static_cast<std::size_t>(std::llround(0.2 * 9962)));
    CHECK(big.train.size() == 1992);
    CHECK(split_links(links(50), 0.6, 9).train.links() == split_links(links(50), 0.6, 9).train.links());
    CHECK_THROWS_AS(split_links(links(10), 1.0, 1), ConfigError);
    CHECK_THROWS_AS(split_links(links(10), 0.0, 1), ConfigError);
}

TEST_CASE("extract_hierarchy moves hierarchical triples") {
    Vocab meta(std::vector<std::string>{"subclass_of", "related_to"});
    TripleStore onto;
    onto.insert({0, 0, 1});  // a subclass_of b
    onto.insert({0, 1, 2});  // a related_to c
    auto out = extract_hierarchy(onto, meta, {"subclass_of"});
    CHECK(out.hierarchy.size() == 1);
    CHECK(out.hierarchy.contains(0, 1));
    CHECK(out.residual.size() == 1);

    auto none = extract_hierarchy(onto, meta, {});
    CHECK(none.hierarchy.empty());
    CHECK(none.residual.triples() == onto.triples());

    onto.insert({3, 0, 3});  // self loop stays residual
    auto kept = extract_hierarchy(onto, meta, {"subclass_of"});
    CHECK(kept.hierarchy.size() + kept.residual.size() == onto.size());
    CHECK_THROWS_AS(extract_hierarchy(onto, meta, {"part_of"}), UnknownSymbolError);
}

TEST_CASE("entity frequency and long tail") {
    TripleStore one;
    one.insert({0, 0, 1});
    CHECK(entity_frequency(one) == std::map<Id, std::size_t>{{0, 1}, {1, 1}});
    TripleStore loop;
    loop.insert({0, 0, 0});
    CHECK(entity_frequency(loop) == std::map<Id, std::size_t>{{0, 2}});
    TripleStore three;
    three.insert({0, 0, 1});
    three.insert({1, 0, 2});
    three.insert({2, 0, 1});
    const auto f = entity_frequency(three);
    CHECK(f == std::map<Id, std::size_t>{{0, 1}, {1, 3}, {2, 2}});
    std::size_t total = 0;
    for (const auto& [id, n] : f) total += n;
    CHECK(total == 2 * three.size());

    CHECK(long_tail_slice({{0, 1}, {1, 9}}, 8) == std::unordered_set<Id>{0});
    CHECK(long_tail_slice(f, 1).empty());
    CHECK(long_tail_slice(f, 3) == std::unordered_set<Id>{0, 2});
}

TEST_CASE("dataset stats count every column") {
    CHECK(dataset_stats(KnowledgeBase{}) == DatasetStats{});
    const auto dir = scratch_dir("stats");
    write_file(dir, "i.tsv", "a\tr\tb\nb\tr\tc\na\tr\tb\n");
    write_file(dir, "o.tsv", "A\tsub\tB\n");
    write_file(dir, "l.tsv", "a\tA\nb\tB\nzz\tA\n");
    const auto kb = load_raw_kb(dir / "i.tsv", dir / "o.tsv", dir / "l.tsv");
    const auto s = dataset_stats(kb);
    CHECK(s.entities == 3);
    CHECK(s.relations == 1);
    CHECK(s.instance_triples == 2);
    CHECK(s.concepts == 2);
    CHECK(s.meta_relations == 1);
    CHECK(s.ontology_triples == 1);
    CHECK(s.links == 2);
    CHECK(s.duplicate_instance_triples == 1);
    CHECK(s.skipped_links == 1);
}

TEST_CASE("writers round-trip through the parsers") {
    const auto dir = scratch_dir("roundtrip");
    Vocab e(std::vector<std::string>{"a", "b c", "d"}), r(std::vector<std::string>{"r"});
    TripleStore s;
    s.insert({0, 0, 1});
    s.insert({2, 0, 0});
    write_triples(dir / "t.tsv", s, e, r, e);
    write_vocab(dir / "v.txt", e);
    CHECK(read_vocab(dir / "v.txt") == e);
    auto back = parse_triples(dir / "t.tsv", e, r, e, false);
    CHECK(back.triples() == s.triples());
}

TEST_CASE("splitmix64 and Fisher-Yates") {
    // first outputs for seed 0 from the reference mixing function
    SplitMix64 rng(0);
    CHECK(rng() == 0xE220A8397B1DCDAFULL);
    CHECK(rng() == 0x6E789E6AA1B965F4ULL);

    SplitMix64 a(5), b(5);
    std::vector<int> x(20), y(20);
    for (int i = 0; i < 20; ++i) x[i] = y[i] = i;
    fisher_yates(std::span<int>(x), a);
    fisher_yates(std::span<int>(y), b);
    CHECK(x == y);
    std::vector<int> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);

    // every permutation of 3 items appears with frequency 1/6
    std::map<std::vector<int>, int> counts;
    SplitMix64 rng3(11);
    const int trials = 60000;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> p{0, 1, 2};
        fisher_yates(std::span<int>(p), rng3);
        ++counts[p];
    }
    CHECK(counts.size() == 6);
    double chi2 = 0;
    for (const auto& [p, c] : counts) chi2 += std::pow(c - trials / 6.0, 2) / (trials / 6.0);
    CHECK(chi2 < 20.5);  // 5 dof, p = 0.001
}
