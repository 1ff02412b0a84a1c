#include "twoview/synthetic.hpp"

#include <algorithm>
#include <set>

#include "twoview/errors.hpp"

namespace twoview {

SyntheticKb make_synthetic_kb(const SyntheticSpec& spec) {
    const std::size_t n_concepts = spec.branches * spec.concepts_per_branch;
    if (spec.branches == 0 || spec.concepts_per_branch == 0 || spec.entities_per_concept == 0)
        throw ConfigError("synthetic KB needs at least one branch, concept and entity");
    if (spec.relations * spec.pairs_per_relation > n_concepts * (n_concepts - 1))
        throw ConfigError("not enough distinct concept pairs for the requested schema");

    SyntheticKb out;
    auto& kb = out.kb;
    SplitMix64 rng(spec.seed);

    for (std::size_t b = 0; b < spec.branches; ++b)
        for (std::size_t j = 0; j < spec.concepts_per_branch; ++j)
            kb.concepts.add("concept_" + std::to_string(b) + "_" + std::to_string(j));
    for (std::size_t c = 0; c < n_concepts; ++c)
        for (std::size_t i = 0; i < spec.entities_per_concept; ++i)
            kb.entities.add("entity_" + std::to_string(c) + "_" + std::to_string(i));
    for (std::size_t r = 0; r < spec.relations; ++r) kb.relations.add("rel_" + std::to_string(r));
    const Id subclass = kb.meta_relations.add("subclass_of");
    for (std::size_t r = 0; r < spec.relations; ++r) kb.meta_relations.add("meta_rel_" + std::to_string(r));

    // Hierarchy: chain of depth min(n, 4) per branch; the rest hang off the last chain node.
    out.level.assign(n_concepts, 0);
    const std::size_t chain = std::min<std::size_t>(spec.concepts_per_branch, 4);
    for (std::size_t b = 0; b < spec.branches; ++b) {
        const Id base = static_cast<Id>(b * spec.concepts_per_branch);
        for (std::size_t j = 0; j < spec.concepts_per_branch; ++j) {
            const Id c = base + static_cast<Id>(j);
            if (j == 0) {
                out.level[c] = 1;
                continue;
            }
            const Id parent = j < chain ? c - 1 : base + static_cast<Id>(chain - 2);
            out.level[c] = out.level[parent] + 1;
            kb.ontology.insert({c, subclass, parent});
        }
    }

    // Planted schema: distinct ordered concept pairs. Pairs that touch a not
    // yet covered concept are taken first so every cluster has triples.
    std::vector<std::pair<Id, Id>> candidates;
    for (Id a = 0; a < n_concepts; ++a)
        for (Id b = 0; b < n_concepts; ++b)
            if (a != b) candidates.emplace_back(a, b);
    fisher_yates(std::span<std::pair<Id, Id>>(candidates), rng);
    const std::size_t wanted = spec.relations * spec.pairs_per_relation;
    std::vector<std::pair<Id, Id>> chosen;
    std::vector<bool> used(candidates.size(), false), covered(n_concepts, false);
    for (std::size_t i = 0; i < candidates.size() && chosen.size() < wanted; ++i) {
        const auto [a, b] = candidates[i];
        if (covered[a] && covered[b]) continue;
        covered[a] = covered[b] = true;
        used[i] = true;
        chosen.push_back(candidates[i]);
    }
    for (std::size_t i = 0; i < candidates.size() && chosen.size() < wanted; ++i)
        if (!used[i]) chosen.push_back(candidates[i]);
    fisher_yates(std::span<std::pair<Id, Id>>(chosen), rng);

    const std::size_t fanout = spec.tails_per_head == 0 ? spec.entities_per_concept
                                                        : std::min(spec.tails_per_head, spec.entities_per_concept);
    // Within one relation no two pairs share a head or a tail concept; when
    // the drawn pairs cannot satisfy that, a fresh candidate pair is used.
    std::set<std::pair<Id, Id>> taken(chosen.begin(), chosen.end());
    std::vector<std::pair<Id, Id>> pool = std::move(chosen);
    for (std::size_t r = 0; r < spec.relations; ++r) {
        std::vector<Id> heads, tails;
        auto fits = [&](const std::pair<Id, Id>& pr) {
            return std::find(heads.begin(), heads.end(), pr.first) == heads.end() &&
                   std::find(tails.begin(), tails.end(), pr.second) == tails.end();
        };
        for (std::size_t p = 0; p < spec.pairs_per_relation; ++p) {
            auto it = std::find_if(pool.begin(), pool.end(), fits);
            if (it == pool.end()) {
                auto fresh = std::find_if(candidates.begin(), candidates.end(),
                                          [&](const auto& pr) { return !taken.count(pr) && fits(pr); });
                if (fresh == candidates.end()) throw ConfigError("cannot build a planted schema of the requested size");
                taken.insert(*fresh);
                pool.push_back(*fresh);
                it = pool.end() - 1;
            }
            const auto [a, b] = *it;
            pool.erase(it);
            heads.push_back(a);
            tails.push_back(b);
            out.planted.push_back({a, b, static_cast<Id>(r)});
            kb.ontology.insert({a, static_cast<Id>(r + 1), b});
            for (std::size_t i = 0; i < spec.entities_per_concept; ++i) {
                const auto h = static_cast<Id>(a * spec.entities_per_concept + i);
                const std::size_t block = (i / fanout) * fanout;
                for (std::size_t j = block; j < std::min(block + fanout, spec.entities_per_concept); ++j) {
                    const auto t = static_cast<Id>(b * spec.entities_per_concept + j);
                    kb.instance.insert({h, static_cast<Id>(r), t});
                }
            }
        }
    }

    for (Id c = 0; c < n_concepts; ++c)
        for (std::size_t i = 0; i < spec.entities_per_concept; ++i)
            kb.links.insert({static_cast<Id>(c * spec.entities_per_concept + i), c});
    return out;
}

void write_synthetic_kb(const SyntheticKb& synth, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& kb = synth.kb;
    write_triples(dir / "instance.tsv", kb.instance, kb.entities, kb.relations, kb.entities);
    write_triples(dir / "ontology.tsv", kb.ontology, kb.concepts, kb.meta_relations, kb.concepts);
    write_links(dir / "links.tsv", kb.links, kb.entities, kb.concepts);
}

}  // namespace twoview
