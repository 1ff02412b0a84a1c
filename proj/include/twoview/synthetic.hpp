#pragma once

// Generator for small two-view KBs with planted structure.
//
// Concepts form `branches` hierarchy branches of `concepts_per_branch`
// concepts each: a chain root <- c1 <- c2 <- ... with the remaining concepts
// attached as extra leaves under the deepest chain node (5 concepts give 4
// levels). Every concept owns a cluster of `entities_per_concept` entities,
// indexed 0..m-1. Each instance relation is assigned `pairs_per_relation`
// (head concept, tail concept) pairs, no two sharing a head or a tail. Each
// cluster is cut into consecutive blocks of `tails_per_head` entities (0 means
// one block); for a planted pair the relation links every entity of a head
// block to every entity of the same-index block of the tail cluster. The
// ontology view mirrors the schema: (A, subclass_of, B) for the hierarchy and
// (A, meta_<relation>, B) for every planted pair.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twoview/kb.hpp"

namespace twoview {

struct SyntheticSpec {
    std::size_t branches = 4;
    std::size_t concepts_per_branch = 5;
    std::size_t entities_per_concept = 10;
    std::size_t relations = 10;
    std::size_t pairs_per_relation = 2;
    std::size_t tails_per_head = 5;
    std::uint64_t seed = 1;
};

struct PlantedPair {
    Id concept_head = 0;
    Id concept_tail = 0;
    Id relation = 0;
};

struct SyntheticKb {
    KnowledgeBase kb;
    std::vector<PlantedPair> planted;
    std::vector<std::string> hierarchical{"subclass_of"};
    /// Hierarchy depth of each concept (root = 1).
    std::vector<std::size_t> level;
};

SyntheticKb make_synthetic_kb(const SyntheticSpec& spec);

/// Writes instance.tsv, ontology.tsv and links.tsv into `dir`.
void write_synthetic_kb(const SyntheticKb& synth, const std::filesystem::path& dir);

}  // namespace twoview
