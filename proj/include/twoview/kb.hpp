#pragma once

// Two-view knowledge base: an instance-view graph of entities, an
// ontology-view graph of concepts, the entity->concept type links between
// them, and the concept hierarchy pairs carved out of the ontology view.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "twoview/rng.hpp"

namespace twoview {

using Id = std::uint32_t;

/// Dense bijection between names and ids 0..n-1, ids assigned in insertion order.
class Vocab {
public:
    Vocab() = default;
    explicit Vocab(std::vector<std::string> names);

    /// Returns the existing id or appends the name.
    Id add(std::string_view name);
    std::optional<Id> find(std::string_view name) const;
    /// Throws UnknownSymbolError.
    Id lookup(std::string_view name) const;
    const std::string& name(Id id) const { return names_.at(id); }

    std::size_t size() const noexcept { return names_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// 64-bit FNV-1a over every name in id order, each followed by a 0x00 byte.
    std::uint64_t content_hash() const noexcept;

    bool operator==(const Vocab& other) const { return names_ == other.names_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> names_;
    std::unordered_map<std::string, Id, Hash, std::equal_to<>> index_;
};

struct Triple {
    Id head = 0;
    Id relation = 0;
    Id tail = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = t.head;
        h = h * 0x9E3779B97F4A7C15ULL ^ t.relation;
        h = h * 0x9E3779B97F4A7C15ULL ^ t.tail;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

class TripleStore {
public:
    /// Returns false (and counts a duplicate) when the triple is already present.
    bool insert(const Triple& t);
    bool contains(const Triple& t) const { return members_.contains(t); }

    const std::vector<Triple>& triples() const noexcept { return triples_; }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }
    std::size_t duplicates() const noexcept { return duplicates_; }

    auto begin() const { return triples_.begin(); }
    auto end() const { return triples_.end(); }

private:
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> members_;
    std::size_t duplicates_ = 0;
};

struct Link {
    Id entity = 0;
    Id concept_id = 0;

    friend bool operator==(const Link&, const Link&) = default;
    friend auto operator<=>(const Link&, const Link&) = default;
};

namespace detail {
struct PairHash {
    std::size_t operator()(std::uint64_t key) const noexcept { return static_cast<std::size_t>(key * 0x9E3779B97F4A7C15ULL >> 7); }
};
inline std::uint64_t pair_key(Id a, Id b) noexcept { return (static_cast<std::uint64_t>(a) << 32) | b; }
}  // namespace detail

/// Known entity->concept type links. An entity may have several concepts.
class CrossLinkStore {
public:
    bool insert(const Link& link);
    bool contains(Id entity, Id concept_id) const { return members_.contains(detail::pair_key(entity, concept_id)); }

    /// Concepts linked to the entity, in insertion order; empty when none.
    const std::vector<Id>& concepts_of(Id entity) const;

    const std::vector<Link>& links() const noexcept { return links_; }
    std::size_t size() const noexcept { return links_.size(); }
    bool empty() const noexcept { return links_.empty(); }
    std::size_t duplicates() const noexcept { return duplicates_; }
    std::size_t skipped() const noexcept { return skipped_; }
    void count_skipped(std::size_t n = 1) noexcept { skipped_ += n; }

    auto begin() const { return links_.begin(); }
    auto end() const { return links_.end(); }

private:
    std::vector<Link> links_;
    std::unordered_set<std::uint64_t, detail::PairHash> members_;
    std::unordered_map<Id, std::vector<Id>> by_entity_;
    std::size_t duplicates_ = 0;
    std::size_t skipped_ = 0;
};

/// A finer concept and the coarser concept it belongs to.
struct HierarchyPair {
    Id fine = 0;
    Id coarse = 0;

    friend bool operator==(const HierarchyPair&, const HierarchyPair&) = default;
};

class HierarchyStore {
public:
    /// Self pairs (fine == coarse) are rejected and counted, as are duplicates.
    bool insert(const HierarchyPair& pair);
    bool contains(Id fine, Id coarse) const { return members_.contains(detail::pair_key(fine, coarse)); }

    const std::vector<HierarchyPair>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::size_t duplicates() const noexcept { return duplicates_; }
    std::size_t self_pairs() const noexcept { return self_pairs_; }

    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }

private:
    std::vector<HierarchyPair> pairs_;
    std::unordered_set<std::uint64_t, detail::PairHash> members_;
    std::size_t duplicates_ = 0;
    std::size_t self_pairs_ = 0;
};

struct KnowledgeBase {
    Vocab entities;
    Vocab relations;
    Vocab concepts;
    Vocab meta_relations;
    TripleStore instance;
    TripleStore ontology;
    CrossLinkStore links;
    HierarchyStore hierarchy;
};

struct SplitSpec {
    double train = 0.85;
    double valid = 0.05;
    double test = 0.10;
    double link_train = 0.6;
    std::uint64_t seed = 0;

    /// Throws ConfigError when fractions are out of range.
    void validate() const;
};

struct TripleSplit {
    TripleStore train;
    TripleStore valid;
    TripleStore test;
};

struct LinkSplit {
    CrossLinkStore train;
    CrossLinkStore test;
};

struct HierarchyExtraction {
    HierarchyStore hierarchy;
    TripleStore residual;
};

/// Parses `head\trelation\ttail` lines. With `grow` set, unseen names are
/// appended to the vocabularies in first-occurrence order; otherwise they
/// raise UnknownSymbolError. Blank lines and a trailing '\r' are tolerated.
TripleStore parse_triples(const std::filesystem::path& path, Vocab& heads, Vocab& relations, Vocab& tails, bool grow);

/// Parses `entity\tconcept` lines. Pairs naming unknown entities or concepts
/// are skipped and counted in CrossLinkStore::skipped().
CrossLinkStore parse_links(const std::filesystem::path& path, const Vocab& entities, const Vocab& concepts);

/// Shuffles with SplitMix64(seed) then takes floor(valid*n) valid triples,
/// floor(test*n) test triples and leaves the remainder to train.
TripleSplit split_triples(const TripleStore& store, const SplitSpec& spec);

/// Shuffles with SplitMix64(seed); train receives round(link_train*|S|) links.
LinkSplit split_links(const CrossLinkStore& store, double train_fraction, std::uint64_t seed);

/// Moves triples whose relation is one of `hierarchical` into (fine=head, coarse=tail) pairs.
HierarchyExtraction extract_hierarchy(const TripleStore& ontology, const Vocab& meta_relations,
                                      const std::vector<std::string>& hierarchical);

/// Head plus tail occurrences per entity; entities never seen are absent.
std::map<Id, std::size_t> entity_frequency(const TripleStore& instance);

std::unordered_set<Id> long_tail_slice(const std::map<Id, std::size_t>& frequency, std::size_t threshold);

struct DatasetStats {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::size_t instance_triples = 0;
    std::size_t concepts = 0;
    std::size_t meta_relations = 0;
    std::size_t ontology_triples = 0;
    std::size_t links = 0;
    std::size_t duplicate_instance_triples = 0;
    std::size_t duplicate_ontology_triples = 0;
    std::size_t duplicate_links = 0;
    std::size_t skipped_links = 0;

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const KnowledgeBase& kb);

/// Reads the three raw files into a fresh knowledge base (vocabularies grown
/// from the triple files; links resolved against them).
KnowledgeBase load_raw_kb(const std::filesystem::path& instance, const std::filesystem::path& ontology,
                          const std::filesystem::path& links);

/// One name per line.
Vocab read_vocab(const std::filesystem::path& path);
void write_vocab(const std::filesystem::path& path, const Vocab& vocab);

void write_triples(const std::filesystem::path& path, const TripleStore& store, const Vocab& heads,
                   const Vocab& relations, const Vocab& tails);
void write_links(const std::filesystem::path& path, const CrossLinkStore& store, const Vocab& entities,
                 const Vocab& concepts);

}  // namespace twoview
