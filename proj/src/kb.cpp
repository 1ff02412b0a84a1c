#include "twoview/kb.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include "twoview/errors.hpp"

namespace twoview {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

// Splits on TAB. Returns the field count (fields beyond `N` are still counted).
template <std::size_t N>
std::size_t split_tabs(std::string_view line, std::array<std::string_view, N>& fields) {
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        const std::string_view field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
        if (count < N) fields[count] = field;
        ++count;
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return count;
}

std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

// ---------------------------------------------------------------- Vocab

Vocab::Vocab(std::vector<std::string> names) {
    for (auto& n : names) {
        if (find(n)) throw Error("duplicate vocabulary entry '" + n + "'");
        add(n);
    }
}

Id Vocab::add(std::string_view name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    const auto id = static_cast<Id>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<Id> Vocab::find(std::string_view name) const {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    return std::nullopt;
}

Id Vocab::lookup(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw UnknownSymbolError(std::string(name));
}

std::uint64_t Vocab::content_hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    constexpr std::uint64_t prime = 0x100000001b3ULL;
    for (const auto& n : names_) {
        for (unsigned char c : n) {
            h ^= c;
            h *= prime;
        }
        h *= prime;  // 0x00 separator
    }
    return h;
}

// ---------------------------------------------------------------- stores

bool TripleStore::insert(const Triple& t) {
    if (!members_.insert(t).second) {
        ++duplicates_;
        return false;
    }
    triples_.push_back(t);
    return true;
}

bool CrossLinkStore::insert(const Link& link) {
    if (!members_.insert(detail::pair_key(link.entity, link.concept_id)).second) {
        ++duplicates_;
        return false;
    }
    links_.push_back(link);
    by_entity_[link.entity].push_back(link.concept_id);
    return true;
}

const std::vector<Id>& CrossLinkStore::concepts_of(Id entity) const {
    static const std::vector<Id> none;
    auto it = by_entity_.find(entity);
    return it == by_entity_.end() ? none : it->second;
}

bool HierarchyStore::insert(const HierarchyPair& pair) {
    if (pair.fine == pair.coarse) {
        ++self_pairs_;
        return false;
    }
    if (!members_.insert(detail::pair_key(pair.fine, pair.coarse)).second) {
        ++duplicates_;
        return false;
    }
    pairs_.push_back(pair);
    return true;
}

// ---------------------------------------------------------------- parsing

TripleStore parse_triples(const std::filesystem::path& path, Vocab& heads, Vocab& relations, Vocab& tails,
                          bool grow) {
    auto in = open_input(path);
    TripleStore store;
    std::string raw;
    std::size_t lineno = 0;
    std::array<std::string_view, 3> f;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        const auto n = split_tabs(line, f);
        if (n != 3) throw ParseError(path.string(), lineno, "expected 3 TAB-separated fields, found " + std::to_string(n));
        Triple t;
        if (grow) {
            t = {heads.add(f[0]), relations.add(f[1]), tails.add(f[2])};
        } else {
            auto resolve = [&](const Vocab& v, std::string_view name) {
                if (auto id = v.find(name)) return *id;
                throw UnknownSymbolError(std::string(name), path.string() + ":" + std::to_string(lineno));
            };
            t = {resolve(heads, f[0]), resolve(relations, f[1]), resolve(tails, f[2])};
        }
        store.insert(t);
    }
    return store;
}

CrossLinkStore parse_links(const std::filesystem::path& path, const Vocab& entities, const Vocab& concepts) {
    auto in = open_input(path);
    CrossLinkStore store;
    std::string raw;
    std::size_t lineno = 0;
    std::array<std::string_view, 2> f;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        const auto n = split_tabs(line, f);
        if (n != 2) throw ParseError(path.string(), lineno, "expected 2 TAB-separated fields, found " + std::to_string(n));
        const auto e = entities.find(f[0]);
        const auto c = concepts.find(f[1]);
        if (!e || !c) {
            store.count_skipped();
            continue;
        }
        store.insert({*e, *c});
    }
    return store;
}

// ---------------------------------------------------------------- splits

void SplitSpec::validate() const {
    if (!(train > 0 && valid > 0 && test > 0))
        throw ConfigError("split fractions must all be positive");
    if (std::abs(train + valid + test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    if (!(link_train > 0 && link_train < 1))
        throw ConfigError("link train fraction must lie in (0, 1)");
}

TripleSplit split_triples(const TripleStore& store, const SplitSpec& spec) {
    spec.validate();
    if (store.empty()) throw Error("cannot split an empty triple store");
    std::vector<Triple> order = store.triples();
    SplitMix64 rng(spec.seed);
    fisher_yates(std::span<Triple>(order), rng);

    const std::size_t n = order.size();
    const auto n_valid = static_cast<std::size_t>(std::floor(spec.valid * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test * static_cast<double>(n)));

    TripleSplit out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_valid)
            out.valid.insert(order[i]);
        else if (i < n_valid + n_test)
            out.test.insert(order[i]);
        else
            out.train.insert(order[i]);
    }
    return out;
}

LinkSplit split_links(const CrossLinkStore& store, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0 && train_fraction < 1))
        throw ConfigError("link train fraction must lie in (0, 1), got " + std::to_string(train_fraction));
    std::vector<Link> order = store.links();
    SplitMix64 rng(seed);
    fisher_yates(std::span<Link>(order), rng);

    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
    LinkSplit out;
    for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? out.train : out.test).insert(order[i]);
    return out;
}

HierarchyExtraction extract_hierarchy(const TripleStore& ontology, const Vocab& meta_relations,
                                      const std::vector<std::string>& hierarchical) {
    std::unordered_set<Id> wanted;
    std::string missing;
    for (const auto& name : hierarchical) {
        if (auto id = meta_relations.find(name))
            wanted.insert(*id);
        else
            missing += (missing.empty() ? "" : ", ") + name;
    }
    if (!missing.empty()) throw UnknownSymbolError(missing, "hierarchical meta-relation");

    HierarchyExtraction out;
    for (const auto& t : ontology) {
        if (wanted.contains(t.relation)) {
            // Self-loops and (fine, coarse) pairs repeated under a second
            // hierarchical relation cannot become pairs; they stay residual so
            // that |pairs| + |residual| = |ontology|.
            if (!out.hierarchy.insert({t.head, t.tail})) out.residual.insert(t);
        } else {
            out.residual.insert(t);
        }
    }
    return out;
}

// ---------------------------------------------------------------- statistics

std::map<Id, std::size_t> entity_frequency(const TripleStore& instance) {
    std::map<Id, std::size_t> freq;
    for (const auto& t : instance) {
        ++freq[t.head];
        ++freq[t.tail];
    }
    return freq;
}

std::unordered_set<Id> long_tail_slice(const std::map<Id, std::size_t>& frequency, std::size_t threshold) {
    if (threshold < 1) throw ConfigError("long-tail threshold must be at least 1");
    std::unordered_set<Id> out;
    for (const auto& [id, count] : frequency)
        if (count < threshold) out.insert(id);
    return out;
}

DatasetStats dataset_stats(const KnowledgeBase& kb) {
    DatasetStats s;
    s.entities = kb.entities.size();
    s.relations = kb.relations.size();
    s.instance_triples = kb.instance.size();
    s.concepts = kb.concepts.size();
    s.meta_relations = kb.meta_relations.size();
    s.ontology_triples = kb.ontology.size();
    s.links = kb.links.size();
    s.duplicate_instance_triples = kb.instance.duplicates();
    s.duplicate_ontology_triples = kb.ontology.duplicates();
    s.duplicate_links = kb.links.duplicates();
    s.skipped_links = kb.links.skipped();
    return s;
}

KnowledgeBase load_raw_kb(const std::filesystem::path& instance, const std::filesystem::path& ontology,
                          const std::filesystem::path& links) {
    KnowledgeBase kb;
    kb.instance = parse_triples(instance, kb.entities, kb.relations, kb.entities, true);
    kb.ontology = parse_triples(ontology, kb.concepts, kb.meta_relations, kb.concepts, true);
    kb.links = parse_links(links, kb.entities, kb.concepts);
    return kb;
}

// ---------------------------------------------------------------- writers

Vocab read_vocab(const std::filesystem::path& path) {
    auto in = open_input(path);
    Vocab v;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        if (v.find(line)) throw ParseError(path.string(), lineno, "duplicate vocabulary entry");
        v.add(line);
    }
    return v;
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
    auto out = open_output(path);
    for (const auto& n : vocab.names()) out << n << '\n';
}

void write_triples(const std::filesystem::path& path, const TripleStore& store, const Vocab& heads,
                   const Vocab& relations, const Vocab& tails) {
    auto out = open_output(path);
    for (const auto& t : store)
        out << heads.name(t.head) << '\t' << relations.name(t.relation) << '\t' << tails.name(t.tail) << '\n';
}

void write_links(const std::filesystem::path& path, const CrossLinkStore& store, const Vocab& entities,
                 const Vocab& concepts) {
    auto out = open_output(path);
    for (const auto& l : store) out << entities.name(l.entity) << '\t' << concepts.name(l.concept_id) << '\n';
}

}  // namespace twoview
