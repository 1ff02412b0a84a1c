#include "twoview/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "twoview/errors.hpp"

namespace twoview {

using json = nlohmann::json;

namespace {

void write_hierarchy(const std::filesystem::path& path, const HierarchyStore& h, const Vocab& concepts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& p : h) out << concepts.name(p.fine) << '\t' << concepts.name(p.coarse) << '\n';
}

HierarchyStore read_hierarchy(const std::filesystem::path& path, const Vocab& concepts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    HierarchyStore h;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw ParseError(path.string(), n, "expected 2 tab-separated fields");
        h.insert({concepts.lookup(line.substr(0, tab)), concepts.lookup(line.substr(tab + 1))});
    }
    return h;
}

}  // namespace

PreparedData prepare_data(const KnowledgeBase& raw, const SplitSpec& spec, const std::vector<std::string>& hierarchical) {
    spec.validate();
    PreparedData d;
    d.vocab.entities = raw.entities;
    d.vocab.relations = raw.relations;
    d.vocab.concepts = raw.concepts;
    d.vocab.meta_relations = raw.meta_relations;
    d.instance = split_triples(raw.instance, spec);
    d.ontology = split_triples(raw.ontology, spec);
    d.links = split_links(raw.links, spec.link_train, spec.seed);
    if (!hierarchical.empty()) d.hierarchy = extract_hierarchy(raw.ontology, raw.meta_relations, hierarchical).hierarchy;
    return d;
}

std::string stats_json(const DatasetStats& s) {
    json j = {{"entities", s.entities},
              {"relations", s.relations},
              {"instance_triples", s.instance_triples},
              {"concepts", s.concepts},
              {"meta_relations", s.meta_relations},
              {"ontology_triples", s.ontology_triples},
              {"links", s.links},
              {"duplicate_instance_triples", s.duplicate_instance_triples},
              {"duplicate_ontology_triples", s.duplicate_ontology_triples},
              {"duplicate_links", s.duplicate_links},
              {"skipped_links", s.skipped_links}};
    return j.dump(2);
}

void write_prepared(const std::filesystem::path& dir, const PreparedData& d, const DatasetStats& raw_stats,
                    const SplitSpec& spec) {
    std::filesystem::create_directories(dir);
    const auto& v = d.vocab;
    write_vocab(dir / "entities.txt", v.entities);
    write_vocab(dir / "relations.txt", v.relations);
    write_vocab(dir / "concepts.txt", v.concepts);
    write_vocab(dir / "meta_relations.txt", v.meta_relations);
    const std::pair<const char*, const TripleStore*> inst[] = {
        {"instance_train.tsv", &d.instance.train}, {"instance_valid.tsv", &d.instance.valid}, {"instance_test.tsv", &d.instance.test}};
    for (const auto& [name, store] : inst) write_triples(dir / name, *store, v.entities, v.relations, v.entities);
    const std::pair<const char*, const TripleStore*> onto[] = {
        {"ontology_train.tsv", &d.ontology.train}, {"ontology_valid.tsv", &d.ontology.valid}, {"ontology_test.tsv", &d.ontology.test}};
    for (const auto& [name, store] : onto) write_triples(dir / name, *store, v.concepts, v.meta_relations, v.concepts);
    write_links(dir / "links_train.tsv", d.links.train, v.entities, v.concepts);
    write_links(dir / "links_test.tsv", d.links.test, v.entities, v.concepts);
    write_hierarchy(dir / "hierarchy.tsv", d.hierarchy, v.concepts);

    json stats = json::parse(stats_json(raw_stats));
    json j = {{"raw", stats},
              {"split",
               {{"seed", spec.seed},
                {"instance", {{"train", d.instance.train.size()}, {"valid", d.instance.valid.size()}, {"test", d.instance.test.size()}}},
                {"ontology", {{"train", d.ontology.train.size()}, {"valid", d.ontology.valid.size()}, {"test", d.ontology.test.size()}}},
                {"links", {{"train", d.links.train.size()}, {"test", d.links.test.size()}}},
                {"hierarchy_pairs", d.hierarchy.size()}}}};
    std::ofstream out(dir / "stats.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "stats.json").string());
    out << j.dump(2) << '\n';
}

PreparedData load_prepared(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error("prepared split directory " + dir.string() + " does not exist (run `prepare` first)");
    PreparedData d;
    auto& v = d.vocab;
    v.entities = read_vocab(dir / "entities.txt");
    v.relations = read_vocab(dir / "relations.txt");
    v.concepts = read_vocab(dir / "concepts.txt");
    v.meta_relations = read_vocab(dir / "meta_relations.txt");
    d.instance.train = parse_triples(dir / "instance_train.tsv", v.entities, v.relations, v.entities, false);
    d.instance.valid = parse_triples(dir / "instance_valid.tsv", v.entities, v.relations, v.entities, false);
    d.instance.test = parse_triples(dir / "instance_test.tsv", v.entities, v.relations, v.entities, false);
    d.ontology.train = parse_triples(dir / "ontology_train.tsv", v.concepts, v.meta_relations, v.concepts, false);
    d.ontology.valid = parse_triples(dir / "ontology_valid.tsv", v.concepts, v.meta_relations, v.concepts, false);
    d.ontology.test = parse_triples(dir / "ontology_test.tsv", v.concepts, v.meta_relations, v.concepts, false);
    d.links.train = parse_links(dir / "links_train.tsv", v.entities, v.concepts);
    d.links.test = parse_links(dir / "links_test.tsv", v.entities, v.concepts);
    if (d.links.train.skipped() || d.links.test.skipped())
        throw Error(dir.string() + ": link files name entities or concepts missing from the vocabularies");
    d.hierarchy = read_hierarchy(dir / "hierarchy.tsv", v.concepts);
    return d;
}

}  // namespace twoview
