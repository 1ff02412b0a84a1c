#include "twoview/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "twoview/errors.hpp"

namespace twoview {

using json = nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + where + "." + key + "' has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

FilterMode parse_filter(const std::string& s) {
    if (s == "train") return FilterMode::Train;
    if (s == "strict") return FilterMode::Strict;
    throw ConfigError("eval.filter_mode must be 'train' or 'strict', got '" + s + "'");
}

Direction parse_direction(const std::string& s) {
    if (s == "tail") return Direction::Tail;
    if (s == "both") return Direction::Both;
    throw ConfigError("eval.direction must be 'tail' or 'both', got '" + s + "'");
}

TieMode parse_tie(const std::string& s) {
    if (s == "mid") return TieMode::Mid;
    if (s == "optimistic") return TieMode::Optimistic;
    if (s == "pessimistic") return TieMode::Pessimistic;
    throw ConfigError("eval.tie must be 'mid', 'optimistic' or 'pessimistic', got '" + s + "'");
}

}  // namespace

std::filesystem::path RunConfig::split_dir() const {
    return data.split_dir.empty() ? out / "data" : data.split_dir;
}

void RunConfig::validate() const {
    split.validate();
    model.validate();
    train.validate();
    if (model.hierarchy_aware && data.hierarchical.empty())
        throw ConfigError("hierarchy-aware variant " + model.variant() +
                          " needs data.hierarchical_relations (e.g. [\"subclass_of\"])");
    static const std::set<std::string> known = {"triples", "typing", "longtail", "ontology"};
    for (const auto& t : eval.tasks)
        if (!known.contains(t)) throw ConfigError("unknown eval task '" + t + "'");
    if (eval.longtail_threshold < 1) throw ConfigError("eval.longtail_threshold must be at least 1");
    for (int k : eval.options.hits_at)
        if (k < 1) throw ConfigError("eval.hits entries must be positive");
    if (eval.options.threads < 1) throw ConfigError("eval.threads must be at least 1");
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(root, "config", {"data", "split", "model", "train", "eval", "seed", "deterministic", "out"});
    RunConfig cfg;

    if (root.contains("data")) {
        const auto& d = root["data"];
        only_keys(d, "data", {"instance", "ontology", "links", "split_dir", "hierarchical_relations"});
        std::string s;
        if (d.contains("instance")) read(d, "instance", s, "data"), cfg.data.instance = resolve(base_dir, s);
        if (d.contains("ontology")) read(d, "ontology", s, "data"), cfg.data.ontology = resolve(base_dir, s);
        if (d.contains("links")) read(d, "links", s, "data"), cfg.data.links = resolve(base_dir, s);
        if (d.contains("split_dir")) read(d, "split_dir", s, "data"), cfg.data.split_dir = resolve(base_dir, s);
        read(d, "hierarchical_relations", cfg.data.hierarchical, "data");
    }

    if (root.contains("split")) {
        const auto& s = root["split"];
        only_keys(s, "split", {"train", "valid", "test", "link_train", "seed"});
        read(s, "train", cfg.split.train, "split");
        read(s, "valid", cfg.split.valid, "split");
        read(s, "test", cfg.split.test, "split");
        read(s, "link_train", cfg.split.link_train, "split");
        read(s, "seed", cfg.split.seed, "split");
    }

    bool dims_given[2] = {false, false};
    if (root.contains("model")) {
        const auto& m = root["model"];
        only_keys(m, "model", {"variant", "entity_dim", "concept_dim"});
        if (m.contains("variant")) {
            std::string v;
            read(m, "variant", v, "model");
            const auto parsed = ModelConfig::from_variant(v);
            cfg.model.intra = parsed.intra;
            cfg.model.cross = parsed.cross;
            cfg.model.hierarchy_aware = parsed.hierarchy_aware;
        }
        dims_given[0] = m.contains("entity_dim");
        dims_given[1] = m.contains("concept_dim");
        read(m, "entity_dim", cfg.model.entity_dim, "model");
        read(m, "concept_dim", cfg.model.concept_dim, "model");
    }
    // Best configurations: 300/50 for CT, 200/200 for CG.
    const bool cg = cfg.model.cross == CrossKind::Grouping;
    if (!dims_given[0]) cfg.model.entity_dim = cg ? 200 : 300;
    if (!dims_given[1]) cfg.model.concept_dim = cg ? 200 : 50;

    cfg.train.margins = default_margins(cfg.model.intra);
    if (root.contains("train")) {
        const auto& t = root["train"];
        only_keys(t, "train", {"epochs", "learning_rate", "batch", "margins", "alpha1", "alpha2", "omega",
                               "negative_ratio", "cross_negatives", "patience", "save_every"});
        read(t, "epochs", cfg.train.epochs, "train");
        read(t, "learning_rate", cfg.train.learning_rate, "train");
        if (t.contains("batch")) {
            const auto& b = t["batch"];
            only_keys(b, "train.batch", {"instance", "ontology", "cross", "hierarchy"});
            read(b, "instance", cfg.train.batch.instance, "train.batch");
            read(b, "ontology", cfg.train.batch.ontology, "train.batch");
            read(b, "cross", cfg.train.batch.cross, "train.batch");
            read(b, "hierarchy", cfg.train.batch.hierarchy, "train.batch");
        }
        if (t.contains("margins")) {
            const auto& g = t["margins"];
            only_keys(g, "train.margins", {"instance", "ontology", "cross", "hierarchy"});
            read(g, "instance", cfg.train.margins.instance, "train.margins");
            read(g, "ontology", cfg.train.margins.ontology, "train.margins");
            read(g, "cross", cfg.train.margins.cross, "train.margins");
            read(g, "hierarchy", cfg.train.margins.hierarchy, "train.margins");
        }
        read(t, "alpha1", cfg.train.weights.alpha1, "train");
        read(t, "alpha2", cfg.train.weights.alpha2, "train");
        read(t, "omega", cfg.train.weights.omega, "train");
        read(t, "negative_ratio", cfg.train.negative_ratio, "train");
        read(t, "cross_negatives", cfg.train.cross_negatives, "train");
        read(t, "patience", cfg.train.patience, "train");
        read(t, "save_every", cfg.save_every, "train");
    }

    if (root.contains("eval")) {
        const auto& e = root["eval"];
        only_keys(e, "eval", {"tasks", "longtail_threshold", "filter_mode", "direction", "tie", "hits", "threads", "dump"});
        read(e, "tasks", cfg.eval.tasks, "eval");
        read(e, "longtail_threshold", cfg.eval.longtail_threshold, "eval");
        std::string s;
        if (e.contains("filter_mode")) read(e, "filter_mode", s, "eval"), cfg.eval.options.filter = parse_filter(s);
        if (e.contains("direction")) read(e, "direction", s, "eval"), cfg.eval.options.direction = parse_direction(s);
        if (e.contains("tie")) read(e, "tie", s, "eval"), cfg.eval.options.tie = parse_tie(s);
        read(e, "hits", cfg.eval.options.hits_at, "eval");
        read(e, "threads", cfg.eval.options.threads, "eval");
        read(e, "dump", cfg.eval.dump, "eval");
    }

    std::uint64_t seed = 0;
    read(root, "seed", seed, "config");
    apply_seed(cfg, seed);
    if (root.contains("split") && root["split"].contains("seed")) read(root["split"], "seed", cfg.split.seed, "split");
    read(root, "deterministic", cfg.train.deterministic, "config");
    if (root.contains("out")) {
        std::string o;
        read(root, "out", o, "config");
        cfg.out = resolve(base_dir, o);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
    config.seed = seed;
    config.split.seed = seed;
    config.train.seed = seed;
}

}  // namespace twoview
