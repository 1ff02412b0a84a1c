#include "twoview/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "twoview/checkpoint.hpp"
#include "twoview/errors.hpp"
#include "twoview/tensor_ops.hpp"

namespace twoview {

using json = nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

struct Loaded {
    PreparedData data;
    Checkpoint checkpoint;
};

Loaded load_for_inference(const RunConfig& config, const std::filesystem::path& checkpoint_path) {
    Loaded l{load_prepared(config.split_dir()), load_checkpoint(checkpoint_path)};
    verify_vocab(l.checkpoint, signatures_of(l.data.vocab));
    return l;
}

void require_matching_model(const RunConfig& config, const Checkpoint& ck) {
    if (ck.model == config.model) return;
    throw ConfigError("checkpoint holds " + ck.model.variant() + " (d_e=" + std::to_string(ck.model.entity_dim) +
                      ", d_c=" + std::to_string(ck.model.concept_dim) + ") but the config selects " +
                      config.model.variant() + " (d_e=" + std::to_string(config.model.entity_dim) +
                      ", d_c=" + std::to_string(config.model.concept_dim) + ")");
}

std::string describe_query(const QueryRecord& q, const std::string& task, const KnowledgeBase& v) {
    if (task == "typing" || task == "longtail") return v.entities.name(q.first);
    const bool inst = task == "triples";
    const Vocab& nodes = inst ? v.entities : v.concepts;
    const Vocab& rels = inst ? v.relations : v.meta_relations;
    if (q.head_query) return "(?, " + rels.name(q.first) + ", " + nodes.name(q.second) + ")";
    return "(" + nodes.name(q.first) + ", " + rels.name(q.second) + ", ?)";
}

const Vocab& gold_vocab(const std::string& task, const KnowledgeBase& v) {
    return task == "triples" ? v.entities : v.concepts;
}

}  // namespace

std::vector<std::string> standard_variants() {
    return {"TransE-CG", "Mult-CG", "HolE-CG", "TransE-CT", "Mult-CT", "HolE-CT", "HATransE-CT", "HAMult-CT", "HAHolE-CT"};
}

KnowledgeBase load_raw(const RunConfig& config) {
    const auto& d = config.data;
    if (d.instance.empty() || d.ontology.empty() || d.links.empty())
        throw ConfigError("data.instance, data.ontology and data.links must name the raw files");
    return load_raw_kb(d.instance, d.ontology, d.links);
}

DatasetStats cmd_stats(const RunConfig& config) { return dataset_stats(load_raw(config)); }

std::filesystem::path cmd_prepare(const RunConfig& config, std::ostream& log) {
    config.validate();
    const auto raw = load_raw(config);
    const auto stats = dataset_stats(raw);
    const auto data = prepare_data(raw, config.split, config.data.hierarchical);
    const auto dir = config.split_dir();
    write_prepared(dir, data, stats, config.split);
    log << "prepared " << dir.string() << ": instance " << data.instance.train.size() << "/"
        << data.instance.valid.size() << "/" << data.instance.test.size() << ", ontology "
        << data.ontology.train.size() << "/" << data.ontology.valid.size() << "/" << data.ontology.test.size()
        << ", links " << data.links.train.size() << "/" << data.links.test.size() << ", hierarchy pairs "
        << data.hierarchy.size() << '\n';
    return dir;
}

TrainOutput cmd_train(const RunConfig& config, std::ostream& log) {
    config.validate();
    const auto data = load_prepared(config.split_dir());
    const auto set = make_training_set(data.vocab, data.instance.train, data.ontology.train, data.links.train,
                                       config.model, config.data.hierarchical);
    validate_setup(set, config.model, config.train);
    if (config.train.patience > 0 && data.instance.valid.empty())
        throw ConfigError("early stopping (train.patience) needs instance validation triples");

    TrainOutput out;
    out.checkpoint = config.out / "checkpoint.bin";
    out.history = config.out / "history.csv";
    const auto signatures = signatures_of(data.vocab);
    auto history = open_out(out.history);
    history << "epoch,instance,ontology,hierarchy,cross,intra,total,steps,saturated_negatives\n";

    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochReport& r, const ModelParams& params) {
        history << r.epoch << ',' << r.instance << ',' << r.ontology << ',' << r.hierarchy << ',' << r.cross << ','
                << r.intra << ',' << r.total << ',' << r.steps << ',' << r.saturated_negatives << '\n';
        history.flush();
        log << "epoch " << r.epoch << " loss " << r.total << '\n';
        if (config.save_every > 0 && r.epoch % config.save_every == 0)
            save_checkpoint(config.out / ("checkpoint_epoch" + std::to_string(r.epoch) + ".bin"),
                            {config.model, signatures, config.seed, r.epoch, params});
    };
    if (config.train.patience > 0) {
        hooks.validation_metric = [&](const ModelParams& params) {
            const TripleStore* filters[] = {&data.instance.train};
            EvalOptions opt = config.eval.options;
            opt.keep_queries = false;
            return triple_completion_eval(params, config.model.intra, View::Instance, data.instance.valid, filters, opt)
                .mrr;
        };
    }
    out.result = train(set, config.model, config.train, hooks);
    save_checkpoint(out.checkpoint, {config.model, signatures, config.seed, out.result.history.size(), out.result.params});
    log << "wrote " << out.checkpoint.string() << (out.result.stopped_early ? " (stopped early)" : "") << '\n';
    return out;
}

EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, const std::string& task,
                    std::ostream& log) {
    config.validate();
    const auto [data, ck] = load_for_inference(config, checkpoint);
    require_matching_model(config, ck);
    EvalOptions opt = config.eval.options;
    opt.keep_queries = config.eval.dump;
    const bool strict = opt.filter == FilterMode::Strict;

    EvalReport report;
    if (task == "triples" || task == "ontology") {
        const bool inst = task == "triples";
        const auto& split = inst ? data.instance : data.ontology;
        std::vector<const TripleStore*> filters{&split.train};
        if (strict) filters.insert(filters.end(), {&split.valid, &split.test});
        report = triple_completion_eval(ck.params, ck.model.intra, inst ? View::Instance : View::Ontology, split.test,
                                        filters, opt);
    } else if (task == "typing") {
        report = entity_typing_eval(ck.params, ck.model, data.links.test, data.links.train, opt);
    } else if (task == "longtail") {
        report = long_tail_eval(ck.params, ck.model, data.links.test, data.links.train,
                                entity_frequency(data.instance.train), config.eval.longtail_threshold, opt);
    } else {
        throw ConfigError("unknown eval task '" + task + "' (expected triples, ontology, typing or longtail)");
    }
    report.task = task;
    report.variant = ck.model.variant();

    auto out = open_out(config.out / ("report_" + task + ".json"));
    out << report_json(report) << '\n';
    if (config.eval.dump) {
        auto dump = open_out(config.out / ("queries_" + task + ".tsv"));
        dump << "query\tgold\trank\n";
        for (const auto& q : report.queries)
            dump << describe_query(q, task, data.vocab) << '\t' << gold_vocab(task, data.vocab).name(q.gold) << '\t'
                 << q.rank << '\n';
    }
    log << task << ": MRR " << report.mrr << " over " << report.n_queries << " queries\n";
    return report;
}

void cmd_predict(const RunConfig& config, const std::filesystem::path& checkpoint, const std::vector<std::string>& query,
                 std::size_t k, bool as_json, std::ostream& out, std::ostream& err) {
    if (query.empty()) throw ConfigError("empty query");
    const auto& verb = query[0];
    const std::size_t arity = verb == "type" ? 2 : 3;
    if ((verb != "type" && verb != "tail" && verb != "meta" && verb != "relquery") || query.size() != arity)
        throw ConfigError("query must be one of: type <entity> | tail <head> <relation> | "
                          "meta <concept> <meta-relation> | relquery <concept> <concept>");
    if (k == 0) throw ConfigError("-k must be positive");
    const auto [data, ck] = load_for_inference(config, checkpoint);
    const auto& v = data.vocab;

    std::vector<std::pair<Id, double>> answers;
    const Vocab* answer_vocab = nullptr;
    const char* value_name = "score";
    if (verb == "type") {
        const Id e = resolve_name(v.entities, query[1], "entity");
        answers = typing_scores(ck.params, ck.model, e);
        if (answers.size() > k) answers.resize(k);
        answer_vocab = &v.concepts;
        value_name = "distance";
    } else if (verb == "tail") {
        const Id h = resolve_name(v.entities, query[1], "entity");
        const Id r = resolve_name(v.relations, query[2], "relation");
        answers = predict_tail(ck.params, ck.model, h, r, k, &data.instance.train);
        answer_vocab = &v.entities;
    } else if (verb == "meta") {
        const Id c = resolve_name(v.concepts, query[1], "concept");
        const Id m = resolve_name(v.meta_relations, query[2], "meta-relation");
        answers = populate_triple_query(ck.params, ck.model, c, m, k, &data.ontology.train);
        answer_vocab = &v.concepts;
    } else {
        const Id a = resolve_name(v.concepts, query[1], "concept");
        const Id b = resolve_name(v.concepts, query[2], "concept");
        answers = populate_relation_query(ck.params, ck.model, a, b, k);
        if (ck.params.ct_map) {
            const TanhAffineInverse inverse(ck.params.ct_map->cast<double>());
            if (inverse.warning()) err << "warning: " << *inverse.warning() << '\n';
        }
        answer_vocab = &v.relations;
        value_name = "distance";
    }

    if (as_json) {
        json j = {{"query", query}, {"answers", json::array()}};
        for (std::size_t i = 0; i < answers.size(); ++i)
            j["answers"].push_back(
                {{"rank", i + 1}, {"name", answer_vocab->name(answers[i].first)}, {value_name, answers[i].second}});
        out << j.dump(2) << '\n';
        return;
    }
    for (std::size_t i = 0; i < answers.size(); ++i)
        out << i + 1 << '\t' << answer_vocab->name(answers[i].first) << '\t' << answers[i].second << '\n';
}

std::size_t cmd_export(const RunConfig& config, const std::filesystem::path& checkpoint, const std::string& what,
                       const std::filesystem::path& dest) {
    Table table;
    if (what == "entities") table = Table::Entity;
    else if (what == "relations") table = Table::Relation;
    else if (what == "concepts") table = Table::Concept;
    else if (what == "meta") table = Table::MetaRelation;
    else throw ConfigError("export target must be entities, relations, concepts or meta, not '" + what + "'");

    const auto [data, ck] = load_for_inference(config, checkpoint);
    const Vocab* vocabs[] = {&data.vocab.entities, &data.vocab.relations, &data.vocab.concepts,
                             &data.vocab.meta_relations};
    const Vocab& names = *vocabs[static_cast<std::size_t>(table)];
    const auto& t = ck.params.table(table);
    auto out = open_out(dest);
    for (std::size_t i = 0; i < t.rows; ++i) {
        out << names.name(static_cast<Id>(i));
        for (float x : t.row(i)) out << '\t' << format_float(x);
        out << '\n';
    }
    if (!out) throw Error("failed writing " + dest.string());
    return t.rows;
}

std::size_t cmd_check(const CheckOptions& opt, std::ostream& out) {
    std::size_t failed = 0;
    auto line = [&](const CheckOutcome& c) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << " tol=" << c.tolerance;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << '\n';
        if (!c.passed) ++failed;
    };

    GradientSuiteOptions g;
    g.dim = opt.dim;
    g.probes = opt.probes;
    g.seed = opt.seed;
    g.fault = opt.fault;
    if (opt.fault) {
        const auto names = gradient_check_names();
        if (std::find(names.begin(), names.end(), opt.fault->check) == names.end())
            throw ConfigError("no gradient check named '" + opt.fault->check + "'");
    }
    for (const auto& c : run_gradient_suite(g)) line({"gradient/" + c.name, c.passed, c.value, c.tolerance, c.detail});

    for (const auto& name : standard_variants()) {
        auto model = ModelConfig::from_variant(name);
        model.entity_dim = opt.dim;
        model.concept_dim = opt.dim;
        const auto a = audit_norms(model, opt.audit_steps, opt.seed);
        line({"norms/" + name, a.max_deviation < 1e-5 && a.untouched_changed == 0, a.max_deviation, 1e-5,
              std::to_string(a.steps) + " steps, " + std::to_string(a.untouched_changed) + " untouched rows moved"});
    }

    const std::size_t dims[] = {4, 50, 300};
    const auto corr = audit_correlation(dims, 1000, opt.seed);
    line({"correlation/oracle", corr.max_relative_error < 1e-4, corr.max_relative_error, 1e-4, "1000 pairs at d=4,50,300"});
    line({"correlation/worked-example", corr.worked_example_exact, corr.worked_example_exact ? 0.0 : 1.0, 0.0,
          "[1,2,3] corr [4,5,6] = [32,29,29]"});

    if (opt.checkpoint) {
        const auto ck = load_checkpoint(*opt.checkpoint);
        const double dev = max_norm_deviation(ck.params);
        line({"checkpoint/norms", dev < 1e-5, dev, 1e-5, opt.checkpoint->string()});
    }
    out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
    return failed;
}

void cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir, std::ostream& log) {
    const auto synth = make_synthetic_kb(spec);
    write_synthetic_kb(synth, dir);
    auto planted = open_out(dir / "planted.tsv");
    const auto& kb = synth.kb;
    for (const auto& p : synth.planted)
        planted << kb.concepts.name(p.concept_head) << '\t' << kb.relations.name(p.relation) << '\t'
                << kb.concepts.name(p.concept_tail) << '\n';
    log << "wrote synthetic KB to " << dir.string() << ": " << kb.entities.size() << " entities, "
        << kb.concepts.size() << " concepts, " << kb.instance.size() << " instance triples, " << kb.ontology.size()
        << " ontology triples, " << kb.links.size() << " links\n";
}

std::string report_json(const EvalReport& r) {
    json hits = json::object();
    for (const auto& [k, v] : r.hits) hits[std::to_string(k)] = v;
    json j = {{"task", r.task},   {"variant", r.variant},       {"mrr", r.mrr},
              {"hits", hits},     {"n_queries", r.n_queries},   {"filter_mode", r.filter_mode},
              {"slice", nullptr}};
    if (r.slice)
        j["slice"] = {{"threshold", r.slice->threshold}, {"entities", r.slice->entities},
                      {"all_entities", r.slice->all_entities}};
    return j.dump(2);
}

std::string format_float(float value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

Id resolve_name(const Vocab& vocab, const std::string& name, const std::string& kind) {
    if (auto id = vocab.find(name)) return *id;
    std::vector<std::pair<std::size_t, std::string>> near;
    for (const auto& n : vocab.names()) {
        // Length difference bounds the distance from below.
        const auto gap = n.size() > name.size() ? n.size() - name.size() : name.size() - n.size();
        if (gap > 2) continue;
        if (const auto d = edit_distance(name, n); d <= 2) near.emplace_back(d, n);
    }
    std::sort(near.begin(), near.end());
    std::string context = kind;
    if (!near.empty()) {
        context += "; did you mean:";
        for (std::size_t i = 0; i < std::min<std::size_t>(near.size(), 5); ++i) context += (i ? ", " : " ") + near[i].second;
    }
    throw UnknownSymbolError(name, context);
}

}  // namespace twoview
