#include "twoview/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "twoview/errors.hpp"
#include "twoview/scoring.hpp"

namespace twoview {

std::string_view filter_mode_name(FilterMode mode) noexcept {
    return mode == FilterMode::Train ? "train" : "strict";
}

std::size_t rank_candidates(std::span<const double> scores, Id gold, std::span<const Id> filter, TieMode tie) {
    if (gold >= scores.size()) throw Error("gold candidate " + std::to_string(gold) + " has no score");
    const double g = scores[gold];
    std::size_t greater = 0;
    std::size_t ties = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (c == gold) continue;
        if (scores[c] > g)
            ++greater;
        else if (scores[c] == g)
            ++ties;
    }
    for (Id c : filter) {
        if (c == gold) throw Error("gold candidate " + std::to_string(gold) + " is in the filter set");
        if (c >= scores.size()) continue;
        if (scores[c] > g)
            --greater;
        else if (scores[c] == g)
            --ties;
    }
    switch (tie) {
        case TieMode::Optimistic: return 1 + greater;
        case TieMode::Pessimistic: return 1 + greater + ties;
        case TieMode::Mid: break;
    }
    return 1 + greater + (ties + 1) / 2;
}

EvalReport aggregate_ranks(std::span<const std::size_t> ranks, const std::vector<int>& hits_at) {
    EvalReport r;
    r.n_queries = ranks.size();
    double rr = 0;
    for (auto k : hits_at) r.hits[k] = 0;
    for (std::size_t rank : ranks) {
        rr += 1.0 / static_cast<double>(rank);
        for (auto& [k, h] : r.hits)
            if (rank <= static_cast<std::size_t>(k)) h += 1;
    }
    if (!ranks.empty()) {
        r.mrr = rr / static_cast<double>(ranks.size());
        for (auto& [k, h] : r.hits) h /= static_cast<double>(ranks.size());
    }
    return r;
}

namespace {

// Runs body(i) for i in [0, n), split across `threads` workers. Each index is
// written by exactly one worker so results are independent of scheduling.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += threads) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <typename T>
std::vector<double> to_double(std::span<const T> v) {
    return {v.begin(), v.end()};
}

// (a, b) -> unique ids completing the pair in any filter store.
class CompletionIndex {
public:
    void add(Id a, Id b, Id c) {
        auto& v = map_[detail::pair_key(a, b)];
        if (std::find(v.begin(), v.end(), c) == v.end()) v.push_back(c);
    }
    std::vector<Id> others(Id a, Id b, Id gold) const {
        std::vector<Id> out;
        if (auto it = map_.find(detail::pair_key(a, b)); it != map_.end())
            for (Id c : it->second)
                if (c != gold) out.push_back(c);
        return out;
    }

private:
    std::unordered_map<std::uint64_t, std::vector<Id>> map_;
};

// Distances of every concept to the entity's image in concept space.
std::vector<double> concept_distances(const ModelParams& params, const ModelConfig& config, Id entity,
                                      const std::optional<AffineMap<double>>& ct) {
    const auto& concepts = params.table(Table::Concept);
    std::vector<double> target;
    if (config.cross == CrossKind::Transformation) {
        if (!ct) throw ConfigError("CT variant without a transformation map");
        const auto e = to_double(params.table(Table::Entity).row(entity));
        target = affine_tanh(*ct, std::span<const double>(e));
    } else {
        target = to_double(params.table(Table::Entity).row(entity));
        if (target.size() != concepts.dim) throw ConfigError("CG variant with entity_dim != concept_dim");
    }
    std::vector<double> dist(concepts.rows);
    for (std::size_t c = 0; c < concepts.rows; ++c) {
        const auto row = concepts.row(c);
        double s = 0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double x = static_cast<double>(row[i]) - target[i];
            s += x * x;
        }
        dist[c] = std::sqrt(s);
    }
    return dist;
}

std::optional<AffineMap<double>> ct_double(const ModelParams& params) {
    if (!params.ct_map) return std::nullopt;
    return params.ct_map->cast<double>();
}

std::vector<std::pair<Id, double>> top_k(const std::vector<double>& values, std::size_t k, bool ascending,
                                         const std::vector<bool>* skip = nullptr) {
    std::vector<std::pair<Id, double>> all;
    all.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!skip || !(*skip)[i]) all.emplace_back(static_cast<Id>(i), values[i]);
    auto cmp = [ascending](const auto& a, const auto& b) {
        if (a.second != b.second) return ascending ? a.second < b.second : a.second > b.second;
        return a.first < b.first;
    };
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), cmp);
    all.resize(n);
    return all;
}

}  // namespace

EvalReport triple_completion_eval(const ModelParams& params, ScorerKind kind, View view, const TripleStore& test,
                                  std::span<const TripleStore* const> filters, const EvalOptions& options) {
    if (test.empty()) throw Error("triple completion: empty test set");
    const Table node_table = view == View::Instance ? Table::Entity : Table::Concept;
    const Table rel_table = view == View::Instance ? Table::Relation : Table::MetaRelation;
    const auto& nodes = params.table(node_table);
    const auto& rels = params.table(rel_table);

    CompletionIndex tails, heads;
    for (const auto* store : filters) {
        if (!store) continue;
        for (const auto& t : *store) {
            tails.add(t.head, t.relation, t.tail);
            heads.add(t.relation, t.tail, t.head);
        }
    }

    const bool both = options.direction == Direction::Both;
    const std::size_t per = both ? 2 : 1;
    const auto& triples = test.triples();
    std::vector<QueryRecord> records(triples.size() * per);

    parallel_for(records.size(), options.threads, [&](std::size_t q) {
        const auto& t = triples[q / per];
        const bool head_query = both && (q % 2 == 1);
        const auto r = to_double(rels.row(t.relation));
        std::vector<double> scores(nodes.rows);
        QueryRecord rec;
        rec.head_query = head_query;
        if (!head_query) {
            const auto h = to_double(nodes.row(t.head));
            CandidateScorer scorer(kind, CandidateScorer::Slot::Tail, h, r);
            for (std::size_t c = 0; c < nodes.rows; ++c) scores[c] = scorer(nodes.row(c));
            const auto filter = tails.others(t.head, t.relation, t.tail);
            rec = {t.head, t.relation, false, t.tail, rank_candidates(scores, t.tail, filter, options.tie)};
        } else {
            const auto tv = to_double(nodes.row(t.tail));
            CandidateScorer scorer(kind, CandidateScorer::Slot::Head, r, tv);
            for (std::size_t c = 0; c < nodes.rows; ++c) scores[c] = scorer(nodes.row(c));
            const auto filter = heads.others(t.relation, t.tail, t.head);
            rec = {t.relation, t.tail, true, t.head, rank_candidates(scores, t.head, filter, options.tie)};
        }
        records[q] = rec;
    });

    std::vector<std::size_t> ranks(records.size());
    std::transform(records.begin(), records.end(), ranks.begin(), [](const auto& r) { return r.rank; });
    auto report = aggregate_ranks(ranks, options.hits_at);
    report.task = view == View::Instance ? "instance_completion" : "ontology_completion";
    report.filter_mode = std::string(filter_mode_name(options.filter));
    if (options.keep_queries) report.queries = std::move(records);
    return report;
}

std::vector<std::pair<Id, double>> typing_scores(const ModelParams& params, const ModelConfig& config, Id entity) {
    const auto dist = concept_distances(params, config, entity, ct_double(params));
    return top_k(dist, dist.size(), true);
}

namespace {

EvalReport typing_eval_impl(const ModelParams& params, const ModelConfig& config, const std::vector<Link>& queries,
                            const CrossLinkStore& test, const CrossLinkStore& train, const EvalOptions& options) {
    const auto ct = ct_double(params);
    std::vector<QueryRecord> records(queries.size());
    parallel_for(queries.size(), options.threads, [&](std::size_t q) {
        const auto& link = queries[q];
        const auto dist = concept_distances(params, config, link.entity, ct);
        std::vector<double> scores(dist.size());
        std::transform(dist.begin(), dist.end(), scores.begin(), [](double d) { return -d; });
        std::vector<Id> filter;
        for (Id c : train.concepts_of(link.entity))
            if (c != link.concept_id) filter.push_back(c);
        if (options.filter == FilterMode::Strict)
            for (Id c : test.concepts_of(link.entity))
                if (c != link.concept_id && std::find(filter.begin(), filter.end(), c) == filter.end()) filter.push_back(c);
        records[q] = {link.entity, 0, false, link.concept_id, rank_candidates(scores, link.concept_id, filter, options.tie)};
    });
    std::vector<std::size_t> ranks(records.size());
    std::transform(records.begin(), records.end(), ranks.begin(), [](const auto& r) { return r.rank; });
    auto report = aggregate_ranks(ranks, options.hits_at);
    report.filter_mode = std::string(filter_mode_name(options.filter));
    report.variant = config.variant();
    if (options.keep_queries) report.queries = std::move(records);
    return report;
}

}  // namespace

EvalReport entity_typing_eval(const ModelParams& params, const ModelConfig& config, const CrossLinkStore& test,
                              const CrossLinkStore& train, const EvalOptions& options) {
    if (test.empty()) throw Error("entity typing: empty test set");
    auto report = typing_eval_impl(params, config, test.links(), test, train, options);
    report.task = "typing";
    return report;
}

EvalReport long_tail_eval(const ModelParams& params, const ModelConfig& config, const CrossLinkStore& test,
                          const CrossLinkStore& train, const std::map<Id, std::size_t>& frequency,
                          std::size_t threshold, const EvalOptions& options) {
    if (threshold < 1) throw ConfigError("long-tail threshold must be at least 1");
    std::vector<Link> queries;
    std::unordered_set<Id> slice_entities, all_entities;
    for (const auto& l : test) {
        all_entities.insert(l.entity);
        const auto it = frequency.find(l.entity);
        const std::size_t count = it == frequency.end() ? 0 : it->second;
        if (count < threshold) {
            queries.push_back(l);
            slice_entities.insert(l.entity);
        }
    }
    if (queries.empty())
        throw Error("long-tail slice is empty: no test entity occurs fewer than " + std::to_string(threshold) + " times");
    auto report = typing_eval_impl(params, config, queries, test, train, options);
    report.task = "longtail";
    report.slice = SliceInfo{threshold, slice_entities.size(), all_entities.size()};
    return report;
}

std::vector<std::pair<Id, double>> populate_relation_query(const ModelParams& params, const ModelConfig& config,
                                                           Id concept_head, Id concept_tail, std::size_t k) {
    if (config.cross != CrossKind::Transformation || config.intra != ScorerKind::Translational)
        throw UnsupportedVariantError("relation population is defined only for translational CT variants, not " +
                                      config.variant());
    if (!params.ct_map) throw ConfigError("CT variant without a transformation map");
    const TanhAffineInverse inverse(params.ct_map->cast<double>());
    const auto& concepts = params.table(Table::Concept);
    const auto head = inverse.apply(to_double(concepts.row(concept_head)));
    const auto tail = inverse.apply(to_double(concepts.row(concept_tail)));
    std::vector<double> v(head.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = tail[i] - head[i];

    const auto& rels = params.table(Table::Relation);
    std::vector<double> dist(rels.rows);
    for (std::size_t r = 0; r < rels.rows; ++r) {
        const auto row = rels.row(r);
        double s = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = static_cast<double>(row[i]) - v[i];
            s += x * x;
        }
        dist[r] = std::sqrt(s);
    }
    return top_k(dist, k, true);
}

namespace {

std::vector<std::pair<Id, double>> rank_tails(const ModelParams& params, ScorerKind kind, View view, Id head,
                                              Id relation, std::size_t k, const TripleStore* known) {
    const Table node_table = view == View::Instance ? Table::Entity : Table::Concept;
    const Table rel_table = view == View::Instance ? Table::Relation : Table::MetaRelation;
    const auto& nodes = params.table(node_table);
    const auto h = to_double(nodes.row(head));
    const auto r = to_double(params.table(rel_table).row(relation));
    CandidateScorer scorer(kind, CandidateScorer::Slot::Tail, h, r);
    std::vector<double> scores(nodes.rows);
    std::vector<bool> skip(nodes.rows, false);
    for (std::size_t c = 0; c < nodes.rows; ++c) {
        scores[c] = scorer(nodes.row(c));
        if (known && known->contains({head, relation, static_cast<Id>(c)})) skip[c] = true;
    }
    return top_k(scores, k, false, &skip);
}

}  // namespace

std::vector<std::pair<Id, double>> populate_triple_query(const ModelParams& params, const ModelConfig& config,
                                                         Id concept_head, Id meta_relation, std::size_t k,
                                                         const TripleStore* known) {
    return rank_tails(params, config.intra, View::Ontology, concept_head, meta_relation, k, known);
}

std::vector<std::pair<Id, double>> predict_tail(const ModelParams& params, const ModelConfig& config, Id head,
                                                Id relation, std::size_t k, const TripleStore* known) {
    return rank_tails(params, config.intra, View::Instance, head, relation, k, known);
}

}  // namespace twoview
