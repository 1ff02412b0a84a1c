#pragma once

// Ranking evaluation: filtered triple completion, entity typing (including
// the long-tail slice) and the two ontology-population queries.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "twoview/kb.hpp"
#include "twoview/model.hpp"

namespace twoview {

enum class TieMode { Mid, Optimistic, Pessimistic };
enum class FilterMode { Train, Strict };
enum class Direction { Tail, Both };

std::string_view filter_mode_name(FilterMode mode) noexcept;

/// 1 + #{c not filtered, c != gold : s(c) > s(gold)} + tie term, where the
/// tie term over candidates scoring exactly s(gold) is ceil(ties/2) (mid),
/// 0 (optimistic) or ties (pessimistic). `filter` must hold unique ids and
/// must not contain `gold`.
std::size_t rank_candidates(std::span<const double> scores, Id gold, std::span<const Id> filter,
                            TieMode tie = TieMode::Mid);

struct QueryRecord {
    Id first = 0;   // head (tail query), relation-less entity (typing), or relation (head query)
    Id second = 0;  // relation (tail query) or tail (head query); unused for typing
    bool head_query = false;
    Id gold = 0;
    std::size_t rank = 0;
};

struct SliceInfo {
    std::size_t threshold = 0;
    std::size_t entities = 0;     // distinct test entities in the slice
    std::size_t all_entities = 0; // distinct test entities overall
};

struct EvalReport {
    std::string task;
    std::string variant;
    std::string filter_mode;
    double mrr = 0;
    std::map<int, double> hits;  // k -> fraction of queries with rank <= k
    std::size_t n_queries = 0;
    std::optional<SliceInfo> slice;
    std::vector<QueryRecord> queries;  // kept when EvalOptions::keep_queries
};

struct EvalOptions {
    TieMode tie = TieMode::Mid;
    FilterMode filter = FilterMode::Train;
    Direction direction = Direction::Tail;
    std::vector<int> hits_at = {1, 3, 10};
    unsigned threads = 1;
    bool keep_queries = false;
};

/// Aggregates MRR / Hits@k from ranks (in query order).
EvalReport aggregate_ranks(std::span<const std::size_t> ranks, const std::vector<int>& hits_at);

/// Ranks every node of the view as the missing tail (and head, with
/// Direction::Both) of each test triple. Candidates forming a triple in any
/// of `filters` are removed, except the gold answer.
EvalReport triple_completion_eval(const ModelParams& params, ScorerKind kind, View view, const TripleStore& test,
                                  std::span<const TripleStore* const> filters, const EvalOptions& options = {});

/// Concepts sorted by distance ascending (ties by id): ||c - e|| under CG,
/// ||c - f_CT(e)|| under CT.
std::vector<std::pair<Id, double>> typing_scores(const ModelParams& params, const ModelConfig& config, Id entity);

/// One query per test link. Other concepts of the same entity found in
/// `train` (and, in strict mode, in `test`) are filtered.
EvalReport entity_typing_eval(const ModelParams& params, const ModelConfig& config, const CrossLinkStore& test,
                              const CrossLinkStore& train, const EvalOptions& options = {});

/// entity_typing_eval restricted to entities whose instance-view frequency is
/// below `threshold` (entities missing from `frequency` count as 0).
EvalReport long_tail_eval(const ModelParams& params, const ModelConfig& config, const CrossLinkStore& test,
                          const CrossLinkStore& train, const std::map<Id, std::size_t>& frequency,
                          std::size_t threshold, const EvalOptions& options = {});

/// Instance relations closest to f_CT^-1(c_tail) - f_CT^-1(c_head). Only
/// defined for translational CT variants.
std::vector<std::pair<Id, double>> populate_relation_query(const ModelParams& params, const ModelConfig& config,
                                                           Id concept_head, Id concept_tail, std::size_t k);

/// Concepts ranked as tails of (concept_head, meta_relation, ?) by the
/// ontology-view scorer, highest first, skipping tails already in `known`.
std::vector<std::pair<Id, double>> populate_triple_query(const ModelParams& params, const ModelConfig& config,
                                                         Id concept_head, Id meta_relation, std::size_t k,
                                                         const TripleStore* known = nullptr);

/// Instance-view analogue used by `predict tail`.
std::vector<std::pair<Id, double>> predict_tail(const ModelParams& params, const ModelConfig& config, Id head,
                                                Id relation, std::size_t k, const TripleStore* known = nullptr);

}  // namespace twoview
