#pragma once

// Prepared split directory:
//   entities.txt relations.txt concepts.txt meta_relations.txt   one name per line, id order
//   instance_{train,valid,test}.tsv  ontology_{train,valid,test}.tsv
//   links_{train,test}.tsv  hierarchy.tsv (fine \t coarse)  stats.json

#include <filesystem>
#include <string>
#include <vector>

#include "twoview/kb.hpp"

namespace twoview {

struct PreparedData {
    KnowledgeBase vocab;  // vocabularies only; the stores below hold the data
    TripleSplit instance;
    TripleSplit ontology;
    LinkSplit links;
    HierarchyStore hierarchy;
};

/// Splits a raw KB and extracts the full hierarchy with `hierarchical` names
/// (every name must exist in the meta-relation vocabulary).
PreparedData prepare_data(const KnowledgeBase& raw, const SplitSpec& spec,
                          const std::vector<std::string>& hierarchical);

/// Writes every file of the split directory; stats.json carries the raw KB
/// statistics and the split sizes.
void write_prepared(const std::filesystem::path& dir, const PreparedData& data, const DatasetStats& raw_stats,
                    const SplitSpec& spec);

PreparedData load_prepared(const std::filesystem::path& dir);

std::string stats_json(const DatasetStats& stats);

}  // namespace twoview
