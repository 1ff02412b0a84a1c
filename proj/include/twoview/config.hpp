#pragma once

// Run configuration read from a JSON file. Every block is optional; missing
// keys take the defaults below, unknown keys are rejected.
//
// {
//   "data":  {"instance", "ontology", "links", "split_dir", "hierarchical_relations": [..]},
//   "split": {"train", "valid", "test", "link_train", "seed"},
//   "model": {"variant": "TransE-CT", "entity_dim", "concept_dim"},
//   "train": {"epochs", "learning_rate", "batch": {"instance", "ontology", "cross", "hierarchy"},
//             "margins": {"instance", "ontology", "cross", "hierarchy"}, "alpha1", "alpha2", "omega",
//             "negative_ratio", "cross_negatives", "patience", "save_every"},
//   "eval":  {"tasks": ["triples", "typing", "longtail"], "longtail_threshold", "filter_mode": "train"|"strict",
//             "direction": "tail"|"both", "tie": "mid"|"optimistic"|"pessimistic", "hits": [1, 3, 10],
//             "threads", "dump"},
//   "seed": 0, "deterministic": true, "out": "run"
// }
//
// Relative paths are resolved against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twoview/evaluation.hpp"
#include "twoview/kb.hpp"
#include "twoview/model.hpp"
#include "twoview/trainer.hpp"

namespace twoview {

struct DataPaths {
    std::filesystem::path instance;
    std::filesystem::path ontology;
    std::filesystem::path links;
    std::filesystem::path split_dir;
    std::vector<std::string> hierarchical;
};

struct EvalConfig {
    std::vector<std::string> tasks = {"triples", "typing"};
    std::size_t longtail_threshold = 8;
    EvalOptions options;
    bool dump = false;
};

struct RunConfig {
    DataPaths data;
    SplitSpec split;
    ModelConfig model;
    TrainConfig train;
    EvalConfig eval;
    std::size_t save_every = 0;
    std::uint64_t seed = 0;
    std::filesystem::path out = "run";

    /// Directory holding (or receiving) the prepared splits.
    std::filesystem::path split_dir() const;
    /// Throws ConfigError on any invalid combination.
    void validate() const;
};

/// Applies JSON text on top of the defaults. `base_dir` anchors relative paths.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Overrides applied by the global CLI flags; the seed feeds the split, the
/// initialization and the sampler.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace twoview
