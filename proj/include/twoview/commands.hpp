#pragma once

// The operations behind each CLI verb. Everything reads and writes files and
// reports progress on the given stream; the executable only parses flags.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twoview/config.hpp"
#include "twoview/dataset.hpp"
#include "twoview/diagnostics.hpp"
#include "twoview/evaluation.hpp"
#include "twoview/synthetic.hpp"
#include "twoview/trainer.hpp"

namespace twoview {

/// The nine named variants: three intra-view scorers with CG and CT, and the
/// three hierarchy-aware CT variants.
std::vector<std::string> standard_variants();

/// Reads the raw files named in the config.
KnowledgeBase load_raw(const RunConfig& config);

/// Raw dataset statistics (no split).
DatasetStats cmd_stats(const RunConfig& config);

/// Writes the split directory (config.split_dir()) and returns its path.
std::filesystem::path cmd_prepare(const RunConfig& config, std::ostream& log);

struct TrainOutput {
    std::filesystem::path checkpoint;
    std::filesystem::path history;
    TrainResult result;
};

/// Trains on the prepared splits. Writes <out>/checkpoint.bin, one
/// <out>/checkpoint_epoch<N>.bin every `save_every` epochs, and
/// <out>/history.csv.
TrainOutput cmd_train(const RunConfig& config, std::ostream& log);

/// Evaluates a checkpoint on one task (triples, ontology, typing, longtail).
/// Writes <out>/report_<task>.json and, with eval.dump, <out>/queries_<task>.tsv.
EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, const std::string& task,
                    std::ostream& log);

/// `query` is one of: type <entity> | tail <head> <relation> |
/// meta <concept> <meta-relation> | relquery <concept> <concept>.
void cmd_predict(const RunConfig& config, const std::filesystem::path& checkpoint,
                 const std::vector<std::string>& query, std::size_t k, bool as_json, std::ostream& out,
                 std::ostream& err);

/// Writes `name \t v1 \t ... \t vd` rows for entities | relations | concepts | meta.
/// Returns the number of rows.
std::size_t cmd_export(const RunConfig& config, const std::filesystem::path& checkpoint, const std::string& what,
                       const std::filesystem::path& dest);

struct CheckOptions {
    std::size_t dim = 8;
    std::size_t probes = 100;
    std::size_t audit_steps = 100;
    std::uint64_t seed = 0;
    std::optional<GradientFault> fault;
    std::optional<std::filesystem::path> checkpoint;
};

/// Prints one line per check; returns the number of failed checks.
std::size_t cmd_check(const CheckOptions& options, std::ostream& out);

void cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir, std::ostream& log);

// Helpers shared with the tests.

std::string report_json(const EvalReport& report);
/// Shortest decimal text that parses back to the same float.
std::string format_float(float value);
/// Resolves a name, or throws UnknownSymbolError listing vocabulary names
/// within edit distance 2.
Id resolve_name(const Vocab& vocab, const std::string& name, const std::string& kind);
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace twoview
