// twoview: command-line front end.

#include <iostream>

#include <CLI11.hpp>

#include "twoview/checkpoint.hpp"
#include "twoview/commands.hpp"
#include "twoview/dataset.hpp"
#include "twoview/errors.hpp"

using namespace twoview;

namespace {

enum Exit { Ok = 0, ChecksFailed = 1, BadConfig = 2, Failure = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint two-view knowledge-base embedding: prepare, train, evaluate, query."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
    app.add_option("--config", config_path, "run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "seed for splitting, initialization and sampling");
    app.add_flag("--deterministic", deterministic, "require bit-reproducible runs");
    app.add_option("--out", out_dir, "output directory");

    auto* prepare = app.add_subcommand("prepare", "split the raw files into a prepared directory");
    auto* stats = app.add_subcommand("stats", "print raw dataset statistics as JSON");

    auto* train = app.add_subcommand("train", "train the configured variant");

    std::string checkpoint;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::vector<std::string> tasks;
    eval->add_option("--checkpoint", checkpoint, "checkpoint (default <out>/checkpoint.bin)");
    eval->add_option("--task", tasks, "triples | ontology | typing | longtail (default: eval.tasks)");

    auto* predict = app.add_subcommand("predict", "rank answers for one query");
    std::vector<std::string> query;
    std::size_t k = 10;
    bool as_json = false;
    predict->add_option("--checkpoint", checkpoint, "checkpoint (default <out>/checkpoint.bin)");
    predict->add_option("-k", k, "number of answers");
    predict->add_flag("--json", as_json, "print JSON");
    predict->add_option("query", query, "type <e> | tail <h> <r> | meta <c> <m> | relquery <c1> <c2>")->required();

    auto* exporter = app.add_subcommand("export", "write embeddings as TSV");
    std::string what, dest;
    exporter->add_option("--checkpoint", checkpoint, "checkpoint (default <out>/checkpoint.bin)");
    exporter->add_option("what", what, "entities | relations | concepts | meta")->required();
    exporter->add_option("--dest", dest, "output file (default <out>/<what>.tsv)");

    auto* check = app.add_subcommand("check", "gradient, norm and correlation self-checks");
    CheckOptions check_opt;
    std::string check_checkpoint, fault;
    check->add_option("--checkpoint", check_checkpoint, "also audit the row norms of this checkpoint");
    check->add_option("--dim", check_opt.dim, "embedding dimension of the gradient probes");
    check->add_option("--probes", check_opt.probes, "random probes per gradient check");
    check->add_option("--steps", check_opt.audit_steps, "optimizer steps per norm audit");
    check->add_option("--inject-fault", fault, "scale the analytic gradient of the named check by 2 (test hook)")
        ->group("");

    auto* synth = app.add_subcommand("synth", "write a synthetic two-view KB with planted structure");
    SyntheticSpec spec;
    std::string synth_dir;
    synth->add_option("dir", synth_dir, "output directory")->required();
    synth->add_option("--branches", spec.branches);
    synth->add_option("--concepts-per-branch", spec.concepts_per_branch);
    synth->add_option("--entities-per-concept", spec.entities_per_concept);
    synth->add_option("--relations", spec.relations);
    synth->add_option("--pairs-per-relation", spec.pairs_per_relation);
    synth->add_option("--tails-per-head", spec.tails_per_head);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = config_path.empty() ? parse_run_config("{}") : load_run_config(config_path);
        if (seed) apply_seed(config, *seed);
        if (deterministic) config.train.deterministic = true;
        if (!out_dir.empty()) config.out = out_dir;
        const auto ckpt = checkpoint.empty() ? config.out / "checkpoint.bin" : std::filesystem::path(checkpoint);

        if (*prepare) {
            cmd_prepare(config, std::cerr);
        } else if (*stats) {
            std::cout << stats_json(cmd_stats(config)) << '\n';
        } else if (*train) {
            cmd_train(config, std::cerr);
        } else if (*eval) {
            for (const auto& task : tasks.empty() ? config.eval.tasks : tasks) {
                const auto report = cmd_eval(config, ckpt, task, std::cerr);
                std::cout << report_json(report) << '\n';
            }
        } else if (*predict) {
            cmd_predict(config, ckpt, query, k, as_json, std::cout, std::cerr);
        } else if (*exporter) {
            const auto path = dest.empty() ? config.out / (what + ".tsv") : std::filesystem::path(dest);
            const auto rows = cmd_export(config, ckpt, what, path);
            std::cerr << "wrote " << rows << " rows to " << path.string() << '\n';
        } else if (*check) {
            check_opt.seed = config.seed;
            if (!fault.empty()) check_opt.fault = GradientFault{fault, 2.0};
            if (!check_checkpoint.empty()) check_opt.checkpoint = check_checkpoint;
            return cmd_check(check_opt, std::cout) == 0 ? Ok : ChecksFailed;
        } else if (*synth) {
            if (seed) spec.seed = *seed;
            cmd_synth(spec, synth_dir, std::cerr);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const UnsupportedVariantError& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return BadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Failure;
    }
    return Ok;
}
