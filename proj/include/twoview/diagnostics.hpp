#pragma once

// Self-checks run by the `check` command and the acceptance suite.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twoview/model.hpp"

namespace twoview {

struct CheckOutcome {
    std::string name;
    bool passed = false;
    double value = 0;      // worst observed error / deviation
    double tolerance = 0;
    std::string detail;
};

/// Test hook: multiplies the analytic gradient of the named check by `factor`.
struct GradientFault {
    std::string check;
    double factor = 2.0;
};

struct GradientSuiteOptions {
    std::size_t dim = 8;
    std::size_t probes = 100;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    std::optional<GradientFault> fault;
};

/// Names of every check in the gradient suite, in run order.
std::vector<std::string> gradient_check_names();

/// Central-difference checks in double precision: the three scorers, the
/// intra-view hinge for every scorer and view, CG in both modes, CT and HA
/// (including the map weights and biases).
std::vector<CheckOutcome> run_gradient_suite(const GradientSuiteOptions& options);

/// Parameters and sparse gradients flattened into one vector, tables first in
/// Table order, then CT weight|bias, then HA weight|bias.
std::vector<double> flatten(const BasicModelParams<double>& params);
void unflatten(std::span<const double> values, BasicModelParams<double>& params);
std::vector<double> flatten_grads(const GradientMap<double>& grads, const BasicModelParams<double>& shape);

struct NormAudit {
    std::size_t steps = 0;
    double max_deviation = 0;            // max | ||row|| - 1 | over entity/concept rows
    std::size_t untouched_changed = 0;   // rows absent from a step's gradients that still moved
};

/// Runs `steps` optimizer steps on random batches of every loss the variant
/// trains, checking after each step that rows absent from the gradients are
/// bitwise unchanged, and measuring row norms at the end.
NormAudit audit_norms(const ModelConfig& model, std::size_t steps, std::uint64_t seed);

/// Max | ||row|| - 1 | over the entity and concept tables.
double max_norm_deviation(const ModelParams& params);

struct CorrelationAudit {
    double max_relative_error = 0;  // over the direct, float and FFT paths
    bool worked_example_exact = false;
};

/// Compares every correlation implementation against the definition on
/// `pairs` random pairs per dimension.
CorrelationAudit audit_correlation(std::span<const std::size_t> dims, std::size_t pairs, std::uint64_t seed);

}  // namespace twoview
