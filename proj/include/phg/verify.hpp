#pragma once

// One-command identity suite: every checkable pointwise/integral identity of
// the calculus is a named, individually runnable check producing a
// machine-readable result.  Checks are deterministic given the seed; the
// registry is locked against docs/checks.md by a unit test.

#include <cstdint>
#include <string>
#include <vector>

namespace phg {

struct CheckResult {
    std::string id;        // stable identifier, e.g. "prop1.1.connection-axioms"
    std::string scenario;  // model / map / grid summary
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    double runtime_ms = 0;  // reported on stdout; excluded from the JSON
                            // report so reruns are byte-identical
};

struct VerifyConfig {
    std::uint64_t seed = 1;
    int points = 100;       // sample count for pointwise checks
    int grid_n = 16;        // default grid base resolution
    int grid_n_big = 32;    // refinement partner for order checks
    int flow_n = 12;        // nilmanifold flow resolution
    long flow_steps = 600;
    int ext_n = 32;         // ambient tube nodes per axis
    int ext_steps = 120;
    int order_k_trials = 10000;
};

std::vector<std::string> registered_check_ids();

// selection: explicit ids, or {"all"}; empty selection yields an empty
// result list (success).  Unknown ids throw std::invalid_argument.
std::vector<CheckResult> run_suite(const std::vector<std::string>& selection,
                                   const VerifyConfig& cfg);

bool all_passed(const std::vector<CheckResult>& results);

// Deterministic JSON serialization (no timing data).
std::string results_to_json(const std::vector<CheckResult>& results,
                            const VerifyConfig& cfg);

// Human-readable table.
std::string results_to_table(const std::vector<CheckResult>& results);

}  // namespace phg
