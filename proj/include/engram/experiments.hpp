#pragma once
// Paired experiment runs with named pass/fail checks.

#include "engram/config.hpp"

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace engram {

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // "<=", ">=", "<" or "=="
    double bound = 0.0;
    bool pass = false;
};

Check at_most(std::string name, double value, double bound);
Check at_least(std::string name, double value, double bound);
Check below(std::string name, double value, double bound);
Check equals(std::string name, double value, double expected);

struct ExperimentReport {
    std::string name;
    std::string description;
    std::vector<Check> checks;
    nlohmann::json details = nlohmann::json::object();

    [[nodiscard]] bool passed() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// One line per check.
    [[nodiscard]] std::string text() const;
};

/// P1..P7 and FP1..FP7. Scenario seeds come from config.harness.seed.
[[nodiscard]] const std::vector<std::string>& experiment_names();
/// Throws ValidationError for an unknown name.
ExperimentReport run_experiment(const std::string& name, const EngineConfig& config = {});

}  // namespace engram
