#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "abelu/numerics.hpp"

namespace abelu {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { ConstructGrowth, ConstructFloor, ConstructAe, ConstructPoints, Diagnose, Capacity, Approx };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);
// subcommand that runs a given kind: construct, diagnose, capacity or approx
std::string subcommand_for(ExperimentKind k);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Diagnose;
    nlohmann::json params;       // the whole document; kind-specific blocks live at top level
    long precision_bits = 0;     // 0: module defaults
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    std::filesystem::path base_dir;  // relative input paths resolve against this

    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    nlohmann::json echo() const;
};

// Reads a JSON document (comments allowed). Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

// Checks every parameter against the module preconditions without running
// anything heavy. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

struct Assertion {
    std::string name;
    bool pass = false;
};

struct RunReport {
    nlohmann::json config;
    std::string started, finished;
    std::vector<std::string> artifacts;
    nlohmann::json summary;
    std::vector<Assertion> assertions;
    bool runtime_failure = false;
    std::string message;

    bool passed() const;
    int exit_code() const;  // 0 pass, 1 assertion failure, 3 runtime failure
    nlohmann::json to_json() const;
};

// Validates, runs, and writes f.json / report.json / *.csv into cfg.out_dir.
// Validation errors throw ConfigError before anything is written.
RunReport run(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& log = {});

// Human-readable summary of an artifact directory or a report/polynomial JSON file.
std::string describe(const std::filesystem::path& artifact);

}  // namespace abelu
