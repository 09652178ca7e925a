#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpp/analysis.hpp"
#include "adpp/engine.hpp"
#include "adpp/problem.hpp"

namespace adpp {

inline constexpr int kConfigSchemaVersion = 1;

/// Analysis knobs shared by the bound-reporting subcommands.
struct AnalysisOptions {
    double nu = 0.01;
    double epsilon = 0.05;
    std::optional<double> gamma0;
    std::optional<double> gamma1;
    DetectionBoundVariant bound_variant = DetectionBoundVariant::Printed;
    PacExponent pac_exponent = PacExponent::Printed;
    std::vector<std::size_t> lags{1, 5, 10, 50};
    std::size_t anchors = 20;
    std::size_t lipschitz_grid = 64;
    std::optional<double> lipschitz_range;
};

/// Everything one invocation needs: the instance, the engine settings, the
/// ensemble size and where outputs go.
struct RunConfig {
    std::string scenario;  // preset name, empty for a fully inline config
    ProblemSpec problem;
    CoveringSet cover;
    DistributionSchedule schedule;
    EngineConfig engine;
    std::size_t runs = 200;
    std::string output_dir = "adpp-out";
    bool shard_traces = false;
    std::vector<double> v_list{5.0, 50.0};
    AnalysisOptions analysis;
    /// Schedule rule parameters as loaded, kept for re-serialization.
    nlohmann::json schedule_source;
};

/// Parses and validates a config document; `base_dir` resolves
/// "problem_file". Throws ValidationError listing every violation.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads a UTF-8 JSON file. Missing file or parse error -> ValidationError.
RunConfig load_config(const std::filesystem::path& path);

/// Named preset ("paper-sec4"). Throws ValidationError for unknown names.
RunConfig preset_config(const std::string& name);

/// Rebuilds the schedule after horizon or cover changes.
void rebuild_schedule(RunConfig& config);

/// Fully expanded, self-contained config document (round-trips through parse_config).
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64 of the compact dump of to_json(config) without output_dir, as
/// 16 hex digits.
std::string config_hash(const RunConfig& config);

nlohmann::json problem_to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const nlohmann::json& doc, std::vector<std::string>& errors);

}  // namespace adpp
