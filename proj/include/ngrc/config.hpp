#pragma once

// Experiment configuration: JSON schema with strict validation (unknown keys
// rejected, field-path diagnostics) shared by every CLI command.

#include "ngrc/analysis.hpp"
#include "ngrc/features.hpp"
#include "ngrc/models.hpp"
#include "ngrc/predictor.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ngrc {

struct GenerationConfig {
    StateVector x0;
    double dt = 0.0;
    std::size_t n_steps = 0;
    double transient_discard = 0.3;
    int observable = 0;
    bool ground_truth_diagram = false;
};

struct GridConfig {
    // either an arithmetic progression or explicit values
    std::optional<double> start, stop, step;
    std::vector<double> values;

    std::vector<double> resolve() const;
};

struct PredictionConfig {
    GridConfig grid;
    std::size_t n_steps = 0;
    bool compute_lyapunov = true;
};

struct ScheduleConfig {
    std::string kind;  // constant | step | sine_plus_linear | explicit
    double theta = 0.0;
    double theta_before = 0.0, theta_after = 0.0;
    std::size_t switch_step = 0;
    double base = 0.0, amplitude = 0.0, period_steps = 0.0, slope_per_step = 0.0;
    std::vector<double> values;
    std::size_t n_steps = 0;

    ParameterSchedule resolve() const;
};

struct ExperimentConfig {
    std::string model_kind;  // power_system | food_chain
    PowerSystemParams power_params;
    FoodChainParams food_params;

    GenerationConfig generation;
    NgrcConfig ngrc;
    std::vector<double> training_thetas;
    std::optional<PredictionConfig> prediction;
    RosensteinParams lyapunov;
    CollapseRules collapse;
    std::vector<double> sweep_gammas;
    std::optional<ScheduleConfig> schedule;
    std::string output_dir = "out";

    ModelFamily family() const;
    int dimension() const;

    bool operator==(const ExperimentConfig& other) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Loads, validates and resolves defaults. Throws ConfigError with a
/// path-to-field message on any schema violation.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Hash of the canonical serialized config, embedded in manifests.
std::string experiment_hash(const ExperimentConfig& config);

}  // namespace ngrc
