#pragma once

// File formats: CSV for numeric series and diagrams, JSON for models,
// sweeps and manifests. All floating-point output uses the shortest decimal
// form that round-trips to the identical double, so reruns are byte-stable.

#include "ngrc/analysis.hpp"
#include "ngrc/predictor.hpp"
#include "ngrc/training.hpp"
#include "ngrc/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ngrc {

/// Trajectory CSV: header `t,x0,x1,...`; with thetas given, a trailing
/// `theta` column (values for the leading warm-up rows repeat the first
/// schedule entry).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::span<const double> thetas = {});

/// Reads a trajectory CSV produced by write_trajectory_csv. A trailing theta
/// column, when present, is ignored. dt is inferred from the time column.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Long-format scatter: `theta,scatter_value`, one row per scatter point.
void write_diagram_scatter_csv(const std::filesystem::path& path,
                               const BifurcationDiagram& diagram);

/// Summary: `theta,lambda_max,collapse` (empty collapse field when bounded,
/// `nan` lambda when not estimated).
void write_diagram_summary_csv(const std::filesystem::path& path,
                               const BifurcationDiagram& diagram);

void write_envelope_csv(const std::filesystem::path& path, std::span<const double> grid,
                        std::span<const double> lambda_min,
                        std::span<const double> lambda_max);

/// Exponent rows of a monomial table: `m0,m1,...`, one row per monomial.
void write_monomial_table_csv(const std::filesystem::path& path, const MonomialTable& table);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json sweep_to_json(const GammaSweepResult& sweep);

nlohmann::json collapse_to_json(const CollapseEvent& event, double dt, double t0);

/// Writes JSON with a trailing newline, canonical key order, deterministic
/// number formatting.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace ngrc
