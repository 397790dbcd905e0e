#pragma once

// Closed-loop operation of a trained NG-RC: one-step prediction, autonomous
// free runs with fixed or per-step bifurcation parameters, and collapse
// detection.

#include "ngrc/training.hpp"
#include "ngrc/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ngrc {

enum class CollapseKind { divergence, voltage_collapse, extinction };

std::string to_string(CollapseKind kind);
CollapseKind collapse_kind_from_string(const std::string& name);

/// Threshold rule: collapse once an observable stays below `threshold`
/// for `sustain_steps` consecutive samples.
struct SustainedRule {
    int observable = 0;
    double threshold = 0.0;
    int sustain_steps = 200;
    CollapseKind kind = CollapseKind::voltage_collapse;
};

struct CollapseRules {
    double divergence_bound = kDivergenceBound;
    std::optional<SustainedRule> sustained;
};

/// Load voltage dropping below 0.05 for 200 steps, or divergence.
CollapseRules power_system_collapse_rules();
/// Predator density extinguished below 1e-6 for 200 steps, or divergence.
CollapseRules food_chain_collapse_rules();

struct CollapseEvent {
    std::size_t step = 0;  // first offending step (divergence) or first step
                           // of the sustained run
    CollapseKind kind = CollapseKind::divergence;
};

/// Incremental collapse detection; feed states in order.
class CollapseMonitor {
public:
    explicit CollapseMonitor(const CollapseRules& rules) : rules_(rules) {}

    /// Returns the triggering event as soon as the rule fires.
    std::optional<CollapseEvent> feed(std::size_t index, const StateVector& x);

private:
    CollapseRules rules_;
    int run_length_ = 0;
};

/// First collapse event of a complete trajectory, if any.
std::optional<CollapseEvent> detect_collapse(const Trajectory& traj,
                                             const CollapseRules& rules);

struct PredictionResult {
    Trajectory trajectory;  // warm-up states plus predictions, truncated at collapse
    std::optional<CollapseEvent> collapse;
};

/// Per-step bifurcation parameter values, resolved to an explicit array.
struct ParameterSchedule {
    std::vector<double> thetas;

    static ParameterSchedule constant(double theta, std::size_t n_steps);
    static ParameterSchedule step_switch(double theta_before, double theta_after,
                                         std::size_t switch_step, std::size_t n_steps);
    static ParameterSchedule sine_plus_linear(double base, double amplitude,
                                              double period_steps, double slope_per_step,
                                              std::size_t n_steps);
    static ParameterSchedule explicit_values(std::vector<double> values);
};

/// One-step prediction x_{i+1} = x_i + W_out r(x_i, theta). The history spans
/// the most recent (k-1)*s+1 states, oldest first.
StateVector predict_step(std::span<const StateVector> history, const TrainedModel& model,
                         double theta);

/// Autonomous rollout for n_steps from an RK4-generated warm-up segment of at
/// least (k-1)*s+1 states. Collapse stops the run early and truncates the
/// trajectory at the event step.
PredictionResult free_run(const Trajectory& warmup, const TrainedModel& model, double theta,
                          std::size_t n_steps, const CollapseRules& rules = {});

/// Same mechanics with theta_i read from the schedule at every step.
/// Throws std::invalid_argument when the schedule is shorter than n_steps.
PredictionResult free_run_nonstationary(const Trajectory& warmup, const TrainedModel& model,
                                        const ParameterSchedule& schedule,
                                        std::size_t n_steps,
                                        const CollapseRules& rules = {});

}  // namespace ngrc
