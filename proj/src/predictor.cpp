#include "ngrc/predictor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ngrc {

std::string to_string(CollapseKind kind) {
    switch (kind) {
        case CollapseKind::divergence: return "divergence";
        case CollapseKind::voltage_collapse: return "voltage-collapse";
        case CollapseKind::extinction: return "extinction";
    }
    return "divergence";
}

CollapseKind collapse_kind_from_string(const std::string& name) {
    if (name == "divergence") return CollapseKind::divergence;
    if (name == "voltage-collapse") return CollapseKind::voltage_collapse;
    if (name == "extinction") return CollapseKind::extinction;
    throw std::invalid_argument("unknown collapse kind: " + name);
}

CollapseRules power_system_collapse_rules() {
    CollapseRules rules;
    rules.sustained = SustainedRule{3, 0.05, 200, CollapseKind::voltage_collapse};
    return rules;
}

CollapseRules food_chain_collapse_rules() {
    CollapseRules rules;
    rules.sustained = SustainedRule{2, 1e-6, 200, CollapseKind::extinction};
    return rules;
}

std::optional<CollapseEvent> CollapseMonitor::feed(std::size_t index, const StateVector& x) {
    if (!within_bound(x, rules_.divergence_bound))
        return CollapseEvent{index, CollapseKind::divergence};
    if (rules_.sustained) {
        const SustainedRule& rule = *rules_.sustained;
        const double value = x.at(static_cast<std::size_t>(rule.observable));
        run_length_ = value < rule.threshold ? run_length_ + 1 : 0;
        if (run_length_ >= rule.sustain_steps)
            return CollapseEvent{index - static_cast<std::size_t>(rule.sustain_steps) + 1,
                                 rule.kind};
    }
    return std::nullopt;
}

std::optional<CollapseEvent> detect_collapse(const Trajectory& traj,
                                             const CollapseRules& rules) {
    CollapseMonitor monitor(rules);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (auto ev = monitor.feed(i, traj.states[i])) return ev;
    }
    return std::nullopt;
}

ParameterSchedule ParameterSchedule::constant(double theta, std::size_t n_steps) {
    ParameterSchedule s;
    s.thetas.assign(n_steps, theta);
    return s;
}

ParameterSchedule ParameterSchedule::step_switch(double theta_before, double theta_after,
                                                 std::size_t switch_step,
                                                 std::size_t n_steps) {
    ParameterSchedule s;
    s.thetas.resize(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i)
        s.thetas[i] = i < switch_step ? theta_before : theta_after;
    return s;
}

ParameterSchedule ParameterSchedule::sine_plus_linear(double base, double amplitude,
                                                      double period_steps,
                                                      double slope_per_step,
                                                      std::size_t n_steps) {
    if (!(period_steps > 0.0))
        throw std::invalid_argument("schedule: period_steps must be > 0");
    ParameterSchedule s;
    s.thetas.resize(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / period_steps;
        s.thetas[i] = base + amplitude * std::sin(phase) +
                      slope_per_step * static_cast<double>(i);
    }
    return s;
}

ParameterSchedule ParameterSchedule::explicit_values(std::vector<double> values) {
    ParameterSchedule s;
    s.thetas = std::move(values);
    return s;
}

namespace {

// Shared rollout core. thetas[i] drives prediction step i.
PredictionResult run_loop(const Trajectory& warmup, const TrainedModel& model,
                          std::span<const double> thetas, std::size_t n_steps,
                          const CollapseRules& rules) {
    warmup.validate();
    const NgrcConfig& cfg = model.config;
    const std::size_t need = cfg.warmup() + 1;
    if (warmup.size() < need)
        throw std::invalid_argument("free_run: warm-up needs at least " +
                                    std::to_string(need) + " states");
    if (warmup.dimension() != static_cast<std::size_t>(cfg.d))
        throw std::invalid_argument("free_run: warm-up dimension mismatch");
    if (thetas.size() < n_steps)
        throw std::invalid_argument("free_run: schedule shorter than requested steps");

    PredictionResult result;
    result.trajectory.dt = warmup.dt;
    result.trajectory.t0 = warmup.t0;
    auto& states = result.trajectory.states;
    states.reserve(warmup.size() + n_steps);
    states = warmup.states;

    CollapseMonitor monitor(rules);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (auto ev = monitor.feed(i, states[i])) {
            result.collapse = ev;
            states.resize(ev->step);
            return result;
        }
    }

    const std::size_t d = static_cast<std::size_t>(cfg.d);
    std::vector<double> delayed(d * static_cast<std::size_t>(cfg.k));
    std::vector<double> feat(model.features.dim());
    Eigen::Map<const Eigen::VectorXd> feat_vec(feat.data(),
                                               static_cast<Eigen::Index>(feat.size()));
    StateVector next(d);

    for (std::size_t step = 0; step < n_steps; ++step) {
        const std::size_t i = states.size() - 1;
        for (int j = 0; j < cfg.k; ++j) {
            const StateVector& x = states[i - static_cast<std::size_t>(j) * cfg.s];
            std::copy(x.begin(), x.end(), delayed.begin() + static_cast<std::size_t>(j) * d);
        }
        model.features.compute(delayed, thetas[step], feat);
        const Eigen::VectorXd increment = model.readout.w * feat_vec;
        const StateVector& curr = states[i];
        for (std::size_t c = 0; c < d; ++c) next[c] = curr[c] + increment[static_cast<Eigen::Index>(c)];

        if (auto ev = monitor.feed(i + 1, next)) {
            result.collapse = ev;
            states.resize(ev->step);
            return result;
        }
        states.push_back(next);
    }
    return result;
}

}  // namespace

StateVector predict_step(std::span<const StateVector> history, const TrainedModel& model,
                         double theta) {
    const NgrcConfig& cfg = model.config;
    const std::size_t need = cfg.warmup() + 1;
    if (history.size() < need)
        throw std::invalid_argument("predict_step: history needs at least " +
                                    std::to_string(need) + " states");
    const std::size_t d = static_cast<std::size_t>(cfg.d);
    std::vector<double> delayed(d * static_cast<std::size_t>(cfg.k));
    const std::size_t last = history.size() - 1;
    for (int j = 0; j < cfg.k; ++j) {
        const StateVector& x = history[last - static_cast<std::size_t>(j) * cfg.s];
        if (x.size() != d) throw std::invalid_argument("predict_step: state dimension mismatch");
        std::copy(x.begin(), x.end(), delayed.begin() + static_cast<std::size_t>(j) * d);
    }
    std::vector<double> feat(model.features.dim());
    model.features.compute(delayed, theta, feat);
    Eigen::Map<const Eigen::VectorXd> feat_vec(feat.data(),
                                               static_cast<Eigen::Index>(feat.size()));
    const Eigen::VectorXd increment = model.readout.w * feat_vec;
    StateVector next(d);
    for (std::size_t c = 0; c < d; ++c)
        next[c] = history[last][c] + increment[static_cast<Eigen::Index>(c)];
    return next;
}

PredictionResult free_run(const Trajectory& warmup, const TrainedModel& model, double theta,
                          std::size_t n_steps, const CollapseRules& rules) {
    const ParameterSchedule schedule = ParameterSchedule::constant(theta, n_steps);
    return run_loop(warmup, model, schedule.thetas, n_steps, rules);
}

PredictionResult free_run_nonstationary(const Trajectory& warmup, const TrainedModel& model,
                                        const ParameterSchedule& schedule,
                                        std::size_t n_steps, const CollapseRules& rules) {
    return run_loop(warmup, model, schedule.thetas, n_steps, rules);
}

}  // namespace ngrc
