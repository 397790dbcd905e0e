#pragma once

#include <cstddef>
#include <vector>

namespace ngrc {

/// One sample of a d-dimensional system state.
using StateVector = std::vector<double>;

/// Any trajectory component beyond this magnitude (or non-finite) counts as
/// diverged.
inline constexpr double kDivergenceBound = 1e6;

bool is_finite_state(const StateVector& x);
bool within_bound(const StateVector& x, double bound);

/// Uniformly sampled trajectory: states[i] is the state at t0 + i*dt.
struct Trajectory {
    std::vector<StateVector> states;
    double dt = 0.0;
    double t0 = 0.0;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }
    std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }

    /// Copy of a single component across all states.
    std::vector<double> component(std::size_t index) const;

    /// Enforces dt > 0, non-emptiness and a consistent dimension.
    void validate() const;
};

}  // namespace ngrc
