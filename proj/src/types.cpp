#include "ngrc/types.hpp"

#include <cmath>
#include <stdexcept>

namespace ngrc {

bool is_finite_state(const StateVector& x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool within_bound(const StateVector& x, double bound) {
    for (double v : x) {
        if (!std::isfinite(v) || std::abs(v) > bound) return false;
    }
    return true;
}

std::vector<double> Trajectory::component(std::size_t index) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.at(index));
    return out;
}

void Trajectory::validate() const {
    if (states.empty()) throw std::invalid_argument("trajectory: empty");
    if (!(dt > 0.0)) throw std::invalid_argument("trajectory: dt must be > 0");
    const std::size_t d = states.front().size();
    for (const auto& s : states) {
        if (s.size() != d)
            throw std::invalid_argument("trajectory: inconsistent state dimension");
    }
}

}  // namespace ngrc
