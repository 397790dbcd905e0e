#pragma once

// Ground-truth benchmark systems: the Dobson-Chiang power system voltage
// collapse model and the McCann-Yodzis three-species food chain, plus the
// fixed-step RK4 integrator used to sample them.

#include "ngrc/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace ngrc {

struct PowerSystemParams {
    double K_pw = 0.4;
    double K_pv = 0.3;
    double K_qw = -0.03;
    double K_qv = -2.8;
    double K_qv2 = 2.1;
    double T_load = 8.5;
    double P0 = 0.6;
    double Q0 = 1.3;
    double P1 = 0.0;
    double Y0 = 3.33;
    double Ym = 5.0;
    double Pm = 1.0;
    double dm = 0.05;
    double theta0 = 0.0;
    double Em = 1.05;
    double M = 0.01464;
    double C = 3.5;
    double E0 = 1.0;
    double Q1 = 2.9895;  // bifurcation parameter: load reactive power demand

    void validate() const;  // throws std::invalid_argument on zero divisors
};

/// Thevenin-reduced source constants derived from (E0, Y0, theta0, C).
struct DerivedPowerConstants {
    double E0_prime = 0.0;
    double Y0_prime = 0.0;
    double theta0_prime = 0.0;
};

DerivedPowerConstants derived_constants(const PowerSystemParams& p);

/// Vector field of the power system model. State is (delta_m, omega, delta, V).
void power_system_deriv(const PowerSystemParams& p, const DerivedPowerConstants& dc,
                        std::span<const double> x, std::span<double> dxdt);
StateVector power_system_deriv(const StateVector& x, const PowerSystemParams& p);

struct FoodChainParams {
    double x_c = 0.4;
    double y_c = 2.009;
    double x_p = 0.08;
    double y_p = 2.876;
    double R0 = 0.16129;
    double C0 = 0.5;
    double K = 0.94;  // bifurcation parameter: resource-carrying capacity

    void validate() const;
};

/// Vector field of the food chain model. State is (R, C, P).
void food_chain_deriv(const FoodChainParams& p, std::span<const double> x,
                      std::span<double> dxdt);
StateVector food_chain_deriv(const StateVector& x, const FoodChainParams& p);

/// Type-erased autonomous vector field.
struct OdeModel {
    int dim = 0;
    std::function<void(std::span<const double>, std::span<double>)> deriv;
};

OdeModel make_ode(const PowerSystemParams& p);
OdeModel make_ode(const FoodChainParams& p);

/// A model family indexed by its bifurcation parameter.
struct ModelFamily {
    std::string name;
    int dim = 0;
    int default_observable = 0;  // component scattered in bifurcation diagrams
    StateVector default_x0;
    double default_dt = 0.0;
    std::function<OdeModel(double theta)> at;
};

ModelFamily power_system_family(PowerSystemParams base = {});
ModelFamily food_chain_family(FoodChainParams base = {});

/// Classical fourth-order Runge-Kutta update.
StateVector rk4_step(const OdeModel& model, const StateVector& x, double dt);
StateVector rk4_step(const std::function<StateVector(const StateVector&)>& deriv,
                     const StateVector& x, double dt);

struct IntegrationResult {
    Trajectory trajectory;  // holds only states that satisfied the bound
    std::optional<std::size_t> diverged_at;  // step index of the first bad state
};

/// Integrates n_steps RK4 steps from x0, halting early once a state leaves
/// the divergence bound (or turns non-finite).
IntegrationResult integrate(const OdeModel& model, const StateVector& x0, double dt,
                            std::size_t n_steps,
                            double divergence_bound = kDivergenceBound);

}  // namespace ngrc
