#include "ngrc/models.hpp"

#include <cmath>
#include <stdexcept>

namespace ngrc {

void PowerSystemParams::validate() const {
    if (M == 0.0) throw std::invalid_argument("power system: M must be nonzero");
    if (K_qw == 0.0) throw std::invalid_argument("power system: K_qw must be nonzero");
    if (K_pv == 0.0) throw std::invalid_argument("power system: K_pv must be nonzero");
    if (T_load == 0.0) throw std::invalid_argument("power system: T_load must be nonzero");
    if (Y0 == 0.0) throw std::invalid_argument("power system: Y0 must be nonzero");
}

DerivedPowerConstants derived_constants(const PowerSystemParams& p) {
    if (p.Y0 == 0.0)
        throw std::domain_error("derived_constants: Y0 must be nonzero");
    const double ratio = p.C / p.Y0;
    const double radicand = 1.0 + ratio * ratio - 2.0 * ratio * std::cos(p.theta0);
    const double factor = std::sqrt(radicand);
    if (factor == 0.0)
        throw std::domain_error("derived_constants: degenerate source reduction (zero factor)");
    DerivedPowerConstants dc;
    dc.E0_prime = p.E0 / factor;
    dc.Y0_prime = p.Y0 * factor;
    dc.theta0_prime =
        p.theta0 + std::atan((ratio * std::sin(p.theta0)) / (1.0 - ratio * std::cos(p.theta0)));
    return dc;
}

void power_system_deriv(const PowerSystemParams& p, const DerivedPowerConstants& dc,
                        std::span<const double> x, std::span<double> dxdt) {
    const double delta_m = x[0];
    const double omega = x[1];
    const double delta = x[2];
    const double V = x[3];

    const double src = dc.E0_prime * dc.Y0_prime;  // equals E0 * Y0
    const double gen = p.Em * p.Ym;
    const double sin_md = std::sin(delta_m - delta);
    const double cos_md = std::cos(delta_m - delta);

    const double P = -src * V * std::sin(delta) + gen * V * sin_md;
    const double Q = src * V * std::cos(delta) - (dc.Y0_prime + p.Ym) * V * V + gen * V * cos_md;

    dxdt[0] = omega;
    dxdt[1] = (-p.dm * omega + p.Pm - gen * sin_md * V) / p.M;
    dxdt[2] = (-p.K_qv2 * V * V - p.K_qv * V + Q - p.Q0 - p.Q1) / p.K_qw;
    dxdt[3] = (p.K_pw * p.K_qv2 * V * V + (p.K_pw * p.K_qv - p.K_qw * p.K_pv) * V +
               p.K_qw * (P - p.P0 - p.P1) - p.K_pw * (Q - p.Q0 - p.Q1)) /
              (p.T_load * p.K_qw * p.K_pv);
}

StateVector power_system_deriv(const StateVector& x, const PowerSystemParams& p) {
    p.validate();
    if (x.size() != 4)
        throw std::invalid_argument("power_system_deriv: state dimension must be 4");
    const DerivedPowerConstants dc = derived_constants(p);
    StateVector out(4);
    power_system_deriv(p, dc, x, out);
    return out;
}

void FoodChainParams::validate() const {
    if (!(K > 0.0)) throw std::invalid_argument("food chain: K must be > 0");
}

void food_chain_deriv(const FoodChainParams& p, std::span<const double> x,
                      std::span<double> dxdt) {
    const double R = x[0];
    const double C = x[1];
    const double P = x[2];
    const double fr = p.y_c * R / (R + p.R0);  // consumer functional response
    const double fc = p.y_p * C / (C + p.C0);  // predator functional response
    dxdt[0] = R * (1.0 - R / p.K) - p.x_c * C * fr;
    dxdt[1] = p.x_c * C * (fr - 1.0) - p.x_p * P * fc;
    dxdt[2] = p.x_p * P * (fc - 1.0);
}

StateVector food_chain_deriv(const StateVector& x, const FoodChainParams& p) {
    p.validate();
    if (x.size() != 3)
        throw std::invalid_argument("food_chain_deriv: state dimension must be 3");
    StateVector out(3);
    food_chain_deriv(p, x, out);
    return out;
}

OdeModel make_ode(const PowerSystemParams& p) {
    p.validate();
    const DerivedPowerConstants dc = derived_constants(p);
    OdeModel m;
    m.dim = 4;
    m.deriv = [p, dc](std::span<const double> x, std::span<double> out) {
        power_system_deriv(p, dc, x, out);
    };
    return m;
}

OdeModel make_ode(const FoodChainParams& p) {
    p.validate();
    OdeModel m;
    m.dim = 3;
    m.deriv = [p](std::span<const double> x, std::span<double> out) {
        food_chain_deriv(p, x, out);
    };
    return m;
}

ModelFamily power_system_family(PowerSystemParams base) {
    base.validate();
    ModelFamily f;
    f.name = "power_system";
    f.dim = 4;
    f.default_observable = 3;  // load voltage V
    f.default_x0 = {0.17, 0.05, 0.05, 0.83};
    f.default_dt = 0.05;
    f.at = [base](double theta) {
        PowerSystemParams p = base;
        p.Q1 = theta;
        return make_ode(p);
    };
    return f;
}

ModelFamily food_chain_family(FoodChainParams base) {
    ModelFamily f;
    f.name = "food_chain";
    f.dim = 3;
    f.default_observable = 2;  // predator density P
    f.default_x0 = {0.6, 0.35, 0.9};
    f.default_dt = 0.1;
    f.at = [base](double theta) {
        FoodChainParams p = base;
        p.K = theta;
        p.validate();
        return make_ode(p);
    };
    return f;
}

namespace {

// One RK4 update with caller-provided scratch; x and out may not alias.
void rk4_into(const OdeModel& model, std::span<const double> x, double dt,
              std::span<double> out, std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t d = x.size();
    model.deriv(x, k1);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    model.deriv(tmp, k2);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    model.deriv(tmp, k3);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + dt * k3[i];
    model.deriv(tmp, k4);
    for (std::size_t i = 0; i < d; ++i)
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

StateVector rk4_step(const OdeModel& model, const StateVector& x, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
    if (static_cast<int>(x.size()) != model.dim)
        throw std::invalid_argument("rk4_step: state dimension mismatch");
    const std::size_t d = x.size();
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    StateVector out(d);
    rk4_into(model, x, dt, out, k1, k2, k3, k4, tmp);
    return out;
}

StateVector rk4_step(const std::function<StateVector(const StateVector&)>& deriv,
                     const StateVector& x, double dt) {
    OdeModel m;
    m.dim = static_cast<int>(x.size());
    m.deriv = [&deriv](std::span<const double> xs, std::span<double> out) {
        const StateVector xv(xs.begin(), xs.end());
        const StateVector d = deriv(xv);
        for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i];
    };
    return rk4_step(m, x, dt);
}

IntegrationResult integrate(const OdeModel& model, const StateVector& x0, double dt,
                            std::size_t n_steps, double divergence_bound) {
    if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (static_cast<int>(x0.size()) != model.dim)
        throw std::invalid_argument("integrate: x0 dimension mismatch");

    IntegrationResult res;
    res.trajectory.dt = dt;
    res.trajectory.t0 = 0.0;
    res.trajectory.states.reserve(n_steps + 1);
    res.trajectory.states.push_back(x0);

    const std::size_t d = x0.size();
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    StateVector x = x0;
    StateVector next(d);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        rk4_into(model, x, dt, next, k1, k2, k3, k4, tmp);
        if (!within_bound(next, divergence_bound)) {
            res.diverged_at = step;
            return res;
        }
        res.trajectory.states.push_back(next);
        x = next;
    }
    return res;
}

}  // namespace ngrc
