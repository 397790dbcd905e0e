#include "ngrc/config.hpp"

#include "ngrc/errors.hpp"
#include "ngrc/io.hpp"
#include "ngrc/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

namespace ngrc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
    }
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "required");
    if (!v->is_number()) fail(path + "." + key, "must be a number");
    return v->get<double>();
}

double get_number_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(path + "." + key, "must be a number");
    return v->get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "required");
    if (!v->is_number_integer()) fail(path + "." + key, "must be an integer");
    return v->get<std::int64_t>();
}

std::int64_t get_integer_or(const json& obj, const std::string& path, const std::string& key,
                            std::int64_t fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(path + "." + key, "must be an integer");
    return v->get<std::int64_t>();
}

bool get_bool_or(const json& obj, const std::string& path, const std::string& key,
                 bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(path + "." + key, "must be a boolean");
    return v->get<bool>();
}

std::vector<double> get_double_list(const json& obj, const std::string& path,
                                    const std::string& key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "required");
    if (!v->is_array() || v->empty()) fail(path + "." + key, "must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) fail(path + "." + key, "must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> get_int_list(const json& obj, const std::string& path,
                              const std::string& key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "required");
    if (!v->is_array() || v->empty()) fail(path + "." + key, "must be a non-empty array");
    std::vector<int> out;
    for (const auto& e : *v) {
        if (!e.is_number_integer()) fail(path + "." + key, "must contain only integers");
        out.push_back(e.get<int>());
    }
    return out;
}

void apply_power_override(PowerSystemParams& p, const std::string& key, double value,
                          const std::string& path) {
    if (key == "K_pw") p.K_pw = value;
    else if (key == "K_pv") p.K_pv = value;
    else if (key == "K_qw") p.K_qw = value;
    else if (key == "K_qv") p.K_qv = value;
    else if (key == "K_qv2") p.K_qv2 = value;
    else if (key == "T_load") p.T_load = value;
    else if (key == "P0") p.P0 = value;
    else if (key == "Q0") p.Q0 = value;
    else if (key == "P1") p.P1 = value;
    else if (key == "Y0") p.Y0 = value;
    else if (key == "Ym") p.Ym = value;
    else if (key == "Pm") p.Pm = value;
    else if (key == "dm") p.dm = value;
    else if (key == "theta0") p.theta0 = value;
    else if (key == "Em") p.Em = value;
    else if (key == "M") p.M = value;
    else if (key == "C") p.C = value;
    else if (key == "E0") p.E0 = value;
    else if (key == "Q1") p.Q1 = value;
    else fail(path + "." + key, "unknown power system parameter");
}

void apply_food_override(FoodChainParams& p, const std::string& key, double value,
                         const std::string& path) {
    if (key == "x_c") p.x_c = value;
    else if (key == "y_c") p.y_c = value;
    else if (key == "x_p") p.x_p = value;
    else if (key == "y_p") p.y_p = value;
    else if (key == "R0") p.R0 = value;
    else if (key == "C0") p.C0 = value;
    else if (key == "K") p.K = value;
    else fail(path + "." + key, "unknown food chain parameter");
}

GridConfig parse_grid(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "must be an object");
    GridConfig grid;
    if (find(obj, "values")) {
        reject_unknown(obj, path, {"values"});
        grid.values = get_double_list(obj, path, "values");
    } else {
        reject_unknown(obj, path, {"start", "stop", "step"});
        grid.start = get_number(obj, path, "start");
        grid.stop = get_number(obj, path, "stop");
        grid.step = get_number(obj, path, "step");
        if (!(*grid.step > 0.0)) fail(path + ".step", "must be > 0");
        if (*grid.stop < *grid.start) fail(path + ".stop", "must be >= start");
    }
    return grid;
}

}  // namespace

std::vector<double> GridConfig::resolve() const {
    if (!values.empty()) {
        std::vector<double> out = values;
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<double> out;
    const double s = *start, e = *stop, h = *step;
    for (std::size_t i = 0;; ++i) {
        const double v = s + static_cast<double>(i) * h;
        if (v > e + 0.5 * h) break;
        out.push_back(v);
    }
    return out;
}

ParameterSchedule ScheduleConfig::resolve() const {
    if (kind == "constant") return ParameterSchedule::constant(theta, n_steps);
    if (kind == "step")
        return ParameterSchedule::step_switch(theta_before, theta_after, switch_step, n_steps);
    if (kind == "sine_plus_linear")
        return ParameterSchedule::sine_plus_linear(base, amplitude, period_steps,
                                                   slope_per_step, n_steps);
    if (kind == "explicit") return ParameterSchedule::explicit_values(values);
    throw ConfigError("schedule.kind: unknown kind '" + kind + "'");
}

ModelFamily ExperimentConfig::family() const {
    if (model_kind == "power_system") return power_system_family(power_params);
    return food_chain_family(food_params);
}

int ExperimentConfig::dimension() const { return model_kind == "power_system" ? 4 : 3; }

ExperimentConfig config_from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(root, "config",
                   {"model", "generation", "ngrc", "training", "prediction", "lyapunov",
                    "collapse", "gamma_sweep", "schedule", "output_dir"});

    ExperimentConfig cfg;

    // model
    const json* jm = find(root, "model");
    if (!jm) fail("config.model", "required");
    reject_unknown(*jm, "model", {"kind", "params"});
    const json* kind = find(*jm, "kind");
    if (!kind || !kind->is_string()) fail("model.kind", "required string");
    cfg.model_kind = kind->get<std::string>();
    if (cfg.model_kind != "power_system" && cfg.model_kind != "food_chain")
        fail("model.kind", "must be 'power_system' or 'food_chain'");
    if (const json* jp = find(*jm, "params")) {
        if (!jp->is_object()) fail("model.params", "must be an object");
        for (auto it = jp->begin(); it != jp->end(); ++it) {
            if (!it.value().is_number()) fail("model.params." + it.key(), "must be a number");
            if (cfg.model_kind == "power_system")
                apply_power_override(cfg.power_params, it.key(), it.value().get<double>(),
                                     "model.params");
            else
                apply_food_override(cfg.food_params, it.key(), it.value().get<double>(),
                                    "model.params");
        }
    }
    const ModelFamily fam = cfg.family();

    // generation
    const json* jg = find(root, "generation");
    if (!jg) fail("config.generation", "required");
    reject_unknown(*jg, "generation",
                   {"x0", "dt", "n_steps", "transient_discard", "observable",
                    "ground_truth_diagram"});
    cfg.generation.x0 = fam.default_x0;
    if (find(*jg, "x0")) cfg.generation.x0 = get_double_list(*jg, "generation", "x0");
    if (cfg.generation.x0.size() != static_cast<std::size_t>(fam.dim))
        fail("generation.x0", "length must match the model dimension");
    cfg.generation.dt = get_number_or(*jg, "generation", "dt", fam.default_dt);
    if (!(cfg.generation.dt > 0.0)) fail("generation.dt", "must be > 0");
    const std::int64_t n_steps = get_integer(*jg, "generation", "n_steps");
    if (n_steps < 1) fail("generation.n_steps", "must be >= 1");
    cfg.generation.n_steps = static_cast<std::size_t>(n_steps);
    cfg.generation.transient_discard =
        get_number_or(*jg, "generation", "transient_discard", 0.3);
    if (cfg.generation.transient_discard < 0.0 || cfg.generation.transient_discard >= 1.0)
        fail("generation.transient_discard", "must be in [0, 1)");
    cfg.generation.observable = static_cast<int>(
        get_integer_or(*jg, "generation", "observable", fam.default_observable));
    if (cfg.generation.observable < 0 || cfg.generation.observable >= fam.dim)
        fail("generation.observable", "out of range");
    cfg.generation.ground_truth_diagram =
        get_bool_or(*jg, "generation", "ground_truth_diagram", false);

    // ngrc: absent fields fall back to the model's reference architecture
    if (cfg.model_kind == "power_system") {
        cfg.ngrc.k = 2;
        cfg.ngrc.s = 2;
        cfg.ngrc.orders = {1, 2, 3};
        cfg.ngrc.state_orders = {0, 1, 2, 3};
        cfg.ngrc.beta = 1e-8;
        cfg.ngrc.gamma = 0.6;
    } else {
        cfg.ngrc.k = 4;
        cfg.ngrc.s = 4;
        cfg.ngrc.orders = {1, 2};
        cfg.ngrc.state_orders = {0, 1, 2, 3};
        cfg.ngrc.beta = 1e-3;
        cfg.ngrc.gamma = 0.4;
    }
    cfg.ngrc.d = fam.dim;
    if (const json* jn = find(root, "ngrc")) {
        reject_unknown(*jn, "ngrc", {"k", "s", "orders", "state_orders", "beta", "gamma"});
        cfg.ngrc.k = static_cast<int>(get_integer_or(*jn, "ngrc", "k", cfg.ngrc.k));
        cfg.ngrc.s = static_cast<int>(get_integer_or(*jn, "ngrc", "s", cfg.ngrc.s));
        if (find(*jn, "orders")) cfg.ngrc.orders = get_int_list(*jn, "ngrc", "orders");
        if (find(*jn, "state_orders"))
            cfg.ngrc.state_orders = get_int_list(*jn, "ngrc", "state_orders");
        cfg.ngrc.beta = get_number_or(*jn, "ngrc", "beta", cfg.ngrc.beta);
        cfg.ngrc.gamma = get_number_or(*jn, "ngrc", "gamma", cfg.ngrc.gamma);
    }
    try {
        cfg.ngrc.validate();
    } catch (const std::invalid_argument& e) {
        fail("ngrc", e.what());
    }

    // training
    const json* jt = find(root, "training");
    if (!jt) fail("config.training", "required");
    reject_unknown(*jt, "training", {"thetas"});
    cfg.training_thetas = get_double_list(*jt, "training", "thetas");

    // prediction (optional)
    if (const json* jp = find(root, "prediction")) {
        reject_unknown(*jp, "prediction", {"grid", "n_steps", "compute_lyapunov"});
        PredictionConfig pred;
        const json* jgrid = find(*jp, "grid");
        if (!jgrid) fail("prediction.grid", "required");
        pred.grid = parse_grid(*jgrid, "prediction.grid");
        const std::int64_t pn = get_integer_or(*jp, "prediction", "n_steps",
                                               static_cast<std::int64_t>(cfg.generation.n_steps));
        if (pn < 1) fail("prediction.n_steps", "must be >= 1");
        pred.n_steps = static_cast<std::size_t>(pn);
        pred.compute_lyapunov = get_bool_or(*jp, "prediction", "compute_lyapunov", true);
        cfg.prediction = std::move(pred);
    }

    // lyapunov estimator parameters (optional)
    if (const json* jl = find(root, "lyapunov")) {
        reject_unknown(*jl, "lyapunov",
                       {"embed_dim", "delay", "delay_cap", "theiler", "fit_begin", "fit_end"});
        cfg.lyapunov.embed_dim =
            static_cast<int>(get_integer_or(*jl, "lyapunov", "embed_dim", 5));
        cfg.lyapunov.delay = static_cast<int>(get_integer_or(*jl, "lyapunov", "delay", 0));
        cfg.lyapunov.delay_cap =
            static_cast<int>(get_integer_or(*jl, "lyapunov", "delay_cap", 50));
        cfg.lyapunov.theiler = static_cast<int>(get_integer_or(*jl, "lyapunov", "theiler", 0));
        cfg.lyapunov.fit_begin =
            static_cast<int>(get_integer_or(*jl, "lyapunov", "fit_begin", 5));
        cfg.lyapunov.fit_end = static_cast<int>(get_integer_or(*jl, "lyapunov", "fit_end", 50));
        if (cfg.lyapunov.embed_dim < 2) fail("lyapunov.embed_dim", "must be >= 2");
        if (cfg.lyapunov.fit_begin < 1) fail("lyapunov.fit_begin", "must be >= 1");
        if (cfg.lyapunov.fit_end <= cfg.lyapunov.fit_begin)
            fail("lyapunov.fit_end", "must be > fit_begin");
    }

    // collapse rules (optional, model defaults otherwise)
    cfg.collapse = cfg.model_kind == "power_system" ? power_system_collapse_rules()
                                                    : food_chain_collapse_rules();
    if (const json* jc = find(root, "collapse")) {
        reject_unknown(*jc, "collapse",
                       {"observable", "threshold", "sustain_steps", "kind",
                        "divergence_bound"});
        SustainedRule rule = *cfg.collapse.sustained;
        rule.observable =
            static_cast<int>(get_integer_or(*jc, "collapse", "observable", rule.observable));
        if (rule.observable < 0 || rule.observable >= fam.dim)
            fail("collapse.observable", "out of range");
        rule.threshold = get_number_or(*jc, "collapse", "threshold", rule.threshold);
        rule.sustain_steps = static_cast<int>(
            get_integer_or(*jc, "collapse", "sustain_steps", rule.sustain_steps));
        if (rule.sustain_steps < 1) fail("collapse.sustain_steps", "must be >= 1");
        if (const json* jk = find(*jc, "kind")) {
            if (!jk->is_string()) fail("collapse.kind", "must be a string");
            try {
                rule.kind = collapse_kind_from_string(jk->get<std::string>());
            } catch (const std::invalid_argument& e) {
                fail("collapse.kind", e.what());
            }
        }
        cfg.collapse.sustained = rule;
        cfg.collapse.divergence_bound =
            get_number_or(*jc, "collapse", "divergence_bound", cfg.collapse.divergence_bound);
        if (!(cfg.collapse.divergence_bound > 0.0))
            fail("collapse.divergence_bound", "must be > 0");
    }

    // gamma sweep (optional)
    if (const json* js = find(root, "gamma_sweep")) {
        reject_unknown(*js, "gamma_sweep", {"gammas"});
        cfg.sweep_gammas = get_double_list(*js, "gamma_sweep", "gammas");
    }

    // schedule (optional)
    if (const json* js = find(root, "schedule")) {
        reject_unknown(*js, "schedule",
                       {"kind", "theta", "theta_before", "theta_after", "switch_step", "base",
                        "amplitude", "period_steps", "slope_per_step", "values", "n_steps"});
        ScheduleConfig sched;
        const json* jk = find(*js, "kind");
        if (!jk || !jk->is_string()) fail("schedule.kind", "required string");
        sched.kind = jk->get<std::string>();
        if (sched.kind == "constant") {
            sched.theta = get_number(*js, "schedule", "theta");
        } else if (sched.kind == "step") {
            sched.theta_before = get_number(*js, "schedule", "theta_before");
            sched.theta_after = get_number(*js, "schedule", "theta_after");
            sched.switch_step =
                static_cast<std::size_t>(get_integer(*js, "schedule", "switch_step"));
        } else if (sched.kind == "sine_plus_linear") {
            sched.base = get_number(*js, "schedule", "base");
            sched.amplitude = get_number(*js, "schedule", "amplitude");
            sched.period_steps = get_number(*js, "schedule", "period_steps");
            if (!(sched.period_steps > 0.0)) fail("schedule.period_steps", "must be > 0");
            sched.slope_per_step = get_number_or(*js, "schedule", "slope_per_step", 0.0);
        } else if (sched.kind == "explicit") {
            sched.values = get_double_list(*js, "schedule", "values");
        } else {
            fail("schedule.kind", "unknown kind '" + sched.kind + "'");
        }
        if (sched.kind != "explicit") {
            const std::int64_t sn = get_integer(*js, "schedule", "n_steps");
            if (sn < 1) fail("schedule.n_steps", "must be >= 1");
            sched.n_steps = static_cast<std::size_t>(sn);
        } else {
            sched.n_steps = sched.values.size();
        }
        cfg.schedule = std::move(sched);
    }

    if (const json* jo = find(root, "output_dir")) {
        if (!jo->is_string()) fail("output_dir", "must be a string");
        cfg.output_dir = jo->get<std::string>();
    }

    return cfg;
}

namespace {

json grid_to_json(const GridConfig& grid) {
    json j;
    if (!grid.values.empty()) {
        j["values"] = grid.values;
    } else {
        j["start"] = *grid.start;
        j["stop"] = *grid.stop;
        j["step"] = *grid.step;
    }
    return j;
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    json params = json::object();
    if (cfg.model_kind == "power_system") {
        const PowerSystemParams& p = cfg.power_params;
        params = {{"K_pw", p.K_pw}, {"K_pv", p.K_pv},   {"K_qw", p.K_qw},
                  {"K_qv", p.K_qv}, {"K_qv2", p.K_qv2}, {"T_load", p.T_load},
                  {"P0", p.P0},     {"Q0", p.Q0},       {"P1", p.P1},
                  {"Y0", p.Y0},     {"Ym", p.Ym},       {"Pm", p.Pm},
                  {"dm", p.dm},     {"theta0", p.theta0}, {"Em", p.Em},
                  {"M", p.M},       {"C", p.C},         {"E0", p.E0},
                  {"Q1", p.Q1}};
    } else {
        const FoodChainParams& p = cfg.food_params;
        params = {{"x_c", p.x_c}, {"y_c", p.y_c}, {"x_p", p.x_p},
                  {"y_p", p.y_p}, {"R0", p.R0},   {"C0", p.C0},
                  {"K", p.K}};
    }
    j["model"] = {{"kind", cfg.model_kind}, {"params", std::move(params)}};
    j["generation"] = {{"x0", cfg.generation.x0},
                       {"dt", cfg.generation.dt},
                       {"n_steps", cfg.generation.n_steps},
                       {"transient_discard", cfg.generation.transient_discard},
                       {"observable", cfg.generation.observable},
                       {"ground_truth_diagram", cfg.generation.ground_truth_diagram}};
    j["ngrc"] = {{"k", cfg.ngrc.k},
                 {"s", cfg.ngrc.s},
                 {"orders", cfg.ngrc.orders},
                 {"state_orders", cfg.ngrc.state_orders},
                 {"beta", cfg.ngrc.beta},
                 {"gamma", cfg.ngrc.gamma}};
    j["training"] = {{"thetas", cfg.training_thetas}};
    if (cfg.prediction) {
        j["prediction"] = {{"grid", grid_to_json(cfg.prediction->grid)},
                           {"n_steps", cfg.prediction->n_steps},
                           {"compute_lyapunov", cfg.prediction->compute_lyapunov}};
    }
    j["lyapunov"] = {{"embed_dim", cfg.lyapunov.embed_dim},
                     {"delay", cfg.lyapunov.delay},
                     {"delay_cap", cfg.lyapunov.delay_cap},
                     {"theiler", cfg.lyapunov.theiler},
                     {"fit_begin", cfg.lyapunov.fit_begin},
                     {"fit_end", cfg.lyapunov.fit_end}};
    if (cfg.collapse.sustained) {
        const SustainedRule& r = *cfg.collapse.sustained;
        j["collapse"] = {{"observable", r.observable},
                         {"threshold", r.threshold},
                         {"sustain_steps", r.sustain_steps},
                         {"kind", to_string(r.kind)},
                         {"divergence_bound", cfg.collapse.divergence_bound}};
    }
    if (!cfg.sweep_gammas.empty()) j["gamma_sweep"] = {{"gammas", cfg.sweep_gammas}};
    if (cfg.schedule) {
        const ScheduleConfig& s = *cfg.schedule;
        json js{{"kind", s.kind}};
        if (s.kind == "constant") {
            js["theta"] = s.theta;
        } else if (s.kind == "step") {
            js["theta_before"] = s.theta_before;
            js["theta_after"] = s.theta_after;
            js["switch_step"] = s.switch_step;
        } else if (s.kind == "sine_plus_linear") {
            js["base"] = s.base;
            js["amplitude"] = s.amplitude;
            js["period_steps"] = s.period_steps;
            js["slope_per_step"] = s.slope_per_step;
        } else {
            js["values"] = s.values;
        }
        if (s.kind != "explicit") js["n_steps"] = s.n_steps;
        j["schedule"] = std::move(js);
    }
    j["output_dir"] = cfg.output_dir;
    return j;
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    return config_to_json(*this) == config_to_json(other);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json j;
    try {
        j = read_json(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j);
}

std::string experiment_hash(const ExperimentConfig& config) {
    return fnv1a_hex(config_to_json(config).dump());
}

}  // namespace ngrc
