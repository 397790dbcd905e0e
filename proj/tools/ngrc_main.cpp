// Command-line front end: data generation, training, prediction, bifurcation
// reconstruction, non-stationary simulation, gamma sweeps and Lyapunov
// estimation. Numeric data goes to files; stdout carries a small JSON
// artifact manifest per command; progress lines go to stderr.

#include "ngrc/analysis.hpp"
#include "ngrc/config.hpp"
#include "ngrc/errors.hpp"
#include "ngrc/io.hpp"
#include "ngrc/models.hpp"
#include "ngrc/predictor.hpp"
#include "ngrc/training.hpp"
#include "ngrc/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ngrc;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;  // empty: use config.output_dir
    int threads = 0;      // 0: hardware concurrency
    unsigned seed = 0;    // accepted for interface compatibility; unused,
                          // the pipeline is deterministic
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: config output_dir)");
    cmd->add_option("--threads", args.threads, "worker threads for grid evaluation");
    cmd->add_option("--seed", args.seed,
                    "accepted and ignored; the pipeline is deterministic");
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

fs::path resolve_out(const CommonArgs& args, const ExperimentConfig& cfg) {
    return args.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(args.out_dir);
}

void emit_artifacts(const std::vector<fs::path>& paths) {
    json j;
    j["artifacts"] = json::array();
    for (const auto& p : paths) j["artifacts"].push_back(p.string());
    std::cout << j.dump() << '\n';
}

DiagramSettings diagram_settings(const ExperimentConfig& cfg, int threads) {
    if (!cfg.prediction) throw ConfigError("prediction: required for this command");
    DiagramSettings s;
    s.grid = cfg.prediction->grid.resolve();
    s.x0 = cfg.generation.x0;
    s.dt = cfg.generation.dt;
    s.n_steps = cfg.prediction->n_steps;
    s.transient_discard = cfg.generation.transient_discard;
    s.observable = cfg.generation.observable;
    s.compute_lyapunov = cfg.prediction->compute_lyapunov;
    s.lyapunov = cfg.lyapunov;
    s.collapse = cfg.collapse;
    s.threads = threads;
    return s;
}

std::string theta_file_tag(double theta) {
    std::string tag = format_double(theta);
    for (char& c : tag)
        if (c == '.' || c == '+' || c == '-') c = '_';
    return tag;
}

Trajectory generate_sample(const ExperimentConfig& cfg, double theta) {
    const ModelFamily fam = cfg.family();
    IntegrationResult res = integrate(fam.at(theta), cfg.generation.x0, cfg.generation.dt,
                                      cfg.generation.n_steps,
                                      cfg.collapse.divergence_bound);
    if (res.diverged_at)
        throw NumericError("trajectory at theta = " + format_double(theta) +
                           " diverged at step " + std::to_string(*res.diverged_at));
    return std::move(res.trajectory);
}

Trajectory rk4_warmup(const ExperimentConfig& cfg, const TrainedModel& model, double theta) {
    const ModelFamily fam = cfg.family();
    const std::size_t steps = std::max<std::size_t>(model.config.warmup(), 1);
    IntegrationResult res = integrate(fam.at(theta), cfg.generation.x0, cfg.generation.dt,
                                      steps, cfg.collapse.divergence_bound);
    if (res.diverged_at)
        throw NumericError("warm-up at theta = " + format_double(theta) +
                           " diverged at step " + std::to_string(*res.diverged_at));
    return std::move(res.trajectory);
}

// ---------------------------------------------------------------------------

int cmd_generate(const CommonArgs& args) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    const fs::path out = resolve_out(args, cfg);
    const int threads = resolve_threads(args.threads);

    json manifest;
    manifest["model"] = cfg.model_kind;
    manifest["settings_hash"] = experiment_hash(cfg);
    manifest["dt"] = cfg.generation.dt;
    manifest["n_steps"] = cfg.generation.n_steps;
    manifest["x0"] = cfg.generation.x0;
    json samples = json::array();

    std::vector<fs::path> artifacts;
    for (std::size_t i = 0; i < cfg.training_thetas.size(); ++i) {
        const double theta = cfg.training_thetas[i];
        std::cerr << "generate: training sample " << (i + 1) << "/"
                  << cfg.training_thetas.size() << " at theta = " << format_double(theta)
                  << '\n';
        const Trajectory traj = generate_sample(cfg, theta);
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%02zu", i);
        const std::string name =
            "train_" + std::string(idx) + "_theta_" + theta_file_tag(theta) + ".csv";
        write_trajectory_csv(out / name, traj);
        samples.push_back({{"theta", theta}, {"path", name}, {"points", traj.size()}});
        artifacts.push_back(out / name);
    }
    manifest["samples"] = std::move(samples);

    if (cfg.generation.ground_truth_diagram) {
        const DiagramSettings settings = diagram_settings(cfg, threads);
        std::cerr << "generate: ground-truth diagram over " << settings.grid.size()
                  << " grid points\n";
        const BifurcationDiagram diagram =
            ground_truth_bifurcation(cfg.family(), settings);
        write_diagram_scatter_csv(out / "gt_scatter.csv", diagram);
        write_diagram_summary_csv(out / "gt_summary.csv", diagram);
        manifest["ground_truth"] = {{"scatter", "gt_scatter.csv"},
                                    {"summary", "gt_summary.csv"}};
        artifacts.push_back(out / "gt_scatter.csv");
        artifacts.push_back(out / "gt_summary.csv");
    }

    write_json(out / "manifest.json", manifest);
    artifacts.push_back(out / "manifest.json");
    emit_artifacts(artifacts);
    return 0;
}

TrainingSet load_training_set(const ExperimentConfig& cfg, const fs::path& data_dir) {
    const json manifest = read_json(data_dir / "manifest.json");
    if (manifest.at("model").get<std::string>() != cfg.model_kind)
        throw DataError("data manifest model kind does not match the config");
    TrainingSet set;
    for (const auto& sample : manifest.at("samples")) {
        TrainingSample ts;
        ts.theta = sample.at("theta").get<double>();
        ts.trajectory = read_trajectory_csv(data_dir / sample.at("path").get<std::string>());
        set.samples.push_back(std::move(ts));
    }
    if (set.samples.empty()) throw DataError("data manifest lists no samples");
    return set;
}

int cmd_train(const CommonArgs& args, const std::string& data_dir) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    const fs::path out = resolve_out(args, cfg);
    const TrainingSet set = load_training_set(cfg, data_dir);

    const TrainedModel model = train_model(set, cfg.ngrc, cfg.model_kind);
    std::cerr << "train: feature dimension = " << model.features.dim()
              << ", training columns = " << model.readout.descriptor.columns << '\n';

    TrainedModel annotated = model;
    annotated.readout.descriptor.x0 = cfg.generation.x0;
    save_model(out / "model.json", annotated);
    write_monomial_table_csv(out / "monomials.csv", annotated.features.table());
    emit_artifacts({out / "model.json", out / "monomials.csv"});
    return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& model_path, double theta,
                std::int64_t steps_override) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    const fs::path out = resolve_out(args, cfg);
    const TrainedModel model = load_model(model_path);

    std::size_t n_steps = cfg.generation.n_steps;
    if (cfg.prediction) n_steps = cfg.prediction->n_steps;
    if (steps_override > 0) n_steps = static_cast<std::size_t>(steps_override);

    const Trajectory warm = rk4_warmup(cfg, model, theta);
    const PredictionResult run = free_run(warm, model, theta, n_steps, cfg.collapse);

    const std::string name = "prediction_theta_" + theta_file_tag(theta) + ".csv";
    write_trajectory_csv(out / name, run.trajectory);
    std::vector<fs::path> artifacts{out / name};
    if (run.collapse) {
        const std::string side = "prediction_theta_" + theta_file_tag(theta) + "_collapse.json";
        write_json(out / side,
                   collapse_to_json(*run.collapse, run.trajectory.dt, run.trajectory.t0));
        artifacts.push_back(out / side);
        std::cerr << "predict: collapse (" << to_string(run.collapse->kind) << ") at step "
                  << run.collapse->step << '\n';
    }
    emit_artifacts(artifacts);
    return 0;
}

json tipping_to_json(const std::vector<TippingPoint>& points) {
    json arr = json::array();
    for (const auto& t : points) {
        arr.push_back({{"theta", t.theta},
                       {"kind", t.kind == TippingPoint::Kind::collapse_onset
                                    ? "collapse"
                                    : "scatter-jump"}});
    }
    return arr;
}

int cmd_bifurcation(const CommonArgs& args, const std::string& model_path,
                    bool with_ground_truth) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    const fs::path out = resolve_out(args, cfg);
    const int threads = resolve_threads(args.threads);
    const TrainedModel model = load_model(model_path);
    const DiagramSettings settings = diagram_settings(cfg, threads);

    std::cerr << "bifurcation: reconstructing " << settings.grid.size() << " grid points\n";
    const BifurcationDiagram predicted =
        reconstruct_bifurcation(model, cfg.family(), settings);
    write_diagram_scatter_csv(out / "predicted_scatter.csv", predicted);
    write_diagram_summary_csv(out / "predicted_summary.csv", predicted);
    write_json(out / "predicted_tipping.json", tipping_to_json(find_tipping(predicted)));

    std::vector<fs::path> artifacts{out / "predicted_scatter.csv",
                                    out / "predicted_summary.csv",
                                    out / "predicted_tipping.json"};
    if (with_ground_truth) {
        std::cerr << "bifurcation: ground-truth overlay\n";
        const BifurcationDiagram truth = ground_truth_bifurcation(cfg.family(), settings);
        write_diagram_scatter_csv(out / "gt_scatter.csv", truth);
        write_diagram_summary_csv(out / "gt_summary.csv", truth);
        write_json(out / "gt_tipping.json", tipping_to_json(find_tipping(truth)));
        artifacts.insert(artifacts.end(),
                         {out / "gt_scatter.csv", out / "gt_summary.csv",
                          out / "gt_tipping.json"});
    }
    emit_artifacts(artifacts);
    return 0;
}

int cmd_nonstationary(const CommonArgs& args, const std::string& model_path) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (!cfg.schedule) throw ConfigError("schedule: required for nonstationary runs");
    const fs::path out = resolve_out(args, cfg);
    const TrainedModel model = load_model(model_path);

    const ParameterSchedule schedule = cfg.schedule->resolve();
    const std::size_t n_steps = schedule.thetas.size();
    const Trajectory warm = rk4_warmup(cfg, model, schedule.thetas.front());
    const PredictionResult run =
        free_run_nonstationary(warm, model, schedule, n_steps, cfg.collapse);

    const std::size_t predicted = run.trajectory.size() > warm.size()
                                      ? run.trajectory.size() - warm.size()
                                      : 0;
    write_trajectory_csv(out / "nonstationary.csv", run.trajectory,
                         std::span<const double>(schedule.thetas.data(), predicted));
    std::vector<fs::path> artifacts{out / "nonstationary.csv"};
    if (run.collapse) {
        write_json(out / "nonstationary_collapse.json",
                   collapse_to_json(*run.collapse, run.trajectory.dt, run.trajectory.t0));
        artifacts.push_back(out / "nonstationary_collapse.json");
        std::cerr << "nonstationary: collapse (" << to_string(run.collapse->kind)
                  << ") at step " << run.collapse->step << '\n';
    }
    emit_artifacts(artifacts);
    return 0;
}

int cmd_gamma_sweep(const CommonArgs& args, const std::string& data_dir) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (cfg.sweep_gammas.empty())
        throw ConfigError("gamma_sweep.gammas: required for this command");
    const fs::path out = resolve_out(args, cfg);
    const int threads = resolve_threads(args.threads);
    const TrainingSet set = load_training_set(cfg, data_dir);
    const DiagramSettings settings = diagram_settings(cfg, threads);

    const GammaSweepResult sweep =
        gamma_sweep(set, cfg.ngrc, cfg.sweep_gammas, cfg.family(), settings);
    for (const auto& entry : sweep.entries)
        std::cerr << "gamma-sweep: gamma = " << format_double(entry.gamma) << " -> "
                  << (entry.all_pass ? "PASS" : "FAIL") << '\n';

    write_json(out / "gamma_sweep.json", sweep_to_json(sweep));
    write_envelope_csv(out / "lambda_envelope.csv", sweep.grid, sweep.lambda_min,
                       sweep.lambda_max);
    emit_artifacts({out / "gamma_sweep.json", out / "lambda_envelope.csv"});
    return 0;
}

int cmd_lyapunov(const CommonArgs& args, const std::string& input, int column,
                 bool use_benettin, double theta) {
    const ExperimentConfig cfg = load_experiment_config(args.config_path);
    const fs::path out = resolve_out(args, cfg);

    json j;
    if (use_benettin) {
        BenettinParams params;
        params.n_steps = cfg.generation.n_steps;
        const LyapunovEstimate est = benettin_lle(cfg.family().at(theta),
                                                  cfg.generation.x0,
                                                  cfg.generation.dt, params);
        j = {{"lambda_max", est.lambda_max}, {"method", "benettin"}, {"theta", theta}};
    } else {
        if (input.empty()) throw ConfigError("lyapunov: --input or --benettin required");
        const Trajectory traj = read_trajectory_csv(input);
        const int col = column >= 0 ? column : cfg.generation.observable;
        const std::vector<double> series = traj.component(static_cast<std::size_t>(col));
        const std::size_t discard = static_cast<std::size_t>(
            cfg.generation.transient_discard * static_cast<double>(series.size()));
        const std::span<const double> post(series.data() + discard, series.size() - discard);
        const LyapunovEstimate est = rosenstein_lle(post, traj.dt, cfg.lyapunov);
        j = {{"lambda_max", est.lambda_max},
             {"method", "rosenstein"},
             {"input", input},
             {"column", col}};
    }
    std::cerr << "lyapunov: lambda_max = " << format_double(j["lambda_max"].get<double>())
              << '\n';
    write_json(out / "lyapunov.json", j);
    emit_artifacts({out / "lyapunov.json"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter-aware next-generation reservoir computing"};
    app.require_subcommand(1);

    CommonArgs generate_args;
    CLI::App* generate = app.add_subcommand("generate", "simulate training data");
    add_common(generate, generate_args);

    CommonArgs train_args;
    std::string train_data;
    CLI::App* train = app.add_subcommand("train", "train the readout on generated data");
    add_common(train, train_args);
    train->add_option("--data", train_data, "directory containing manifest.json")->required();

    CommonArgs predict_args;
    std::string predict_model;
    double predict_theta = 0.0;
    std::int64_t predict_steps = 0;
    CLI::App* predict = app.add_subcommand("predict", "fixed-parameter free run");
    add_common(predict, predict_args);
    predict->add_option("--model", predict_model, "trained model JSON")->required();
    predict->add_option("--theta", predict_theta, "bifurcation parameter")->required();
    predict->add_option("--steps", predict_steps, "override prediction steps");

    CommonArgs bif_args;
    std::string bif_model;
    bool bif_truth = false;
    CLI::App* bifurcation =
        app.add_subcommand("bifurcation", "reconstruct the bifurcation diagram");
    add_common(bifurcation, bif_args);
    bifurcation->add_option("--model", bif_model, "trained model JSON")->required();
    bifurcation->add_flag("--ground-truth", bif_truth, "also emit the RK4 reference diagram");

    CommonArgs nonstat_args;
    std::string nonstat_model;
    CLI::App* nonstationary =
        app.add_subcommand("nonstationary", "simulate a time-varying parameter schedule");
    add_common(nonstationary, nonstat_args);
    nonstationary->add_option("--model", nonstat_model, "trained model JSON")->required();

    CommonArgs sweep_args;
    std::string sweep_data;
    CLI::App* sweep = app.add_subcommand("gamma-sweep",
                                         "train and validate across scaling parameters");
    add_common(sweep, sweep_args);
    sweep->add_option("--data", sweep_data, "directory containing manifest.json")->required();

    CommonArgs lyap_args;
    std::string lyap_input;
    int lyap_column = -1;
    bool lyap_benettin = false;
    double lyap_theta = 0.0;
    CLI::App* lyapunov = app.add_subcommand("lyapunov", "largest Lyapunov exponent");
    add_common(lyapunov, lyap_args);
    lyapunov->add_option("--input", lyap_input, "trajectory CSV (rosenstein)");
    lyapunov->add_option("--column", lyap_column, "observable column index");
    lyapunov->add_flag("--benettin", lyap_benettin, "model-based estimate instead");
    lyapunov->add_option("--theta", lyap_theta, "bifurcation parameter for --benettin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(generate_args);
        if (train->parsed()) return cmd_train(train_args, train_data);
        if (predict->parsed())
            return cmd_predict(predict_args, predict_model, predict_theta, predict_steps);
        if (bifurcation->parsed()) return cmd_bifurcation(bif_args, bif_model, bif_truth);
        if (nonstationary->parsed()) return cmd_nonstationary(nonstat_args, nonstat_model);
        if (sweep->parsed()) return cmd_gamma_sweep(sweep_args, sweep_data);
        if (lyapunov->parsed())
            return cmd_lyapunov(lyap_args, lyap_input, lyap_column, lyap_benettin, lyap_theta);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
