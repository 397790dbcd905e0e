#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ngrc/config.hpp"
#include "ngrc/errors.hpp"
#include "ngrc/io.hpp"
#include "ngrc/util.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace ngrc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal_config() {
    return json::parse(R"({
      "model": {"kind": "food_chain"},
      "generation": {"n_steps": 100},
      "ngrc": {"k": 2, "s": 1, "orders": [1, 2], "state_orders": [0, 1],
               "beta": 1e-4, "gamma": 0.4},
      "training": {"thetas": [0.92, 0.93]}
    })");
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ngrc_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(format_double(2.989820)) == 2.989820);
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("minimal config resolves model defaults") {
    const ExperimentConfig cfg = config_from_json(minimal_config());
    CHECK(cfg.model_kind == "food_chain");
    CHECK(cfg.generation.x0 == StateVector{0.6, 0.35, 0.9});
    CHECK(cfg.generation.dt == 0.1);
    CHECK(cfg.generation.observable == 2);
    CHECK(cfg.ngrc.d == 3);
    CHECK(cfg.collapse.sustained.has_value());
    CHECK(cfg.collapse.sustained->kind == CollapseKind::extinction);
}

TEST_CASE("omitted ngrc block resolves to the reference architectures") {
    json j = json::parse(R"({
      "model": {"kind": "power_system"},
      "generation": {"n_steps": 50},
      "training": {"thetas": [2.98953]}
    })");
    const ExperimentConfig psm = config_from_json(j);
    CHECK(psm.ngrc.k == 2);
    CHECK(psm.ngrc.s == 2);
    CHECK(psm.ngrc.orders == std::vector<int>{1, 2, 3});
    CHECK(psm.ngrc.state_orders == std::vector<int>{0, 1, 2, 3});
    CHECK(psm.ngrc.beta == 1e-8);
    CHECK(psm.ngrc.gamma == 0.6);
    CHECK(feature_dim(psm.ngrc) == 493);

    j["model"]["kind"] = "food_chain";
    const ExperimentConfig cfc = config_from_json(j);
    CHECK(cfc.ngrc.k == 4);
    CHECK(cfc.ngrc.s == 4);
    CHECK(cfc.ngrc.orders == std::vector<int>{1, 2});
    CHECK(cfc.ngrc.beta == 1e-3);
    CHECK(cfc.ngrc.gamma == 0.4);
    CHECK(feature_dim(cfc.ngrc) == 271);

    // partial override keeps the remaining defaults
    j["ngrc"] = {{"gamma", 0.45}};
    const ExperimentConfig part = config_from_json(j);
    CHECK(part.ngrc.gamma == 0.45);
    CHECK(part.ngrc.k == 4);
    CHECK(part.ngrc.beta == 1e-3);
}

TEST_CASE("unknown keys are rejected with their path") {
    json j = minimal_config();
    j["generation"]["n_step"] = 5;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("generation.n_step"),
                         ConfigError);
    j = minimal_config();
    j["bogus"] = 1;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("bogus"), ConfigError);
}

TEST_CASE("field violations carry the field path") {
    json j = minimal_config();
    j["generation"]["n_steps"] = 0;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("generation.n_steps"),
                         ConfigError);

    j = minimal_config();
    j["model"]["kind"] = "lorenz";
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("model.kind"), ConfigError);

    j = minimal_config();
    j["ngrc"]["orders"] = json::array();
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("ngrc.orders"), ConfigError);

    j = minimal_config();
    j["prediction"] = {{"grid", {{"start", 1.0}, {"stop", 0.5}, {"step", 0.1}}}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("prediction.grid.stop"),
                         ConfigError);
}

TEST_CASE("config round-trip is the identity") {
    json j = minimal_config();
    j["prediction"] = {{"grid", {{"start", 0.92}, {"stop", 0.96}, {"step", 0.01}}},
                       {"n_steps", 500},
                       {"compute_lyapunov", false}};
    j["schedule"] = {{"kind", "step"},
                     {"theta_before", 0.955},
                     {"theta_after", 0.965},
                     {"switch_step", 250},
                     {"n_steps", 500}};
    j["gamma_sweep"] = {{"gammas", {0.3, 0.4}}};
    const ExperimentConfig a = config_from_json(j);
    const ExperimentConfig b = config_from_json(config_to_json(a));
    CHECK(a == b);
    CHECK(config_to_json(a) == config_to_json(b));
    CHECK(experiment_hash(a) == experiment_hash(b));
}

TEST_CASE("grid resolution covers the closed range") {
    GridConfig g;
    g.start = 2.98980;
    g.stop = 2.98984;
    g.step = 1e-6;
    const std::vector<double> grid = g.resolve();
    CHECK(grid.size() == 41);
    CHECK(grid.front() == doctest::Approx(2.98980).epsilon(1e-12));
    CHECK(grid.back() == doctest::Approx(2.98984).epsilon(1e-12));

    GridConfig values;
    values.values = {0.3, 0.1, 0.2};
    CHECK(values.resolve() == std::vector<double>{0.1, 0.2, 0.3});
}

TEST_CASE("trajectory csv round-trips") {
    TempDir tmp;
    Trajectory t;
    t.dt = 0.05;
    t.t0 = 0.0;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) t.states.push_back({u(rng), u(rng), u(rng)});

    const fs::path p = tmp.path / "traj.csv";
    write_trajectory_csv(p, t);
    const Trajectory back = read_trajectory_csv(p);
    REQUIRE(back.size() == t.size());
    CHECK(back.dt == t.dt);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.states[i] == t.states[i]);
}

TEST_CASE("trajectory csv with a schedule column") {
    TempDir tmp;
    Trajectory t;
    t.dt = 0.1;
    for (int i = 0; i < 10; ++i) t.states.push_back({1.0 * i});
    const std::vector<double> thetas{7.0, 7.0, 7.0, 7.0, 8.0, 8.0, 8.0};  // 3 warm-up rows

    const fs::path p = tmp.path / "ns.csv";
    write_trajectory_csv(p, t, thetas);

    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x0,theta");
    // reader ignores the theta column
    const Trajectory back = read_trajectory_csv(p);
    CHECK(back.size() == 10);
    CHECK(back.dimension() == 1);
}

TEST_CASE("model json round-trip is bit exact") {
    NgrcConfig cfg;
    cfg.d = 2;
    cfg.k = 2;
    cfg.s = 3;
    cfg.orders = {1, 2};
    cfg.state_orders = {0, 1, 2};
    cfg.beta = 1e-7;
    cfg.gamma = 0.45;

    ReadoutMatrix ro;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    ro.w.resize(cfg.d, static_cast<Eigen::Index>(feature_dim(cfg)));
    for (Eigen::Index i = 0; i < ro.w.size(); ++i) ro.w.data()[i] = u(rng);
    ro.config_hash = config_hash(cfg);
    ro.descriptor.model = "power_system";
    ro.descriptor.thetas = {2.98953, 2.98956};
    ro.descriptor.columns = 1234;
    ro.descriptor.dt = 0.05;
    ro.descriptor.x0 = {0.17, 0.05, 0.05, 0.83};
    const TrainedModel model(cfg, std::move(ro));

    TempDir tmp;
    const fs::path p = tmp.path / "model.json";
    save_model(p, model);
    const TrainedModel back = load_model(p);
    CHECK(back.readout.w == model.readout.w);
    CHECK(back.config.orders == cfg.orders);
    CHECK(back.readout.descriptor.thetas == model.readout.descriptor.thetas);

    // and the serialized form itself is stable
    save_model(tmp.path / "model2.json", back);
    std::ifstream a(p), b(tmp.path / "model2.json");
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
}

TEST_CASE("model json rejects tampered payloads") {
    NgrcConfig cfg;
    cfg.d = 1;
    cfg.k = 1;
    cfg.s = 1;
    cfg.orders = {1};
    cfg.state_orders = {1};
    ReadoutMatrix ro;
    ro.w = Eigen::MatrixXd::Zero(1, 1);
    ro.config_hash = config_hash(cfg);
    const TrainedModel model(cfg, std::move(ro));
    json j = model_to_json(model);
    j["w_out"]["values"] = {1.0, 2.0};  // wrong size
    CHECK_THROWS_AS(model_from_json(j), DataError);
}

TEST_CASE("monomial table export lists exponent rows") {
    TempDir tmp;
    const MonomialTable table = MonomialTable::build(2, {1, 2});
    write_monomial_table_csv(tmp.path / "mono.csv", table);
    std::ifstream in(tmp.path / "mono.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "m0,m1");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    CHECK(rows == std::vector<std::string>{"1,0", "0,1", "2,0", "1,1", "0,2"});
}

TEST_CASE("diagram csv formats") {
    TempDir tmp;
    BifurcationDiagram d;
    DiagramRow r1;
    r1.theta = 0.5;
    r1.scatter = {1.25, 1.5};
    r1.lambda_max = 0.01;
    DiagramRow r2;
    r2.theta = 0.6;
    r2.collapse = CollapseKind::extinction;
    d.rows = {r1, r2};

    write_diagram_scatter_csv(tmp.path / "s.csv", d);
    write_diagram_summary_csv(tmp.path / "m.csv", d);

    std::ifstream s(tmp.path / "s.csv");
    std::string line;
    std::getline(s, line);
    CHECK(line == "theta,scatter_value");
    std::getline(s, line);
    CHECK(line == "0.5,1.25");

    std::ifstream m(tmp.path / "m.csv");
    std::getline(m, line);
    CHECK(line == "theta,lambda_max,collapse");
    std::getline(m, line);
    CHECK(line == "0.5,0.01,");
    std::getline(m, line);
    CHECK(line == "0.6,nan,extinction");
}
