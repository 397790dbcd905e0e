#include "ngrc/io.hpp"

#include "ngrc/errors.hpp"
#include "ngrc/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ngrc {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw DataError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path.string());
    return in;
}

std::string format_field(double v) {
    if (std::isnan(v)) return "nan";
    return format_double(v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream iss(line);
    while (std::getline(iss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::span<const double> thetas) {
    traj.validate();
    const bool with_theta = !thetas.empty();
    const std::size_t n_pred = thetas.size();
    std::ofstream out = open_out(path);

    out << 't';
    for (std::size_t c = 0; c < traj.dimension(); ++c) out << ",x" << c;
    if (with_theta) out << ",theta";
    out << '\n';

    const std::size_t warm = traj.size() > n_pred ? traj.size() - n_pred : 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_field(traj.time_at(i));
        for (double v : traj.states[i]) out << ',' << format_field(v);
        if (with_theta) {
            const double th = i < warm ? thetas.front() : thetas[i - warm];
            out << ',' << format_field(th);
        }
        out << '\n';
    }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty trajectory file: " + path.string());
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t")
        throw DataError("bad trajectory header in " + path.string());
    const bool with_theta = header.back() == "theta";
    const std::size_t d = header.size() - 1 - (with_theta ? 1 : 0);

    Trajectory traj;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("ragged trajectory row in " + path.string());
        times.push_back(parse_double(fields[0]));
        StateVector x(d);
        for (std::size_t c = 0; c < d; ++c) x[c] = parse_double(fields[c + 1]);
        traj.states.push_back(std::move(x));
    }
    if (traj.states.size() < 2)
        throw DataError("trajectory needs at least two rows: " + path.string());
    traj.t0 = times.front();
    traj.dt = times[1] - times[0];
    traj.validate();
    return traj;
}

void write_diagram_scatter_csv(const std::filesystem::path& path,
                               const BifurcationDiagram& diagram) {
    std::ofstream out = open_out(path);
    out << "theta,scatter_value\n";
    for (const auto& row : diagram.rows) {
        for (double v : row.scatter)
            out << format_field(row.theta) << ',' << format_field(v) << '\n';
    }
}

void write_diagram_summary_csv(const std::filesystem::path& path,
                               const BifurcationDiagram& diagram) {
    std::ofstream out = open_out(path);
    out << "theta,lambda_max,collapse\n";
    for (const auto& row : diagram.rows) {
        out << format_field(row.theta) << ','
            << (row.lambda_max ? format_field(*row.lambda_max) : "nan") << ','
            << (row.collapse ? to_string(*row.collapse) : "") << '\n';
    }
}

void write_envelope_csv(const std::filesystem::path& path, std::span<const double> grid,
                        std::span<const double> lambda_min,
                        std::span<const double> lambda_max) {
    if (grid.size() != lambda_min.size() || grid.size() != lambda_max.size())
        throw std::invalid_argument("envelope: length mismatch");
    std::ofstream out = open_out(path);
    out << "theta,lambda_min,lambda_max\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << format_field(grid[i]) << ',' << format_field(lambda_min[i]) << ','
            << format_field(lambda_max[i]) << '\n';
}

void write_monomial_table_csv(const std::filesystem::path& path, const MonomialTable& table) {
    std::ofstream out = open_out(path);
    for (int c = 0; c < table.n_variables(); ++c) out << (c ? "," : "") << 'm' << c;
    out << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto exps = table.exponents(r);
        for (std::size_t c = 0; c < exps.size(); ++c) out << (c ? "," : "") << exps[c];
        out << '\n';
    }
}

namespace {

json doubles_to_json(std::span<const double> values) {
    json arr = json::array();
    for (double v : values) arr.push_back(v);
    return arr;
}

std::vector<double> doubles_from_json(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
    const NgrcConfig& c = model.config;
    json j;
    j["config"] = {{"d", c.d},
                   {"k", c.k},
                   {"s", c.s},
                   {"orders", c.orders},
                   {"state_orders", c.state_orders},
                   {"beta", c.beta},
                   {"gamma", c.gamma},
                   {"monomial_order", c.monomial_order}};
    j["config_hash"] = model.readout.config_hash;
    j["feature_dim"] = model.features.dim();

    const Eigen::MatrixXd& w = model.readout.w;
    json values = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index col = 0; col < w.cols(); ++col) values.push_back(w(r, col));
    j["w_out"] = {{"rows", w.rows()}, {"cols", w.cols()}, {"values", std::move(values)}};

    const TrainingDescriptor& d = model.readout.descriptor;
    j["training"] = {{"model", d.model},
                     {"thetas", doubles_to_json(d.thetas)},
                     {"columns", d.columns},
                     {"dt", d.dt},
                     {"x0", doubles_to_json(d.x0)}};
    return j;
}

TrainedModel model_from_json(const json& j) {
    try {
        const json& jc = j.at("config");
        NgrcConfig cfg;
        cfg.d = jc.at("d").get<int>();
        cfg.k = jc.at("k").get<int>();
        cfg.s = jc.at("s").get<int>();
        cfg.orders = jc.at("orders").get<std::vector<int>>();
        cfg.state_orders = jc.at("state_orders").get<std::vector<int>>();
        cfg.beta = jc.at("beta").get<double>();
        cfg.gamma = jc.at("gamma").get<double>();
        cfg.monomial_order = jc.at("monomial_order").get<std::string>();
        cfg.validate();

        const json& jw = j.at("w_out");
        const Eigen::Index rows = jw.at("rows").get<Eigen::Index>();
        const Eigen::Index cols = jw.at("cols").get<Eigen::Index>();
        const json& values = jw.at("values");
        if (values.size() != static_cast<std::size_t>(rows * cols))
            throw DataError("model json: w_out size mismatch");

        ReadoutMatrix ro;
        ro.w.resize(rows, cols);
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index col = 0; col < cols; ++col)
                ro.w(r, col) = values.at(idx++).get<double>();
        ro.config_hash = j.at("config_hash").get<std::string>();

        const json& jt = j.at("training");
        ro.descriptor.model = jt.at("model").get<std::string>();
        ro.descriptor.thetas = doubles_from_json(jt.at("thetas"));
        ro.descriptor.columns = jt.at("columns").get<std::size_t>();
        ro.descriptor.dt = jt.at("dt").get<double>();
        ro.descriptor.x0 = doubles_from_json(jt.at("x0"));

        TrainedModel model(cfg, std::move(ro));
        if (j.at("feature_dim").get<std::size_t>() != model.features.dim())
            throw DataError("model json: feature_dim mismatch");
        if (model.readout.config_hash != config_hash(cfg))
            throw DataError("model json: config hash mismatch");
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model json: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    write_json(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_json(path));
}

json sweep_to_json(const GammaSweepResult& sweep) {
    json j;
    j["grid"] = doubles_to_json(sweep.grid);
    j["lambda_min"] = doubles_to_json(sweep.lambda_min);
    j["lambda_max"] = doubles_to_json(sweep.lambda_max);
    json entries = json::array();
    for (const auto& e : sweep.entries) {
        json je;
        je["gamma"] = e.gamma;
        je["all_pass"] = e.all_pass;
        if (!e.error.empty()) je["error"] = e.error;
        json vals = json::array();
        for (const auto& v : e.validations) {
            json jv;
            jv["theta"] = v.theta;
            jv["lambda_train"] = v.lambda_train;
            if (v.lambda_predicted) jv["lambda_predicted"] = *v.lambda_predicted;
            if (v.collapse) jv["collapse"] = to_string(*v.collapse);
            jv["pass"] = v.pass;
            vals.push_back(std::move(jv));
        }
        je["validations"] = std::move(vals);
        json lambdas = json::array();
        for (const auto& row : e.diagram.rows) {
            json jr;
            jr["theta"] = row.theta;
            if (row.lambda_max) jr["lambda_max"] = *row.lambda_max;
            if (row.collapse) jr["collapse"] = to_string(*row.collapse);
            lambdas.push_back(std::move(jr));
        }
        je["diagram"] = std::move(lambdas);
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    return j;
}

json collapse_to_json(const CollapseEvent& event, double dt, double t0) {
    json j;
    j["step"] = event.step;
    j["time"] = t0 + static_cast<double>(event.step) * dt;
    j["kind"] = to_string(event.kind);
    return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("cannot parse json " + path.string() + ": " + e.what());
    }
}

}  // namespace ngrc
