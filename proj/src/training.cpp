#include "ngrc/training.hpp"

#include "ngrc/errors.hpp"
#include "ngrc/util.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>
#include <stdexcept>

namespace ngrc {

void TrainingSet::validate() const {
    if (samples.empty()) throw std::invalid_argument("training set: needs at least one sample");
    const std::size_t d = samples.front().trajectory.dimension();
    const double dt = samples.front().trajectory.dt;
    for (const auto& s : samples) {
        s.trajectory.validate();
        if (s.trajectory.dimension() != d)
            throw std::invalid_argument("training set: inconsistent state dimension");
        if (s.trajectory.dt != dt)
            throw std::invalid_argument("training set: inconsistent time step");
    }
}

namespace {

std::size_t usable_columns(const Trajectory& traj, std::size_t warmup) {
    if (traj.size() < warmup + 2) {
        std::ostringstream oss;
        oss << "trajectory too short: " << traj.size() << " points, need at least "
            << (warmup + 2) << " for warm-up " << warmup << " plus one target";
        throw std::invalid_argument(oss.str());
    }
    return traj.size() - warmup - 1;
}

}  // namespace

Eigen::MatrixXd build_feature_matrix(const Trajectory& traj, const FeatureBuilder& fb,
                                     double theta) {
    traj.validate();
    if (traj.dimension() != static_cast<std::size_t>(fb.config().d))
        throw std::invalid_argument("build_feature_matrix: trajectory dimension mismatch");
    const std::size_t warmup = fb.warmup();
    const std::size_t cols = usable_columns(traj, warmup);

    Eigen::MatrixXd out(static_cast<Eigen::Index>(fb.dim()), static_cast<Eigen::Index>(cols));
    std::vector<double> delayed(static_cast<std::size_t>(fb.config().d) * fb.config().k);
    std::vector<double> feat(fb.dim());
    for (std::size_t j = 0; j < cols; ++j) {
        delay_embed(traj, fb.config().k, fb.config().s, warmup + j, delayed);
        fb.compute(delayed, theta, feat);
        for (std::size_t r = 0; r < feat.size(); ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = feat[r];
    }
    return out;
}

Eigen::MatrixXd build_target_matrix(const Trajectory& traj, std::size_t warmup) {
    traj.validate();
    const std::size_t cols = usable_columns(traj, warmup);
    const std::size_t d = traj.dimension();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cols));
    for (std::size_t j = 0; j < cols; ++j) {
        const StateVector& curr = traj.states[warmup + j + 1];
        const StateVector& prev = traj.states[warmup + j];
        for (std::size_t r = 0; r < d; ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = curr[r] - prev[r];
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concat_multifunctional(
    const TrainingSet& set, const FeatureBuilder& fb) {
    set.validate();
    const std::size_t warmup = fb.warmup();
    std::size_t total = 0;
    for (const auto& s : set.samples) total += usable_columns(s.trajectory, warmup);

    Eigen::MatrixXd features(static_cast<Eigen::Index>(fb.dim()),
                             static_cast<Eigen::Index>(total));
    Eigen::MatrixXd targets(static_cast<Eigen::Index>(fb.config().d),
                            static_cast<Eigen::Index>(total));
    Eigen::Index offset = 0;
    for (const auto& s : set.samples) {
        const Eigen::MatrixXd r = build_feature_matrix(s.trajectory, fb, s.theta);
        const Eigen::MatrixXd y = build_target_matrix(s.trajectory, warmup);
        features.middleCols(offset, r.cols()) = r;
        targets.middleCols(offset, y.cols()) = y;
        offset += r.cols();
    }
    return {std::move(features), std::move(targets)};
}

TrainingAccumulator::TrainingAccumulator(const FeatureBuilder& fb)
    : fb_(fb),
      gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fb.dim()),
                                  static_cast<Eigen::Index>(fb.dim()))),
      cross_(Eigen::MatrixXd::Zero(fb.config().d, static_cast<Eigen::Index>(fb.dim()))) {}

void TrainingAccumulator::add(const Trajectory& traj, double theta) {
    const Eigen::MatrixXd r = build_feature_matrix(traj, fb_, theta);
    const Eigen::MatrixXd y = build_target_matrix(traj, fb_.warmup());
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(r);
    cross_.noalias() += y * r.transpose();
    columns_ += static_cast<std::size_t>(r.cols());
}

Eigen::MatrixXd ridge_solve_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                                 double beta) {
    if (beta < 0.0) throw std::invalid_argument("ridge_solve: beta must be >= 0");
    if (gram.rows() != gram.cols())
        throw std::invalid_argument("ridge_solve: gram matrix must be square");
    if (cross.cols() != gram.cols())
        throw std::invalid_argument("ridge_solve: cross matrix width mismatch");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw NumericError("ridge_solve: eigenfactorization of the Gram matrix failed");

    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    const double floor = kGramNoiseFloor * std::max(lambda_max, 0.0);

    if (beta == 0.0 && lambda.minCoeff() <= floor)
        throw NumericError(
            "ridge_solve: Gram matrix is singular within tolerance at beta = 0; "
            "increase beta");

    Eigen::VectorXd weights(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        weights[i] = 1.0 / (std::max(lambda[i], floor) + beta);

    const Eigen::MatrixXd projected = cross * eig.eigenvectors();
    return (projected * weights.asDiagonal()) * eig.eigenvectors().transpose();
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                            double beta) {
    if (features.cols() != targets.cols())
        throw std::invalid_argument("ridge_solve: feature/target column count mismatch");
    Eigen::MatrixXd gram(features.rows(), features.rows());
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
    gram.triangularView<Eigen::StrictlyUpper>() =
        gram.triangularView<Eigen::StrictlyLower>().transpose();
    const Eigen::MatrixXd cross = targets * features.transpose();
    return ridge_solve_gram(gram, cross, beta);
}

TrainedModel train_model(const TrainingSet& set, const NgrcConfig& config,
                         std::string model_name) {
    set.validate();
    config.validate();
    if (set.samples.front().trajectory.dimension() != static_cast<std::size_t>(config.d))
        throw std::invalid_argument("train_model: config dimension does not match data");

    FeatureBuilder fb(config);
    TrainingAccumulator acc(fb);
    for (const auto& s : set.samples) acc.add(s.trajectory, s.theta);

    Eigen::MatrixXd gram = acc.gram();
    gram.triangularView<Eigen::StrictlyUpper>() =
        gram.triangularView<Eigen::StrictlyLower>().transpose();

    ReadoutMatrix readout;
    readout.w = ridge_solve_gram(gram, acc.cross(), config.beta);
    readout.config_hash = config_hash(config);
    readout.descriptor.model = std::move(model_name);
    readout.descriptor.columns = acc.columns();
    readout.descriptor.dt = set.samples.front().trajectory.dt;
    for (const auto& s : set.samples) readout.descriptor.thetas.push_back(s.theta);

    return TrainedModel(config, std::move(readout));
}

std::string config_hash(const NgrcConfig& config) {
    std::ostringstream oss;
    oss << "d=" << config.d << ";k=" << config.k << ";s=" << config.s << ";O=";
    for (int o : config.orders) oss << o << ',';
    oss << ";Os=";
    for (int o : config.state_orders) oss << o << ',';
    oss << ";beta=" << format_double(config.beta) << ";gamma=" << format_double(config.gamma)
        << ";order=" << config.monomial_order;
    return fnv1a_hex(oss.str());
}

}  // namespace ngrc
