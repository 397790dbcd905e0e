#pragma once

// Feature/target matrix assembly, streaming Gram accumulation across
// training samples and the ridge regression solve for the readout matrix.

#include "ngrc/features.hpp"
#include "ngrc/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ngrc {

struct TrainingSample {
    Trajectory trajectory;
    double theta = 0.0;  // bifurcation parameter of this stationary sample
};

struct TrainingSet {
    std::vector<TrainingSample> samples;

    void validate() const;  // same dimension and dt everywhere, at least one entry
};

/// Provenance stored alongside a trained readout.
struct TrainingDescriptor {
    std::string model;               // ground-truth family name, if any
    std::vector<double> thetas;      // training bifurcation parameters
    std::size_t columns = 0;         // total feature columns used in the solve
    double dt = 0.0;
    StateVector x0;                  // generation initial condition, if known
};

/// Trained linear map from expanded feature space to state increments.
struct ReadoutMatrix {
    Eigen::MatrixXd w;               // d x N-tilde
    std::string config_hash;
    TrainingDescriptor descriptor;
};

/// Feature matrix of one trajectory: one column per usable index
/// i in [warmup, size-2], so that column j predicts step warmup+j+1.
/// Throws std::invalid_argument when the trajectory is shorter than
/// warmup + 2 points.
Eigen::MatrixXd build_feature_matrix(const Trajectory& traj, const FeatureBuilder& fb,
                                     double theta);

/// Target matrix of state increments dx_i = x_i - x_{i-1} for
/// i in [warmup+1, size-1], aligned with build_feature_matrix columns.
Eigen::MatrixXd build_target_matrix(const Trajectory& traj, std::size_t warmup);

/// Column-wise concatenation across all samples of a training set.
/// The embedding never crosses sample boundaries.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concat_multifunctional(
    const TrainingSet& set, const FeatureBuilder& fb);

/// Streaming accumulator for R*R^T and Y*R^T so the concatenated feature
/// matrix never needs to be materialized.
class TrainingAccumulator {
public:
    explicit TrainingAccumulator(const FeatureBuilder& fb);

    void add(const Trajectory& traj, double theta);

    std::size_t columns() const { return columns_; }
    const Eigen::MatrixXd& gram() const { return gram_; }    // N-tilde x N-tilde
    const Eigen::MatrixXd& cross() const { return cross_; }  // d x N-tilde

private:
    const FeatureBuilder& fb_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    std::size_t columns_ = 0;
};

/// Relative floor applied to the Gram eigenvalues before inversion: a few
/// machine epsilons times the dominant eigenvalue, the level at which the
/// accumulated Gram matrix's own roundoff noise lives. Eigenvalues computed
/// below this line are indistinguishable from zero, so inverting them as-is
/// would amplify noise by an arbitrary factor.
inline constexpr double kGramNoiseFloor = 1e-15;

/// Ridge solve W (R R^T + beta I) = Y R^T through the spectral
/// factorization of the symmetric positive semidefinite Gram matrix.
/// Eigenvalues are raised to kGramNoiseFloor * lambda_max before the
/// weights 1/(lambda + beta) are formed. With beta == 0 a Gram matrix that
/// is singular within that tolerance raises an error suggesting a larger
/// beta.
Eigen::MatrixXd ridge_solve_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                                 double beta);

/// Convenience overload on explicit feature/target matrices (columns are
/// observations).
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                            double beta);

/// Complete trained model: config, monomial table and readout.
struct TrainedModel {
    NgrcConfig config;
    FeatureBuilder features;
    ReadoutMatrix readout;

    TrainedModel(NgrcConfig cfg, ReadoutMatrix ro)
        : config(std::move(cfg)), features(config), readout(std::move(ro)) {
        if (readout.w.rows() != config.d ||
            readout.w.cols() != static_cast<Eigen::Index>(features.dim()))
            throw std::invalid_argument("trained model: readout shape mismatch");
    }
};

/// Streaming multifunctional training over all samples of a set.
TrainedModel train_model(const TrainingSet& set, const NgrcConfig& config,
                         std::string model_name = {});

/// FNV-1a hash of the canonically serialized config, for provenance.
std::string config_hash(const NgrcConfig& config);

}  // namespace ngrc
