#pragma once

// Dynamics quantification: largest Lyapunov exponent estimators (Rosenstein
// from data, Benettin from model equations), scatter extraction, bifurcation
// diagram construction for ground truth and trained models, tipping-point
// location and scaling-parameter sweeps.

#include "ngrc/models.hpp"
#include "ngrc/predictor.hpp"
#include "ngrc/training.hpp"
#include "ngrc/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ngrc {

enum class LyapunovMethod { rosenstein, benettin };

struct LyapunovEstimate {
    double lambda_max = 0.0;  // per unit time
    int fit_begin = 0;        // divergence-curve steps used for the slope fit
    int fit_end = 0;
    LyapunovMethod method = LyapunovMethod::rosenstein;
};

struct RosensteinParams {
    int embed_dim = 5;
    int delay = 0;        // 0: first autocorrelation zero-crossing, capped
    int delay_cap = 50;
    int theiler = 0;      // 0: mean spacing of mean-removed zero-crossings
    int fit_begin = 5;    // divergence-curve fit window, in steps
    int fit_end = 50;
};

/// Largest Lyapunov exponent of a scalar observable series via
/// nearest-neighbor divergence in a delay-embedded space.
/// Throws NumericError when the series is too short or featureless.
LyapunovEstimate rosenstein_lle(std::span<const double> series, double dt,
                                const RosensteinParams& params = {});

struct BenettinParams {
    std::size_t n_steps = 25000;
    int renorm_interval = 10;
    double d0 = 1e-8;
    double transient_discard = 0.3;
};

/// Model-based two-trajectory renormalization estimate of the largest
/// Lyapunov exponent, used as an independent oracle for rosenstein_lle.
LyapunovEstimate benettin_lle(const OdeModel& model, const StateVector& x0, double dt,
                              const BenettinParams& params = {});

/// Strict interior local maxima after dropping the first `discard` samples.
std::vector<double> local_maxima(std::span<const double> series, std::size_t discard);

struct DiagramRow {
    double theta = 0.0;
    std::vector<double> scatter;            // local maxima of the observable
    std::optional<double> lambda_max;       // absent when the series was unusable
    std::optional<CollapseKind> collapse;
};

struct BifurcationDiagram {
    std::vector<DiagramRow> rows;  // sorted by theta
};

/// Settings shared by ground-truth generation and model reconstruction.
struct DiagramSettings {
    std::vector<double> grid;       // bifurcation parameter values, ascending
    StateVector x0;
    double dt = 0.0;
    std::size_t n_steps = 0;
    double transient_discard = 0.3;  // fraction of each trajectory dropped
    int observable = 0;
    bool compute_lyapunov = true;
    RosensteinParams lyapunov;
    CollapseRules collapse;
    int threads = 1;
};

/// Reference diagram from RK4 integration of the model equations, one
/// fixed-x0 run per grid point.
BifurcationDiagram ground_truth_bifurcation(const ModelFamily& family,
                                            const DiagramSettings& settings);

/// Predicted diagram: per grid point an RK4 warm-up from x0 at that theta
/// followed by an autonomous free run of the trained model.
BifurcationDiagram reconstruct_bifurcation(const TrainedModel& model,
                                           const ModelFamily& truth,
                                           const DiagramSettings& settings);

struct TippingPoint {
    enum class Kind { collapse_onset, scatter_jump };
    double theta = 0.0;  // midpoint between the two adjacent grid rows
    Kind kind = Kind::collapse_onset;
};

struct TippingParams {
    double jump_factor = 3.0;  // envelope jump vs local inter-row variation
    int window = 10;           // rows on each side defining "local"
    double variation_floor_fraction = 0.005;  // of the global envelope span
};

/// Collapse-status flips plus scatter-envelope discontinuity candidates.
std::vector<TippingPoint> find_tipping(const BifurcationDiagram& diagram,
                                       const TippingParams& params = {});

/// Validation tolerance on the Lyapunov exponent at a training parameter:
/// |lambda_pred - lambda_train| <= max(kLyapunovRelTol * |lambda_train|,
/// kLyapunovAbsTol). Rosenstein estimates of two independent series from one
/// attractor scatter by several hundredths at lambda ~ 0.2, so the band must
/// sit above that noise; a rollout on a qualitatively wrong attractor still
/// lands far outside it.
inline constexpr double kLyapunovRelTol = 0.5;
inline constexpr double kLyapunovAbsTol = 0.05;

bool lyapunov_validation_pass(double lambda_train, double lambda_predicted);

struct GammaValidation {
    double theta = 0.0;
    double lambda_train = 0.0;
    std::optional<double> lambda_predicted;  // absent when the rollout collapsed
    std::optional<CollapseKind> collapse;
    bool pass = false;
};

struct GammaSweepEntry {
    double gamma = 0.0;
    BifurcationDiagram diagram;
    std::vector<GammaValidation> validations;
    bool all_pass = false;
    std::string error;  // non-empty when training or reconstruction failed
};

struct GammaSweepResult {
    std::vector<GammaSweepEntry> entries;   // sorted by gamma
    std::vector<double> grid;               // diagram grid
    std::vector<double> lambda_min;         // per-theta envelope across gammas
    std::vector<double> lambda_max;
};

/// Trains one model per gamma, reconstructs each diagram and validates the
/// Lyapunov exponents at the training parameters.
GammaSweepResult gamma_sweep(const TrainingSet& set, const NgrcConfig& base,
                             std::span<const double> gammas, const ModelFamily& truth,
                             const DiagramSettings& settings);

}  // namespace ngrc
