#include "ngrc/analysis.hpp"

#include "ngrc/errors.hpp"
#include "ngrc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ngrc {

namespace {

double series_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// First lag with non-positive autocorrelation of the mean-removed series.
int acf_first_zero(std::span<const double> x, int cap) {
    const std::size_t n = x.size();
    const double mean = series_mean(x);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    if (var == 0.0) return 1;
    const int max_lag = static_cast<int>(std::min<std::size_t>(cap, n / 2));
    for (int lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i)
            c += (x[i] - mean) * (x[i + static_cast<std::size_t>(lag)] - mean);
        if (c <= 0.0) return lag;
    }
    return std::max(max_lag, 1);
}

// Mean spacing of zero crossings of the mean-removed series, in steps.
int mean_crossing_spacing(std::span<const double> x) {
    const double mean = series_mean(x);
    std::size_t first = 0, last = 0, count = 0;
    bool have_prev = false;
    bool prev_below = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool below = x[i] < mean;
        if (have_prev && below != prev_below) {
            if (count == 0) first = i;
            last = i;
            ++count;
        }
        prev_below = below;
        have_prev = true;
    }
    if (count < 2) return static_cast<int>(std::max<std::size_t>(x.size() / 10, 1));
    const double spacing =
        static_cast<double>(last - first) / static_cast<double>(count - 1);
    return std::max(1, static_cast<int>(std::lround(spacing)));
}

RosensteinParams resolve_params(std::span<const double> series,
                                const RosensteinParams& in) {
    RosensteinParams p = in;
    if (p.embed_dim < 2) throw std::invalid_argument("rosenstein: embed_dim must be >= 2");
    if (p.fit_begin < 1 || p.fit_end <= p.fit_begin)
        throw std::invalid_argument("rosenstein: invalid fit window");
    if (p.delay <= 0) p.delay = acf_first_zero(series, p.delay_cap);
    if (p.theiler <= 0) p.theiler = mean_crossing_spacing(series);
    return p;
}

}  // namespace

LyapunovEstimate rosenstein_lle(std::span<const double> series, double dt,
                                const RosensteinParams& params) {
    if (!(dt > 0.0)) throw std::invalid_argument("rosenstein: dt must be > 0");
    const RosensteinParams p = resolve_params(series, params);

    const std::size_t m = static_cast<std::size_t>(p.embed_dim);
    const std::size_t tau = static_cast<std::size_t>(p.delay);
    const std::size_t span_len = (m - 1) * tau;
    if (series.size() <= span_len + static_cast<std::size_t>(p.fit_end) + 1)
        throw NumericError("rosenstein: series too short for embedding plus fit window");
    const std::size_t n = series.size() - span_len;  // embedded points

    // nearest neighbor of every embedded point outside the Theiler window
    std::vector<std::size_t> nn(n, n);
    const auto dist2 = [&](std::size_t a, std::size_t b) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double diff = series[a + j * tau] - series[b + j * tau];
            acc += diff * diff;
        }
        return acc;
    };
    const std::size_t theiler = static_cast<std::size_t>(p.theiler);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = n;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t gap = i > j ? i - j : j - i;
            if (gap <= theiler) continue;
            const double d2 = dist2(i, j);
            if (d2 < best) {
                best = d2;
                best_j = j;
            }
        }
        nn[i] = best_j;
    }

    // average log divergence over the pairs as they evolve
    const std::size_t kmax = static_cast<std::size_t>(p.fit_end);
    std::vector<double> avg(kmax + 1, 0.0);
    std::vector<std::size_t> cnt(kmax + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = nn[i];
        if (j >= n) continue;
        const std::size_t horizon = std::min(n - i, n - j);
        const std::size_t steps = std::min(kmax + 1, horizon);
        for (std::size_t k = 0; k < steps; ++k) {
            const double d2 = dist2(i + k, j + k);
            if (d2 > 0.0) {
                avg[k] += 0.5 * std::log(d2);
                ++cnt[k];
            }
        }
    }

    // least-squares slope of <ln d_k> over the fit window
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t used = 0;
    for (std::size_t k = static_cast<std::size_t>(p.fit_begin); k <= kmax; ++k) {
        if (cnt[k] == 0) continue;
        const double xk = static_cast<double>(k);
        const double yk = avg[k] / static_cast<double>(cnt[k]);
        sx += xk;
        sy += yk;
        sxx += xk * xk;
        sxy += xk * yk;
        ++used;
    }
    if (used < 2)
        throw NumericError("rosenstein: no usable divergence curve (degenerate series?)");
    const double denom = static_cast<double>(used) * sxx - sx * sx;
    if (denom == 0.0) throw NumericError("rosenstein: singular slope fit");
    const double slope = (static_cast<double>(used) * sxy - sx * sy) / denom;

    LyapunovEstimate est;
    est.lambda_max = slope / dt;
    est.fit_begin = p.fit_begin;
    est.fit_end = p.fit_end;
    est.method = LyapunovMethod::rosenstein;
    return est;
}

LyapunovEstimate benettin_lle(const OdeModel& model, const StateVector& x0, double dt,
                              const BenettinParams& params) {
    if (!(dt > 0.0)) throw std::invalid_argument("benettin: dt must be > 0");
    if (params.renorm_interval < 1)
        throw std::invalid_argument("benettin: renorm_interval must be >= 1");
    if (!(params.d0 > 0.0)) throw std::invalid_argument("benettin: d0 must be > 0");

    const std::size_t transient =
        static_cast<std::size_t>(params.transient_discard * static_cast<double>(params.n_steps));
    IntegrationResult base = integrate(model, x0, dt, std::max<std::size_t>(transient, 1));
    if (base.diverged_at)
        throw NumericError("benettin: base trajectory diverged during transient");

    const std::size_t d = x0.size();
    StateVector x = base.trajectory.states.back();
    // initial offset along the diagonal; renormalization aligns it with the
    // leading direction after a few intervals
    StateVector y = x;
    const double offset = params.d0 / std::sqrt(static_cast<double>(d));
    for (auto& v : y) v += offset;

    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    const OdeModel& m = model;
    const auto rk4_inplace = [&](StateVector& state) {
        m.deriv(state, k1);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
        m.deriv(tmp, k2);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
        m.deriv(tmp, k3);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state[i] + dt * k3[i];
        m.deriv(tmp, k4);
        for (std::size_t i = 0; i < d; ++i)
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    const std::size_t remaining = params.n_steps > transient ? params.n_steps - transient : 0;
    if (remaining < static_cast<std::size_t>(params.renorm_interval) * 2)
        throw std::invalid_argument("benettin: too few steps after transient");

    double log_sum = 0.0;
    std::size_t renorms = 0;
    for (std::size_t step = 1; step <= remaining; ++step) {
        rk4_inplace(x);
        rk4_inplace(y);
        if (!within_bound(x, kDivergenceBound))
            throw NumericError("benettin: base trajectory diverged");
        if (step % static_cast<std::size_t>(params.renorm_interval) == 0) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = y[i] - x[i];
                dist2 += diff * diff;
            }
            const double dist = std::sqrt(dist2);
            if (!(dist > 0.0) || !std::isfinite(dist))
                throw NumericError("benettin: companion trajectory degenerated");
            log_sum += std::log(dist / params.d0);
            ++renorms;
            const double scale = params.d0 / dist;
            for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + (y[i] - x[i]) * scale;
        }
    }

    LyapunovEstimate est;
    est.lambda_max = log_sum /
                     (static_cast<double>(renorms) *
                      static_cast<double>(params.renorm_interval) * dt);
    est.method = LyapunovMethod::benettin;
    return est;
}

std::vector<double> local_maxima(std::span<const double> series, std::size_t discard) {
    std::vector<double> out;
    if (series.size() <= discard + 2) return out;
    for (std::size_t i = discard + 1; i + 1 < series.size(); ++i) {
        if (series[i - 1] < series[i] && series[i] > series[i + 1]) out.push_back(series[i]);
    }
    return out;
}

namespace {

DiagramRow make_row(double theta, const Trajectory& traj,
                    std::optional<CollapseEvent> event, const DiagramSettings& s) {
    DiagramRow row;
    row.theta = theta;
    if (event) row.collapse = event->kind;
    if (traj.empty()) return row;

    const std::vector<double> series = traj.component(static_cast<std::size_t>(s.observable));
    const std::size_t discard =
        static_cast<std::size_t>(s.transient_discard * static_cast<double>(series.size()));
    row.scatter = local_maxima(series, discard);

    if (s.compute_lyapunov && series.size() > discard) {
        try {
            const std::span<const double> post(series.data() + discard,
                                               series.size() - discard);
            row.lambda_max = rosenstein_lle(post, traj.dt, s.lyapunov).lambda_max;
        } catch (const NumericError&) {
            // row stays without an estimate; recorded, not fatal
        }
    }
    return row;
}

void check_settings(const DiagramSettings& s, int dim) {
    if (s.grid.empty()) throw std::invalid_argument("diagram: grid must be non-empty");
    if (!std::is_sorted(s.grid.begin(), s.grid.end()))
        throw std::invalid_argument("diagram: grid must be ascending");
    if (s.n_steps < 1) throw std::invalid_argument("diagram: n_steps must be >= 1");
    if (!(s.dt > 0.0)) throw std::invalid_argument("diagram: dt must be > 0");
    if (static_cast<int>(s.x0.size()) != dim)
        throw std::invalid_argument("diagram: x0 dimension mismatch");
    if (s.transient_discard < 0.0 || s.transient_discard >= 1.0)
        throw std::invalid_argument("diagram: transient_discard must be in [0, 1)");
    if (s.observable < 0 || s.observable >= dim)
        throw std::invalid_argument("diagram: observable index out of range");
}

}  // namespace

BifurcationDiagram ground_truth_bifurcation(const ModelFamily& family,
                                            const DiagramSettings& settings) {
    check_settings(settings, family.dim);
    BifurcationDiagram diagram;
    diagram.rows.resize(settings.grid.size());
    parallel_for(settings.grid.size(), settings.threads, [&](std::size_t i) {
        const double theta = settings.grid[i];
        IntegrationResult res = integrate(family.at(theta), settings.x0, settings.dt,
                                          settings.n_steps, settings.collapse.divergence_bound);
        std::optional<CollapseEvent> event;
        if (res.diverged_at)
            event = CollapseEvent{*res.diverged_at, CollapseKind::divergence};
        if (auto sustained = detect_collapse(res.trajectory, settings.collapse)) {
            event = sustained;
            res.trajectory.states.resize(sustained->step);
        }
        diagram.rows[i] = make_row(theta, res.trajectory, event, settings);
    });
    return diagram;
}

BifurcationDiagram reconstruct_bifurcation(const TrainedModel& model,
                                           const ModelFamily& truth,
                                           const DiagramSettings& settings) {
    check_settings(settings, model.config.d);
    if (truth.dim != model.config.d)
        throw std::invalid_argument("reconstruct: truth family dimension mismatch");
    BifurcationDiagram diagram;
    diagram.rows.resize(settings.grid.size());
    parallel_for(settings.grid.size(), settings.threads, [&](std::size_t i) {
        const double theta = settings.grid[i];
        const std::size_t warm_steps = std::max<std::size_t>(model.config.warmup(), 1);
        IntegrationResult warm = integrate(truth.at(theta), settings.x0, settings.dt,
                                           warm_steps, settings.collapse.divergence_bound);
        if (warm.diverged_at) {
            diagram.rows[i] = make_row(
                theta, warm.trajectory,
                CollapseEvent{*warm.diverged_at, CollapseKind::divergence}, settings);
            return;
        }
        PredictionResult run = free_run(warm.trajectory, model, theta, settings.n_steps,
                                        settings.collapse);
        diagram.rows[i] = make_row(theta, run.trajectory, run.collapse, settings);
    });
    return diagram;
}

namespace {

double median_of(std::vector<double> values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const auto lower =
            std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + *lower);
    }
    return m;
}

}  // namespace

std::vector<TippingPoint> find_tipping(const BifurcationDiagram& diagram,
                                       const TippingParams& params) {
    std::vector<TippingPoint> out;
    const auto& rows = diagram.rows;
    if (rows.size() < 2) return out;

    // collapse-status flips
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const bool a = rows[i].collapse.has_value();
        const bool b = rows[i + 1].collapse.has_value();
        if (a != b)
            out.push_back({0.5 * (rows[i].theta + rows[i + 1].theta),
                           TippingPoint::Kind::collapse_onset});
    }

    // scatter-envelope discontinuities within maximal usable runs
    double global_hi = -std::numeric_limits<double>::infinity();
    double global_lo = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        if (r.collapse || r.scatter.empty()) continue;
        global_hi = std::max(global_hi, *std::max_element(r.scatter.begin(), r.scatter.end()));
        global_lo = std::min(global_lo, *std::min_element(r.scatter.begin(), r.scatter.end()));
    }
    if (!(global_hi > global_lo)) return out;
    const double floor = params.variation_floor_fraction * (global_hi - global_lo);

    std::size_t run_start = 0;
    while (run_start < rows.size()) {
        if (rows[run_start].collapse || rows[run_start].scatter.empty()) {
            ++run_start;
            continue;
        }
        std::size_t run_end = run_start;
        while (run_end + 1 < rows.size() && !rows[run_end + 1].collapse &&
               !rows[run_end + 1].scatter.empty())
            ++run_end;

        const std::size_t len = run_end - run_start + 1;
        if (len >= 4) {
            std::vector<double> hi(len), lo(len);
            for (std::size_t i = 0; i < len; ++i) {
                const auto& sc = rows[run_start + i].scatter;
                hi[i] = *std::max_element(sc.begin(), sc.end());
                lo[i] = *std::min_element(sc.begin(), sc.end());
            }
            for (const auto* env : {&hi, &lo}) {
                const std::vector<double>& e = *env;
                std::vector<double> diffs(len - 1);
                for (std::size_t i = 0; i + 1 < len; ++i) diffs[i] = std::abs(e[i + 1] - e[i]);
                for (std::size_t i = 0; i + 1 < len; ++i) {
                    const std::size_t w = static_cast<std::size_t>(params.window);
                    const std::size_t lo_j = i > w ? i - w : 0;
                    const std::size_t hi_j = std::min(diffs.size() - 1, i + w);
                    std::vector<double> local;
                    local.reserve(hi_j - lo_j + 1);
                    for (std::size_t j = lo_j; j <= hi_j; ++j)
                        if (j != i) local.push_back(diffs[j]);
                    if (local.size() < 3) continue;
                    const double variation = std::max(median_of(std::move(local)), floor);
                    if (diffs[i] > params.jump_factor * variation) {
                        const double theta_mid = 0.5 * (rows[run_start + i].theta +
                                                        rows[run_start + i + 1].theta);
                        const bool seen =
                            std::any_of(out.begin(), out.end(), [&](const TippingPoint& t) {
                                return t.kind == TippingPoint::Kind::scatter_jump &&
                                       t.theta == theta_mid;
                            });
                        if (!seen)
                            out.push_back({theta_mid, TippingPoint::Kind::scatter_jump});
                    }
                }
            }
        }
        run_start = run_end + 1;
    }

    std::sort(out.begin(), out.end(),
              [](const TippingPoint& a, const TippingPoint& b) { return a.theta < b.theta; });
    return out;
}

bool lyapunov_validation_pass(double lambda_train, double lambda_predicted) {
    const double tol =
        std::max(kLyapunovRelTol * std::abs(lambda_train), kLyapunovAbsTol);
    return std::abs(lambda_predicted - lambda_train) <= tol;
}

GammaSweepResult gamma_sweep(const TrainingSet& set, const NgrcConfig& base,
                             std::span<const double> gammas, const ModelFamily& truth,
                             const DiagramSettings& settings) {
    if (gammas.empty()) throw std::invalid_argument("gamma_sweep: gamma list must be non-empty");
    set.validate();

    std::vector<double> sorted_gammas(gammas.begin(), gammas.end());
    std::sort(sorted_gammas.begin(), sorted_gammas.end());

    // per-training-theta reference estimates, shared across gammas
    struct TrainRef {
        double theta;
        double lambda;
        RosensteinParams params;
    };
    std::vector<TrainRef> refs;
    for (const auto& sample : set.samples) {
        const std::vector<double> series =
            sample.trajectory.component(static_cast<std::size_t>(settings.observable));
        const std::size_t discard = static_cast<std::size_t>(
            settings.transient_discard * static_cast<double>(series.size()));
        const std::span<const double> post(series.data() + discard, series.size() - discard);
        // resolve the estimator geometry once on the training series and
        // reuse it for the rollout so both estimates are comparable
        RosensteinParams p = settings.lyapunov;
        const LyapunovEstimate est = rosenstein_lle(post, sample.trajectory.dt, p);
        if (p.delay <= 0) p.delay = acf_first_zero(post, p.delay_cap);
        if (p.theiler <= 0) p.theiler = mean_crossing_spacing(post);
        refs.push_back({sample.theta, est.lambda_max, p});
    }

    GammaSweepResult result;
    result.grid = settings.grid;
    for (double gamma : sorted_gammas) {
        GammaSweepEntry entry;
        entry.gamma = gamma;
        NgrcConfig cfg = base;
        cfg.gamma = gamma;
        std::optional<TrainedModel> maybe_model;
        try {
            maybe_model = train_model(set, cfg, truth.name);
            entry.diagram = reconstruct_bifurcation(*maybe_model, truth, settings);
        } catch (const std::exception& e) {
            // recorded per entry; the sweep continues with the other gammas
            entry.error = e.what();
            entry.all_pass = false;
            result.entries.push_back(std::move(entry));
            continue;
        }
        const TrainedModel& model = *maybe_model;

        entry.all_pass = true;
        for (const TrainRef& ref : refs) {
            GammaValidation v;
            v.theta = ref.theta;
            v.lambda_train = ref.lambda;
            const std::size_t warm_steps = std::max<std::size_t>(cfg.warmup(), 1);
            IntegrationResult warm =
                integrate(truth.at(ref.theta), settings.x0, settings.dt, warm_steps,
                          settings.collapse.divergence_bound);
            if (!warm.diverged_at) {
                const PredictionResult run = free_run(warm.trajectory, model, ref.theta,
                                                      settings.n_steps, settings.collapse);
                if (run.collapse) {
                    v.collapse = run.collapse->kind;
                } else {
                    const std::vector<double> series = run.trajectory.component(
                        static_cast<std::size_t>(settings.observable));
                    const std::size_t discard = static_cast<std::size_t>(
                        settings.transient_discard * static_cast<double>(series.size()));
                    try {
                        const std::span<const double> post(series.data() + discard,
                                                           series.size() - discard);
                        v.lambda_predicted =
                            rosenstein_lle(post, run.trajectory.dt, ref.params).lambda_max;
                    } catch (const NumericError&) {
                    }
                }
            } else {
                v.collapse = CollapseKind::divergence;
            }
            v.pass = v.lambda_predicted &&
                     lyapunov_validation_pass(v.lambda_train, *v.lambda_predicted);
            entry.all_pass = entry.all_pass && v.pass;
            entry.validations.push_back(v);
        }
        result.entries.push_back(std::move(entry));
    }

    // per-theta envelope of predicted Lyapunov exponents across gammas
    const std::size_t g = result.grid.size();
    result.lambda_min.assign(g, std::numeric_limits<double>::quiet_NaN());
    result.lambda_max.assign(g, std::numeric_limits<double>::quiet_NaN());
    for (const auto& entry : result.entries) {
        for (std::size_t i = 0; i < g && i < entry.diagram.rows.size(); ++i) {
            const auto& lm = entry.diagram.rows[i].lambda_max;
            if (!lm) continue;
            if (std::isnan(result.lambda_min[i]) || *lm < result.lambda_min[i])
                result.lambda_min[i] = *lm;
            if (std::isnan(result.lambda_max[i]) || *lm > result.lambda_max[i])
                result.lambda_max[i] = *lm;
        }
    }
    return result;
}

}  // namespace ngrc
