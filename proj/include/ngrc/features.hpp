#pragma once

// NG-RC feature construction: time-shift embedding, unique-monomial
// expansion, the additive parameter channel and the post-processing powers
// with optional bias slot.

#include "ngrc/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ngrc {

/// Full architecture description of a parameter-aware NG-RC.
struct NgrcConfig {
    int d = 0;                        // input dimension
    int k = 1;                        // number of concatenated time points
    int s = 1;                        // separation between time points (steps)
    std::vector<int> orders;          // monomial orders O, each >= 1
    std::vector<int> state_orders;    // post-processing orders O_states (0 = bias)
    double beta = 0.0;                // ridge regression strength
    double gamma = 0.0;               // parameter-channel scaling
    std::string monomial_order = "graded-lex";

    /// Embedding history needed before the first feature is defined.
    std::size_t warmup() const { return static_cast<std::size_t>(k - 1) * s; }

    void validate() const;  // throws std::invalid_argument with the offending field
};

/// Expanded feature dimension N-tilde implied by the config.
std::size_t feature_dim(const NgrcConfig& config);

/// Unique monomials over D variables, one exponent row per monomial.
/// Rows are graded (ascending total degree) and, within a degree,
/// lexicographic over non-decreasing variable-index tuples.
class MonomialTable {
public:
    static MonomialTable build(int n_variables, const std::vector<int>& orders);

    std::size_t size() const { return row_offsets_.size() - 1; }
    int n_variables() const { return n_vars_; }
    std::span<const int> exponents(std::size_t row) const;

    /// out[j] = product of v[i] over the j-th monomial's index tuple.
    void evaluate(std::span<const double> v, std::span<double> out) const;

private:
    int n_vars_ = 0;
    std::vector<int> exponents_;    // size() * n_vars_, row-major
    std::vector<int> flat_index_;   // concatenated index tuples
    std::vector<std::size_t> row_offsets_;  // size() + 1 offsets into flat_index_
};

/// Writes (x_i, x_{i-s}, ..., x_{i-(k-1)s}) into out (length d*k).
/// Throws std::out_of_range when i < (k-1)*s.
void delay_embed(const Trajectory& traj, int k, int s, std::size_t i,
                 std::span<double> out);

/// out[j] = monomial j evaluated on the delayed vector v.
void poly_features(std::span<const double> v, const MonomialTable& table,
                   std::span<double> out);

/// Adds gamma * theta to every element in place.
void apply_parameter_channel(std::span<double> r, double gamma, double theta);

/// Concatenates (bias, r^o1, r^o2, ...) for the ascending orders in
/// state_orders; the bias slot (order 0) is a literal 1.
void postprocess(std::span<const double> r, const std::vector<int>& state_orders,
                 std::span<double> out);

/// Bundles a validated config with its monomial table and runs the whole
/// pipeline on one delayed vector.
class FeatureBuilder {
public:
    explicit FeatureBuilder(NgrcConfig config);

    const NgrcConfig& config() const { return config_; }
    const MonomialTable& table() const { return table_; }
    std::size_t raw_dim() const { return table_.size(); }  // N
    std::size_t dim() const { return dim_; }               // N-tilde
    std::size_t warmup() const { return config_.warmup(); }

    /// delayed: d*k values, current time point first. out: dim() values.
    void compute(std::span<const double> delayed, double theta,
                 std::span<double> out) const;

private:
    NgrcConfig config_;
    MonomialTable table_;
    std::size_t dim_ = 0;
};

}  // namespace ngrc
