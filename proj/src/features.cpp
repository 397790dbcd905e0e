#include "ngrc/features.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ngrc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool sorted_unique(const std::vector<int>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1]) return false;
    return true;
}

}  // namespace

void NgrcConfig::validate() const {
    require(d >= 1, "ngrc config: d must be >= 1");
    require(k >= 1, "ngrc config: k must be >= 1");
    require(s >= 1, "ngrc config: s must be >= 1");
    require(!orders.empty(), "ngrc config: orders must be non-empty");
    require(sorted_unique(orders), "ngrc config: orders must be strictly ascending");
    require(orders.front() >= 1, "ngrc config: orders must all be >= 1");
    require(!state_orders.empty(), "ngrc config: state_orders must be non-empty");
    require(sorted_unique(state_orders),
            "ngrc config: state_orders must be strictly ascending");
    require(state_orders.front() >= 0, "ngrc config: state_orders must all be >= 0");
    require(beta >= 0.0, "ngrc config: beta must be >= 0");
    require(monomial_order == "graded-lex",
            "ngrc config: unsupported monomial_order tag");
}

namespace {

// Multiset coefficient C(D + o - 1, o): number of degree-o monomials over D
// variables. Values here stay far below 2^63.
std::size_t multiset_count(int D, int o) {
    unsigned long long num = 1;
    for (int i = 1; i <= o; ++i) {
        num = num * static_cast<unsigned long long>(D - 1 + i);
        num /= static_cast<unsigned long long>(i);
    }
    return static_cast<std::size_t>(num);
}

}  // namespace

std::size_t feature_dim(const NgrcConfig& config) {
    config.validate();
    std::size_t n_raw = 0;
    for (int o : config.orders) n_raw += multiset_count(config.d * config.k, o);
    std::size_t dim = 0;
    for (int o : config.state_orders) {
        if (o == 0)
            dim += 1;
        else
            dim += n_raw;
    }
    return dim;
}

MonomialTable MonomialTable::build(int n_variables, const std::vector<int>& orders) {
    require(n_variables >= 1, "monomial table: need at least one variable");
    require(!orders.empty(), "monomial table: orders must be non-empty");
    std::vector<int> sorted = orders;
    std::sort(sorted.begin(), sorted.end());
    require(sorted.front() >= 1, "monomial table: orders must all be >= 1");

    MonomialTable t;
    t.n_vars_ = n_variables;
    t.row_offsets_.push_back(0);
    for (int o : sorted) {
        // enumerate non-decreasing index tuples of length o lexicographically
        std::vector<int> idx(static_cast<std::size_t>(o), 0);
        while (true) {
            t.flat_index_.insert(t.flat_index_.end(), idx.begin(), idx.end());
            t.row_offsets_.push_back(t.flat_index_.size());
            t.exponents_.insert(t.exponents_.end(), static_cast<std::size_t>(n_variables), 0);
            int* exp_row = t.exponents_.data() + t.exponents_.size() - n_variables;
            for (int v : idx) exp_row[v] += 1;

            int pos = o - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n_variables - 1) --pos;
            if (pos < 0) break;
            const int next = idx[static_cast<std::size_t>(pos)] + 1;
            for (int q = pos; q < o; ++q) idx[static_cast<std::size_t>(q)] = next;
        }
    }
    return t;
}

std::span<const int> MonomialTable::exponents(std::size_t row) const {
    return {exponents_.data() + row * static_cast<std::size_t>(n_vars_),
            static_cast<std::size_t>(n_vars_)};
}

void MonomialTable::evaluate(std::span<const double> v, std::span<double> out) const {
    const std::size_t rows = size();
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 1.0;
        for (std::size_t q = row_offsets_[r]; q < row_offsets_[r + 1]; ++q)
            acc *= v[static_cast<std::size_t>(flat_index_[q])];
        out[r] = acc;
    }
}

void delay_embed(const Trajectory& traj, int k, int s, std::size_t i,
                 std::span<double> out) {
    require(k >= 1 && s >= 1, "delay_embed: k and s must be >= 1");
    const std::size_t warmup = static_cast<std::size_t>(k - 1) * static_cast<std::size_t>(s);
    if (i < warmup)
        throw std::out_of_range("delay_embed: index " + std::to_string(i) +
                                " precedes the required warm-up of " +
                                std::to_string(warmup) + " steps");
    if (i >= traj.size()) throw std::out_of_range("delay_embed: index past trajectory end");
    const std::size_t d = traj.dimension();
    for (int j = 0; j < k; ++j) {
        const StateVector& x = traj.states[i - static_cast<std::size_t>(j) * s];
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::size_t>(j) * d);
    }
}

void poly_features(std::span<const double> v, const MonomialTable& table,
                   std::span<double> out) {
    require(v.size() == static_cast<std::size_t>(table.n_variables()),
            "poly_features: delayed vector length mismatch");
    table.evaluate(v, out);
}

void apply_parameter_channel(std::span<double> r, double gamma, double theta) {
    const double shift = gamma * theta;
    for (double& x : r) x += shift;
}

void postprocess(std::span<const double> r, const std::vector<int>& state_orders,
                 std::span<double> out) {
    std::size_t pos = 0;
    for (int o : state_orders) {
        if (o == 0) {
            out[pos++] = 1.0;
            continue;
        }
        for (double x : r) {
            double acc = x;
            for (int e = 1; e < o; ++e) acc *= x;
            out[pos++] = acc;
        }
    }
}

FeatureBuilder::FeatureBuilder(NgrcConfig config) : config_(std::move(config)) {
    config_.validate();
    table_ = MonomialTable::build(config_.d * config_.k, config_.orders);
    dim_ = feature_dim(config_);
}

void FeatureBuilder::compute(std::span<const double> delayed, double theta,
                             std::span<double> out) const {
    require(delayed.size() == static_cast<std::size_t>(config_.d * config_.k),
            "feature builder: delayed vector length mismatch");
    require(out.size() == dim_, "feature builder: output length mismatch");
    std::vector<double> raw(table_.size());
    table_.evaluate(delayed, raw);
    apply_parameter_channel(raw, config_.gamma, theta);
    postprocess(raw, config_.state_orders, out);
}

}  // namespace ngrc
