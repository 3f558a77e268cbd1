#pragma once

/// @file girsanov.hpp
/// @brief Bounded drift by exponential reweighting of drift-free paths.
///
/// The chain itself never sees the drift a. A drift-free path carries the
/// weight exp(sum a(X_k) . dW_k - 1/2 sum |a(X_k)|^2 dt), with a evaluated at
/// the left end of every step; expectations under the drifted law are
/// weighted averages over drift-free ensembles.

#include "skewsim/core.hpp"
#include "skewsim/skorohod.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace skewsim {

/// Streaming log-weight for one path. Feed it the left-point state and the
/// walk increment of every step, both already rescaled.
template <DriftField A>
class GirsanovAccumulator {
public:
    GirsanovAccumulator(const A& drift, double dt) : drift_(&drift), dt_(dt), a_(drift.dimension()) {}

    void add(std::span<const double> x, std::span<const double> dw) {
        drift_->evaluate(x, a_);
        double dot = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            dot += a_[i] * dw[i];
            sq += a_[i] * a_[i];
        }
        stochastic_ += dot;
        lebesgue_ += sq * dt_;
    }

    [[nodiscard]] double log_weight() const { return stochastic_ - 0.5 * lebesgue_; }
    [[nodiscard]] double weight() const { return std::exp(log_weight()); }

private:
    const A* drift_;
    double dt_;
    std::vector<double> a_;
    double stochastic_ = 0.0;
    double lebesgue_ = 0.0;
};

/// Discretised exponential martingale of a over the first ceil(nT) steps.
template <DriftField A>
double girsanov_weight(const ScaledPath& path, const A& drift, double horizon) {
    const std::int64_t steps = step_count(path.n, horizon);
    if (steps > path.steps)
        throw Error(ErrorCode::HorizonExceedsPath, "weight horizon exceeds path length");
    GirsanovAccumulator acc(drift, path.dt());
    std::vector<double> dw(path.dim);
    for (std::int64_t k = 0; k < steps; ++k) {
        const auto w0 = path.walk(k);
        const auto w1 = path.walk(k + 1);
        for (std::size_t i = 0; i < path.dim; ++i) dw[i] = w1[i] - w0[i];
        acc.add(path.state(k), dw);
    }
    return acc.weight();
}

/// w~(t_k) = W-bar(t_k) - sum_{j<k} a(X-bar(t_j)) dt, row-major (k, i).
template <DriftField A>
std::vector<double> shifted_brownian(const ScaledPath& path, const A& drift) {
    const std::size_t d = path.dim;
    std::vector<double> out(path.w);
    std::vector<double> a(d), integral(d, 0.0);
    for (std::int64_t k = 1; k <= path.steps; ++k) {
        drift.evaluate(path.state(k - 1), a);
        for (std::size_t i = 0; i < d; ++i) {
            integral[i] += a[i] * path.dt();
            out[static_cast<std::size_t>(k) * d + i] -= integral[i];
        }
    }
    return out;
}

/// Negates a drift; shifting by a and then by -a along the same path is the
/// identity.
template <DriftField A>
class NegatedDrift {
public:
    explicit NegatedDrift(const A& inner) : inner_(&inner) {}
    [[nodiscard]] std::size_t dimension() const { return inner_->dimension(); }
    void evaluate(std::span<const double> x, std::span<double> out) const {
        inner_->evaluate(x, out);
        for (double& v : out) v = -v;
    }

private:
    const A* inner_;
};

struct WeightedSample {
    ScaledPath path;
    double weight = 1.0;
};

struct WeightedEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double ess = 0.0;  // (sum w)^2 / sum w^2
};

namespace detail {

inline double effective_sample_size(std::span<const double> w) {
    double s = 0.0, s2 = 0.0;
    for (double v : w) {
        s += v;
        s2 += v * v;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

}  // namespace detail

/// Self-normalised estimate sum w phi / sum w with delta-method standard
/// error. Sums run in index order.
inline WeightedEstimate weighted_expectation(std::span<const double> weights, std::span<const double> values) {
    if (weights.empty()) throw Error(ErrorCode::EmptyEnsemble, "no samples");
    if (weights.size() != values.size()) throw Error(ErrorCode::DimensionMismatch, "weights and values differ in size");
    WeightedEstimate r;
    r.ess = detail::effective_sample_size(weights);
    if (r.ess < 10.0) throw Error(ErrorCode::DegenerateWeights, "effective sample size " + std::to_string(r.ess));
    double sw = 0.0, swv = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        sw += weights[j];
        swv += weights[j] * values[j];
    }
    r.estimate = swv / sw;
    double var = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double dev = weights[j] * (values[j] - r.estimate);
        var += dev * dev;
    }
    r.std_error = std::sqrt(var) / sw;
    return r;
}

inline WeightedEstimate weighted_expectation(std::span<const WeightedSample> samples,
                                             const std::function<double(const ScaledPath&)>& functional) {
    std::vector<double> w(samples.size()), v(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        w[j] = samples[j].weight;
        v[j] = functional(samples[j].path);
    }
    return weighted_expectation(w, v);
}

/// Plain mean of w * phi with its standard error; unbiased but noisier.
inline WeightedEstimate unnormalized_expectation(std::span<const double> weights, std::span<const double> values) {
    if (weights.empty()) throw Error(ErrorCode::EmptyEnsemble, "no samples");
    if (weights.size() != values.size()) throw Error(ErrorCode::DimensionMismatch, "weights and values differ in size");
    const auto m = static_cast<double>(weights.size());
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * values[j];
    const double mean = s / m;
    double var = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double dev = weights[j] * values[j] - mean;
        var += dev * dev;
    }
    WeightedEstimate r;
    r.estimate = mean;
    r.std_error = weights.size() > 1 ? std::sqrt(var / (m - 1.0) / m) : 0.0;
    r.ess = detail::effective_sample_size(weights);
    return r;
}

}  // namespace skewsim
