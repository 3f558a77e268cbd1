#pragma once

/// @file skorohod.hpp
/// @brief Diffusion rescaling of lattice runs, the one-dimensional Skorohod
/// map, and local-time estimators for paths sampled on a uniform grid.
///
/// Grid paths are plain spans of values at t_k = k * dt. They are treated as
/// piecewise constant (value at t is the value at floor(t / dt)); every
/// estimator below samples integrands at the left end of each grid interval.

#include "skewsim/core.hpp"
#include "skewsim/skew_chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace skewsim {

/// Piecewise-constant rescaled processes on the grid t_k = k / n.
struct ScaledPath {
    std::size_t dim = 1;
    long long n = 1;
    double horizon = 0.0;
    std::int64_t steps = 0;  // grid points are k = 0..steps
    std::vector<double> x;   // X-bar, row-major (k, i)
    std::vector<double> w;   // W-bar, row-major (k, i)
    std::vector<double> l;   // L-bar
    // Present only when the source run carried diagnostics.
    std::vector<double> z;
    std::vector<double> zstar;
    std::vector<double> eps;  // remainder, row-major (k, i)

    [[nodiscard]] double dt() const { return 1.0 / static_cast<double>(n); }
    [[nodiscard]] double time(std::int64_t k) const { return static_cast<double>(k) / static_cast<double>(n); }

    /// floor(n t), clamped to the grid.
    [[nodiscard]] std::int64_t index_at(double t) const {
        const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * t + 1e-9));
        return std::clamp<std::int64_t>(k, 0, steps);
    }

    [[nodiscard]] std::span<const double> state(std::int64_t k) const {
        return {x.data() + k * static_cast<std::int64_t>(dim), dim};
    }
    [[nodiscard]] std::span<const double> walk(std::int64_t k) const {
        return {w.data() + k * static_cast<std::int64_t>(dim), dim};
    }

    /// Column i of X-bar (i = 0 is U-bar).
    [[nodiscard]] std::vector<double> coordinate(std::size_t i) const {
        std::vector<double> out(static_cast<std::size_t>(steps + 1));
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k * dim + i];
        return out;
    }
};

/// X-bar(t) = X_{floor(nt)} / sqrt(n), and likewise for W, L, Z, Z*. The
/// remainder eps(t) = X-bar - x-bar - W-bar - sum beta(Y-bar) dL-bar is filled
/// when the run has diagnostics.
inline ScaledPath rescale(const LatticeRun& run, double horizon) {
    const std::int64_t steps = step_count(run.n, horizon);
    if (steps > run.steps)
        throw Error(ErrorCode::HorizonExceedsPath, "horizon needs " + std::to_string(steps) + " steps, run has "
                                                       + std::to_string(run.steps));
    const std::size_t d = run.dim;
    const auto rows = static_cast<std::size_t>(steps + 1);
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(run.n));

    ScaledPath p;
    p.dim = d;
    p.n = run.n;
    p.horizon = horizon;
    p.steps = steps;
    p.x.resize(rows * d);
    p.w.resize(rows * d);
    p.l.resize(rows);
    for (std::size_t j = 0; j < rows * d; ++j) {
        p.x[j] = static_cast<double>(run.x[j]) * inv_root;
        p.w[j] = static_cast<double>(run.w[j]) * inv_root;
    }
    for (std::size_t k = 0; k < rows; ++k) p.l[k] = static_cast<double>(run.l[k]) * inv_root;

    if (run.diagnostics) {
        p.z.resize(rows);
        p.zstar.resize(rows);
        for (std::size_t k = 0; k < rows; ++k) {
            p.z[k] = static_cast<double>(run.z[k]) * inv_root;
            p.zstar[k] = static_cast<double>(run.zstar[k]) * inv_root;
        }
        p.eps.resize(rows * d);
        std::vector<double> pushed(d, 0.0);  // sum of beta * dL-bar so far
        auto visit = run.visits.begin();
        for (std::size_t k = 0; k < rows; ++k) {
            for (std::size_t i = 0; i < d; ++i)
                p.eps[k * d + i] = p.x[k * d + i] - p.x[i] - p.w[k * d + i] - pushed[i];
            if (visit != run.visits.end() && visit->k == static_cast<std::int64_t>(k)) {
                for (std::size_t i = 0; i < d; ++i) pushed[i] += visit->beta[i] * inv_root;
                ++visit;
            }
        }
    }
    return p;
}

// ============================================================================
// Skorohod map
// ============================================================================

struct SkorohodResult {
    std::vector<double> reflected;  // f = g + h >= 0
    std::vector<double> regulator;  // h = -min_{s <= t}(g(s) ^ 0)
};

/// Gamma(g)(t) = g(t) - inf_{s <= t}(g(s) ^ 0) on a grid path.
inline SkorohodResult skorohod_map(std::span<const double> g) {
    SkorohodResult r;
    r.reflected.resize(g.size());
    r.regulator.resize(g.size());
    double running_min = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        running_min = std::min(running_min, g[k]);
        r.regulator[k] = -running_min;
        r.reflected[k] = g[k] - running_min;
    }
    return r;
}

/// The reflected pair: S = y1 + B + V >= 0 with V the minimal regulator.
struct ReflectedPair {
    std::vector<double> s;
    std::vector<double> v;
};

inline ReflectedPair reflected_pair(double y1, std::span<const double> b) {
    if (!(y1 >= 0.0)) throw Error(ErrorCode::NegativeStart, "reflected pair needs y1 >= 0");
    std::vector<double> g(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) g[k] = y1 + b[k];
    auto r = skorohod_map(g);
    return {std::move(r.reflected), std::move(r.regulator)};
}

/// Checks the defining conditions of a reflected pair (S, V) for y1 + B on
/// the grid: S = y1 + B + V, S >= 0, V(0) = 0, V nondecreasing, and V only
/// increases into grid points where S = 0.
inline bool is_reflected_pair(double y1, std::span<const double> b, std::span<const double> s,
                              std::span<const double> v, double tol = 1e-12) {
    if (s.size() != b.size() || v.size() != b.size() || b.empty()) return false;
    if (std::abs(v[0]) > tol) return false;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (std::abs(s[k] - (y1 + b[k] + v[k])) > tol) return false;
        if (s[k] < -tol) return false;
        if (k == 0) continue;
        const double dv = v[k] - v[k - 1];
        if (dv < -tol) return false;
        if (dv > tol && std::abs(s[k]) > tol) return false;
    }
    return true;
}

// ============================================================================
// Local-time estimators
// ============================================================================

/// Symmetric local time from Tanaka's formula with sgn(0) = 0:
/// L(t_k) = |Z_k| - |Z_0| - sum_{j<k} sgn(Z_j) (Z_{j+1} - Z_j).
inline std::vector<double> tanaka_local_time(std::span<const double> z) {
    std::vector<double> l(z.size(), 0.0);
    if (z.empty()) return l;
    double integral = 0.0;
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double s = (z[k - 1] > 0.0) - (z[k - 1] < 0.0);
        integral += s * (z[k] - z[k - 1]);
        l[k] = std::abs(z[k]) - std::abs(z[0]) - integral;
    }
    return l;
}

/// Occupation-time estimate (1 / 2eps) * sum_{t_j < t} 1{|Z_j| < eps} dt.
inline std::vector<double> occupation_local_time(std::span<const double> z, double dt, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "occupation window must be positive");
    std::vector<double> l(z.size(), 0.0);
    std::int64_t count = 0;
    for (std::size_t k = 1; k < z.size(); ++k) {
        if (std::abs(z[k - 1]) < eps) ++count;
        l[k] = static_cast<double>(count) * dt / (2.0 * eps);
    }
    return l;
}

/// One-sided local times L+(t) = Z+(t) - Z+(0) - sum 1{Z_j > 0} dZ_j and
/// L- = L+ of -Z. Their sum is the symmetric local time.
inline std::pair<std::vector<double>, std::vector<double>> one_sided_local_times(std::span<const double> z) {
    std::vector<double> plus(z.size(), 0.0), minus(z.size(), 0.0);
    if (z.empty()) return {plus, minus};
    double ip = 0.0, im = 0.0;
    const double zp0 = std::max(z[0], 0.0);
    const double zm0 = std::max(-z[0], 0.0);
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double dz = z[k] - z[k - 1];
        if (z[k - 1] > 0.0) ip += dz;
        if (z[k - 1] < 0.0) im -= dz;
        plus[k] = std::max(z[k], 0.0) - zp0 - ip;
        minus[k] = std::max(-z[k], 0.0) - zm0 - im;
    }
    return {plus, minus};
}

}  // namespace skewsim
