#pragma once

/// @file oracles.hpp
/// @brief Exact finite-n law of the chain by forward dynamic programming,
/// closed-form reference laws, and distribution-distance statistics.

#include "skewsim/core.hpp"
#include "skewsim/skew_chain.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace skewsim {

// ============================================================================
// Exact lattice law
// ============================================================================

/// Probability distribution of X^n_k on Z^d; atoms with zero mass are dropped.
struct LatticeLaw {
    std::size_t dim = 1;
    long long n = 1;
    std::int64_t steps = 0;
    std::vector<std::int64_t> support;  // row-major (atom, i)
    std::vector<double> mass;

    [[nodiscard]] std::size_t size() const { return mass.size(); }
    [[nodiscard]] std::span<const std::int64_t> state(std::size_t j) const { return {support.data() + j * dim, dim}; }
    [[nodiscard]] double total_mass() const {
        double s = 0.0;
        for (double m : mass) s += m;
        return s;
    }
};

/// Upper bound on lattice cells the d = 2 oracle may allocate (two buffers).
inline constexpr std::int64_t kMaxOracleCells = 125'000'000;
inline constexpr std::int64_t kMaxOracleSteps2d = 512;

namespace detail {

template <SurfaceField F>
LatticeLaw exact_law_1d(const ChainSetup& setup, const F& field, std::int64_t k) {
    double beta = 0.0;
    field.evaluate(std::span<const double>{}, std::span<double>(&beta, 1));
    check_b1(beta);
    const double p_up = (1.0 + beta) / 2.0;
    const double p_down = (1.0 - beta) / 2.0;

    const std::int64_t origin = setup.start[0] - k;  // index 0 <-> lattice value origin
    const auto width = static_cast<std::size_t>(2 * k + 1);
    std::vector<double> cur(width, 0.0), next(width, 0.0);
    const auto idx = [&](std::int64_t v) { return static_cast<std::size_t>(v - origin); };
    cur[idx(setup.start[0])] = 1.0;

    for (std::int64_t step = 0; step < k; ++step) {
        const std::int64_t lo = setup.start[0] - step;
        const std::int64_t hi = setup.start[0] + step;
        std::fill(next.begin() + static_cast<std::ptrdiff_t>(idx(lo - 1)),
                  next.begin() + static_cast<std::ptrdiff_t>(idx(hi + 1)) + 1, 0.0);
        for (std::int64_t v = lo; v <= hi; ++v) {
            const double m = cur[idx(v)];
            if (m == 0.0) continue;
            if (v != 0) {
                next[idx(v - 1)] += 0.5 * m;
                next[idx(v + 1)] += 0.5 * m;
            } else {
                next[idx(v - 1)] += p_down * m;
                next[idx(v + 1)] += p_up * m;
            }
        }
        std::swap(cur, next);
    }

    LatticeLaw law;
    law.dim = 1;
    law.n = setup.n;
    law.steps = k;
    for (std::size_t j = 0; j < width; ++j) {
        if (cur[j] > 0.0) {
            law.support.push_back(origin + static_cast<std::int64_t>(j));
            law.mass.push_back(cur[j]);
        }
    }
    return law;
}

template <SurfaceField F>
LatticeLaw exact_law_2d(const ChainSetup& setup, const F& field, std::int64_t k) {
    if (k > kMaxOracleSteps2d)
        throw Error(ErrorCode::BudgetExceeded, "d = 2 oracle limited to " + std::to_string(kMaxOracleSteps2d) + " steps");
    // Per-step reach in coordinate 2: |shift| + 1 <= |b_2| + 2.
    const auto reach = static_cast<std::int64_t>(std::ceil(field.sup_norm())) + 2;
    const std::int64_t rows = 2 * k + 1;
    const std::int64_t cols = 2 * k * reach + 1;
    if (rows > kMaxOracleCells / cols)
        throw Error(ErrorCode::BudgetExceeded, "oracle state space of " + std::to_string(rows) + " x "
                                                   + std::to_string(cols) + " cells exceeds budget");
    const std::int64_t o1 = setup.start[0] - k;
    const std::int64_t o2 = setup.start[1] - k * reach;
    const auto cell = [&](std::int64_t v1, std::int64_t v2) {
        return static_cast<std::size_t>((v1 - o1) * cols + (v2 - o2));
    };
    std::vector<double> cur(static_cast<std::size_t>(rows * cols), 0.0);
    std::vector<double> next(cur.size(), 0.0);
    cur[cell(setup.start[0], setup.start[1])] = 1.0;

    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));
    std::vector<double> beta(2);

    for (std::int64_t step = 0; step < k; ++step) {
        const std::int64_t lo1 = setup.start[0] - step, hi1 = setup.start[0] + step;
        const std::int64_t lo2 = setup.start[1] - step * reach, hi2 = setup.start[1] + step * reach;
        const std::int64_t nlo1 = std::max(lo1 - 1, o1), nhi1 = std::min(hi1 + 1, o1 + rows - 1);
        const std::int64_t nlo2 = std::max(lo2 - reach, o2), nhi2 = std::min(hi2 + reach, o2 + cols - 1);
        for (std::int64_t v1 = nlo1; v1 <= nhi1; ++v1)
            std::fill(next.begin() + static_cast<std::ptrdiff_t>(cell(v1, nlo2)),
                      next.begin() + static_cast<std::ptrdiff_t>(cell(v1, nhi2)) + 1, 0.0);
        for (std::int64_t v1 = lo1; v1 <= hi1; ++v1) {
            if (v1 != 0) {
                for (std::int64_t v2 = lo2; v2 <= hi2; ++v2) {
                    const double m = cur[cell(v1, v2)];
                    if (m == 0.0) continue;
                    const double q = 0.25 * m;
                    next[cell(v1 - 1, v2 - 1)] += q;
                    next[cell(v1 - 1, v2 + 1)] += q;
                    next[cell(v1 + 1, v2 - 1)] += q;
                    next[cell(v1 + 1, v2 + 1)] += q;
                }
                continue;
            }
            for (std::int64_t v2 = lo2; v2 <= hi2; ++v2) {
                const double m = cur[cell(0, v2)];
                if (m == 0.0) continue;
                const double xi = static_cast<double>(v2) * inv_root;
                field.evaluate(std::span<const double>(&xi, 1), beta);
                const StepLaw law = step_law_from_beta(beta);
                for (int u1 : {-1, 1}) {
                    const double p1 = u1 > 0 ? law.probs[0].up : law.probs[0].down;
                    for (int u2 : {-1, 1}) {
                        const double p2 = u2 > 0 ? law.probs[1].up : law.probs[1].down;
                        const std::int64_t t2 = v2 + law.shift[1] + u2;
                        if (p1 * p2 == 0.0) continue;
                        if (t2 < o2 || t2 >= o2 + cols)
                            throw Error(ErrorCode::BudgetExceeded, "transverse shift exceeds oracle window");
                        next[cell(u1, t2)] += p1 * p2 * m;
                    }
                }
            }
        }
        std::swap(cur, next);
    }

    LatticeLaw law;
    law.dim = 2;
    law.n = setup.n;
    law.steps = k;
    for (std::int64_t v1 = o1; v1 < o1 + rows; ++v1)
        for (std::int64_t v2 = o2; v2 < o2 + cols; ++v2) {
            const double m = cur[cell(v1, v2)];
            if (m > 0.0) {
                law.support.push_back(v1);
                law.support.push_back(v2);
                law.mass.push_back(m);
            }
        }
    return law;
}

}  // namespace detail

/// Exact law of X^n_k by pushing every state's mass through its one-step law.
/// Supports d <= 2 (d = 2 up to kMaxOracleSteps2d steps).
template <SurfaceField F>
LatticeLaw exact_chain_law(const ChainSetup& setup, const F& field, std::int64_t k) {
    if (setup.dim > 2) throw Error(ErrorCode::DimensionTooLarge, "exact oracle supports d <= 2");
    if (k < 0) throw Error(ErrorCode::NonPositive, "step count must be >= 0");
    return setup.dim == 1 ? detail::exact_law_1d(setup, field, k) : detail::exact_law_2d(setup, field, k);
}

inline LatticeLaw exact_chain_law(const ValidatedConfig& cfg, std::int64_t k) {
    return exact_chain_law(ChainSetup::from(cfg), cfg.field(), k);
}

struct SignProbability {
    double minus = 0.0;
    double zero = 0.0;
    double plus = 0.0;

    /// p+ / (p+ + p-), the lattice atom at 0 removed.
    [[nodiscard]] double positive_fraction() const { return plus / (plus + minus); }
};

inline SignProbability sign_probability(const LatticeLaw& law) {
    SignProbability s;
    for (std::size_t j = 0; j < law.size(); ++j) {
        const auto v = law.state(j)[0];
        (v > 0 ? s.plus : v < 0 ? s.minus : s.zero) += law.mass[j];
    }
    return s;
}

// ============================================================================
// One-dimensional distributions
// ============================================================================

/// Finitely supported distribution on R with sorted atoms.
struct DiscreteDistribution {
    std::vector<double> atoms;
    std::vector<double> cumulative;  // P(X <= atoms[j])

    [[nodiscard]] double cdf(double x) const {
        const auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
        if (it == atoms.begin()) return 0.0;
        return cumulative[static_cast<std::size_t>(it - atoms.begin()) - 1];
    }
    [[nodiscard]] double mass(std::size_t j) const { return j == 0 ? cumulative[0] : cumulative[j] - cumulative[j - 1]; }
};

/// Marginal law of coordinate i of X-bar = X / sqrt(n).
inline DiscreteDistribution marginal(const LatticeLaw& law, std::size_t coordinate) {
    std::vector<std::pair<std::int64_t, double>> pts;
    pts.reserve(law.size());
    for (std::size_t j = 0; j < law.size(); ++j) pts.emplace_back(law.state(j)[coordinate], law.mass[j]);
    std::sort(pts.begin(), pts.end());
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(law.n));
    DiscreteDistribution d;
    double acc = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        acc += pts[j].second;
        if (j + 1 < pts.size() && pts[j + 1].first == pts[j].first) continue;
        d.atoms.push_back(static_cast<double>(pts[j].first) * inv_root);
        d.cumulative.push_back(acc);
    }
    return d;
}

inline double normal_cdf(double x, double mean = 0.0, double variance = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

/// Law at time t of skew Brownian motion from 0 with P(X > 0) = alpha:
/// density 2 alpha phi_t on (0, inf) and 2 (1 - alpha) phi_t on (-inf, 0).
class SkewBmCdf {
public:
    SkewBmCdf(double alpha, double t) : alpha_(alpha), t_(t) {}

    [[nodiscard]] double operator()(double y) const {
        const double phi = normal_cdf(y, 0.0, t_);
        if (y < 0.0) return 2.0 * (1.0 - alpha_) * phi;
        return (1.0 - alpha_) + 2.0 * alpha_ * (phi - 0.5);
    }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double time() const { return t_; }

private:
    double alpha_;
    double t_;
};

inline SkewBmCdf skew_bm_reference_cdf(double alpha, double t) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::AlphaRange, "alpha must lie in [0, 1]");
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositive, "t must be positive");
    return SkewBmCdf(alpha, t);
}

/// E L(t) for reflected Brownian motion from 0, i.e. E|N(0, t)|, by
/// adaptive Gauss-Kronrod quadrature of 2 y phi_t(y) over (0, inf).
inline double reflected_local_time_mean(double t) {
    if (!(t > 0.0)) return 0.0;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
    auto integrand = [&](double y) { return 2.0 * y * norm * std::exp(-y * y / (2.0 * t)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

// ============================================================================
// Empirical laws and distances
// ============================================================================

struct EmpiricalLaw {
    std::vector<double> sorted;

    [[nodiscard]] std::size_t size() const { return sorted.size(); }
    [[nodiscard]] double cdf(double x) const {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
        return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
    }
};

inline EmpiricalLaw make_empirical(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return {std::move(values)};
}

/// Kolmogorov-Smirnov distance to a continuous CDF: both one-sided gaps at
/// every sample point.
template <typename Cdf>
double ks_distance(const EmpiricalLaw& emp, const Cdf& ref) {
    if (emp.sorted.empty()) throw Error(ErrorCode::EmptySample, "empty sample");
    const auto m = static_cast<double>(emp.size());
    double d = 0.0;
    for (std::size_t i = 0; i < emp.size(); ++i) {
        const double f = ref(emp.sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

/// KS distance for a sample supported on a lattice, with the continuity
/// correction: each atom v stands for the cell [v - h, v + h], so F_m(v) is
/// compared with ref(v + h) and F_m(v-) with ref(v - h).
template <typename Cdf>
double ks_distance_lattice(const EmpiricalLaw& emp, const Cdf& ref, double half_width) {
    if (emp.sorted.empty()) throw Error(ErrorCode::EmptySample, "empty sample");
    const auto m = static_cast<double>(emp.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < emp.size()) {
        std::size_t j = i;
        while (j < emp.size() && emp.sorted[j] == emp.sorted[i]) ++j;
        const double v = emp.sorted[i];
        d = std::max({d, std::abs(static_cast<double>(j) / m - ref(v + half_width)),
                      std::abs(static_cast<double>(i) / m - ref(v - half_width))});
        i = j;
    }
    return d;
}

/// Sup distance between two right-continuous step CDFs given by their jump
/// points; evaluated at every jump of either.
template <typename CdfA, typename CdfB>
double step_sup_distance(std::span<const double> jumps_a, std::span<const double> jumps_b, const CdfA& a,
                         const CdfB& b) {
    std::vector<double> pts(jumps_a.begin(), jumps_a.end());
    pts.insert(pts.end(), jumps_b.begin(), jumps_b.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double d = 0.0;
    for (double x : pts) d = std::max(d, std::abs(a(x) - b(x)));
    return d;
}

inline double ks_distance(const EmpiricalLaw& emp, const DiscreteDistribution& ref) {
    if (emp.sorted.empty()) throw Error(ErrorCode::EmptySample, "empty sample");
    return step_sup_distance(
        emp.sorted, ref.atoms, [&](double x) { return emp.cdf(x); }, [&](double x) { return ref.cdf(x); });
}

inline double ks_two_sample(const EmpiricalLaw& a, const EmpiricalLaw& b) {
    if (a.sorted.empty() || b.sorted.empty()) throw Error(ErrorCode::EmptySample, "empty sample");
    return step_sup_distance(
        a.sorted, b.sorted, [&](double x) { return a.cdf(x); }, [&](double x) { return b.cdf(x); });
}

/// Sup distance between a lattice law and a continuous CDF: right values and
/// left limits at every atom.
template <typename Cdf>
double sup_distance(const DiscreteDistribution& law, const Cdf& ref) {
    double d = 0.0;
    double below = 0.0;
    for (std::size_t j = 0; j < law.atoms.size(); ++j) {
        const double f = ref(law.atoms[j]);
        d = std::max({d, std::abs(law.cumulative[j] - f), std::abs(below - f)});
        below = law.cumulative[j];
    }
    return d;
}

/// Dvoretzky-Kiefer-Wolfowitz band: P(sup|F_m - F| > eps) <= 1 - confidence.
inline double dkw_band(std::int64_t m, double confidence) {
    if (m < 1) throw Error(ErrorCode::EmptySample, "DKW band needs m >= 1");
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(m)));
}

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0;
};

inline MeanEstimate sample_mean(std::span<const double> v) {
    MeanEstimate r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / static_cast<double>(v.size());
    double q = 0.0;
    for (double x : v) q += (x - r.mean) * (x - r.mean);
    if (v.size() > 1) {
        r.variance = q / static_cast<double>(v.size() - 1);
        r.std_error = std::sqrt(r.variance / static_cast<double>(v.size()));
    }
    return r;
}

}  // namespace skewsim
