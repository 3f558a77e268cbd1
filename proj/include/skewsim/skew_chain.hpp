#pragma once

/// @file skew_chain.hpp
/// @brief The lattice skew random walk and its coupled processes.
///
/// Off the hyperplane {v_1 = 0} the chain is a simple random walk on Z^d.
/// On it, coordinate 1 steps +1 with probability (1 + b_1)/2 and every other
/// coordinate i takes the even shift bar(b_i) plus a +-1 step biased by the
/// fractional part hat(b_i), so that the conditional mean step is exactly
/// b(v'/sqrt(n)). The chain is coupled with a plain random walk W that shares
/// its increments off the hyperplane and draws fresh ones on it.
///
/// Draw order per step (see rng.hpp for the two draw kinds):
///   off the hyperplane: sign() for coordinates 1..d;
///   on the hyperplane:  uniform() for coordinates 1..d, then sign() for the
///                       d coupled walk increments, then sign() for zeta.

#include "skewsim/core.hpp"
#include "skewsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skewsim {

/// beta = bar + hat with bar in 2Z and hat in [-1, 1].
struct BetaDecomposition {
    std::int64_t bar = 0;
    double hat = 0.0;
};

inline BetaDecomposition decompose_beta(double beta) {
    if (!std::isfinite(beta)) throw Error(ErrorCode::NonFinite, "beta must be finite");
    const double bar = 2.0 * std::floor((beta + 1.0) / 2.0);
    return {static_cast<std::int64_t>(bar), beta - bar};
}

struct CoordinateProbs {
    double up = 0.5;    // p_{i,1}
    double down = 0.5;  // p_{i,-1}
};

/// Transition law on the hyperplane at in-plane position xi.
struct StepLaw {
    std::vector<std::int64_t> shift;  // shift[0] == 0
    std::vector<CoordinateProbs> probs;

    /// shift_i + p_up - p_down; equals b_i(xi).
    [[nodiscard]] double mean(std::size_t i) const {
        return static_cast<double>(shift[i]) + (probs[i].up - probs[i].down);
    }
};

namespace detail {

inline void check_b1(double b1) {
    if (!(b1 >= -1.0 && b1 <= 1.0))
        throw Error(ErrorCode::B1Range, "b_1 = " + std::to_string(b1) + " outside [-1, 1]");
}

inline StepLaw step_law_from_beta(std::span<const double> beta) {
    StepLaw law;
    const std::size_t d = beta.size();
    law.shift.assign(d, 0);
    law.probs.resize(d);
    check_b1(beta[0]);
    law.probs[0] = {(1.0 + beta[0]) / 2.0, (1.0 - beta[0]) / 2.0};
    for (std::size_t i = 1; i < d; ++i) {
        const auto dec = decompose_beta(beta[i]);
        law.shift[i] = dec.bar;
        law.probs[i] = {(1.0 + dec.hat) / 2.0, (1.0 - dec.hat) / 2.0};
    }
    return law;
}

/// Samples the on-hyperplane increment by per-coordinate inverse CDF.
inline void sample_surface_increment(std::span<const double> beta, PathStream& rng, std::span<std::int64_t> dx) {
    check_b1(beta[0]);
    dx[0] = rng.uniform() < (1.0 + beta[0]) / 2.0 ? 1 : -1;
    for (std::size_t i = 1; i < beta.size(); ++i) {
        const auto dec = decompose_beta(beta[i]);
        dx[i] = dec.bar + (rng.uniform() < (1.0 + dec.hat) / 2.0 ? 1 : -1);
    }
}

}  // namespace detail

template <SurfaceField F>
StepLaw step_law(std::span<const double> xi, const F& field) {
    std::vector<double> beta(field.dimension());
    field.evaluate(xi, beta);
    return detail::step_law_from_beta(beta);
}

/// One atom of a one-step transition law.
struct StepAtom {
    std::vector<std::int64_t> increment;
    double probability = 0.0;
};

/// Exact one-step law of the chain from lattice state v: 2^d atoms.
template <SurfaceField F>
std::vector<StepAtom> one_step_law(std::span<const std::int64_t> v, long long n, const F& field) {
    const std::size_t d = v.size();
    const std::size_t count = std::size_t{1} << d;
    std::vector<StepAtom> atoms(count);
    if (v[0] != 0) {
        const double p = 1.0 / static_cast<double>(count);
        for (std::size_t mask = 0; mask < count; ++mask) {
            atoms[mask].increment.resize(d);
            for (std::size_t i = 0; i < d; ++i) atoms[mask].increment[i] = (mask >> i) & 1U ? 1 : -1;
            atoms[mask].probability = p;
        }
        return atoms;
    }
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> xi(d - 1);
    for (std::size_t i = 1; i < d; ++i) xi[i - 1] = static_cast<double>(v[i]) * inv_root;
    const StepLaw law = step_law(xi, field);
    for (std::size_t mask = 0; mask < count; ++mask) {
        auto& atom = atoms[mask];
        atom.increment.resize(d);
        atom.probability = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const bool up = (mask >> i) & 1U;
            atom.increment[i] = law.shift[i] + (up ? 1 : -1);
            atom.probability *= up ? law.probs[i].up : law.probs[i].down;
        }
    }
    return atoms;
}

/// Draws X_{k+1} given X_k = state.
template <SurfaceField F>
std::vector<std::int64_t> chain_step(std::span<const std::int64_t> state, long long n, const F& field,
                                     PathStream& rng) {
    const std::size_t d = state.size();
    std::vector<std::int64_t> next(state.begin(), state.end());
    std::vector<std::int64_t> dx(d);
    if (state[0] != 0) {
        for (std::size_t i = 0; i < d; ++i) dx[i] = rng.sign();
    } else {
        const double inv_root = 1.0 / std::sqrt(static_cast<double>(n));
        std::vector<double> xi(d - 1), beta(d);
        for (std::size_t i = 1; i < d; ++i) xi[i - 1] = static_cast<double>(state[i]) * inv_root;
        field.evaluate(xi, beta);
        detail::sample_surface_increment(beta, rng, dx);
    }
    for (std::size_t i = 0; i < d; ++i) next[i] += dx[i];
    return next;
}

// ============================================================================
// Path walker
// ============================================================================

/// Everything needed to drive one path of the chain.
struct ChainSetup {
    std::size_t dim = 1;
    long long n = 1;
    std::int64_t steps = 0;
    std::vector<std::int64_t> start{0};
    std::uint64_t seed = 0;

    static ChainSetup from(const ValidatedConfig& cfg) {
        return {cfg.dimension(), cfg.n(), cfg.steps(), cfg.lattice_start(), cfg.seed()};
    }
};

/// What the walker reports for step k (before the state is advanced).
struct StepEvent {
    std::int64_t k = 0;
    std::span<const std::int64_t> state;  // X_k
    std::span<const std::int64_t> dx;     // X_{k+1} - X_k
    std::span<const std::int64_t> dw;     // W_{k+1} - W_k
    bool on_surface = false;
    int zeta = 0;                         // +-1 randomizer on the hyperplane, else 0
    std::span<const double> beta;         // b(Y_k / sqrt n) on the hyperplane, else empty
};

/// Runs path `path_index` to `setup.steps` steps, calling visit(StepEvent)
/// at every step. The visitor sees X_k and the increments that lead to X_{k+1}.
template <SurfaceField F, typename Visitor>
void walk_chain(const ChainSetup& setup, const F& field, std::uint64_t path_index, Visitor&& visit) {
    const std::size_t d = setup.dim;
    PathStream rng(setup.seed, path_index);
    std::vector<std::int64_t> x(setup.start), dx(d), dw(d);
    std::vector<double> xi(d - 1), beta(d);
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));

    for (std::int64_t k = 0; k < setup.steps; ++k) {
        if (x[0] != 0) {
            for (std::size_t i = 0; i < d; ++i) dx[i] = rng.sign();
            visit(StepEvent{k, x, dx, dx, false, 0, {}});
        } else {
            for (std::size_t i = 1; i < d; ++i) xi[i - 1] = static_cast<double>(x[i]) * inv_root;
            field.evaluate(xi, beta);
            detail::sample_surface_increment(beta, rng, dx);
            for (std::size_t i = 0; i < d; ++i) dw[i] = rng.sign();
            const int zeta = rng.sign();
            visit(StepEvent{k, x, dx, dw, true, zeta, beta});
        }
        for (std::size_t i = 0; i < d; ++i) x[i] += dx[i];
    }
}

/// Specialised d = 1 loop; identical draws to walk_chain, only the local
/// time and terminal position are reported. Returns {X_K, L_K}.
template <SurfaceField F>
std::pair<std::int64_t, std::int64_t> walk_chain_1d(const ChainSetup& setup, const F& field,
                                                    std::uint64_t path_index,
                                                    std::span<const std::int64_t> checkpoints = {},
                                                    std::span<std::int64_t> local_time_at = {}) {
    PathStream rng(setup.seed, path_index);
    double beta = 0.0;
    field.evaluate(std::span<const double>{}, std::span<double>(&beta, 1));
    detail::check_b1(beta);
    const double p_up = (1.0 + beta) / 2.0;
    std::int64_t x = setup.start[0];
    std::int64_t l = 0;
    std::size_t next_cp = 0;
    for (std::int64_t k = 0; k < setup.steps; ++k) {
        while (next_cp < checkpoints.size() && checkpoints[next_cp] == k) local_time_at[next_cp++] = l;
        if (x != 0) {
            x += rng.sign();
        } else {
            x += rng.uniform() < p_up ? 1 : -1;
            rng.sign();  // coupled walk increment
            rng.sign();  // zeta
            ++l;
        }
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= setup.steps) local_time_at[next_cp++] = l;
    return {x, l};
}

// ============================================================================
// Full lattice runs
// ============================================================================

struct SurfaceVisit {
    std::int64_t k = 0;
    std::vector<double> beta;        // b(Y_k / sqrt n)
    std::vector<double> martingale;  // M_k = dX_k - beta
};

/// One realization of the chain with its coupled processes. Arrays are
/// indexed by step k = 0..steps; vector-valued ones are row-major (k, i).
struct LatticeRun {
    std::size_t dim = 1;
    long long n = 1;
    std::int64_t steps = 0;
    std::vector<std::int64_t> x;
    std::vector<std::int64_t> w;
    std::vector<std::int64_t> l;
    // Recorded only with diagnostics on.
    bool diagnostics = false;
    std::vector<std::int64_t> z;
    std::vector<std::int64_t> zstar;
    std::vector<SurfaceVisit> visits;

    [[nodiscard]] std::span<const std::int64_t> state(std::int64_t k) const {
        return {x.data() + k * static_cast<std::int64_t>(dim), dim};
    }
    [[nodiscard]] std::span<const std::int64_t> walk(std::int64_t k) const {
        return {w.data() + k * static_cast<std::int64_t>(dim), dim};
    }
    [[nodiscard]] std::int64_t u(std::int64_t k) const { return x[static_cast<std::size_t>(k) * dim]; }
};

struct RunOptions {
    bool diagnostics = false;
};

constexpr int sgn(std::int64_t v) { return (v > 0) - (v < 0); }

template <SurfaceField F>
LatticeRun run_chain(const ChainSetup& setup, const F& field, std::uint64_t path_index, RunOptions opts = {}) {
    const std::size_t d = setup.dim;
    const auto rows = static_cast<std::size_t>(setup.steps + 1);
    LatticeRun run;
    run.dim = d;
    run.n = setup.n;
    run.steps = setup.steps;
    run.diagnostics = opts.diagnostics;
    run.x.resize(rows * d);
    run.w.assign(rows * d, 0);
    run.l.assign(rows, 0);
    std::copy(setup.start.begin(), setup.start.end(), run.x.begin());
    if (opts.diagnostics) {
        run.z.assign(rows, 0);
        run.zstar.assign(rows, 0);
    }

    walk_chain(setup, field, path_index, [&](const StepEvent& e) {
        const auto k = static_cast<std::size_t>(e.k);
        for (std::size_t i = 0; i < d; ++i) {
            run.x[(k + 1) * d + i] = e.state[i] + e.dx[i];
            run.w[(k + 1) * d + i] = run.w[k * d + i] + e.dw[i];
        }
        run.l[k + 1] = run.l[k] + (e.on_surface ? 1 : 0);
        if (!opts.diagnostics) return;
        const std::int64_t dz = sgn(e.state[0]) * e.dx[0];
        run.z[k + 1] = run.z[k] + dz;
        run.zstar[k + 1] = run.zstar[k] + (e.on_surface ? e.zeta : dz);
        if (e.on_surface) {
            SurfaceVisit visit{e.k, {e.beta.begin(), e.beta.end()}, std::vector<double>(d)};
            for (std::size_t i = 0; i < d; ++i)
                visit.martingale[i] = static_cast<double>(e.dx[i]) - e.beta[i];
            run.visits.push_back(std::move(visit));
        }
    });
    return run;
}

template <SurfaceField F>
LatticeRun run_chain(const ValidatedConfig& cfg, const F& field, std::uint64_t path_index, RunOptions opts = {}) {
    return run_chain(ChainSetup::from(cfg), field, path_index, opts);
}

inline LatticeRun run_chain(const ValidatedConfig& cfg, std::uint64_t path_index, RunOptions opts = {}) {
    return run_chain(ChainSetup::from(cfg), cfg.field(), path_index, opts);
}

/// Result of checking the pathwise identities of a diagnostic run.
struct IdentityReport {
    bool coupling = true;         // X_k = x + sum(dW 1{U != 0} + dX 1{U = 0})
    bool abs_u = true;            // |U_k| = |x_1| + Z_k + L_k
    bool zstar_steps = true;      // Z* increments in {-1, +1}
    bool martingale_bound = true; // |M_i| <= (3 + 2 sup|b|) sqrt(d)
    bool local_time = true;       // L_0 = 0, nondecreasing, counts visits
    std::string first_failure;

    [[nodiscard]] bool ok() const { return coupling && abs_u && zstar_steps && martingale_bound && local_time; }
};

/// Checks every LatticeRun invariant in exact integer arithmetic. Needs a
/// run recorded with diagnostics on; `sup_beta` bounds the field norm.
inline IdentityReport check_lattice_identities(const LatticeRun& run, double sup_beta) {
    IdentityReport rep;
    auto fail = [&](bool& flag, const std::string& what, std::int64_t k) {
        if (flag && rep.first_failure.empty()) rep.first_failure = what + " at k=" + std::to_string(k);
        flag = false;
    };
    if (!run.diagnostics) {
        rep.first_failure = "run has no diagnostics";
        rep.abs_u = rep.zstar_steps = rep.martingale_bound = false;
    }
    const std::size_t d = run.dim;
    std::vector<std::int64_t> rebuilt(run.state(0).begin(), run.state(0).end());
    const std::int64_t abs_x1 = std::abs(run.u(0));
    if (run.l[0] != 0) fail(rep.local_time, "L_0 != 0", 0);
    for (std::int64_t k = 0; k < run.steps; ++k) {
        const bool on = run.u(k) == 0;
        const auto xk = run.state(k);
        const auto xk1 = run.state(k + 1);
        const auto wk = run.walk(k);
        const auto wk1 = run.walk(k + 1);
        for (std::size_t i = 0; i < d; ++i)
            rebuilt[i] += on ? (xk1[i] - xk[i]) : (wk1[i] - wk[i]);
        if (!std::equal(rebuilt.begin(), rebuilt.end(), xk1.begin())) fail(rep.coupling, "coupling identity", k + 1);
        if (run.l[k + 1] - run.l[k] != (on ? 1 : 0)) fail(rep.local_time, "local time increment", k + 1);
        if (!run.diagnostics) continue;
        if (std::abs(run.u(k + 1)) != abs_x1 + run.z[k + 1] + run.l[k + 1]) fail(rep.abs_u, "|U| identity", k + 1);
        const auto dzs = run.zstar[k + 1] - run.zstar[k];
        if (dzs != 1 && dzs != -1) fail(rep.zstar_steps, "Z* increment", k + 1);
    }
    if (run.diagnostics) {
        const double bound = (3.0 + 2.0 * sup_beta) * std::sqrt(static_cast<double>(d));
        for (const auto& v : run.visits)
            for (double m : v.martingale)
                if (std::abs(m) > bound) fail(rep.martingale_bound, "martingale bound", v.k);
    }
    return rep;
}

}  // namespace skewsim
