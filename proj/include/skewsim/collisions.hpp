#pragma once

/// @file collisions.hpp
/// @brief Two Brownian particles with skew-elastic collisions.
///
/// With Y = X1 - X2 and U = X1 + X2 the particle system becomes a planar
/// skew Brownian motion in (Y, U) with skew coordinate Y, driven by the
/// standard motions W1 = (B1 - B2)/sqrt2 and W2 = (B1 + B2)/sqrt2. The 1/sqrt2
/// diffusion of each particle lives entirely in the linear maps below; the
/// engine always runs with unit diffusion.

#include "skewsim/core.hpp"
#include "skewsim/ensemble.hpp"
#include "skewsim/girsanov.hpp"
#include "skewsim/skew_chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace skewsim {

/// psi(u, y) = ((u + y)/2, (u - y)/2): (U, Y) back to (X1, X2).
constexpr std::array<double, 2> psi(double u, double y) { return {(u + y) / 2.0, (u - y) / 2.0}; }

struct CollisionCoefficients {
    double zeta = 1.0;
    double eta = 1.0;
    double zeta_bar = 0.0;
    double eta_bar = 0.0;
    double alpha = 0.5;
    double beta1 = 0.0;  // 2 alpha - 1
    double beta2 = 0.0;  // zeta_bar alpha + eta_bar (1 - alpha)
};

/// Square grid on which the coefficient constraints are checked up front.
struct ValidationGrid {
    double lo = -5.0;
    double hi = 5.0;
    int points = 41;
};

class CollisionModel {
public:
    explicit CollisionModel(CollisionSpec spec, ValidationGrid grid = {}) : spec_(std::move(spec)) {
        for (const auto* p : {&spec_.k1, &spec_.k2, &spec_.zeta1, &spec_.zeta2, &spec_.eta1, &spec_.eta2})
            if (auto e = p->shape_error()) throw Error(ErrorCode::DimensionMismatch, *e);
        const int pts = std::max(grid.points, 1);
        const double h = pts > 1 ? (grid.hi - grid.lo) / (pts - 1) : 0.0;
        for (int a = 0; a < pts; ++a)
            for (int b = 0; b < pts; ++b) (void)derive(grid.lo + a * h, grid.lo + b * h);
    }

    [[nodiscard]] const CollisionSpec& spec() const { return spec_; }

    /// All derived coefficients at x; throws CONSTRAINT_VIOLATION when
    /// zeta < 0, eta < 0 or zeta + eta = 0.
    [[nodiscard]] CollisionCoefficients derive(double x1, double x2) const {
        const double z1 = spec_.zeta1(x1, x2), z2 = spec_.zeta2(x1, x2);
        const double e1 = spec_.eta1(x1, x2), e2 = spec_.eta2(x1, x2);
        CollisionCoefficients c;
        c.zeta = 1.0 + (z1 - z2) / 2.0;
        c.eta = 1.0 - (e1 - e2) / 2.0;
        c.zeta_bar = 1.0 - (z1 + z2) / 2.0;
        c.eta_bar = 1.0 - (e1 + e2) / 2.0;
        if (c.zeta < 0.0 || c.eta < 0.0 || !(c.zeta + c.eta > 0.0))
            throw Error(ErrorCode::ConstraintViolation, "collision coefficients at (" + std::to_string(x1) + ", "
                                                            + std::to_string(x2) + "): zeta = " + std::to_string(c.zeta)
                                                            + ", eta = " + std::to_string(c.eta));
        c.alpha = c.eta / (c.eta + c.zeta);
        c.beta1 = 2.0 * c.alpha - 1.0;
        c.beta2 = c.zeta_bar * c.alpha + c.eta_bar * (1.0 - c.alpha);
        return c;
    }

    [[nodiscard]] double k1(double x1, double x2) const { return spec_.k1(x1, x2); }
    [[nodiscard]] double k2(double x1, double x2) const { return spec_.k2(x1, x2); }
    [[nodiscard]] bool has_drift() const {
        return spec_.k1.family() != Family::Zero || spec_.k2.family() != Family::Zero;
    }

    /// Upper bound on |beta2|.
    [[nodiscard]] double beta2_bound() const {
        const double zb = 1.0 + (spec_.zeta1.bound() + spec_.zeta2.bound()) / 2.0;
        const double eb = 1.0 + (spec_.eta1.bound() + spec_.eta2.bound()) / 2.0;
        return std::max(zb, eb);
    }

private:
    CollisionSpec spec_;
};

inline CollisionCoefficients derive_coefficients(const CollisionModel& model, std::array<double, 2> x) {
    return model.derive(x[0], x[1]);
}

/// The collision model as coefficients of the (Y, U) skew equation.
class SkewForm {
public:
    explicit SkewForm(const CollisionModel& model) : model_(&model) {}

    /// b1(u) = beta1(psi(u, 0)).
    [[nodiscard]] double b1(double u) const { return at_surface(u).beta1; }
    /// b2(u) = beta2(psi(u, 0)).
    [[nodiscard]] double b2(double u) const { return at_surface(u).beta2; }
    /// a1(u, y) = (k1 - k2)(psi(u, y)).
    [[nodiscard]] double a1(double u, double y) const {
        const auto x = psi(u, y);
        return model_->k1(x[0], x[1]) - model_->k2(x[0], x[1]);
    }
    /// a2(u, y) = (k1 + k2)(psi(u, y)).
    [[nodiscard]] double a2(double u, double y) const {
        const auto x = psi(u, y);
        return model_->k1(x[0], x[1]) + model_->k2(x[0], x[1]);
    }
    [[nodiscard]] double alpha(double u) const { return at_surface(u).alpha; }
    [[nodiscard]] CollisionCoefficients at_surface(double u) const {
        const auto x = psi(u, 0.0);
        return model_->derive(x[0], x[1]);
    }
    [[nodiscard]] const CollisionModel& model() const { return *model_; }

    /// Local-time field for the engine: xi = (u), value (b1(u), b2(u)).
    class Field {
    public:
        explicit Field(const SkewForm& form) : form_(&form) {}
        [[nodiscard]] std::size_t dimension() const { return 2; }
        [[nodiscard]] double sup_norm() const {
            const double b2 = form_->model().beta2_bound();
            return std::sqrt(1.0 + b2 * b2);
        }
        void evaluate(std::span<const double> xi, std::span<double> out) const {
            const auto c = form_->at_surface(xi[0]);
            out[0] = c.beta1;
            out[1] = c.beta2;
        }

    private:
        const SkewForm* form_;
    };

    /// Drift for the engine, evaluated at engine state (y, u).
    class Drift {
    public:
        explicit Drift(const SkewForm& form) : form_(&form) {}
        [[nodiscard]] std::size_t dimension() const { return 2; }
        void evaluate(std::span<const double> state, std::span<double> out) const {
            out[0] = form_->a1(state[1], state[0]);
            out[1] = form_->a2(state[1], state[0]);
        }

    private:
        const SkewForm* form_;
    };

    [[nodiscard]] Field field() const { return Field(*this); }
    [[nodiscard]] Drift drift() const { return Drift(*this); }

private:
    const CollisionModel* model_;
};

inline SkewForm to_skew_form(const CollisionModel& model) { return SkewForm(model); }

/// L+ = sum alpha_k dL_k and L- = sum (1 - alpha_k) dL_k, alpha sampled at
/// the left end of each grid interval.
inline std::pair<std::vector<double>, std::vector<double>> split_local_times(std::span<const double> l,
                                                                             std::span<const double> alpha) {
    if (alpha.size() < l.size()) throw Error(ErrorCode::DimensionMismatch, "alpha shorter than local time path");
    std::vector<double> plus(l.size(), 0.0), minus(l.size(), 0.0);
    for (std::size_t k = 1; k < l.size(); ++k) {
        const double dl = l[k] - l[k - 1];
        plus[k] = plus[k - 1] + alpha[k - 1] * dl;
        minus[k] = minus[k - 1] + (1.0 - alpha[k - 1]) * dl;
    }
    return {plus, minus};
}

/// Engine start (Y, U) from particle positions (x1, x2).
inline ChainSetup particle_chain_setup(const ValidatedConfig& cfg) {
    const auto& x0 = cfg.raw().start;
    const double ys[2] = {x0[0] - x0[1], x0[0] + x0[1]};
    ChainSetup s = ChainSetup::from(cfg);
    s.start = lattice_start(ys, cfg.n());
    return s;
}

/// One particle path on the grid t_k = k / n.
struct ParticlePath {
    long long n = 1;
    std::int64_t steps = 0;
    std::vector<double> x1, x2;          // particles
    std::vector<double> y, u;            // engine coordinates
    std::vector<double> b1, b2;          // B recovered from the coupled walk
    std::vector<double> drive1, drive2;  // noise part of X1, X2: X - x0 - local-time push
    std::vector<double> push1, push2;    // cumulative local-time push into X1, X2
    std::vector<double> l, l_plus, l_minus;
    std::vector<double> alpha;           // alpha(psi(u, 0)) on the surface, else 0.5
    double weight = 1.0;
    bool x2_follows_drive = true;        // dX2 == d(drive2) at every step, exactly
};

/// Per-path summary used by ensembles.
struct ParticleSummary {
    double x1 = 0.0, x2 = 0.0;
    double l = 0.0, l_plus = 0.0, l_minus = 0.0;
    double max_push = 0.0;  // max_t max(|push1|, |push2|)
    double min_gap = 0.0;   // min_t (X1 - X2)
    double split_error = 0.0;
    bool x2_follows_drive = true;
    bool gap_sign_constant = true;  // sgn(Y) never flips between +1 and -1
    double weight = 1.0;
};

namespace detail {

/// Walks one path of the (Y, U) engine and hands per-step particle data to
/// `sink(k, y, u, dy, du, beta1, beta2, alpha, dw_y, dw_u, on_surface)`
/// with integer lattice increments.
template <typename Sink>
double walk_particles(const ChainSetup& setup, const SkewForm& form, std::uint64_t path_index, bool with_drift,
                      Sink&& sink) {
    const auto field = form.field();
    const auto drift = form.drift();
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));
    GirsanovAccumulator acc(drift, 1.0 / static_cast<double>(setup.n));
    double xs[2], dws[2];
    walk_chain(setup, field, path_index, [&](const StepEvent& e) {
        double alpha = 0.5, beta1 = 0.0, beta2 = 0.0;
        if (e.on_surface) {
            beta1 = e.beta[0];
            beta2 = e.beta[1];
            alpha = form.alpha(static_cast<double>(e.state[1]) * inv_root);
        }
        if (with_drift) {
            xs[0] = static_cast<double>(e.state[0]) * inv_root;
            xs[1] = static_cast<double>(e.state[1]) * inv_root;
            dws[0] = static_cast<double>(e.dw[0]) * inv_root;
            dws[1] = static_cast<double>(e.dw[1]) * inv_root;
            acc.add(xs, dws);
        }
        sink(e.k, e.state[0], e.state[1], e.dx[0], e.dx[1], beta1, beta2, alpha, e.dw[0], e.dw[1], e.on_surface);
    });
    return with_drift ? acc.weight() : 1.0;
}

}  // namespace detail

/// Full path of the particle system for path index j.
inline ParticlePath simulate_particle_path(const CollisionModel& model, const ValidatedConfig& cfg,
                                           std::uint64_t path_index) {
    const ChainSetup setup = particle_chain_setup(cfg);
    const SkewForm form(model);
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));
    const auto rows = static_cast<std::size_t>(setup.steps + 1);

    ParticlePath p;
    p.n = setup.n;
    p.steps = setup.steps;
    for (auto* v : {&p.x1, &p.x2, &p.y, &p.u, &p.b1, &p.b2, &p.drive1, &p.drive2, &p.push1, &p.push2, &p.l})
        v->assign(rows, 0.0);
    p.alpha.assign(rows, 0.5);

    // Integer lattice accumulators; pushes and drives are kept in units of 1/sqrt(n).
    std::int64_t y = setup.start[0], u = setup.start[1], wy = 0, wu = 0, l = 0;
    double push_y = 0.0, push_u = 0.0;
    auto store = [&](std::size_t k) {
        p.y[k] = static_cast<double>(y) * inv_root;
        p.u[k] = static_cast<double>(u) * inv_root;
        p.x1[k] = static_cast<double>(u + y) / 2.0 * inv_root;
        p.x2[k] = static_cast<double>(u - y) / 2.0 * inv_root;
        p.b1[k] = static_cast<double>(wu + wy) / std::sqrt(2.0) * inv_root;
        p.b2[k] = static_cast<double>(wu - wy) / std::sqrt(2.0) * inv_root;
        p.push1[k] = (push_u + push_y) / 2.0 * inv_root;
        p.push2[k] = (push_u - push_y) / 2.0 * inv_root;
        const double ny = static_cast<double>(y - setup.start[0]) - push_y;
        const double nu = static_cast<double>(u - setup.start[1]) - push_u;
        p.drive1[k] = (nu + ny) / 2.0 * inv_root;
        p.drive2[k] = (nu - ny) / 2.0 * inv_root;
        p.l[k] = static_cast<double>(l) * inv_root;
    };
    store(0);
    p.weight = detail::walk_particles(
        setup, form, path_index, model.has_drift(),
        [&](std::int64_t k, std::int64_t, std::int64_t, std::int64_t dy, std::int64_t du, double beta1, double beta2,
            double alpha, std::int64_t dwy, std::int64_t dwu, bool on) {
            const auto kk = static_cast<std::size_t>(k);
            p.alpha[kk] = alpha;
            // Exact lattice check: dX2 against the increment of the noise part of X2.
            const double dx2_twice = static_cast<double>(du - dy);
            const double drive_twice = on ? (static_cast<double>(du) - beta2) - (static_cast<double>(dy) - beta1)
                                          : static_cast<double>(du - dy);
            if (dx2_twice != drive_twice) p.x2_follows_drive = false;
            y += dy;
            u += du;
            wy += dwy;
            wu += dwu;
            if (on) {
                ++l;
                push_y += beta1;
                push_u += beta2;
            }
            store(kk + 1);
        });
    auto [lp, lm] = split_local_times(p.l, p.alpha);
    p.l_plus = std::move(lp);
    p.l_minus = std::move(lm);
    return p;
}

struct ParticleEnsemble {
    std::vector<ParticleSummary> paths;

    [[nodiscard]] std::vector<double> terminal_x1() const {
        std::vector<double> v(paths.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = paths[j].x1;
        return v;
    }
    [[nodiscard]] std::vector<double> terminal_x2() const {
        std::vector<double> v(paths.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = paths[j].x2;
        return v;
    }
    [[nodiscard]] std::vector<double> weights() const {
        std::vector<double> v(paths.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = paths[j].weight;
        return v;
    }
};

/// Streams every path of the particle system and keeps per-path summaries.
inline ParticleEnsemble simulate_particles(const CollisionModel& model, const ValidatedConfig& cfg, unsigned threads) {
    const ChainSetup setup = particle_chain_setup(cfg);
    const SkewForm form(model);
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));
    const bool with_drift = model.has_drift();

    ParticleEnsemble ens;
    ens.paths = parallel_map(cfg.paths(), threads, [&](std::int64_t j) {
        ParticleSummary s;
        std::int64_t y = setup.start[0], u = setup.start[1], l = 0;
        double push_y = 0.0, push_u = 0.0, l_plus = 0.0, l_minus = 0.0;
        std::int64_t min_y = y;
        int seen_sign = static_cast<int>(sgn(y));
        s.weight = detail::walk_particles(
            setup, form, static_cast<std::uint64_t>(j), with_drift,
            [&](std::int64_t, std::int64_t, std::int64_t, std::int64_t dy, std::int64_t du, double beta1,
                double beta2, double alpha, std::int64_t, std::int64_t, bool on) {
                const double dx2_twice = static_cast<double>(du - dy);
                const double drive_twice =
                    on ? (static_cast<double>(du) - beta2) - (static_cast<double>(dy) - beta1) : dx2_twice;
                if (dx2_twice != drive_twice) s.x2_follows_drive = false;
                y += dy;
                u += du;
                if (on) {
                    ++l;
                    push_y += beta1;
                    push_u += beta2;
                    l_plus += alpha * inv_root;
                    l_minus += (1.0 - alpha) * inv_root;
                }
                min_y = std::min(min_y, y);
                const int sy = static_cast<int>(sgn(y));
                if (sy != 0) {
                    if (seen_sign != 0 && sy != seen_sign) s.gap_sign_constant = false;
                    seen_sign = sy;
                }
                s.max_push = std::max({s.max_push, std::abs((push_u + push_y) / 2.0 * inv_root),
                                       std::abs((push_u - push_y) / 2.0 * inv_root)});
                s.split_error = std::max(s.split_error, std::abs(l_plus + l_minus - static_cast<double>(l) * inv_root));
            });
        s.x1 = static_cast<double>(u + y) / 2.0 * inv_root;
        s.x2 = static_cast<double>(u - y) / 2.0 * inv_root;
        s.l = static_cast<double>(l) * inv_root;
        s.l_plus = l_plus;
        s.l_minus = l_minus;
        s.min_gap = static_cast<double>(min_y) * inv_root;
        return s;
    });
    return ens;
}

}  // namespace skewsim
