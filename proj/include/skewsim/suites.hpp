#pragma once

/// @file suites.hpp
/// @brief Verification suites. Each one runs a fixed battery of checks for a
/// validated config and returns one line per check with its metrics. The
/// CLI `verify` command and the acceptance binary both call these.

#include "skewsim/collisions.hpp"
#include "skewsim/config_json.hpp"
#include "skewsim/core.hpp"
#include "skewsim/ensemble.hpp"
#include "skewsim/girsanov.hpp"
#include "skewsim/io.hpp"
#include "skewsim/oracles.hpp"
#include "skewsim/skew_chain.hpp"
#include "skewsim/skorohod.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace skewsim {

struct CriterionResult {
    std::string name;
    bool passed = false;
    json metrics = json::object();
};

struct SuiteReport {
    std::string suite;
    std::vector<CriterionResult> criteria;
    json info = json::object();

    CriterionResult& add(std::string name, bool passed, json metrics = json::object()) {
        criteria.push_back({std::move(name), passed, std::move(metrics)});
        return criteria.back();
    }

    [[nodiscard]] bool passed() const {
        return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
    }

    [[nodiscard]] json to_json() const {
        json j;
        j["suite"] = suite;
        j["passed"] = passed();
        j["info"] = info;
        json list = json::array();
        for (const auto& c : criteria) list.push_back({{"name", c.name}, {"passed", c.passed}, {"metrics", c.metrics}});
        j["criteria"] = list;
        return j;
    }
};

struct SuiteOptions {
    unsigned threads = 0;
    std::int64_t pathwise_runs = 100;
    std::int64_t one_step_cases = 100;
    long long coarse_n = 0;  // uniqueness-consistency; 0 means n / 10
    long long oracle_n = 256;
    double confidence = 0.99;
};

inline constexpr std::array<std::string_view, 7> kSuiteNames = {
    "pathwise", "one-step", "skew-law", "reflection", "girsanov", "collisions", "uniqueness-consistency"};

namespace detail {

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Same config with a different resolution, revalidated.
inline ValidatedConfig with_resolution(const ValidatedConfig& cfg, long long n) {
    SimConfig raw = cfg.raw();
    raw.resolution_n = n;
    return validate_config(raw).value();
}

inline bool constant_field(const FieldSpec& f) { return f.family() != Family::SigmoidAffine; }

inline double first_coefficient(const FieldSpec& f) { return f.family() == Family::Zero ? 0.0 : f.offset()[0]; }

inline void expect_input(bool ok, std::string_view suite, std::string_view what) {
    if (!ok) throw Error(ErrorCode::BadValue, std::string(suite) + " suite needs " + std::string(what));
}

}  // namespace detail

/// A random field with b_1 in [-1, 1] and transverse entries in [-5, 5].
inline FieldSpec random_field(std::mt19937_64& g, std::size_t d) {
    using detail::uniform_in;
    const bool sigmoid = d > 1 && std::bernoulli_distribution(0.6)(g);
    std::vector<double> c(d), a(d), w(d - 1);
    for (std::size_t i = 0; i < d; ++i) {
        if (i == 0) {
            const double total = uniform_in(g, 0.0, 1.0);
            const double share = sigmoid ? uniform_in(g, 0.0, 1.0) : 1.0;
            c[0] = (uniform_in(g, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * total * share;
            a[0] = uniform_in(g, -1.0, 1.0) * total * (1.0 - share);
        } else {
            c[i] = uniform_in(g, -3.0, 3.0);
            a[i] = uniform_in(g, -2.0, 2.0);
        }
    }
    for (auto& v : w) v = uniform_in(g, -2.0, 2.0);
    if (sigmoid) return FieldSpec::sigmoid_affine(c, a, w);
    return FieldSpec::constant(c);
}

// ============================================================================
// pathwise
// ============================================================================

struct PathwiseTally {
    std::int64_t runs = 0;
    std::int64_t coupling = 0, abs_u = 0, zstar = 0, martingale = 0, local_time = 0, tanaka = 0;
    double tanaka_max_error = 0.0;
    std::int64_t surface_visits = 0;
    std::string first_failure;

    void merge(const PathwiseTally& o) {
        runs += o.runs;
        coupling += o.coupling;
        abs_u += o.abs_u;
        zstar += o.zstar;
        martingale += o.martingale;
        local_time += o.local_time;
        tanaka += o.tanaka;
        tanaka_max_error = std::max(tanaka_max_error, o.tanaka_max_error);
        surface_visits += o.surface_visits;
        if (first_failure.empty()) first_failure = o.first_failure;
    }
};

/// Checks every pathwise identity on one diagnostic run.
template <SurfaceField F>
PathwiseTally check_pathwise_run(const ChainSetup& setup, const F& field, double horizon, std::uint64_t j) {
    PathwiseTally t;
    t.runs = 1;
    const LatticeRun run = run_chain(setup, field, j, {.diagnostics = true});
    const IdentityReport rep = check_lattice_identities(run, field.sup_norm());
    t.coupling = !rep.coupling;
    t.abs_u = !rep.abs_u;
    t.zstar = !rep.zstar_steps;
    t.martingale = !rep.martingale_bound;
    t.local_time = !rep.local_time;
    t.first_failure = rep.first_failure;
    t.surface_visits = static_cast<std::int64_t>(run.visits.size());

    const ScaledPath path = rescale(run, horizon);
    const auto l_tanaka = tanaka_local_time(path.coordinate(0));
    for (std::size_t k = 0; k < l_tanaka.size(); ++k)
        t.tanaka_max_error = std::max(t.tanaka_max_error, std::abs(l_tanaka[k] - path.l[k]));
    if (t.tanaka_max_error > 1e-12) {
        t.tanaka = 1;
        if (t.first_failure.empty()) t.first_failure = "tanaka local time";
    }
    return t;
}

namespace detail {

inline void report_pathwise(SuiteReport& r, const PathwiseTally& t) {
    auto line = [&](const char* name, std::int64_t failures) {
        r.add(name, failures == 0, {{"runs", t.runs}, {"failed_runs", failures}});
    };
    line("coupling identity X = x + sum dW 1{U!=0} + dX 1{U=0}", t.coupling);
    line("|U_k| = |x_1| + Z_k + L_k", t.abs_u);
    line("Z* increments in {-1, +1}", t.zstar);
    line("|M| <= (3 + 2 sup|b|) sqrt(d) on the hyperplane", t.martingale);
    line("L_0 = 0 and L counts hyperplane visits", t.local_time);
    r.add("tanaka local time of U-bar equals L-bar (1e-12)", t.tanaka == 0,
          {{"runs", t.runs}, {"failed_runs", t.tanaka}, {"max_abs_error", t.tanaka_max_error}});
    r.info["surface_visits"] = t.surface_visits;
    if (!t.first_failure.empty()) r.info["first_failure"] = t.first_failure;
}

}  // namespace detail

/// Pathwise identities on `runs` paths of the configured chain.
inline SuiteReport suite_pathwise(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    SuiteReport r;
    r.suite = "pathwise";
    const auto setup = ChainSetup::from(cfg);
    const auto tallies = parallel_map(opt.pathwise_runs, opt.threads, [&](std::int64_t j) {
        return check_pathwise_run(setup, cfg.field(), cfg.horizon(), static_cast<std::uint64_t>(j));
    });
    PathwiseTally total;
    for (const auto& t : tallies) total.merge(t);
    detail::report_pathwise(r, total);
    return r;
}

/// Pathwise identities on `runs` independent random problems: d cycles
/// through 1, 2, 3, each run draws its own field and start.
inline SuiteReport suite_pathwise_random(std::uint64_t seed, std::int64_t runs, long long n, unsigned threads) {
    SuiteReport r;
    r.suite = "pathwise";
    const auto tallies = parallel_map(runs, threads, [&](std::int64_t j) {
        std::mt19937_64 g(path_seed(seed ^ 0xA5A5A5A5ULL, static_cast<std::uint64_t>(j)));
        const std::size_t d = 1 + static_cast<std::size_t>(j % 3);
        const FieldSpec field = random_field(g, d);
        ChainSetup setup;
        setup.dim = d;
        setup.n = n;
        setup.steps = step_count(n, 1.0);
        setup.seed = seed;
        setup.start.assign(d, 0);
        // Half the runs start on the hyperplane, the rest a few steps away.
        if (j % 2 == 1) setup.start[0] = std::uniform_int_distribution<std::int64_t>(-20, 20)(g);
        for (std::size_t i = 1; i < d; ++i) setup.start[i] = std::uniform_int_distribution<std::int64_t>(-40, 40)(g);
        return check_pathwise_run(setup, field, 1.0, static_cast<std::uint64_t>(j));
    });
    PathwiseTally total;
    for (const auto& t : tallies) total.merge(t);
    detail::report_pathwise(r, total);
    r.info["resolution_n"] = n;
    return r;
}

// ============================================================================
// one-step
// ============================================================================

/// Enumerated one-step laws against the transition formulas, on random
/// states and fields. The expected probabilities are recomputed here from
/// b directly rather than through step_law.
inline SuiteReport suite_one_step(std::uint64_t seed, std::int64_t cases) {
    SuiteReport r;
    r.suite = "one-step";
    double mass_err = 0.0, prob_err = 0.0, mean_err = 0.0;
    std::int64_t on_surface = 0;
    for (std::int64_t c = 0; c < cases; ++c) {
        std::mt19937_64 g(path_seed(seed ^ 0x5EED5EEDULL, static_cast<std::uint64_t>(c)));
        const std::size_t d = 1 + static_cast<std::size_t>(c % 3);
        const FieldSpec field = random_field(g, d);
        const long long n = std::uniform_int_distribution<long long>(1, 10000)(g);
        std::vector<std::int64_t> v(d);
        for (auto& x : v) x = std::uniform_int_distribution<std::int64_t>(-60, 60)(g);
        if (c % 4 != 3) v[0] = 0;
        else if (v[0] == 0) v[0] = 1;

        const auto atoms = one_step_law(v, n, field);
        double mass = 0.0;
        std::vector<double> mean(d, 0.0);
        for (const auto& a : atoms) {
            mass += a.probability;
            for (std::size_t i = 0; i < d; ++i) mean[i] += a.probability * static_cast<double>(a.increment[i]);
        }
        mass_err = std::max(mass_err, std::abs(mass - 1.0));

        std::vector<double> beta(d, 0.0);
        if (v[0] == 0) {
            ++on_surface;
            std::vector<double> xi(d - 1);
            for (std::size_t i = 1; i < d; ++i) xi[i - 1] = static_cast<double>(v[i]) / std::sqrt(static_cast<double>(n));
            field.evaluate(xi, beta);
        }
        for (const auto& a : atoms) {
            double p = 1.0;
            for (std::size_t i = 0; i < d; ++i) {
                if (v[0] != 0) {
                    p *= 0.5;
                    continue;
                }
                const double shift = i == 0 ? 0.0 : 2.0 * std::floor((beta[i] + 1.0) / 2.0);
                const double frac = beta[i] - shift;
                const double step = static_cast<double>(a.increment[i]) - shift;
                p *= step > 0 ? (1.0 + frac) / 2.0 : (1.0 - frac) / 2.0;
            }
            prob_err = std::max(prob_err, std::abs(p - a.probability));
        }
        for (std::size_t i = 0; i < d; ++i) mean_err = std::max(mean_err, std::abs(mean[i] - beta[i]));
    }
    r.add("one-step law has unit mass (1e-12)", mass_err <= 1e-12, {{"cases", cases}, {"max_abs_error", mass_err}});
    r.add("one-step law matches transition probabilities (1e-12)", prob_err <= 1e-12,
          {{"cases", cases}, {"max_abs_error", prob_err}});
    r.add("conditional mean increment equals b on the hyperplane, 0 off it (1e-12)", mean_err <= 1e-12,
          {{"cases", cases}, {"on_surface_cases", on_surface}, {"max_abs_error", mean_err}});
    return r;
}

// ============================================================================
// skew-law
// ============================================================================

/// d = 1, constant b_1, start 0: Monte Carlo against the exact lattice law at
/// the same n, and the exact law against the skew Brownian motion CDF.
inline SuiteReport suite_skew_law(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    detail::expect_input(cfg.dimension() == 1 && detail::constant_field(cfg.field()) && cfg.lattice_start()[0] == 0
                        && cfg.drift().is_zero(),
                    "skew-law", "dimension 1, a constant field, zero drift and start 0");
    SuiteReport r;
    r.suite = "skew-law";
    const double b1 = detail::first_coefficient(cfg.field());
    const double alpha = (1.0 + b1) / 2.0;
    const LatticeLaw law = exact_chain_law(cfg, cfg.steps());
    const DiscreteDistribution exact = marginal(law, 0);

    const auto samples = run_terminal(cfg, opt.threads);
    const EmpiricalLaw emp = make_empirical(terminal_coordinate(samples, 0));
    const double ks = ks_distance(emp, exact);
    const double band = dkw_band(cfg.paths(), opt.confidence);
    r.add("KS(Monte Carlo, exact law at same n) <= DKW band", ks <= band,
          {{"b1", b1}, {"ks", ks}, {"dkw_band", band}, {"paths", cfg.paths()}, {"resolution_n", cfg.n()}});

    const double t = static_cast<double>(cfg.steps()) / static_cast<double>(cfg.n());
    const auto ref = skew_bm_reference_cdf(alpha, t);
    const double sup = sup_distance(exact, ref);
    r.add("sup|exact law CDF - skew BM CDF| <= 0.01", sup <= 0.01, {{"b1", b1}, {"sup_distance", sup}});

    const SignProbability sp = sign_probability(law);
    const double frac = sp.positive_fraction();
    r.add("p+/(p+ + p-) = (1 + b1)/2 +- 0.005", std::abs(frac - alpha) <= 0.005,
          {{"b1", b1}, {"positive_fraction", frac}, {"target", alpha}, {"p_minus", sp.minus}, {"p_zero", sp.zero},
           {"p_plus", sp.plus}});
    r.info["exact_total_mass"] = law.total_mass();
    return r;
}

// ============================================================================
// reflection
// ============================================================================

/// d = 1, b_1 = 1: mean local time against E|N(0, t)| and the bound
/// E L(t) <= |x_1| + sqrt(t).
inline SuiteReport suite_reflection(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    detail::expect_input(cfg.dimension() == 1 && detail::constant_field(cfg.field())
                        && detail::first_coefficient(cfg.field()) == 1.0 && cfg.drift().is_zero(),
                    "reflection", "dimension 1, constant b_1 = 1 and zero drift");
    SuiteReport r;
    r.suite = "reflection";
    const ChainSetup setup = ChainSetup::from(cfg);
    std::vector<double> times;
    for (double t : {0.25, 1.0, 4.0})
        if (t <= cfg.horizon() + 1e-12) times.push_back(t);
    std::vector<std::int64_t> checkpoints;
    for (double t : times) checkpoints.push_back(std::min(step_count(cfg.n(), t), setup.steps));

    const auto samples = run_terminal(cfg, opt.threads, checkpoints);
    const double x1 = std::abs(cfg.scaled_start()[0]);

    for (std::size_t c = 0; c < times.size(); ++c) {
        std::vector<double> l(samples.size());
        for (std::size_t j = 0; j < l.size(); ++j) l[j] = samples[j].local_time_at[c];
        const auto est = sample_mean(l);
        const double bound = x1 + std::sqrt(times[c]) + 3.0 * est.std_error;
        char name[96];
        std::snprintf(name, sizeof name, "E L(%g) <= |x1| + sqrt(t) + 3 se", times[c]);
        r.add(name, est.mean <= bound, {{"t", times[c]}, {"mean", est.mean}, {"std_error", est.std_error},
                                        {"bound", bound}});
        if (times[c] == 1.0 && cfg.lattice_start()[0] == 0) {
            const double ref = reflected_local_time_mean(1.0);
            const double rel = std::abs(est.mean - ref) / ref;
            r.add("E L(1) within 2% of E|N(0,1)|", rel <= 0.02,
                  {{"mean", est.mean}, {"std_error", est.std_error}, {"reference", ref}, {"relative_error", rel}});
        }
    }
    std::vector<double> lt(samples.size());
    for (std::size_t j = 0; j < lt.size(); ++j) lt[j] = samples[j].local_time;
    const auto term = sample_mean(lt);
    r.info["mean_local_time_T"] = term.mean;
    r.info["mean_local_time_T_std_error"] = term.std_error;
    return r;
}

// ============================================================================
// girsanov
// ============================================================================

/// b = 0 with a constant drift c: the drifted law has mean x + cT, and the
/// weights have mean 1.
inline SuiteReport suite_girsanov(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    const auto& f = cfg.field();
    const bool zero_field = f.family() == Family::Zero
                            || (f.family() == Family::Constant
                                && std::all_of(f.offset().begin(), f.offset().end(), [](double v) { return v == 0.0; }));
    detail::expect_input(zero_field && cfg.drift().family() == Family::Constant, "girsanov",
                    "a zero field and a constant drift");
    SuiteReport r;
    r.suite = "girsanov";
    const auto samples = run_terminal(ChainSetup::from(cfg), cfg.field(), cfg.drift(), cfg.paths(), opt.threads, {},
                                      true);
    std::vector<double> w(samples.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = samples[j].weight;
    const double t = static_cast<double>(cfg.steps()) / static_cast<double>(cfg.n());
    const auto x0 = cfg.scaled_start();

    for (std::size_t i = 0; i < cfg.dimension(); ++i) {
        const auto xs = terminal_coordinate(samples, i);
        const auto est = weighted_expectation(w, xs);
        const double target = x0[i] + cfg.drift().offset()[i] * t;
        const double z = est.std_error > 0 ? std::abs(est.estimate - target) / est.std_error : 0.0;
        r.add("weighted E[X_" + std::to_string(i + 1) + "(T)] = x + cT within 3 se", z <= 3.0,
              {{"estimate", est.estimate}, {"std_error", est.std_error}, {"target", target}, {"z", z},
               {"ess", est.ess}});
    }
    const std::vector<double> ones(w.size(), 1.0);
    const auto mw = unnormalized_expectation(w, ones);
    const double z = mw.std_error > 0 ? std::abs(mw.estimate - 1.0) / mw.std_error : 0.0;
    r.add("mean weight = 1 within 3 se", z <= 3.0,
          {{"mean_weight", mw.estimate}, {"std_error", mw.std_error}, {"z", z}});
    r.info["girsanov_ess"] = mw.ess;
    r.info["paths"] = cfg.paths();
    return r;
}

// ============================================================================
// collisions
// ============================================================================

inline CollisionSpec frictionless_collisions() { return CollisionSpec{}; }

inline CollisionSpec perfect_reflection_collisions() {
    CollisionSpec s;
    s.zeta1 = ScalarSpec::constant(-1.0);
    s.eta1 = ScalarSpec::constant(-1.0);
    return s;
}

/// A model with state-dependent alpha, used when the config brings none.
inline CollisionSpec sample_state_dependent_collisions() {
    CollisionSpec s;
    s.zeta1 = ScalarSpec::sigmoid_affine(0.0, 0.8, {0.0, 1.0});
    s.eta1 = ScalarSpec::sigmoid_affine(0.2, 0.6, {1.0, 0.0});
    s.eta2 = ScalarSpec::constant(0.5);
    return s;
}

namespace detail {

inline ValidatedConfig collision_config(const ValidatedConfig& base, const CollisionSpec& spec,
                                        std::vector<double> start, std::optional<long long> paths = {}) {
    SimConfig raw = base.raw();
    raw.dimension = 2;
    raw.start = std::move(start);
    raw.field = FieldSpec::zero(2);
    raw.drift = DriftSpec::zero(2);
    raw.collision = spec;
    if (paths) raw.paths_m = *paths;
    return validate_config(raw).value();
}

}  // namespace detail

/// Frictionless and perfect-reflection models plus one state-dependent
/// model (the config's own collision section when present).
inline SuiteReport suite_collisions(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    SuiteReport r;
    r.suite = "collisions";
    double split_max = 0.0;
    const double band = dkw_band(cfg.paths(), opt.confidence);
    const double half_cell = 0.5 / std::sqrt(static_cast<double>(cfg.n()));

    {
        const auto c = detail::collision_config(cfg, frictionless_collisions(), {0.0, 0.0});
        const CollisionModel model(*c.raw().collision);
        const auto ens = simulate_particles(model, c, opt.threads);
        double push = 0.0;
        for (const auto& p : ens.paths) {
            push = std::max(push, p.max_push);
            split_max = std::max(split_max, p.split_error);
        }
        r.add("frictionless: zero local-time push in both coordinates", push == 0.0, {{"max_push", push}});
        const double t = static_cast<double>(c.steps()) / static_cast<double>(c.n());
        const auto emp = make_empirical(ens.terminal_x1());
        auto ref = [&](double x) { return normal_cdf(x, 0.0, t / 2.0); };
        const double ks = ks_distance_lattice(emp, ref, half_cell);
        r.add("frictionless: X1(T) ~ N(0, T/2) within DKW band", ks <= band,
              {{"ks_lattice_corrected", ks}, {"ks_raw", ks_distance(emp, ref)}, {"dkw_band", band},
               {"variance", sample_mean(ens.terminal_x1()).variance}, {"target_variance", t / 2.0}});
    }
    {
        const auto c = detail::collision_config(cfg, perfect_reflection_collisions(), {1.0, 0.0});
        const CollisionModel model(*c.raw().collision);
        const auto ens = simulate_particles(model, c, opt.threads);
        double min_gap = std::numeric_limits<double>::infinity();
        std::int64_t follow_fail = 0, sign_flip = 0;
        for (const auto& p : ens.paths) {
            min_gap = std::min(min_gap, p.min_gap);
            follow_fail += !p.x2_follows_drive;
            sign_flip += !p.gap_sign_constant;
            split_max = std::max(split_max, p.split_error);
        }
        r.add("perfect reflection: min_t (X1 - X2) >= 0 on every path", min_gap >= 0.0 && sign_flip == 0,
              {{"min_gap", min_gap}, {"paths_with_sign_change", sign_flip}});
        r.add("perfect reflection: X2 increments equal its driving increments", follow_fail == 0,
              {{"failed_paths", follow_fail}});
        const double t = static_cast<double>(c.steps()) / static_cast<double>(c.n());
        const auto emp = make_empirical(ens.terminal_x2());
        auto ref = [&](double x) { return normal_cdf(x, 0.0, t / 2.0); };
        r.info["reflection_x2_ks_lattice_corrected"] = ks_distance_lattice(emp, ref, half_cell);
        r.info["reflection_x2_variance"] = sample_mean(ens.terminal_x2()).variance;
    }
    {
        const bool own = cfg.raw().collision.has_value();
        const CollisionSpec spec = own ? *cfg.raw().collision : sample_state_dependent_collisions();
        const std::vector<double> start = own ? cfg.raw().start : std::vector<double>{0.5, -0.5};
        const auto c = detail::collision_config(cfg, spec, start, std::min<long long>(cfg.paths(), 10000));
        const CollisionModel model(spec);
        const auto ens = simulate_particles(model, c, opt.threads);
        for (const auto& p : ens.paths) split_max = std::max(split_max, p.split_error);
        r.info["state_dependent_model"] = own ? "config" : "built-in";
    }
    r.add("L+ + L- = L on every path (1e-10)", split_max <= 1e-10, {{"max_abs_error", split_max}});
    return r;
}

// ============================================================================
// uniqueness-consistency
// ============================================================================

/// d = 2: terminal marginals at a coarse and the configured resolution agree,
/// and Monte Carlo at a small n agrees with the exact two-dimensional law.
inline SuiteReport suite_uniqueness(const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    detail::expect_input(cfg.dimension() == 2 && cfg.drift().is_zero(), "uniqueness-consistency",
                    "dimension 2 and zero drift");
    SuiteReport r;
    r.suite = "uniqueness-consistency";
    const long long fine_n = cfg.n();
    const long long coarse_n = opt.coarse_n > 0 ? opt.coarse_n : std::max(1LL, fine_n / 10);
    const auto coarse = detail::with_resolution(cfg, coarse_n);
    const double band = dkw_band(cfg.paths(), opt.confidence);

    const auto coarse_samples = run_terminal(coarse, opt.threads);
    const auto fine_samples = run_terminal(cfg, opt.threads);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto a = make_empirical(terminal_coordinate(coarse_samples, i));
        const auto b = make_empirical(terminal_coordinate(fine_samples, i));
        const double ks = ks_two_sample(a, b);
        const double allowance = 2.0 * band + 0.01;
        r.add("KS(X_" + std::to_string(i + 1) + "(T) at n=" + std::to_string(coarse_n) + ", n="
                  + std::to_string(fine_n) + ") < two DKW bands + 0.01",
              ks < allowance, {{"ks", ks}, {"allowance", allowance}, {"dkw_band", band}});
    }

    const auto small = detail::with_resolution(cfg, opt.oracle_n);
    const LatticeLaw law = exact_chain_law(small, small.steps());
    const auto small_samples = run_terminal(small, opt.threads);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto emp = make_empirical(terminal_coordinate(small_samples, i));
        const double ks = ks_distance(emp, marginal(law, i));
        r.add("KS(X_" + std::to_string(i + 1) + "(T) Monte Carlo, exact law) at n=" + std::to_string(opt.oracle_n)
                  + " <= DKW band",
              ks <= band, {{"ks", ks}, {"dkw_band", band}});
    }
    r.info["exact_total_mass"] = law.total_mass();
    r.info["exact_support_size"] = law.size();
    return r;
}

// ============================================================================
// convergence
// ============================================================================

struct ConvergenceRow {
    long long n = 0;
    std::int64_t paths = 0;
    double ks_previous = std::numeric_limits<double>::quiet_NaN();  // vs the previous row's law
    double ks_reference = std::numeric_limits<double>::quiet_NaN();
    double ks_reference_lattice = std::numeric_limits<double>::quiet_NaN();  // continuity corrected
    double dkw_band = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::string reference;               // empty when no closed form applies
    std::optional<bool> monotone_trend;  // absent for a single row

    [[nodiscard]] json to_json() const {
        json j;
        j["reference"] = reference.empty() ? json(nullptr) : json(reference);
        j["monotone_trend"] = monotone_trend ? json(*monotone_trend) : json(nullptr);
        json rs = json::array();
        for (const auto& r : rows)
            rs.push_back({{"n", r.n},
                          {"paths", r.paths},
                          {"ks_previous", json_number(r.ks_previous)},
                          {"ks_reference", json_number(r.ks_reference)},
                          {"ks_reference_lattice", json_number(r.ks_reference_lattice)},
                          {"dkw_band", r.dkw_band}});
        j["rows"] = rs;
        return j;
    }
};

/// Terminal law of the first coordinate at each n. A closed-form reference
/// exists for d = 1, zero drift and constant b_1: N(x, T) when b_1 = 0, and
/// skew Brownian motion when the start is 0. Distances must be
/// nonincreasing in n up to twice the DKW band.
inline ConvergenceTable run_convergence(const ValidatedConfig& cfg, std::vector<long long> n_list, unsigned threads,
                                        double confidence = 0.99) {
    if (n_list.empty()) throw Error(ErrorCode::BadValue, "n list is empty");
    for (long long n : n_list)
        if (n < 1) throw Error(ErrorCode::NonPositive, "resolutions must be >= 1");
    ConvergenceTable table;
    const bool plain = cfg.dimension() == 1 && cfg.drift().is_zero() && detail::constant_field(cfg.field());
    const double b1 = detail::first_coefficient(cfg.field());
    const double x0 = cfg.raw().start[0];
    const double t = cfg.horizon();
    std::function<double(double)> ref;
    if (plain && b1 == 0.0) {
        table.reference = "normal";
        ref = [=](double y) { return normal_cdf(y, x0, t); };
    } else if (plain && x0 == 0.0) {
        table.reference = "skew-bm";
        const auto cdf = skew_bm_reference_cdf((1.0 + b1) / 2.0, t);
        ref = [=](double y) { return cdf(y); };
    }

    std::optional<EmpiricalLaw> previous;
    for (long long n : n_list) {
        const auto c = detail::with_resolution(cfg, n);
        const auto samples = run_terminal(c, threads);
        auto emp = make_empirical(terminal_coordinate(samples, 0));
        ConvergenceRow row;
        row.n = n;
        row.paths = c.paths();
        row.dkw_band = dkw_band(c.paths(), confidence);
        if (previous) row.ks_previous = ks_two_sample(*previous, emp);
        if (ref) {
            row.ks_reference = ks_distance(emp, ref);
            row.ks_reference_lattice = ks_distance_lattice(emp, ref, 1.0 / std::sqrt(static_cast<double>(n)));
        }
        table.rows.push_back(row);
        previous = std::move(emp);
    }

    if (table.rows.size() > 1) {
        bool ok = true;
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            const auto& a = table.rows[i - 1];
            const auto& b = table.rows[i];
            const double slack = 2.0 * std::max(a.dkw_band, b.dkw_band);
            if (ref) ok = ok && b.ks_reference <= a.ks_reference + slack;
            else if (i >= 2) ok = ok && b.ks_previous <= a.ks_previous + slack;
        }
        table.monotone_trend = ok;
    }
    return table;
}

/// Runs the named suite; UNKNOWN_SUITE for anything else.
inline SuiteReport run_suite(std::string_view name, const ValidatedConfig& cfg, const SuiteOptions& opt = {}) {
    if (name == "pathwise") return suite_pathwise(cfg, opt);
    if (name == "one-step") return suite_one_step(cfg.seed(), opt.one_step_cases);
    if (name == "skew-law") return suite_skew_law(cfg, opt);
    if (name == "reflection") return suite_reflection(cfg, opt);
    if (name == "girsanov") return suite_girsanov(cfg, opt);
    if (name == "collisions") return suite_collisions(cfg, opt);
    if (name == "uniqueness-consistency") return suite_uniqueness(cfg, opt);
    throw Error(ErrorCode::UnknownSuite, "unknown suite '" + std::string(name) + "'");
}

}  // namespace skewsim
