#pragma once

/// @file core.hpp
/// @brief Shared domain types: errors, parametric field families, simulation
/// configuration and its validation.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skewsim {

enum class ErrorCode {
    B1Range,
    NonPositive,
    SeedMissing,
    DimensionMismatch,
    UnknownKey,
    BadValue,
    NonFinite,
    NegativeStart,
    NonPositiveEps,
    HorizonExceedsPath,
    EmptyEnsemble,
    DegenerateWeights,
    ConstraintViolation,
    DimensionTooLarge,
    BudgetExceeded,
    AlphaRange,
    EmptySample,
    UnknownSuite,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::B1Range: return "B1_RANGE";
        case ErrorCode::NonPositive: return "NONPOSITIVE";
        case ErrorCode::SeedMissing: return "SEED_MISSING";
        case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::UnknownKey: return "UNKNOWN_KEY";
        case ErrorCode::BadValue: return "BAD_VALUE";
        case ErrorCode::NonFinite: return "NON_FINITE";
        case ErrorCode::NegativeStart: return "NEGATIVE_START";
        case ErrorCode::NonPositiveEps: return "NONPOSITIVE_EPS";
        case ErrorCode::HorizonExceedsPath: return "HORIZON_EXCEEDS_PATH";
        case ErrorCode::EmptyEnsemble: return "EMPTY_ENSEMBLE";
        case ErrorCode::DegenerateWeights: return "DEGENERATE_WEIGHTS";
        case ErrorCode::ConstraintViolation: return "CONSTRAINT_VIOLATION";
        case ErrorCode::DimensionTooLarge: return "DIMENSION_TOO_LARGE";
        case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
        case ErrorCode::AlphaRange: return "ALPHA_RANGE";
        case ErrorCode::EmptySample: return "EMPTY_SAMPLE";
        case ErrorCode::UnknownSuite: return "UNKNOWN_SUITE";
        case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ============================================================================
// Field concepts
// ============================================================================

/// A vector field on the hyperplane {x_1 = 0}, parametrised by the position
/// xi in R^{d-1} inside the hyperplane. `dimension()` is d (the output size).
template <typename F>
concept SurfaceField = requires(const F& f, std::span<const double> xi, std::span<double> out) {
    { f.dimension() } -> std::convertible_to<std::size_t>;
    { f.sup_norm() } -> std::convertible_to<double>;
    f.evaluate(xi, out);
};

/// A bounded drift a: R^d -> R^d.
template <typename F>
concept DriftField = requires(const F& f, std::span<const double> x, std::span<double> out) {
    { f.dimension() } -> std::convertible_to<std::size_t>;
    f.evaluate(x, out);
};

// ============================================================================
// Parametric families
// ============================================================================

enum class Family { Zero, Constant, SigmoidAffine };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::Zero: return "Zero";
        case Family::Constant: return "Constant";
        case Family::SigmoidAffine: return "SigmoidAffine";
    }
    return "Zero";
}

inline std::optional<Family> parse_family(std::string_view s) {
    if (s == "Zero") return Family::Zero;
    if (s == "Constant") return Family::Constant;
    if (s == "SigmoidAffine") return Family::SigmoidAffine;
    return std::nullopt;
}

namespace detail {

/// c_i + A_i * tanh(w . arg), i = 1..out_dim. Zero and Constant are the
/// degenerate members (A = 0).
struct ParametricMap {
    Family family = Family::Zero;
    std::size_t out_dim = 1;
    std::size_t arg_dim = 0;
    std::vector<double> offset;     // c
    std::vector<double> amplitude;  // A
    std::vector<double> frequency;  // w

    [[nodiscard]] double offset_at(std::size_t i) const {
        return family == Family::Zero ? 0.0 : offset[i];
    }
    [[nodiscard]] double amplitude_at(std::size_t i) const {
        return family == Family::SigmoidAffine ? amplitude[i] : 0.0;
    }

    void evaluate(std::span<const double> arg, std::span<double> out) const {
        switch (family) {
            case Family::Zero:
                for (std::size_t i = 0; i < out_dim; ++i) out[i] = 0.0;
                return;
            case Family::Constant:
                for (std::size_t i = 0; i < out_dim; ++i) out[i] = offset[i];
                return;
            case Family::SigmoidAffine: {
                double s = 0.0;
                for (std::size_t j = 0; j < arg_dim; ++j) s += frequency[j] * arg[j];
                const double t = std::tanh(s);
                for (std::size_t i = 0; i < out_dim; ++i) out[i] = offset[i] + amplitude[i] * t;
                return;
            }
        }
    }

    [[nodiscard]] double frequency_norm() const {
        if (family != Family::SigmoidAffine) return 0.0;
        double s = 0.0;
        for (double w : frequency) s += w * w;
        return std::sqrt(s);
    }

    /// Lipschitz constant of coordinate i: |A_i| * ||w||.
    [[nodiscard]] double lipschitz(std::size_t i) const {
        return std::abs(amplitude_at(i)) * frequency_norm();
    }

    /// Lipschitz constant of the whole map in the Euclidean norm.
    [[nodiscard]] double lipschitz() const {
        double s = 0.0;
        for (std::size_t i = 0; i < out_dim; ++i) s += amplitude_at(i) * amplitude_at(i);
        return std::sqrt(s) * frequency_norm();
    }

    /// Coordinatewise bound |c_i| + |A_i|.
    [[nodiscard]] double bound(std::size_t i) const {
        return std::abs(offset_at(i)) + std::abs(amplitude_at(i));
    }

    [[nodiscard]] double sup_norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < out_dim; ++i) s += bound(i) * bound(i);
        return std::sqrt(s);
    }

    /// Shape check of the parameter vectors; returns a message on mismatch.
    [[nodiscard]] std::optional<std::string> shape_error() const {
        auto bad = [](std::string_view name, std::size_t got, std::size_t want) {
            return std::string(name) + " has " + std::to_string(got) + " entries, expected "
                   + std::to_string(want);
        };
        if (family == Family::Zero) return std::nullopt;
        if (offset.size() != out_dim) return bad("c", offset.size(), out_dim);
        if (family == Family::SigmoidAffine) {
            if (amplitude.size() != out_dim) return bad("A", amplitude.size(), out_dim);
            if (frequency.size() != arg_dim) return bad("w", frequency.size(), arg_dim);
        }
        for (double v : offset)
            if (!std::isfinite(v)) return std::string("non-finite parameter");
        for (double v : amplitude)
            if (!std::isfinite(v)) return std::string("non-finite parameter");
        for (double v : frequency)
            if (!std::isfinite(v)) return std::string("non-finite parameter");
        return std::nullopt;
    }

    bool operator==(const ParametricMap&) const = default;
};

}  // namespace detail

/// Local-time coefficient b on the hyperplane, as a function of the
/// in-plane position xi in R^{d-1}.
class FieldSpec {
public:
    FieldSpec() = default;

    static FieldSpec zero(std::size_t d) { return FieldSpec(Family::Zero, d, {}, {}, {}); }
    static FieldSpec constant(std::vector<double> c) {
        const auto d = c.size();
        return FieldSpec(Family::Constant, d, std::move(c), {}, {});
    }
    /// c_i + A_i tanh(w . xi); w has d-1 entries.
    static FieldSpec sigmoid_affine(std::vector<double> c, std::vector<double> a, std::vector<double> w) {
        const auto d = c.size();
        return FieldSpec(Family::SigmoidAffine, d, std::move(c), std::move(a), std::move(w));
    }

    [[nodiscard]] Family family() const { return map_.family; }
    [[nodiscard]] std::size_t dimension() const { return map_.out_dim; }
    [[nodiscard]] const std::vector<double>& offset() const { return map_.offset; }
    [[nodiscard]] const std::vector<double>& amplitude() const { return map_.amplitude; }
    [[nodiscard]] const std::vector<double>& frequency() const { return map_.frequency; }

    void evaluate(std::span<const double> xi, std::span<double> out) const { map_.evaluate(xi, out); }
    [[nodiscard]] double sup_norm() const { return map_.sup_norm(); }
    [[nodiscard]] double bound(std::size_t i) const { return map_.bound(i); }
    [[nodiscard]] double lipschitz() const { return map_.lipschitz(); }
    [[nodiscard]] double lipschitz(std::size_t i) const { return map_.lipschitz(i); }
    [[nodiscard]] std::optional<std::string> shape_error() const { return map_.shape_error(); }

    /// Sufficient condition for b_1 in [-1, 1]: |c_1| + |A_1| <= 1.
    [[nodiscard]] bool first_coordinate_in_range() const { return map_.bound(0) <= 1.0; }

    bool operator==(const FieldSpec&) const = default;

private:
    FieldSpec(Family f, std::size_t d, std::vector<double> c, std::vector<double> a, std::vector<double> w) {
        map_.family = f;
        map_.out_dim = d;
        map_.arg_dim = d == 0 ? 0 : d - 1;
        map_.offset = std::move(c);
        map_.amplitude = std::move(a);
        map_.frequency = std::move(w);
    }

    detail::ParametricMap map_;
};

/// Bounded drift a on R^d. Same families as FieldSpec, with w in R^d.
class DriftSpec {
public:
    DriftSpec() = default;

    static DriftSpec zero(std::size_t d) { return DriftSpec(Family::Zero, d, {}, {}, {}); }
    static DriftSpec constant(std::vector<double> c) {
        const auto d = c.size();
        return DriftSpec(Family::Constant, d, std::move(c), {}, {});
    }
    static DriftSpec sigmoid_affine(std::vector<double> c, std::vector<double> a, std::vector<double> w) {
        const auto d = c.size();
        return DriftSpec(Family::SigmoidAffine, d, std::move(c), std::move(a), std::move(w));
    }

    [[nodiscard]] Family family() const { return map_.family; }
    [[nodiscard]] bool is_zero() const { return map_.family == Family::Zero; }
    [[nodiscard]] std::size_t dimension() const { return map_.out_dim; }
    [[nodiscard]] const std::vector<double>& offset() const { return map_.offset; }
    [[nodiscard]] const std::vector<double>& amplitude() const { return map_.amplitude; }
    [[nodiscard]] const std::vector<double>& frequency() const { return map_.frequency; }

    void evaluate(std::span<const double> x, std::span<double> out) const { map_.evaluate(x, out); }
    [[nodiscard]] double sup_norm() const { return map_.sup_norm(); }
    [[nodiscard]] std::optional<std::string> shape_error() const { return map_.shape_error(); }

    bool operator==(const DriftSpec&) const = default;

private:
    DriftSpec(Family f, std::size_t d, std::vector<double> c, std::vector<double> a, std::vector<double> w) {
        map_.family = f;
        map_.out_dim = d;
        map_.arg_dim = d;
        map_.offset = std::move(c);
        map_.amplitude = std::move(a);
        map_.frequency = std::move(w);
    }

    detail::ParametricMap map_;
};

/// Scalar function R^2 -> R used by the collision model coefficients.
class ScalarSpec {
public:
    ScalarSpec() = default;

    static ScalarSpec zero() { return ScalarSpec(Family::Zero, {}, {}, {}); }
    static ScalarSpec constant(double c) { return ScalarSpec(Family::Constant, {c}, {}, {}); }
    static ScalarSpec sigmoid_affine(double c, double a, std::vector<double> w) {
        return ScalarSpec(Family::SigmoidAffine, {c}, {a}, std::move(w));
    }

    [[nodiscard]] Family family() const { return map_.family; }
    [[nodiscard]] double offset() const { return map_.offset_at(0); }
    [[nodiscard]] double amplitude() const { return map_.amplitude_at(0); }
    [[nodiscard]] const std::vector<double>& frequency() const { return map_.frequency; }

    [[nodiscard]] double operator()(double x1, double x2) const {
        const double arg[2] = {x1, x2};
        double out = 0.0;
        map_.evaluate(arg, std::span<double>(&out, 1));
        return out;
    }
    [[nodiscard]] double bound() const { return map_.bound(0); }
    [[nodiscard]] double lipschitz() const { return map_.lipschitz(0); }
    [[nodiscard]] std::optional<std::string> shape_error() const { return map_.shape_error(); }

    bool operator==(const ScalarSpec&) const = default;

private:
    ScalarSpec(Family f, std::vector<double> c, std::vector<double> a, std::vector<double> w) {
        map_.family = f;
        map_.out_dim = 1;
        map_.arg_dim = 2;
        map_.offset = std::move(c);
        map_.amplitude = std::move(a);
        map_.frequency = std::move(w);
    }

    detail::ParametricMap map_;
};

/// Returns b(0, xi).
inline std::vector<double> eval_field(const FieldSpec& spec, std::span<const double> xi) {
    std::vector<double> out(spec.dimension());
    spec.evaluate(xi, out);
    return out;
}

// ============================================================================
// Configuration
// ============================================================================

struct OutputOptions {
    std::string dir = "out";
    bool emit_paths = false;
    bool emit_summary = true;

    bool operator==(const OutputOptions&) const = default;
};

/// Coefficients of the two-particle collision model, all functions R^2 -> R.
struct CollisionSpec {
    ScalarSpec k1 = ScalarSpec::zero();
    ScalarSpec k2 = ScalarSpec::zero();
    ScalarSpec zeta1 = ScalarSpec::constant(1.0);
    ScalarSpec zeta2 = ScalarSpec::constant(1.0);
    ScalarSpec eta1 = ScalarSpec::constant(1.0);
    ScalarSpec eta2 = ScalarSpec::constant(1.0);

    bool operator==(const CollisionSpec&) const = default;
};

struct SimConfig {
    long long dimension = 1;
    long long resolution_n = 100;
    double horizon_t = 1.0;
    long long paths_m = 1;
    std::vector<double> start{0.0};
    FieldSpec field = FieldSpec::zero(1);
    DriftSpec drift = DriftSpec::zero(1);
    std::optional<std::uint64_t> seed;
    OutputOptions output;
    std::optional<CollisionSpec> collision;

    bool operator==(const SimConfig&) const = default;
};

struct ConfigIssue {
    ErrorCode code;
    std::string message;
};

/// Nearest integer to v, ties toward zero.
inline std::int64_t round_half_toward_zero(double v) {
    const double r = std::ceil(std::abs(v) - 0.5);
    return static_cast<std::int64_t>(v < 0 ? -r : r);
}

/// Lattice start x^n: coordinatewise nearest integer to x * sqrt(n).
inline std::vector<std::int64_t> lattice_start(std::span<const double> x, long long n) {
    const double root = std::sqrt(static_cast<double>(n));
    std::vector<std::int64_t> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = round_half_toward_zero(x[i] * root);
    return out;
}

/// Number of chain steps covering [0, T]: ceil(nT).
inline std::int64_t step_count(long long n, double horizon) {
    return static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * horizon - 1e-9));
}

/// A configuration that passed validation, with its derived lattice data.
class ValidatedConfig {
public:
    [[nodiscard]] const SimConfig& raw() const { return raw_; }
    [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(raw_.dimension); }
    [[nodiscard]] long long n() const { return raw_.resolution_n; }
    [[nodiscard]] double horizon() const { return raw_.horizon_t; }
    [[nodiscard]] std::int64_t steps() const { return steps_; }
    [[nodiscard]] long long paths() const { return raw_.paths_m; }
    [[nodiscard]] std::uint64_t seed() const { return *raw_.seed; }
    [[nodiscard]] const FieldSpec& field() const { return raw_.field; }
    [[nodiscard]] const DriftSpec& drift() const { return raw_.drift; }
    [[nodiscard]] const std::vector<std::int64_t>& lattice_start() const { return start_; }

    /// x-bar^n = x^n / sqrt(n).
    [[nodiscard]] std::vector<double> scaled_start() const {
        const double root = std::sqrt(static_cast<double>(raw_.resolution_n));
        std::vector<double> out(start_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(start_[i]) / root;
        return out;
    }

private:
    friend struct ValidationResult validate_config(const SimConfig& cfg);

    SimConfig raw_;
    std::vector<std::int64_t> start_;
    std::int64_t steps_ = 0;
};

struct ValidationResult {
    std::optional<ValidatedConfig> config;
    std::vector<ConfigIssue> issues;

    [[nodiscard]] bool ok() const { return config.has_value(); }

    /// The validated config, or an Error carrying the first issue.
    [[nodiscard]] const ValidatedConfig& value() const {
        if (!config) {
            std::string msg = issues.front().message;
            for (std::size_t i = 1; i < issues.size(); ++i)
                msg += "; " + std::string(to_string(issues[i].code)) + ": " + issues[i].message;
            throw Error(issues.front().code, msg);
        }
        return *config;
    }
};

inline ValidationResult validate_config(const SimConfig& cfg) {
    ValidationResult result;
    auto issue = [&](ErrorCode c, std::string m) { result.issues.push_back({c, std::move(m)}); };

    if (cfg.dimension < 1) issue(ErrorCode::NonPositive, "dimension must be >= 1");
    if (cfg.resolution_n < 1) issue(ErrorCode::NonPositive, "resolution_n must be >= 1");
    if (!(cfg.horizon_t > 0.0) || !std::isfinite(cfg.horizon_t))
        issue(ErrorCode::NonPositive, "horizon_t must be > 0");
    if (cfg.paths_m < 1) issue(ErrorCode::NonPositive, "paths_m must be >= 1");
    if (!cfg.seed) issue(ErrorCode::SeedMissing, "seed is required");

    if (cfg.dimension >= 1) {
        const auto d = static_cast<std::size_t>(cfg.dimension);
        if (cfg.start.size() != d)
            issue(ErrorCode::DimensionMismatch, "start has " + std::to_string(cfg.start.size())
                                                    + " entries, expected " + std::to_string(d));
        for (double v : cfg.start)
            if (!std::isfinite(v)) issue(ErrorCode::NonFinite, "start must be finite");

        if (cfg.field.dimension() != d)
            issue(ErrorCode::DimensionMismatch, "field dimension does not match");
        else if (auto e = cfg.field.shape_error())
            issue(ErrorCode::DimensionMismatch, "field: " + *e);
        else if (!cfg.field.first_coordinate_in_range())
            issue(ErrorCode::B1Range, "field first coordinate bound |c1|+|A1| = "
                                          + std::to_string(cfg.field.bound(0)) + " exceeds 1");

        if (cfg.drift.dimension() != d)
            issue(ErrorCode::DimensionMismatch, "drift dimension does not match");
        else if (auto e = cfg.drift.shape_error())
            issue(ErrorCode::DimensionMismatch, "drift: " + *e);
    }

    if (cfg.collision) {
        if (cfg.dimension != 2)
            issue(ErrorCode::DimensionMismatch, "collision model requires dimension 2");
        const ScalarSpec* parts[] = {&cfg.collision->k1,    &cfg.collision->k2,   &cfg.collision->zeta1,
                                     &cfg.collision->zeta2, &cfg.collision->eta1, &cfg.collision->eta2};
        for (const auto* p : parts)
            if (auto e = p->shape_error()) issue(ErrorCode::DimensionMismatch, "collision: " + *e);
    }

    if (!result.issues.empty()) return result;

    ValidatedConfig v;
    v.raw_ = cfg;
    v.start_ = lattice_start(cfg.start, cfg.resolution_n);
    v.steps_ = step_count(cfg.resolution_n, cfg.horizon_t);
    result.config = std::move(v);
    return result;
}

}  // namespace skewsim
