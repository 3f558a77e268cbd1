#include "skewsim/ensemble.hpp"
#include "skewsim/girsanov.hpp"
#include "skewsim/oracles.hpp"

#include <gtest/gtest.h>

using namespace skewsim;

namespace {

ChainSetup setup_1d(long long n, double horizon, std::uint64_t seed = 21) {
    ChainSetup s;
    s.n = n;
    s.steps = step_count(n, horizon);
    s.seed = seed;
    return s;
}

ScaledPath sample_path(std::uint64_t j) {
    return rescale(run_chain(setup_1d(400, 1.0), FieldSpec::constant({0.3}), j), 1.0);
}

}  // namespace

TEST(GirsanovWeight, ZeroDriftIsOne) {
    EXPECT_EQ(girsanov_weight(sample_path(0), DriftSpec::zero(1), 1.0), 1.0);
}

TEST(GirsanovWeight, ConstantDriftClosedForm) {
    const double c = 0.7;
    for (std::uint64_t j = 0; j < 20; ++j) {
        const auto p = sample_path(j);
        const double w = girsanov_weight(p, DriftSpec::constant({c}), 1.0);
        const double closed = std::exp(c * p.w.back() - 0.5 * c * c * 1.0);
        EXPECT_NEAR(w / closed, 1.0, 1e-12);
    }
}

TEST(GirsanovWeight, HorizonBeyondPathThrows) {
    EXPECT_THROW((void)girsanov_weight(sample_path(0), DriftSpec::constant({1.0}), 2.0), Error);
}

TEST(ShiftedBrownian, ZeroDriftIsIdentity) {
    const auto p = sample_path(1);
    EXPECT_EQ(shifted_brownian(p, DriftSpec::zero(1)), p.w);
}

TEST(ShiftedBrownian, ConstantDriftOnFlatWalk) {
    auto p = sample_path(1);
    std::fill(p.w.begin(), p.w.end(), 0.0);
    const double c = 0.4;
    const auto s = shifted_brownian(p, DriftSpec::constant({c}));
    for (std::int64_t k = 0; k <= p.steps; ++k)
        EXPECT_NEAR(s[static_cast<std::size_t>(k)], -c * static_cast<double>(k) / 400.0, 1e-12);
}

TEST(ShiftedBrownian, ShiftAndUnshiftRoundTrip) {
    ChainSetup s;
    s.dim = 2;
    s.n = 100;
    s.steps = 300;
    s.start = {0, 1};
    s.seed = 2;
    auto p = rescale(run_chain(s, FieldSpec::constant({0.2, 1.3}), 0), 3.0);
    const auto drift = DriftSpec::sigmoid_affine({0.1, -0.2}, {0.5, 0.3}, {1.0, 1.0});
    const auto original = p.w;
    p.w = shifted_brownian(p, drift);
    const auto back = shifted_brownian(p, NegatedDrift(drift));
    ASSERT_EQ(back.size(), original.size());
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back[i], original[i], 1e-12);
}

TEST(WeightedExpectation, UnitWeightsGivePlainMean) {
    const std::vector<double> w(5, 1.0), v{1, 2, 3, 4, 5};
    const std::vector<double> w10(10, 1.0), v10{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto r = weighted_expectation(w10, v10);
    EXPECT_DOUBLE_EQ(r.estimate, 5.5);
    EXPECT_DOUBLE_EQ(r.ess, 10.0);
    const auto u = unnormalized_expectation(w, v);
    EXPECT_DOUBLE_EQ(u.estimate, 3.0);
    EXPECT_NEAR(u.std_error, std::sqrt(2.5 / 5.0), 1e-15);
}

TEST(WeightedExpectation, ConstantFunctional) {
    std::vector<WeightedSample> samples;
    for (std::uint64_t j = 0; j < 40; ++j)
        samples.push_back({sample_path(j), 0.5 + 0.01 * static_cast<double>(j)});
    const auto r = weighted_expectation(samples, [](const ScaledPath&) { return 1.0; });
    EXPECT_DOUBLE_EQ(r.estimate, 1.0);
    EXPECT_DOUBLE_EQ(r.std_error, 0.0);
}

TEST(WeightedExpectation, Errors) {
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    const std::vector<double> none;
    EXPECT_EQ(code([&] { (void)weighted_expectation(none, none); }), ErrorCode::EmptyEnsemble);
    const std::vector<double> w(20, 1.0), v(19, 0.0);
    EXPECT_EQ(code([&] { (void)weighted_expectation(w, v); }), ErrorCode::DimensionMismatch);
    std::vector<double> spiky(100, 1e-9);
    spiky[3] = 1.0;
    const std::vector<double> vals(100, 2.0);
    EXPECT_EQ(code([&] { (void)weighted_expectation(spiky, vals); }), ErrorCode::DegenerateWeights);
}

TEST(GirsanovEnsemble, MeanWeightIsOne) {
    ChainSetup s;
    s.dim = 2;
    s.n = 400;
    s.steps = 400;
    s.start = {0, 0};
    s.seed = 77;
    const auto f = FieldSpec::sigmoid_affine({0.3, 1.0}, {0.3, 0.5}, {1.0});
    const auto a = DriftSpec::sigmoid_affine({0.2, -0.4}, {0.5, 0.3}, {1.0, -1.0});
    const auto samples = run_terminal(s, f, a, 20000, 0);
    std::vector<double> w, ones(samples.size(), 1.0);
    for (const auto& x : samples) w.push_back(x.weight);
    const auto r = unnormalized_expectation(w, ones);
    EXPECT_LE(std::abs(r.estimate - 1.0), 3.0 * r.std_error) << r.estimate << " +- " << r.std_error;
}

TEST(GirsanovEnsemble, DriftedMeanOfFreeWalk) {
    const auto s = setup_1d(2500, 1.0);
    const auto samples = run_terminal(s, FieldSpec::zero(1), DriftSpec::constant({0.3}), 20000, 0);
    std::vector<double> w, x;
    for (const auto& t : samples) {
        w.push_back(t.weight);
        x.push_back(t.x[0]);
    }
    const auto r = weighted_expectation(w, x);
    EXPECT_LE(std::abs(r.estimate - 0.3), 3.0 * r.std_error) << r.estimate << " +- " << r.std_error;
    EXPECT_GT(r.ess, 15000.0);
}
