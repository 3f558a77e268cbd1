#include "skewsim/suites.hpp"

#include <gtest/gtest.h>

using namespace skewsim;

namespace {

ValidatedConfig config_1d(double b, long long n, long long m, double horizon = 1.0, double start = 0.0,
                          std::uint64_t seed = 3) {
    SimConfig c;
    c.dimension = 1;
    c.resolution_n = n;
    c.horizon_t = horizon;
    c.paths_m = m;
    c.start = {start};
    c.field = FieldSpec::constant({b});
    c.drift = DriftSpec::zero(1);
    c.seed = seed;
    return validate_config(c).value();
}

ValidatedConfig config_2d(long long n, long long m, std::uint64_t seed = 5) {
    SimConfig c;
    c.dimension = 2;
    c.resolution_n = n;
    c.horizon_t = 1.0;
    c.paths_m = m;
    c.start = {0.0, 0.0};
    c.field = FieldSpec::sigmoid_affine({0.0, 0.5}, {0.6, 0.5}, {1.0});
    c.drift = DriftSpec::zero(2);
    c.seed = seed;
    return validate_config(c).value();
}

const CriterionResult* find(const SuiteReport& r, std::string_view name) {
    for (const auto& c : r.criteria)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST(RunSuite, UnknownNameIsAnError) {
    try {
        (void)run_suite("bogus", config_1d(0.0, 10, 10));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownSuite);
    }
}

TEST(RunSuite, InputRequirementsAreChecked) {
    EXPECT_THROW((void)run_suite("reflection", config_1d(0.5, 100, 10)), Error);
    EXPECT_THROW((void)run_suite("skew-law", config_1d(0.5, 100, 10, 1.0, 0.3)), Error);
    EXPECT_THROW((void)run_suite("uniqueness-consistency", config_1d(0.5, 100, 10)), Error);
}

TEST(Suites, PathwiseRandomFields) {
    const auto r = suite_pathwise_random(11, 60, 200, 2);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
    EXPECT_FALSE(r.criteria.empty());
}

TEST(Suites, PathwiseOnConfig) {
    SuiteOptions opt;
    opt.pathwise_runs = 20;
    const auto r = run_suite("pathwise", config_2d(200, 10), opt);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Suites, OneStep) {
    const auto r = suite_one_step(7, 50);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Suites, ReflectionSmall) {
    const auto r = run_suite("reflection", config_1d(1.0, 400, 20000, 4.0));
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Suites, GirsanovSmall) {
    SimConfig c = config_1d(0.0, 400, 20000).raw();
    c.field = FieldSpec::zero(1);
    c.drift = DriftSpec::constant({0.3});
    const auto r = run_suite("girsanov", validate_config(c).value());
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
    EXPECT_TRUE(r.info.contains("girsanov_ess"));
}

TEST(Suites, CollisionsSmall) {
    const auto r = run_suite("collisions", config_2d(400, 20000));
    for (const auto& c : r.criteria) EXPECT_TRUE(c.passed) << c.name << ": " << r.to_json().dump(2);
    ASSERT_NE(find(r, "L+ + L- = L on every path (1e-10)"), nullptr);
}

TEST(Suites, SkewLawReportsSignRatio) {
    // At n = 400 the lattice atom at 0 is too heavy for the 0.01 sup bound,
    // so only the Monte Carlo checks are asserted here.
    const auto r = run_suite("skew-law", config_1d(0.5, 400, 20000));
    ASSERT_FALSE(r.criteria.empty());
    for (const auto& c : r.criteria)
        if (c.name != "sup|exact law CDF - skew BM CDF| <= 0.01") {
            EXPECT_TRUE(c.passed) << c.name << ": " << r.to_json().dump(2);
        }
}

TEST(Suites, ReportsAreIdenticalAcrossThreadCounts) {
    SuiteOptions one, many;
    one.threads = 1;
    many.threads = 3;
    one.pathwise_runs = many.pathwise_runs = 10;
    for (std::string_view name : {"pathwise", "collisions"}) {
        const auto cfg = config_2d(100, 2000);
        EXPECT_EQ(run_suite(name, cfg, one).to_json().dump(), run_suite(name, cfg, many).to_json().dump()) << name;
    }
    const auto cfg = config_1d(1.0, 100, 2000, 4.0);
    EXPECT_EQ(run_suite("reflection", cfg, one).to_json().dump(), run_suite("reflection", cfg, many).to_json().dump());
}

TEST(Convergence, SingleRowHasNoTrend) {
    const auto t = run_convergence(config_1d(0.5, 100, 2000), {100}, 0);
    ASSERT_EQ(t.rows.size(), 1U);
    EXPECT_FALSE(t.monotone_trend.has_value());
    EXPECT_EQ(t.reference, "skew-bm");
    EXPECT_TRUE(t.to_json()["monotone_trend"].is_null());
}

TEST(Convergence, SkewLawTrendOverThreeResolutions) {
    const auto t = run_convergence(config_1d(0.5, 100, 20000), {100, 1000, 10000}, 0);
    ASSERT_EQ(t.rows.size(), 3U);
    ASSERT_TRUE(t.monotone_trend.has_value());
    EXPECT_TRUE(*t.monotone_trend) << t.to_json().dump(2);
    EXPECT_TRUE(std::isnan(t.rows[0].ks_previous));
    EXPECT_FALSE(std::isnan(t.rows[1].ks_previous));
}

TEST(Convergence, NormalReferenceWithinBandAfterCorrection) {
    const auto t = run_convergence(config_1d(0.0, 100, 100000, 1.0, 0.0, 17), {100}, 0);
    EXPECT_EQ(t.reference, "normal");
    EXPECT_LE(t.rows[0].ks_reference_lattice, t.rows[0].dkw_band) << t.to_json().dump(2);
    EXPECT_GT(t.rows[0].ks_reference, t.rows[0].dkw_band);
}

TEST(Convergence, NoReferenceWithDrift) {
    SimConfig c = config_1d(0.5, 100, 1000).raw();
    c.drift = DriftSpec::constant({0.2});
    const auto t = run_convergence(validate_config(c).value(), {50, 100}, 0);
    EXPECT_TRUE(t.reference.empty());
    EXPECT_TRUE(std::isnan(t.rows[0].ks_reference));
    EXPECT_THROW((void)run_convergence(validate_config(c).value(), {}, 0), Error);
}
