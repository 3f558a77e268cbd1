#include "skewsim/ensemble.hpp"
#include "skewsim/oracles.hpp"
#include "skewsim/skorohod.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace skewsim;

namespace {

void expect_near_vec(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

LatticeRun hand_run(std::vector<std::int64_t> x, long long n) {
    LatticeRun r;
    r.dim = 1;
    r.n = n;
    r.steps = static_cast<std::int64_t>(x.size()) - 1;
    r.w = x;
    r.x = std::move(x);
    r.l.assign(r.x.size(), 0);
    return r;
}

ChainSetup setup_1d(long long n, double horizon, std::uint64_t seed = 4) {
    ChainSetup s;
    s.n = n;
    s.steps = step_count(n, horizon);
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Rescale, DividesBySqrtN) {
    const auto p = rescale(hand_run({0, 1, 2, 1, 0}, 4), 1.0);
    expect_near_vec(p.x, {0, 0.5, 1, 0.5, 0}, 0);
    EXPECT_EQ(p.steps, 4);
    EXPECT_DOUBLE_EQ(p.time(3), 0.75);
    EXPECT_EQ(p.index_at(0.6), 2);
    EXPECT_EQ(p.index_at(1.0), 4);
    EXPECT_EQ(p.index_at(9.0), 4);
}

TEST(Rescale, ConstantRunGivesConstantPath) {
    const auto p = rescale(hand_run({3, 3, 3, 3}, 9), 1.0 / 3.0);
    for (double v : p.x) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Rescale, HorizonBeyondRunThrows) {
    try {
        (void)rescale(hand_run({0, 1, 0}, 4), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::HorizonExceedsPath);
    }
}

TEST(Rescale, RemainderIsTheHyperplaneMartingaleMinusWalk) {
    ChainSetup s;
    s.dim = 2;
    s.n = 400;
    s.steps = 400;
    s.start = {0, 0};
    s.seed = 8;
    const auto f = FieldSpec::sigmoid_affine({0.3, 1.7}, {0.4, 0.5}, {1.0});
    const auto run = run_chain(s, f, 2, {.diagnostics = true});
    const auto p = rescale(run, 1.0);
    // eps(t_k) = sum over hyperplane visits j < k of (dX_j - dW_j - beta_j) / sqrt(n).
    std::vector<double> acc(2, 0.0);
    auto visit = run.visits.begin();
    for (std::int64_t k = 0; k <= p.steps; ++k) {
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(p.eps[k * 2 + i], acc[i], 1e-12);
        if (visit != run.visits.end() && visit->k == k) {
            for (std::size_t i = 0; i < 2; ++i)
                acc[i] += (static_cast<double>(run.state(k + 1)[i] - run.state(k)[i])
                           - static_cast<double>(run.walk(k + 1)[i] - run.walk(k)[i]) - visit->beta[i])
                          / 20.0;
            ++visit;
        }
    }
}

TEST(Rescale, RemainderShrinksWithResolution) {
    const auto f = FieldSpec::constant({0.5});
    auto mean_sup = [&](long long n) {
        const auto s = setup_1d(n, 1.0);
        double total = 0.0;
        for (std::uint64_t j = 0; j < 400; ++j) {
            const auto p = rescale(run_chain(s, f, j, {.diagnostics = true}), 1.0);
            double m = 0.0;
            for (double e : p.eps) m = std::max(m, std::abs(e));
            total += m;
        }
        return total / 400.0;
    };
    const double coarse = mean_sup(100), fine = mean_sup(10000);
    // The remainder scales like (L-bar / sqrt n)^(1/2), i.e. n^(-1/4).
    EXPECT_LT(fine, coarse);
    EXPECT_LT(fine, 0.6 * coarse);
}

TEST(SkorohodMap, NonnegativeInputUntouched) {
    const std::vector<double> g{0, 0.25, 0.5, 0.75, 1};
    const auto r = skorohod_map(g);
    expect_near_vec(r.reflected, g, 0);
    expect_near_vec(r.regulator, {0, 0, 0, 0, 0}, 0);
}

TEST(SkorohodMap, PureReflection) {
    const std::vector<double> g{0, -0.25, -0.5, -0.75, -1};
    const auto r = skorohod_map(g);
    expect_near_vec(r.reflected, {0, 0, 0, 0, 0}, 0);
    expect_near_vec(r.regulator, {0, 0.25, 0.5, 0.75, 1}, 0);
}

TEST(SkorohodMap, HandEvaluatedGrid) {
    const auto r = skorohod_map(std::vector<double>{0, -1, 0.5, -2});
    expect_near_vec(r.regulator, {0, 1, 1, 2}, 0);
    expect_near_vec(r.reflected, {0, 0, 1.5, 0}, 0);
}

TEST(SkorohodMap, PropertiesOnRandomWalks) {
    std::mt19937_64 g(6);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> path(300);
        path[0] = rep % 3 == 0 ? -0.5 : std::abs(nd(g));
        for (std::size_t k = 1; k < path.size(); ++k) path[k] = path[k - 1] + 0.1 * nd(g);
        const auto r = skorohod_map(path);
        for (std::size_t k = 0; k < path.size(); ++k) {
            EXPECT_GE(r.reflected[k], 0.0);
            EXPECT_NEAR(r.reflected[k], path[k] + r.regulator[k], 1e-12);
            if (k > 0) {
                EXPECT_GE(r.regulator[k], r.regulator[k - 1]);
                // The regulator only grows into points where the reflected path is 0.
                if (r.regulator[k] > r.regulator[k - 1]) {
                    EXPECT_NEAR(r.reflected[k], 0.0, 1e-12);
                }
            }
        }
        EXPECT_NEAR(r.regulator[0], std::max(0.0, -path[0]), 0);
    }
}

TEST(ReflectedPair, NeverHitsZero) {
    const std::vector<double> b(5, 0.0);
    const auto p = reflected_pair(1.0, b);
    expect_near_vec(p.s, std::vector<double>(5, 1.0), 0);
    expect_near_vec(p.v, std::vector<double>(5, 0.0), 0);
    EXPECT_TRUE(is_reflected_pair(1.0, b, p.s, p.v, 1e-12));
}

TEST(ReflectedPair, PinnedAtBoundary) {
    const std::vector<double> b{0, -0.1, -0.2, -0.3};
    const auto p = reflected_pair(0.0, b);
    expect_near_vec(p.s, {0, 0, 0, 0}, 1e-15);
    expect_near_vec(p.v, {0, 0.1, 0.2, 0.3}, 1e-15);
}

TEST(ReflectedPair, HandEvaluatedGrid) {
    const std::vector<double> b{0, -1, -0.5};
    const auto p = reflected_pair(0.5, b);
    expect_near_vec(p.s, {0.5, 0, 0.5}, 1e-15);
    expect_near_vec(p.v, {0, 0.5, 0.5}, 1e-15);
    EXPECT_TRUE(is_reflected_pair(0.5, b, p.s, p.v, 1e-12));
    auto bad = p.v;
    bad[2] += 0.1;
    auto s_bad = p.s;
    s_bad[2] += 0.1;
    EXPECT_FALSE(is_reflected_pair(0.5, b, s_bad, bad, 1e-12));
}

TEST(ReflectedPair, NegativeStartRejected) {
    try {
        (void)reflected_pair(-0.1, std::vector<double>{0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NegativeStart);
    }
}

TEST(TanakaLocalTime, PositivePathHasNone) {
    const auto l = tanaka_local_time(std::vector<double>{0.5, 1.0, 0.2, 3.0});
    for (double v : l) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(TanakaLocalTime, AlternatingSigns) {
    expect_near_vec(tanaka_local_time(std::vector<double>{0.1, -0.1, 0.1}), {0, 0.2, 0.4}, 1e-15);
}

TEST(TanakaLocalTime, MatchesChainLocalTime) {
    ChainSetup s;
    s.dim = 2;
    s.n = 900;
    s.steps = 900;
    s.start = {0, 5};
    s.seed = 12;
    const auto f = FieldSpec::sigmoid_affine({-0.2, 2.0}, {0.7, 1.0}, {2.0});
    for (std::uint64_t j = 0; j < 30; ++j) {
        const auto p = rescale(run_chain(s, f, j), 1.0);
        const auto l = tanaka_local_time(p.coordinate(0));
        expect_near_vec(l, p.l, 1e-12);
    }
}

TEST(OccupationLocalTime, FarFromZero) {
    const auto l = occupation_local_time(std::vector<double>(11, 5.0), 0.1, 1.0);
    for (double v : l) EXPECT_EQ(v, 0.0);
}

TEST(OccupationLocalTime, CountFormula) {
    const auto l = occupation_local_time(std::vector<double>(11, 0.0), 0.1, 1.0);
    EXPECT_NEAR(l.back(), 0.5, 1e-15);
    try {
        (void)occupation_local_time(std::vector<double>(3, 0.0), 0.1, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveEps);
    }
}

TEST(OccupationLocalTime, ApproachesTanakaAsWindowShrinks) {
    const auto s = setup_1d(10000, 1.0);
    const auto f = FieldSpec::constant({1.0});
    const double eps[] = {0.1, 0.05, 0.025};
    double err[3] = {0, 0, 0};
    const int paths = 300;
    for (int j = 0; j < paths; ++j) {
        const auto p = rescale(run_chain(s, f, j), 1.0);
        const auto u = p.coordinate(0);
        const double tanaka = tanaka_local_time(u).back();
        for (int e = 0; e < 3; ++e) err[e] += std::abs(occupation_local_time(u, p.dt(), eps[e]).back() - tanaka);
    }
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
}

TEST(OneSidedLocalTimes, NegativePath) {
    const auto [plus, minus] = one_sided_local_times(std::vector<double>{-0.5, -1.0, -0.2});
    for (double v : plus) EXPECT_NEAR(v, 0.0, 1e-15);
    (void)minus;
}

TEST(OneSidedLocalTimes, AlternatingSigns) {
    const auto [plus, minus] = one_sided_local_times(std::vector<double>{0.1, -0.1, 0.1});
    EXPECT_NEAR(plus[2], 0.2, 1e-15);
    EXPECT_NEAR(minus[2], 0.2, 1e-15);
    EXPECT_NEAR(plus[2] + minus[2], tanaka_local_time(std::vector<double>{0.1, -0.1, 0.1})[2], 1e-15);
}

TEST(OneSidedLocalTimes, ReflectedLatticePath) {
    const auto s = setup_1d(400, 2.0);
    const auto p = rescale(run_chain(s, FieldSpec::constant({1.0}), 9), 2.0);
    const auto [plus, minus] = one_sided_local_times(p.coordinate(0));
    expect_near_vec(plus, p.l, 1e-12);
    for (double v : minus) EXPECT_NEAR(v, 0.0, 1e-12);
}
