// Acceptance run: criteria 1-9 at full size, one PASS/FAIL line each.
// Exit status is 0 only when every criterion passes.

#include "skewsim/skewsim.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#ifndef SKEWSIM_CONFIG_DIR
#define SKEWSIM_CONFIG_DIR "configs"
#endif

using namespace skewsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = true;
    std::string summary;
    std::vector<std::string> failures;

    void absorb(const SuiteReport& r) {
        for (const auto& c : r.criteria) {
            if (c.passed) continue;
            passed = false;
            failures.push_back(r.suite + ": " + c.name + " " + c.metrics.dump());
        }
    }
};

SimConfig sample(const char* name) { return load_config(fs::path(SKEWSIM_CONFIG_DIR) / name); }

ValidatedConfig resized(SimConfig raw, long long n, long long m) {
    raw.resolution_n = n;
    raw.paths_m = m;
    return validate_config(raw).value();
}

double metric(const SuiteReport& r, std::string_view prefix, const char* key) {
    for (const auto& c : r.criteria)
        if (c.name.starts_with(prefix)) return c.metrics.value(key, std::nan(""));
    return std::nan("");
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome pathwise() {
    Outcome o;
    const auto r = suite_pathwise_random(20240601, 1000, 1000, 0);
    o.absorb(r);
    o.summary = "1000 runs, d in {1,2,3}, n=1000";
    return o;
}

Outcome one_step() {
    Outcome o;
    const auto r = suite_one_step(20240602, 100);
    o.absorb(r);
    o.summary = "100 random states and fields";
    return o;
}

// Criteria 3 and 4 share their runs: the skew-law suite reports both.
std::vector<SuiteReport> skew_law_reports;

void run_skew_law() {
    if (!skew_law_reports.empty()) return;
    for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        SimConfig raw = sample("skew_half.json");
        raw.field = FieldSpec::constant({b});
        skew_law_reports.push_back(suite_skew_law(resized(raw, 10000, 100000)));
    }
}

Outcome law_vs_oracle() {
    run_skew_law();
    Outcome o;
    double worst = 0.0, band = 0.0;
    for (const auto& r : skew_law_reports) {
        for (const auto& c : r.criteria) {
            if (!c.name.starts_with("KS(Monte Carlo")) continue;
            worst = std::max(worst, c.metrics.value("ks", 0.0));
            band = c.metrics.value("dkw_band", 0.0);
            if (!c.passed) {
                o.passed = false;
                o.failures.push_back(c.name + " " + c.metrics.dump());
            }
        }
    }
    o.summary = "b1 in {-1,-0.5,0,0.5,1}, n=1e4, m=1e5, max KS " + fmt("%.5f", worst) + " <= " + fmt("%.5f", band);
    return o;
}

Outcome skew_limit() {
    run_skew_law();
    Outcome o;
    double worst_sup = 0.0, worst_ratio = 0.0;
    for (const auto& r : skew_law_reports) {
        for (const auto& c : r.criteria) {
            if (c.name.starts_with("KS(Monte Carlo")) continue;
            if (c.name.starts_with("sup|")) worst_sup = std::max(worst_sup, c.metrics.value("sup_distance", 0.0));
            if (c.name.starts_with("p+/"))
                worst_ratio = std::max(worst_ratio, std::abs(c.metrics.value("positive_fraction", 0.0)
                                                             - c.metrics.value("target", 0.0)));
            if (!c.passed) {
                o.passed = false;
                o.failures.push_back(c.name + " " + c.metrics.dump());
            }
        }
    }
    o.summary = "max sup " + fmt("%.5f", worst_sup) + " <= 0.01, max |ratio - alpha| " + fmt("%.5f", worst_ratio)
                + " <= 0.005";
    return o;
}

Outcome reflection() {
    Outcome o;
    const auto r = suite_reflection(validate_config(sample("reflection.json")).value());
    o.absorb(r);
    o.summary = "n=1e4, m=1e5, E L(1) rel. error " + fmt("%.5f", metric(r, "E L(1) within", "relative_error"));
    return o;
}

Outcome girsanov() {
    Outcome o;
    const auto r = suite_girsanov(validate_config(sample("girsanov.json")).value());
    o.absorb(r);
    o.summary = "n=1e4, m=1e5, ESS " + fmt("%.0f", r.info.value("girsanov_ess", 0.0));
    return o;
}

Outcome uniqueness() {
    Outcome o;
    SuiteOptions opt;
    opt.coarse_n = 1000;
    opt.oracle_n = 256;
    const auto r = suite_uniqueness(validate_config(sample("planar_sigmoid.json")).value(), opt);
    o.absorb(r);
    double worst = 0.0;
    for (const auto& c : r.criteria)
        if (c.name.find("n=1000, n=10000") != std::string::npos)
            worst = std::max(worst, c.metrics.value("ks", 0.0));
    o.summary = "n=1e3 vs 1e4 and DP at n=256, m=1e5, max two-sample KS " + fmt("%.5f", worst);
    return o;
}

Outcome collisions() {
    Outcome o;
    const auto r = suite_collisions(resized(sample("collisions_elastic.json"), 10000, 100000));
    o.absorb(r);
    o.summary = "frictionless, perfect reflection, state-dependent; n=1e4, m=1e5";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Writes the same manifest the CLI's verify command writes.
std::string verify_manifest(const std::string& suite, const ValidatedConfig& cfg, unsigned threads,
                            const fs::path& dir) {
    SuiteOptions opt;
    opt.threads = threads;
    opt.pathwise_runs = 20;
    opt.one_step_cases = 20;
    opt.oracle_n = 64;
    RunManifest m;
    m.command = "verify";
    m.config = to_json(cfg.raw());
    m.seed = cfg.seed();
    const auto report = run_suite(suite, cfg, opt);
    m.results = report.to_json();
    m.passed = report.passed();
    m.write(dir);
    return slurp(dir / "manifest.json");
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("skewsim_acceptance_" + std::to_string(::getpid()));
    const std::vector<std::pair<std::string, ValidatedConfig>> runs = {
        {"pathwise", resized(sample("quick_paths.json"), 200, 4)},
        {"one-step", resized(sample("skew_half.json"), 100, 10)},
        {"skew-law", resized(sample("skew_half.json"), 400, 5000)},
        {"reflection", resized(sample("reflection.json"), 100, 5000)},
        {"girsanov", resized(sample("girsanov.json"), 400, 5000)},
        {"collisions", resized(sample("collisions_elastic.json"), 100, 2000)},
        {"uniqueness-consistency", resized(sample("planar_sigmoid.json"), 400, 5000)},
    };
    for (const auto& [suite, cfg] : runs) {
        const auto a = verify_manifest(suite, cfg, 1, root / suite / "t1");
        const auto b = verify_manifest(suite, cfg, 3, root / suite / "t3");
        if (a.empty() || a != b) {
            o.passed = false;
            o.failures.push_back(suite + ": manifests differ between 1 and 3 threads");
        }
    }
    fs::remove_all(root);
    o.summary = "7 suites, manifests byte-identical at 1 and 3 threads";
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;  // 0 when no runtime is stated
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "pathwise identities", 60, pathwise},
        {2, "one-step law", 60, one_step},
        {3, "sampling vs exact law", 300, law_vs_oracle},
        {4, "skew BM limit law", 0, skew_limit},
        {5, "reflected local time", 0, reflection},
        {6, "Girsanov reweighting", 120, girsanov},
        {7, "uniqueness consistency", 900, uniqueness},
        {8, "collisions", 300, collisions},
        {9, "determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.passed = false;
            o.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && secs > c.limit_seconds) {
            o.passed = false;
            o.failures.push_back("runtime " + fmt("%.1f", secs) + " s exceeds " + fmt("%.0f", c.limit_seconds) + " s");
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.title << "): " << o.summary
                  << "  [" << fmt("%.1f", secs) << " s]" << std::endl;
        for (const auto& f : o.failures) std::cout << "      " << f << '\n';
        failed += !o.passed;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << (9 - failed) << "/9\n";
    return failed ? 1 : 0;
}
