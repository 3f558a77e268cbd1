// skewsim command-line front end.
//
//   skewsim simulate|particles|verify|convergence|oracle --config <file> [--out <dir>] [--threads N]
//
// Exit status: 0 when every assertion of the command holds, 1 when one
// fails, 2 on configuration or I/O errors.

#include "skewsim/skewsim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace skewsim;

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    unsigned threads = 0;
};

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ValidatedConfig load(const CommonArgs& a) {
    SimConfig raw = load_config(a.config);
    if (!a.out.empty()) raw.output.dir = a.out;
    return validate_config(raw).value();
}

json coordinate_stats(const std::vector<double>& v) {
    const auto est = sample_mean(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {{"mean", est.mean}, {"variance", est.variance}, {"std_error", est.std_error}, {"min", *lo}, {"max", *hi}};
}

std::string path_file(const char* prefix, std::int64_t j) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s_%06lld.csv", prefix, static_cast<long long>(j));
    return buf;
}

// The echo is the config file as given, so --out does not leak into it.
RunManifest start_manifest(const char* command, const CommonArgs& a, const ValidatedConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.config = to_json(load_config(a.config));
    m.seed = cfg.seed();
    return m;
}

int finish(RunManifest& m, const ValidatedConfig& cfg, const Stopwatch& clock) {
    m.timings["total_seconds"] = clock.seconds();
    m.write(cfg.raw().output.dir);
    std::cout << (m.passed ? "PASS" : "FAIL") << "  " << m.command << "  -> " << cfg.raw().output.dir
              << "/manifest.json\n";
    return m.passed ? 0 : 1;
}

int cmd_simulate(const CommonArgs& a) {
    Stopwatch clock;
    const auto cfg = load(a);
    const fs::path dir = cfg.raw().output.dir;
    ensure_directory(dir);
    auto m = start_manifest("simulate", a, cfg);

    const auto samples = run_terminal(cfg, a.threads);
    m.timings["ensemble_seconds"] = clock.seconds();

    json summary;
    summary["paths"] = cfg.paths();
    summary["resolution_n"] = cfg.n();
    summary["steps"] = cfg.steps();
    json terminal = json::array();
    for (std::size_t i = 0; i < cfg.dimension(); ++i) terminal.push_back(coordinate_stats(terminal_coordinate(samples, i)));
    summary["terminal"] = terminal;
    std::vector<double> lt(samples.size()), w(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        lt[j] = samples[j].local_time;
        w[j] = samples[j].weight;
    }
    const auto l = sample_mean(lt);
    summary["mean_local_time"] = {{"estimate", l.mean}, {"std_error", l.std_error}};
    summary["girsanov_ess"] = detail::effective_sample_size(w);
    if (!cfg.drift().is_zero() && detail::effective_sample_size(w) >= 10.0) {
        json weighted = json::array();
        for (std::size_t i = 0; i < cfg.dimension(); ++i) {
            const auto est = weighted_expectation(w, terminal_coordinate(samples, i));
            weighted.push_back({{"estimate", est.estimate}, {"std_error", est.std_error}});
        }
        summary["weighted_terminal_mean"] = weighted;
        const auto lw = weighted_expectation(w, lt);
        summary["weighted_mean_local_time"] = {{"estimate", lw.estimate}, {"std_error", lw.std_error}};
    }

    if (cfg.raw().output.emit_paths) {
        ensure_directory(dir / "paths");
        for (std::int64_t j = 0; j < cfg.paths(); ++j) {
            const auto run = run_chain(cfg, static_cast<std::uint64_t>(j));
            const auto name = "paths/" + path_file("path", j);
            write_path_csv(dir / name, rescale(run, cfg.horizon()));
            m.files.push_back(name);
        }
    }
    if (cfg.raw().output.emit_summary) {
        write_json(dir / "summary.json", summary);
        m.files.emplace_back("summary.json");
    }
    m.results = summary;
    return finish(m, cfg, clock);
}

int cmd_particles(const CommonArgs& a) {
    Stopwatch clock;
    const auto cfg = load(a);
    if (!cfg.raw().collision) throw Error(ErrorCode::BadValue, "particles needs a 'collision' section");
    const fs::path dir = cfg.raw().output.dir;
    ensure_directory(dir);
    auto m = start_manifest("particles", a, cfg);

    const CollisionModel model(*cfg.raw().collision);
    const auto ens = simulate_particles(model, cfg, a.threads);
    m.timings["ensemble_seconds"] = clock.seconds();

    double max_push = 0.0, min_gap = std::numeric_limits<double>::infinity(), split = 0.0;
    bool follows = true, sign_constant = true;
    std::vector<double> l, lp, lm;
    for (const auto& p : ens.paths) {
        max_push = std::max(max_push, p.max_push);
        min_gap = std::min(min_gap, p.min_gap);
        split = std::max(split, p.split_error);
        follows = follows && p.x2_follows_drive;
        sign_constant = sign_constant && p.gap_sign_constant;
        l.push_back(p.l);
        lp.push_back(p.l_plus);
        lm.push_back(p.l_minus);
    }
    json summary;
    summary["paths"] = cfg.paths();
    summary["resolution_n"] = cfg.n();
    summary["steps"] = cfg.steps();
    summary["x1"] = coordinate_stats(ens.terminal_x1());
    summary["x2"] = coordinate_stats(ens.terminal_x2());
    summary["mean_local_time"] = sample_mean(l).mean;
    summary["mean_local_time_plus"] = sample_mean(lp).mean;
    summary["mean_local_time_minus"] = sample_mean(lm).mean;
    summary["max_local_time_contribution"] = max_push;
    summary["min_gap"] = min_gap;
    summary["min_gap_nonnegative"] = min_gap >= 0.0;
    summary["gap_sign_constant"] = sign_constant;
    summary["x2_follows_driving_noise"] = follows;
    summary["split_error"] = split;
    const auto w = ens.weights();
    summary["girsanov_ess"] = detail::effective_sample_size(w);
    if (model.has_drift() && detail::effective_sample_size(w) >= 10.0) {
        const auto e1 = weighted_expectation(w, ens.terminal_x1());
        const auto e2 = weighted_expectation(w, ens.terminal_x2());
        summary["weighted_terminal_mean"] = {{{"estimate", e1.estimate}, {"std_error", e1.std_error}},
                                             {{"estimate", e2.estimate}, {"std_error", e2.std_error}}};
    }
    m.passed = split < 1e-10;

    if (cfg.raw().output.emit_paths) {
        ensure_directory(dir / "particles");
        for (std::int64_t j = 0; j < cfg.paths(); ++j) {
            const auto name = "particles/" + path_file("path", j);
            write_particle_csv(dir / name, simulate_particle_path(model, cfg, static_cast<std::uint64_t>(j)));
            m.files.push_back(name);
        }
    }
    if (cfg.raw().output.emit_summary) {
        write_json(dir / "summary.json", summary);
        m.files.emplace_back("summary.json");
    }
    m.results = summary;
    return finish(m, cfg, clock);
}

int cmd_verify(const CommonArgs& a, const std::string& suite) {
    Stopwatch clock;
    const auto cfg = load(a);
    auto m = start_manifest("verify", a, cfg);
    SuiteOptions opt;
    opt.threads = a.threads;
    const SuiteReport report = run_suite(suite, cfg, opt);
    for (const auto& c : report.criteria) std::cout << (c.passed ? "  pass  " : "  FAIL  ") << c.name << '\n';
    m.results = report.to_json();
    m.passed = report.passed();
    return finish(m, cfg, clock);
}

int cmd_convergence(const CommonArgs& a, const std::vector<long long>& n_list) {
    Stopwatch clock;
    const auto cfg = load(a);
    const fs::path dir = cfg.raw().output.dir;
    ensure_directory(dir);
    auto m = start_manifest("convergence", a, cfg);
    const auto table = run_convergence(cfg, n_list.empty() ? std::vector<long long>{cfg.n()} : n_list, a.threads);

    const std::vector<std::string> names{"n", "paths", "ks_previous", "ks_reference", "ks_reference_lattice",
                                         "dkw_band"};
    std::vector<std::vector<double>> rows;
    for (const auto& r : table.rows)
        rows.push_back({static_cast<double>(r.n), static_cast<double>(r.paths), r.ks_previous, r.ks_reference,
                        r.ks_reference_lattice, r.dkw_band});
    write_table_csv(dir / "convergence.csv", names, rows);
    m.files.emplace_back("convergence.csv");
    m.results = table.to_json();
    m.passed = table.monotone_trend.value_or(true);
    return finish(m, cfg, clock);
}

int cmd_oracle(const CommonArgs& a, std::int64_t steps) {
    Stopwatch clock;
    const auto cfg = load(a);
    const fs::path dir = cfg.raw().output.dir;
    ensure_directory(dir);
    auto m = start_manifest("oracle", a, cfg);
    const std::int64_t k = steps >= 0 ? steps : cfg.steps();
    const LatticeLaw law = exact_chain_law(cfg, k);
    write_law_csv(dir / "law.csv", law);
    m.files.emplace_back("law.csv");

    json summary;
    summary["steps"] = k;
    summary["resolution_n"] = cfg.n();
    summary["support_size"] = law.size();
    summary["total_mass"] = law.total_mass();
    const auto sp = sign_probability(law);
    summary["sign_probability"] = {{"minus", sp.minus}, {"zero", sp.zero}, {"plus", sp.plus}};
    json marg = json::array();
    for (std::size_t i = 0; i < law.dim; ++i) {
        const auto d = marginal(law, i);
        double mean = 0.0, second = 0.0;
        for (std::size_t j = 0; j < d.atoms.size(); ++j) {
            mean += d.mass(j) * d.atoms[j];
            second += d.mass(j) * d.atoms[j] * d.atoms[j];
        }
        marg.push_back({{"mean", mean}, {"variance", second - mean * mean}});
    }
    summary["marginals"] = marg;
    m.results = summary;
    m.passed = std::abs(law.total_mass() - 1.0) <= 1e-10;
    return finish(m, cfg, clock);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skew random walk simulator for SDEs with local time"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(SKEWSIM_VERSION));

    CommonArgs args;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides output.dir)");
        sub->add_option("--threads", args.threads, "worker threads, 0 = all cores")->capture_default_str();
    };

    auto* simulate = app.add_subcommand("simulate", "simulate paths and summarize the terminal law");
    common(simulate);
    auto* particles = app.add_subcommand("particles", "simulate the two-particle collision model");
    common(particles);
    std::string suite;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    common(verify);
    std::string suite_help = "one of:";
    for (auto s : kSuiteNames) suite_help += " " + std::string(s);
    verify->add_option("--suite", suite, suite_help)->required();
    std::vector<long long> n_list;
    auto* convergence = app.add_subcommand("convergence", "terminal law distances across resolutions");
    common(convergence);
    convergence->add_option("--n-list", n_list, "resolutions, comma separated")->delimiter(',');
    std::int64_t steps = -1;
    auto* oracle = app.add_subcommand("oracle", "exact lattice law by dynamic programming (d <= 2)");
    common(oracle);
    oracle->add_option("--steps", steps, "number of steps (default ceil(nT))");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every usage error is a configuration error.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(args);
        if (*particles) return cmd_particles(args);
        if (*verify) return cmd_verify(args, suite);
        if (*convergence) return cmd_convergence(args, n_list);
        if (*oracle) return cmd_oracle(args, steps);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
